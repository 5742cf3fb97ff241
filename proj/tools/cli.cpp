#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "cwseg/clockwork.hpp"
#include "cwseg/error.hpp"
#include "cwseg/fcn_net.hpp"
#include "cwseg/media_io.hpp"
#include "cwseg/metrics.hpp"
#include "cwseg/random.hpp"
#include "cwseg/synth.hpp"

namespace cwseg::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ScheduleFlags {
  std::string schedule = "adaptive";
  std::size_t period2 = 2;
  std::size_t period3 = 4;
  double theta = 0.01;
  std::string skip_policy = "fuse-cached-deep";

  void attach(CLI::App& cmd) {
    cmd.add_option("--schedule", schedule, "Clock schedule")
        ->check(CLI::IsMember({"always", "fixed", "adaptive"}))
        ->capture_default_str();
    cmd.add_option("--period2", period2, "Fixed schedule: stage-2 period")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd.add_option("--period3", period3, "Fixed schedule: stage-3 period")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd.add_option("--theta", theta, "Adaptive schedule: stage-3 fires when change > theta")
        ->capture_default_str();
    cmd.add_option("--skip-policy", skip_policy, "Output when stage 3 is skipped")
        ->check(CLI::IsMember({"reuse-final", "fuse-cached-deep"}))
        ->capture_default_str();
  }

  ClockSchedule clock() const {
    if (schedule == "always") return AlwaysClock{};
    if (schedule == "fixed") return FixedClock{period2, period3};
    return AdaptiveClock{theta};
  }
  SkipPolicy policy() const { return parse_skip_policy(skip_policy); }
};

std::vector<Tensor> load_frames(const SequenceManifest& manifest) {
  if (manifest.frames.empty()) throw ContractError("manifest lists no frames");
  std::vector<Tensor> frames;
  frames.reserve(manifest.frames.size());
  for (const auto& p : manifest.frames) frames.push_back(read_image(p));
  return frames;
}

Palette pick_palette(const std::string& flag, const SequenceManifest& manifest) {
  if (!flag.empty()) return Palette::parse(flag);
  if (manifest.palette) return *manifest.palette;
  return Palette::road_default();
}

json fired_json(const FiredStages& fired) {
  json a = json::array();
  for (int s = 1; s <= static_cast<int>(kNumStages); ++s) {
    if (fired.contains(static_cast<StageId>(s))) a.push_back(s);
  }
  return a;
}

json trace_json(const StageTrace& t) {
  json j;
  j["frame"] = t.frame_index;
  j["fired"] = fired_json(t.fired);
  j["change"] = t.change ? json(*t.change) : json(nullptr);
  j["elapsed_us"] = {{"stage1", t.elapsed_us[0]},
                     {"stage2", t.elapsed_us[1]},
                     {"stage3", t.elapsed_us[2]},
                     {"fuse", t.elapsed_us[3]}};
  j["macs"] = {{"stage1", t.work[0].macs}, {"stage2", t.work[1].macs}, {"stage3", t.work[2].macs}};
  j["convs"] = {{"stage1", t.work[0].conv_calls},
                {"stage2", t.work[1].conv_calls},
                {"stage3", t.work[2].conv_calls}};
  return j;
}

json summary_json(const WorkSummary& s) {
  json j;
  j["firings"] = {{"stage1", s.firings[0]}, {"stage2", s.firings[1]}, {"stage3", s.firings[2]}};
  j["macs"] = {{"stage1", s.work[0].macs},
               {"stage2", s.work[1].macs},
               {"stage3", s.work[2].macs},
               {"total", s.total_macs()}};
  j["elapsed_us"] = {{"stage1", s.elapsed_us[0]},
                     {"stage2", s.elapsed_us[1]},
                     {"stage3", s.elapsed_us[2]},
                     {"fuse", s.elapsed_us[3]},
                     {"total", s.total_elapsed_us()}};
  return j;
}

void emit(const json& report, const std::string& out_path, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (!out_path.empty()) {
    write_file(out_path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }
  out << text;
}

// ---- segment ----------------------------------------------------------------

struct SegmentArgs {
  std::string manifest;
  std::string weights;
  ScheduleFlags sched;
  std::string out_dir;
  std::string trace;
  std::string palette;
  bool write_scores = false;
  std::size_t positive_class = 1;
};

int cmd_segment(const SegmentArgs& a, std::ostream& out) {
  const SequenceManifest manifest = read_manifest(a.manifest);
  const WeightStore weights = read_weights(a.weights);
  const StagedNet net = build_net(infer_config(weights), weights);
  const Palette palette = pick_palette(a.palette, manifest);
  const std::vector<Tensor> frames = load_frames(manifest);

  const SequenceResult result =
      run_sequence(net, a.sched.clock(), a.sched.policy(), frames, a.write_scores);

  fs::create_directories(a.out_dir);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    write_mask(result.masks[i], palette, mask_path_for(a.out_dir, manifest.frames[i]));
    if (a.write_scores) {
      const Tensor& s = result.final_scores[i];
      const auto prob = class_probability(s, a.positive_class);
      write_file(score_path_for(a.out_dir, manifest.frames[i]),
                 encode_pfm(prob, s.height(), s.width()));
    }
  }

  std::ostringstream trace;
  for (const StageTrace& t : result.traces) trace << trace_json(t).dump() << "\n";
  const std::string trace_text = trace.str();
  const fs::path trace_path = a.trace.empty() ? fs::path(a.out_dir) / "trace.jsonl" : fs::path(a.trace);
  write_file(trace_path,
             std::span(reinterpret_cast<const std::uint8_t*>(trace_text.data()), trace_text.size()));

  json report;
  report["command"] = "segment";
  report["schedule"] = describe(a.sched.clock());
  report["skip_policy"] = to_string(a.sched.policy());
  report["frames"] = frames.size();
  report["trace"] = trace_path.string();
  report["summary"] = summary_json(summarize(result.traces));
  out << report.dump(2) << "\n";
  return kOk;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string pred_dir;
  std::string manifest;
  std::size_t positive_class = 1;
  std::string scores_dir;
  std::string palette;
  std::size_t classes = 0;
  std::string out;
  std::string format = "json";
};

std::size_t eval_threads(std::size_t frames) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CWSEG_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v < 1) throw std::invalid_argument("nonpositive");
      n = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw ParamError(std::string("CWSEG_THREADS must be a positive integer, got \"") + env + "\"");
    }
  }
  return std::clamp<std::size_t>(n, 1, std::max<std::size_t>(1, frames));
}

struct Shard {
  std::optional<ConfusionMatrix> cm;
  ScoredPixels scored;
  std::exception_ptr error;
};

json optional_json(bool defined, double v) { return defined ? json(v) : json(nullptr); }

std::string percent(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * v;
  return os.str();
}

std::string table_text(const MetricsReport& r) {
  std::ostringstream os;
  os << "acc (%)  cl_acc (%)  mIU (%)  fwIU (%)\n"
     << percent(r.acc) << "  " << percent(r.cl_acc) << "  " << percent(r.miu) << "  "
     << percent(r.fwiu) << "\n\n"
     << "F1-score  Avr Precision (%)  Precision (%)  Recall (%)  False Positive (%)  "
        "False Negative (%)\n"
     << percent(r.binary.f1) << "  "
     << (r.average_precision ? percent(*r.average_precision) : std::string("n/a")) << "  "
     << percent(r.binary.precision) << "  " << percent(r.binary.recall) << "  "
     << percent(r.binary.fpr) << "  " << percent(r.binary.fnr) << "\n";
  return os.str();
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const SequenceManifest manifest = read_manifest(a.manifest);
  if (!manifest.has_ground_truth()) {
    throw ContractError("manifest " + a.manifest + " has no ground-truth column");
  }
  if (manifest.frames.empty()) throw ContractError("manifest lists no frames");
  const Palette palette = pick_palette(a.palette, manifest);
  std::size_t classes = a.classes;
  if (classes == 0) {
    for (const auto& e : palette.entries()) classes = std::max<std::size_t>(classes, e.label + 1);
    classes = std::max<std::size_t>(classes, 2);
  }
  if (a.positive_class >= classes) {
    throw ParamError("positive class " + std::to_string(a.positive_class) + " outside [0, " +
                     std::to_string(classes) + ")");
  }

  const std::size_t n = manifest.frames.size();
  const std::size_t workers = eval_threads(n);
  std::vector<Shard> shards(workers);

  auto work = [&](std::size_t w) {
    Shard& shard = shards[w];
    try {
      shard.cm.emplace(classes);
      const std::size_t begin = n * w / workers;
      const std::size_t end = n * (w + 1) / workers;
      for (std::size_t i = begin; i < end; ++i) {
        const fs::path& frame = manifest.frames[i];
        const fs::path pred_path = mask_path_for(a.pred_dir, frame);
        if (!fs::exists(pred_path)) {
          throw IoError("no prediction for frame " + frame.string() + " (expected " +
                        pred_path.string() + ")");
        }
        const LabelMask truth = read_mask(manifest.ground_truth[i], palette);
        const LabelMask pred = read_mask(pred_path, palette);
        try {
          shard.cm->accumulate(truth, pred);
        } catch (const Error& e) {
          throw ShapeError("frame " + frame.string() + ": " + e.what());
        }

        std::vector<float> scores;
        if (!a.scores_dir.empty()) {
          const fs::path sp = score_path_for(a.scores_dir, frame);
          if (!fs::exists(sp)) {
            throw IoError("no score map for frame " + frame.string() + " (expected " + sp.string() + ")");
          }
          const Tensor s = decode_pfm(read_file(sp));
          if (s.height() != truth.height || s.width() != truth.width) {
            throw ShapeError("score map " + sp.string() + " is " + s.shape_string() +
                             ", ground truth is " + std::to_string(truth.height) + "x" +
                             std::to_string(truth.width));
          }
          scores.assign(s.data().begin(), s.data().end());
        } else {
          scores.resize(pred.size());
          for (std::size_t p = 0; p < pred.size(); ++p) {
            scores[p] = pred.labels[p] == a.positive_class ? 1.0f : 0.0f;
          }
        }
        shard.scored.scores.insert(shard.scored.scores.end(), scores.begin(), scores.end());
        for (std::uint32_t label : truth.labels) {
          shard.scored.is_positive.push_back(label == a.positive_class);
        }
      }
    } catch (...) {
      shard.error = std::current_exception();
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  ConfusionMatrix cm(classes);
  ScoredPixels scored;
  for (Shard& s : shards) {
    if (s.error) std::rethrow_exception(s.error);
    cm.merge(*s.cm);
    scored.scores.insert(scored.scores.end(), s.scored.scores.begin(), s.scored.scores.end());
    scored.is_positive.insert(scored.is_positive.end(), s.scored.is_positive.begin(),
                              s.scored.is_positive.end());
  }

  const MetricsReport r = build_report(cm, &scored, a.positive_class);
  const BinaryStats& b = r.binary;

  json report;
  report["acc"] = r.acc;
  report["cl_acc"] = r.cl_acc;
  report["miu"] = r.miu;
  report["fwiu"] = r.fwiu;
  json iu = json::array();
  for (const auto& v : r.per_class_iu) iu.push_back(v ? json(*v) : json(nullptr));
  report["per_class_iu"] = iu;
  report["precision"] = optional_json(b.precision_defined, b.precision);
  report["recall"] = optional_json(b.recall_defined, b.recall);
  report["f1"] = optional_json(b.f1_defined, b.f1);
  report["fpr"] = optional_json(b.fpr_defined, b.fpr);
  report["fnr"] = optional_json(b.fnr_defined, b.fnr);
  report["avg_precision"] = r.average_precision ? json(*r.average_precision) : json(nullptr);
  report["avg_precision_source"] = a.scores_dir.empty() ? "mask" : "scores";
  report["positive_class"] = a.positive_class;
  report["num_classes"] = classes;
  report["frames"] = n;
  report["pixels"] = cm.total();
  report["counts"] = {{"tp", b.tp}, {"fp", b.fp}, {"fn", b.fn}, {"tn", b.tn}};

  if (a.format == "table") {
    if (!a.out.empty()) {
      const std::string text = report.dump(2) + "\n";
      write_file(a.out, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    }
    out << table_text(r);
  } else {
    emit(report, a.out, out);
  }
  return kOk;
}

// ---- bench ------------------------------------------------------------------

struct BenchArgs {
  std::string manifest;
  std::string weights;
  ScheduleFlags sched;
  std::size_t repeat = 3;
  std::string out;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const SequenceManifest manifest = read_manifest(a.manifest);
  const WeightStore weights = read_weights(a.weights);
  const StagedNet net = build_net(infer_config(weights), weights);
  const std::vector<Tensor> frames = load_frames(manifest);

  auto timed = [&](const ClockSchedule& schedule) {
    const auto t0 = std::chrono::steady_clock::now();
    SequenceResult r = run_sequence(net, schedule, a.sched.policy(), frames);
    const double us =
        std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
    return std::pair{std::move(r), us};
  };

  double full_best = 0.0;
  double clock_best = 0.0;
  WorkSummary full_summary;
  WorkSummary clock_summary;
  std::vector<LabelMask> full_masks;
  std::vector<LabelMask> clock_masks;
  for (std::size_t rep = 0; rep < a.repeat; ++rep) {
    auto [full, full_us] = timed(AlwaysClock{});
    auto [clock, clock_us] = timed(a.sched.clock());
    if (rep == 0 || full_us < full_best) {
      full_best = full_us;
      full_summary = summarize(full.traces);
    }
    if (rep == 0 || clock_us < clock_best) {
      clock_best = clock_us;
      clock_summary = summarize(clock.traces);
    }
    if (rep == 0) {
      full_masks = std::move(full.masks);
      clock_masks = std::move(clock.masks);
    }
  }

  std::size_t identical = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) identical += full_masks[i] == clock_masks[i];

  const double work_ratio = static_cast<double>(clock_summary.total_macs()) /
                            static_cast<double>(full_summary.total_macs());
  const double wall_ratio = clock_best / full_best;

  json report;
  report["command"] = "bench";
  report["frames"] = frames.size();
  report["repeat"] = a.repeat;
  report["schedule"] = describe(a.sched.clock());
  report["skip_policy"] = to_string(a.sched.policy());
  report["full"] = summary_json(full_summary);
  report["full"]["wall_us"] = full_best;
  report["clockwork"] = summary_json(clock_summary);
  report["clockwork"]["wall_us"] = clock_best;
  report["stage3_firings"] = clock_summary.firings[2];
  report["work_ratio"] = work_ratio;
  report["wall_ratio"] = wall_ratio;
  report["speedup_work"] = 1.0 / work_ratio;
  report["speedup_wall"] = 1.0 / wall_ratio;
  report["masks_identical_to_full"] = identical;
  emit(report, a.out, out);
  return kOk;
}

// ---- gen-weights / gen-sequence ---------------------------------------------

struct GenWeightsArgs {
  std::uint64_t seed = 42;
  NetConfig cfg;
  std::string out;
};

int cmd_gen_weights(const GenWeightsArgs& a, std::ostream& out) {
  const WeightStore store = gen_weights(a.cfg, a.seed);
  write_weights(store, a.out);
  std::size_t params = 0;
  for (const auto& [name, e] : store) params += e.payload.size();
  json report;
  report["command"] = "gen-weights";
  report["out"] = a.out;
  report["seed"] = a.seed;
  report["entries"] = store.size();
  report["parameters"] = params;
  out << report.dump(2) << "\n";
  return kOk;
}

struct GenSequenceArgs {
  std::string out_dir;
  std::string kind = "static";
  std::size_t scenes = 4;
  std::size_t frames_per_scene = 8;
  std::size_t frames = 16;
  std::size_t step = 1;
  std::size_t channels = 3;
  std::size_t height = 64;
  std::size_t width = 64;
  std::uint64_t seed = 7;
  std::string truth_weights;
  std::string palette;
};

int cmd_gen_sequence(const GenSequenceArgs& a, std::ostream& out) {
  std::vector<Tensor> frames;
  if (a.kind == "static") {
    frames = synth::static_scenes(a.scenes, a.frames_per_scene, a.channels, a.height, a.width, a.seed);
  } else if (a.kind == "pan") {
    frames = synth::panning_sequence(a.frames, a.step, a.channels, a.height, a.width, a.seed);
  } else {
    SplitMix64 seeds(a.seed);
    for (std::size_t i = 0; i < a.frames; ++i) {
      frames.push_back(synth::noise_frame(a.channels, a.height, a.width, seeds.next()));
    }
  }
  fs::create_directories(a.out_dir);
  const std::string ext = a.channels == 1 ? ".pgm" : ".ppm";

  SequenceManifest manifest;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    std::ostringstream name;
    name << "frame_" << std::setw(4) << std::setfill('0') << i << ext;
    write_image(frames[i], fs::path(a.out_dir) / name.str());
    manifest.frames.push_back(name.str());
  }

  if (!a.truth_weights.empty()) {
    const Palette palette = a.palette.empty() ? Palette::road_default() : Palette::parse(a.palette);
    const WeightStore weights = read_weights(a.truth_weights);
    const StagedNet net = build_net(infer_config(weights), weights);
    fs::create_directories(fs::path(a.out_dir) / "gt");
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const fs::path rel = fs::path("gt") / (manifest.frames[i].stem().string() + "_gt.ppm");
      write_mask(argmax_mask(full_forward(net, frames[i]).final_scores), palette,
                 fs::path(a.out_dir) / rel);
      manifest.ground_truth.push_back(rel);
    }
    manifest.palette = palette;
  }
  const fs::path manifest_path = fs::path(a.out_dir) / "manifest.txt";
  write_manifest(manifest, manifest_path);

  json report;
  report["command"] = "gen-sequence";
  report["frames"] = frames.size();
  report["manifest"] = manifest_path.string();
  out << report.dump(2) << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Clockwork FCN video segmentation"};
  app.name("cwseg");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  SegmentArgs seg;
  auto* segment = app.add_subcommand("segment", "Segment a frame sequence under a clock schedule");
  segment->add_option("--manifest", seg.manifest, "Sequence manifest")->required();
  segment->add_option("--weights", seg.weights, "Weight file (CWFCN1)")->required();
  seg.sched.attach(*segment);
  segment->add_option("--out", seg.out_dir, "Output directory for masks and trace")->required();
  segment->add_option("--trace", seg.trace, "Trace file (default <out>/trace.jsonl)");
  segment->add_option("--palette", seg.palette, "Class palette, e.g. \"0,0,0 255,0,255\"");
  segment->add_flag("--write-scores", seg.write_scores,
                    "Also write positive-class probability maps (PFM)");
  segment->add_option("--positive-class", seg.positive_class, "Class for --write-scores")
      ->capture_default_str();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score predicted masks against ground truth");
  eval->add_option("--pred-dir", ev.pred_dir, "Directory of predicted masks")->required();
  eval->add_option("--manifest", ev.manifest, "Manifest with ground-truth column")->required();
  eval->add_option("--positive-class", ev.positive_class, "Class for binary statistics")
      ->capture_default_str();
  eval->add_option("--scores-dir", ev.scores_dir, "Directory of PFM probability maps for AP");
  eval->add_option("--palette", ev.palette, "Class palette (overrides the manifest)");
  eval->add_option("--classes", ev.classes, "Number of classes (default: from palette)");
  eval->add_option("--out", ev.out, "Also write the JSON report here");
  eval->add_option("--format", ev.format, "stdout format")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();

  BenchArgs bn;
  auto* bench = app.add_subcommand("bench", "Time full inference against a clock schedule");
  bench->add_option("--manifest", bn.manifest, "Sequence manifest")->required();
  bench->add_option("--weights", bn.weights, "Weight file (CWFCN1)")->required();
  bn.sched.attach(*bench);
  bench->add_option("--repeat", bn.repeat, "Repetitions (minimum wall time is kept)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--out", bn.out, "Also write the JSON report here");

  GenWeightsArgs gw;
  auto* genw = app.add_subcommand("gen-weights", "Generate deterministic pseudorandom weights");
  genw->add_option("--seed", gw.seed, "Generator seed")->capture_default_str();
  genw->add_option("--base-width", gw.cfg.base_width, "Channels of the first block")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  genw->add_option("--classes", gw.cfg.num_classes, "Number of classes")
      ->check(CLI::Range(2, 1 << 16))
      ->capture_default_str();
  genw->add_option("--fc-width", gw.cfg.fc_width, "Width of fc6/fc7")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  genw->add_option("--in-channels", gw.cfg.in_channels, "Input channels")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  genw->add_option("--out", gw.out, "Output weight file")->required();

  GenSequenceArgs gs;
  auto* gens = app.add_subcommand("gen-sequence", "Write a synthetic frame sequence and manifest");
  gens->add_option("--out", gs.out_dir, "Output directory")->required();
  gens->add_option("--kind", gs.kind, "static: repeated scenes, pan: sliding window, noise")
      ->check(CLI::IsMember({"static", "pan", "noise"}))
      ->capture_default_str();
  gens->add_option("--scenes", gs.scenes, "static: number of scenes")->capture_default_str();
  gens->add_option("--frames-per-scene", gs.frames_per_scene, "static: frames per scene")
      ->capture_default_str();
  gens->add_option("--frames", gs.frames, "pan/noise: number of frames")->capture_default_str();
  gens->add_option("--step", gs.step, "pan: pixels per frame")->capture_default_str();
  gens->add_option("--channels", gs.channels, "1 (PGM) or 3 (PPM)")
      ->check(CLI::IsMember({1, 3}))
      ->capture_default_str();
  gens->add_option("--height", gs.height)->check(CLI::PositiveNumber)->capture_default_str();
  gens->add_option("--width", gs.width)->check(CLI::PositiveNumber)->capture_default_str();
  gens->add_option("--seed", gs.seed)->capture_default_str();
  gens->add_option("--truth-weights", gs.truth_weights,
                   "Write full-inference masks from these weights as ground truth");
  gens->add_option("--palette", gs.palette, "Palette for ground-truth masks");

  std::vector<std::string> argv_store{"cwseg"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (segment->parsed()) return cmd_segment(seg, out);
    if (eval->parsed()) return cmd_eval(ev, out);
    if (bench->parsed()) return cmd_bench(bn, out);
    if (genw->parsed()) return cmd_gen_weights(gw, out);
    if (gens->parsed()) return cmd_gen_sequence(gs, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kFormat;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kContract;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

}  // namespace cwseg::cli
