#include "cwseg/clockwork.hpp"

#include <chrono>
#include <sstream>

#include "cwseg/error.hpp"

namespace cwseg {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

class StopWatch {
 public:
  StopWatch() : start_(std::chrono::steady_clock::now()) {}
  double lap_us() {
    const auto now = std::chrono::steady_clock::now();
    const double us = std::chrono::duration<double, std::micro>(now - start_).count();
    start_ = now;
    return us;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

void validate_schedule(const ClockSchedule& schedule) {
  if (const auto* fixed = std::get_if<FixedClock>(&schedule)) {
    if (fixed->period_stage2 == 0 || fixed->period_stage3 == 0) {
      throw ParamError("fixed schedule periods must be >= 1");
    }
  }
}

std::string describe(const ClockSchedule& schedule) {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&os](const AlwaysClock&) { os << "always"; },
                 [&os](const FixedClock& f) {
                   os << "fixed(" << f.period_stage2 << "," << f.period_stage3 << ")";
                 },
                 [&os](const AdaptiveClock& a) { os << "adaptive(" << a.theta << ")"; },
             },
             schedule);
  return os.str();
}

const char* to_string(SkipPolicy policy) {
  return policy == SkipPolicy::ReuseFinal ? "reuse-final" : "fuse-cached-deep";
}

SkipPolicy parse_skip_policy(const std::string& text) {
  if (text == "reuse-final") return SkipPolicy::ReuseFinal;
  if (text == "fuse-cached-deep") return SkipPolicy::FuseCachedDeep;
  throw ParamError("unknown skip policy \"" + text + "\"");
}

FiredStages should_fire(const ClockSchedule& schedule, std::size_t frame_index,
                        std::optional<double> change) {
  validate_schedule(schedule);
  const bool adaptive = std::holds_alternative<AdaptiveClock>(schedule);
  if (adaptive && frame_index > 0 && !change.has_value()) {
    throw ContractError("adaptive schedule needs a change value on frame " +
                        std::to_string(frame_index));
  }
  if (frame_index == 0) return FiredStages::all();

  FiredStages fired;
  fired.set(StageId::Stage1);
  std::visit(Overloaded{
                 [&fired](const AlwaysClock&) { fired = FiredStages::all(); },
                 [&fired, frame_index](const FixedClock& f) {
                   if (frame_index % f.period_stage2 != 0) return;
                   fired.set(StageId::Stage2);
                   if (frame_index % f.period_stage3 == 0) fired.set(StageId::Stage3);
                 },
                 [&fired, &change](const AdaptiveClock& a) {
                   fired.set(StageId::Stage2);
                   if (*change > a.theta) fired.set(StageId::Stage3);
                 },
             },
             schedule);
  return fired;
}

StepResult step(const StagedNet& net, const ClockSchedule& schedule, SkipPolicy policy,
                std::optional<PersistedState> state, const Tensor& frame) {
  validate_schedule(schedule);
  const std::size_t index = state ? state->frames_seen : 0;
  if (state && state->frames_seen == 0) {
    throw ContractError("step: persisted state has seen no frames; pass no state for frame 0");
  }
  if (state && (frame.empty() || frame.height() != state->cached_final.height() ||
                frame.width() != state->cached_final.width())) {
    std::ostringstream os;
    os << "step: frame " << index << " is " << (frame.empty() ? "empty" : frame.shape_string())
       << " but the sequence started at " << state->cached_final.height() << "x"
       << state->cached_final.width();
    throw ShapeError(os.str());
  }

  StepResult r;
  r.state = state ? std::move(*state) : PersistedState{};
  PersistedState& st = r.state;
  StageTrace& trace = r.trace;
  trace.frame_index = index;

  StopWatch watch;
  Stage1Result s1 = run_stage1(net, frame, &trace.work[0]);
  trace.elapsed_us[0] = watch.lap_us();
  st.cached_score_pool3 = s1.score_pool3;

  const bool adaptive = std::holds_alternative<AdaptiveClock>(schedule);
  const bool run2 = adaptive || should_fire(schedule, index, std::nullopt).contains(StageId::Stage2);

  std::optional<Stage2Result> s2;
  if (run2) {
    s2 = run_stage2(net, s1.pool3_features, &trace.work[1]);
    trace.elapsed_us[1] = watch.lap_us();
    st.cached_score_pool4 = s2->score_pool4;
    if (adaptive && index > 0) trace.change = mean_abs_diff(s2->score_pool4, st.prev_score);
  }

  trace.fired = should_fire(schedule, index, trace.change);
  watch.lap_us();

  if (trace.fired.contains(StageId::Stage3)) {
    st.cached_score_fr = run_stage3(net, s2->pool4_features, &trace.work[2]);
    trace.elapsed_us[2] = watch.lap_us();
    st.cached_final =
        fuse_and_upsample(net, st.cached_score_fr, s2->score_pool4, st.cached_score_pool3);
    st.prev_score = s2->score_pool4;
    r.final_scores = st.cached_final;
  } else if (policy == SkipPolicy::ReuseFinal) {
    r.final_scores = st.cached_final;
  } else {
    r.final_scores = fuse_and_upsample(net, st.cached_score_fr, st.cached_score_pool4,
                                       st.cached_score_pool3);
  }
  r.mask = argmax_mask(r.final_scores);
  trace.elapsed_us[3] = watch.lap_us();
  st.frames_seen = index + 1;
  return r;
}

SequenceResult run_sequence(const StagedNet& net, const ClockSchedule& schedule,
                            SkipPolicy policy, std::span<const Tensor> frames, bool keep_scores) {
  if (frames.empty()) throw ContractError("run_sequence: empty frame sequence");
  SequenceResult out;
  out.masks.reserve(frames.size());
  out.traces.reserve(frames.size());
  std::optional<PersistedState> state;
  for (const Tensor& frame : frames) {
    StepResult r = step(net, schedule, policy, std::move(state), frame);
    out.masks.push_back(std::move(r.mask));
    out.traces.push_back(r.trace);
    if (keep_scores) out.final_scores.push_back(std::move(r.final_scores));
    state = std::move(r.state);
  }
  return out;
}

std::uint64_t WorkSummary::total_macs() const {
  std::uint64_t total = 0;
  for (const auto& w : work) total += w.macs;
  return total;
}

double WorkSummary::total_elapsed_us() const {
  double total = 0.0;
  for (double e : elapsed_us) total += e;
  return total;
}

WorkSummary summarize(std::span<const StageTrace> traces) {
  WorkSummary s;
  for (const StageTrace& t : traces) {
    for (std::size_t i = 0; i < kNumStages; ++i) {
      if (t.fired.contains(static_cast<StageId>(i + 1))) ++s.firings[i];
      s.work[i] += t.work[i];
    }
    for (std::size_t i = 0; i < s.elapsed_us.size(); ++i) s.elapsed_us[i] += t.elapsed_us[i];
  }
  return s;
}

}  // namespace cwseg
