#include <set>

#include "doctest.h"

#include "cwseg/clockwork.hpp"
#include "cwseg/error.hpp"
#include "cwseg/media_io.hpp"
#include "cwseg/synth.hpp"
#include "support/oracles.hpp"

using namespace cwseg;

namespace {

std::set<std::size_t> frames_firing(const std::vector<StageTrace>& traces, StageId s) {
  std::set<std::size_t> out;
  for (const auto& t : traces) {
    if (t.fired.contains(s)) out.insert(t.frame_index);
  }
  return out;
}

std::vector<LabelMask> per_frame_full(const StagedNet& net, const std::vector<Tensor>& frames) {
  std::vector<LabelMask> masks;
  for (const auto& f : frames) masks.push_back(argmax_mask(full_forward(net, f).final_scores));
  return masks;
}

void check_prefix_rule(const std::vector<StageTrace>& traces) {
  for (const auto& t : traces) {
    CHECK(t.fired.contains(StageId::Stage1));
    if (t.fired.contains(StageId::Stage3)) CHECK(t.fired.contains(StageId::Stage2));
  }
}

struct SmallNet {
  NetConfig cfg = test::small_config();
  StagedNet net = build_net(cfg, gen_weights(cfg, 42));
};

}  // namespace

TEST_SUITE("clockwork") {

TEST_CASE("should_fire: fixed rates halve per stage") {
  std::set<std::size_t> s2;
  std::set<std::size_t> s3;
  for (std::size_t f = 0; f < 8; ++f) {
    const FiredStages fired = should_fire(FixedClock{2, 4}, f, std::nullopt);
    CHECK(fired.contains(StageId::Stage1));
    if (fired.contains(StageId::Stage2)) s2.insert(f);
    if (fired.contains(StageId::Stage3)) s3.insert(f);
  }
  CHECK(s2 == std::set<std::size_t>{0, 2, 4, 6});
  CHECK(s3 == std::set<std::size_t>{0, 4});
  // Stage 3 never fires without stage 2, even when its own period divides.
  CHECK_FALSE(should_fire(FixedClock{2, 3}, 3, std::nullopt).contains(StageId::Stage3));
  CHECK_THROWS_AS(should_fire(FixedClock{0, 1}, 1, std::nullopt), ParamError);
}

TEST_CASE("should_fire: adaptive") {
  CHECK(should_fire(AdaptiveClock{0.5}, 0, std::nullopt) == FiredStages::all());
  const FiredStages low = should_fire(AdaptiveClock{0.5}, 3, 0.1);
  CHECK(low.contains(StageId::Stage1));
  CHECK(low.contains(StageId::Stage2));
  CHECK_FALSE(low.contains(StageId::Stage3));
  CHECK(should_fire(AdaptiveClock{0.5}, 3, 0.6) == FiredStages::all());
  // Strict comparison.
  CHECK_FALSE(should_fire(AdaptiveClock{0.5}, 3, 0.5).contains(StageId::Stage3));
  CHECK(should_fire(AdaptiveClock{-1.0}, 3, 0.0) == FiredStages::all());
  CHECK_THROWS_AS(should_fire(AdaptiveClock{0.5}, 1, std::nullopt), ContractError);
  CHECK(should_fire(AlwaysClock{}, 7, std::nullopt) == FiredStages::all());
}

TEST_CASE("oracle equivalence for schedules that always fire") {
  SmallNet s;
  test::Rng rng(123);
  std::vector<Tensor> frames;
  for (int i = 0; i < 8; ++i) frames.push_back(test::random_tensor(rng, 3, 64, 64, 0.0f, 1.0f));
  const auto want = per_frame_full(s.net, frames);
  for (const ClockSchedule& sched :
       {ClockSchedule{AlwaysClock{}}, ClockSchedule{FixedClock{1, 1}}, ClockSchedule{AdaptiveClock{-1.0}}}) {
    for (SkipPolicy policy : {SkipPolicy::ReuseFinal, SkipPolicy::FuseCachedDeep}) {
      const auto got = run_sequence(s.net, sched, policy, frames, true);
      CHECK(got.masks == want);
      for (std::size_t i = 0; i < frames.size(); ++i) {
        CHECK(got.final_scores[i].bit_equal(full_forward(s.net, frames[i]).final_scores));
        CHECK(got.traces[i].fired == FiredStages::all());
      }
    }
  }
}

TEST_CASE("static video: stage 3 fires once and masks never change") {
  SmallNet s;
  const std::vector<Tensor> frames = synth::static_scenes(1, 6, 3, 64, 64, 77);
  for (SkipPolicy policy : {SkipPolicy::ReuseFinal, SkipPolicy::FuseCachedDeep}) {
    const auto r = run_sequence(s.net, AdaptiveClock{1e-6}, policy, frames);
    CHECK(frames_firing(r.traces, StageId::Stage3) == std::set<std::size_t>{0});
    for (std::size_t i = 1; i < frames.size(); ++i) {
      CHECK(r.masks[i] == r.masks[0]);
      REQUIRE(r.traces[i].change.has_value());
      CHECK(*r.traces[i].change == 0.0);
    }
    CHECK_FALSE(r.traces[0].change.has_value());
  }
}

TEST_CASE("fixed(2,4) on identical frames executes stage 3 twice") {
  SmallNet s;
  const auto frames = synth::static_scenes(1, 8, 3, 32, 32, 3);
  const auto r = run_sequence(s.net, FixedClock{2, 4}, SkipPolicy::FuseCachedDeep, frames);
  CHECK(frames_firing(r.traces, StageId::Stage2) == std::set<std::size_t>{0, 2, 4, 6});
  CHECK(frames_firing(r.traces, StageId::Stage3) == std::set<std::size_t>{0, 4});
  const WorkSummary sum = summarize(r.traces);
  CHECK(sum.firings[2] == 2);
  // Measured conv executions, not the schedule's claim.
  CHECK(sum.work[2].conv_calls == 2 * s.net.conv_count(StageId::Stage3));
  CHECK(sum.work[1].conv_calls == 4 * s.net.conv_count(StageId::Stage2));
  CHECK(sum.work[0].conv_calls == 8 * s.net.conv_count(StageId::Stage1));
  check_prefix_rule(r.traces);
}

TEST_CASE("skip policies differ in what they emit on skipped frames") {
  SmallNet s;
  const auto frames = synth::panning_sequence(6, 3, 3, 32, 32, 5);
  const auto reuse = run_sequence(s.net, AdaptiveClock{1e9}, SkipPolicy::ReuseFinal, frames, true);
  const auto fuse = run_sequence(s.net, AdaptiveClock{1e9}, SkipPolicy::FuseCachedDeep, frames, true);
  CHECK(frames_firing(reuse.traces, StageId::Stage3) == std::set<std::size_t>{0});
  for (std::size_t i = 1; i < frames.size(); ++i) {
    CHECK(reuse.final_scores[i].bit_equal(reuse.final_scores[0]));
  }

  // Fuse: cached frame-0 score_fr with this frame's fresh shallow scores.
  const StageOutputs first = full_forward(s.net, frames[0]);
  for (std::size_t i = 1; i < frames.size(); ++i) {
    const StageOutputs now = full_forward(s.net, frames[i]);
    const Tensor want = fuse_and_upsample(s.net, *first.score_fr, now.score_pool4, now.score_pool3);
    CHECK(fuse.final_scores[i].bit_equal(want));
  }
}

TEST_CASE("fixed mode fuses the cached score_pool4 when stage 2 is skipped") {
  SmallNet s;
  const auto frames = synth::panning_sequence(4, 2, 3, 32, 32, 8);
  const auto r = run_sequence(s.net, FixedClock{2, 4}, SkipPolicy::FuseCachedDeep, frames, true);
  const StageOutputs f0 = full_forward(s.net, frames[0]);
  const StageOutputs f1 = full_forward(s.net, frames[1]);
  CHECK(r.final_scores[1].bit_equal(fuse_and_upsample(s.net, *f0.score_fr, f0.score_pool4, f1.score_pool3)));
  const StageOutputs f2 = full_forward(s.net, frames[2]);
  CHECK(r.final_scores[2].bit_equal(fuse_and_upsample(s.net, *f0.score_fr, f2.score_pool4, f2.score_pool3)));
}

TEST_CASE("prev_score only moves when stage 3 fires") {
  SmallNet s;
  const auto frames = synth::panning_sequence(5, 1, 3, 32, 32, 4);
  std::optional<PersistedState> state;
  StepResult r0 = step(s.net, AdaptiveClock{1e9}, SkipPolicy::FuseCachedDeep, std::nullopt, frames[0]);
  const Tensor first_prev = r0.state.prev_score;
  CHECK(first_prev.bit_equal(full_forward(s.net, frames[0]).score_pool4));
  state = std::move(r0.state);
  for (std::size_t i = 1; i < frames.size(); ++i) {
    StepResult r = step(s.net, AdaptiveClock{1e9}, SkipPolicy::FuseCachedDeep, std::move(state), frames[i]);
    CHECK(r.state.prev_score.bit_equal(first_prev));
    CHECK(r.state.cached_score_pool4.bit_equal(full_forward(s.net, frames[i]).score_pool4));
    CHECK(*r.trace.change == doctest::Approx(mean_abs_diff(r.state.cached_score_pool4, first_prev)));
    CHECK(r.state.frames_seen == i + 1);
    state = std::move(r.state);
  }
}

TEST_CASE("cumulative drift eventually refires stage 3") {
  SmallNet s;
  const auto frames = synth::panning_sequence(12, 1, 3, 32, 32, 19);
  // Pick theta between the first one-frame change and a larger multi-frame one.
  const auto always = run_sequence(s.net, AdaptiveClock{1e9}, SkipPolicy::FuseCachedDeep, frames);
  const double first = *always.traces[1].change;
  const double last = *always.traces.back().change;
  REQUIRE(last > first);
  const double theta = 0.5 * (first + last);
  const auto r = run_sequence(s.net, AdaptiveClock{theta}, SkipPolicy::FuseCachedDeep, frames);
  CHECK(frames_firing(r.traces, StageId::Stage3).size() >= 2);
}

TEST_CASE("errors: empty sequence, resolution drift, bad state") {
  SmallNet s;
  CHECK_THROWS_AS(run_sequence(s.net, AlwaysClock{}, SkipPolicy::ReuseFinal, std::span<const Tensor>{}),
                  ContractError);
  std::vector<Tensor> frames{Tensor(3, 32, 32, 0.5f), Tensor(3, 64, 32, 0.5f)};
  CHECK_THROWS_WITH_AS(run_sequence(s.net, AlwaysClock{}, SkipPolicy::ReuseFinal, frames),
                       doctest::Contains("sequence started at 32x32"), ShapeError);
  CHECK_THROWS_AS(step(s.net, AlwaysClock{}, SkipPolicy::ReuseFinal, PersistedState{}, frames[0]),
                  ContractError);
}

TEST_CASE("property: monotone work in theta, prefix rule, causality") {
  SmallNet s;
  test::Rng rng(2718);
  const auto frames = synth::panning_sequence(10, 2, 3, 32, 32, 31);
  // All change values under a never-refire schedule bound the useful theta range.
  const auto probe = run_sequence(s.net, AdaptiveClock{1e9}, SkipPolicy::ReuseFinal, frames);
  double max_change = 0.0;
  for (const auto& t : probe.traces) max_change = std::max(max_change, t.change.value_or(0.0));

  for (int trial = 0; trial < 100; ++trial) {
    double a = test::uniform_real(rng, -0.1 * max_change, 1.1 * max_change);
    double b = test::uniform_real(rng, -0.1 * max_change, 1.1 * max_change);
    if (a > b) std::swap(a, b);
    const auto lo = run_sequence(s.net, AdaptiveClock{a}, SkipPolicy::FuseCachedDeep, frames);
    const auto hi = run_sequence(s.net, AdaptiveClock{b}, SkipPolicy::FuseCachedDeep, frames);
    CHECK(summarize(hi.traces).firings[2] <= summarize(lo.traces).firings[2]);
    check_prefix_rule(lo.traces);
    check_prefix_rule(hi.traces);
  }

  // Replaying a prefix reproduces the same state.
  std::optional<PersistedState> a_state;
  std::optional<PersistedState> b_state;
  for (std::size_t i = 0; i < 5; ++i) {
    auto ra = step(s.net, AdaptiveClock{0.3 * max_change}, SkipPolicy::FuseCachedDeep, std::move(a_state), frames[i]);
    auto rb = step(s.net, AdaptiveClock{0.3 * max_change}, SkipPolicy::FuseCachedDeep, std::move(b_state), frames[i]);
    CHECK(ra.mask == rb.mask);
    CHECK(ra.state.prev_score.bit_equal(rb.state.prev_score));
    CHECK(ra.state.cached_final.bit_equal(rb.state.cached_final));
    a_state = std::move(ra.state);
    b_state = std::move(rb.state);
  }
}

TEST_CASE("single frame fires everything") {
  SmallNet s;
  const std::vector<Tensor> one{synth::scene_frame(3, 32, 32, 1)};
  const auto r = run_sequence(s.net, AdaptiveClock{0.5}, SkipPolicy::ReuseFinal, one);
  REQUIRE(r.masks.size() == 1);
  CHECK(r.traces[0].fired == FiredStages::all());
}

}  // TEST_SUITE
