#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cwseg/fcn_net.hpp"
#include "cwseg/label_mask.hpp"
#include "cwseg/tensor.hpp"

namespace cwseg {

// Every stage fires on every frame.
struct AlwaysClock {};

// Stage2 fires when frame % period_stage2 == 0, Stage3 when frame %
// period_stage3 == 0 and Stage2 fires too.
struct FixedClock {
  std::size_t period_stage2 = 2;
  std::size_t period_stage3 = 4;
};

// Stage2 always fires; Stage3 fires when the score_pool4 drift since the last
// deep computation exceeds theta (strictly). A negative theta fires always.
struct AdaptiveClock {
  double theta = 0.0;
};

using ClockSchedule = std::variant<AlwaysClock, FixedClock, AdaptiveClock>;

void validate_schedule(const ClockSchedule& schedule);
std::string describe(const ClockSchedule& schedule);

// What to emit when Stage3 is skipped.
enum class SkipPolicy {
  ReuseFinal,      // previous final scores, unchanged
  FuseCachedDeep,  // cached score_fr fused with the freshest shallow scores
};

const char* to_string(SkipPolicy policy);
SkipPolicy parse_skip_policy(const std::string& text);

class FiredStages {
 public:
  FiredStages() = default;
  static FiredStages all() {
    FiredStages f;
    f.bits_.set();
    return f;
  }

  void set(StageId s) { bits_.set(stage_index(s)); }
  bool contains(StageId s) const { return bits_.test(stage_index(s)); }
  std::size_t count() const { return bits_.count(); }
  friend bool operator==(const FiredStages&, const FiredStages&) = default;

 private:
  std::bitset<kNumStages> bits_;
};

// Stages to run on this frame. `change` must be given for Adaptive schedules
// on frames after the first; otherwise ContractError.
FiredStages should_fire(const ClockSchedule& schedule, std::size_t frame_index,
                        std::optional<double> change);

struct PersistedState {
  Tensor prev_score;  // score_pool4 at the last Stage3 firing
  Tensor cached_score_pool3;
  Tensor cached_score_pool4;
  Tensor cached_score_fr;
  Tensor cached_final;
  std::size_t frames_seen = 0;
};

struct StageTrace {
  std::size_t frame_index = 0;
  FiredStages fired;
  std::optional<double> change;
  // Microseconds per stage; index 3 is fusion + argmax.
  std::array<double, kNumStages + 1> elapsed_us{};
  std::array<WorkCounter, kNumStages> work{};
};

struct StepResult {
  LabelMask mask;
  PersistedState state;
  StageTrace trace;
  Tensor final_scores;
};

// Processes one frame. `state` is empty only for frame 0.
StepResult step(const StagedNet& net, const ClockSchedule& schedule, SkipPolicy policy,
                std::optional<PersistedState> state, const Tensor& frame);

struct SequenceResult {
  std::vector<LabelMask> masks;
  std::vector<StageTrace> traces;
  // Filled only when requested; one score tensor per frame.
  std::vector<Tensor> final_scores;
};

SequenceResult run_sequence(const StagedNet& net, const ClockSchedule& schedule,
                            SkipPolicy policy, std::span<const Tensor> frames,
                            bool keep_scores = false);

struct WorkSummary {
  std::array<std::size_t, kNumStages> firings{};
  std::array<WorkCounter, kNumStages> work{};
  std::array<double, kNumStages + 1> elapsed_us{};

  std::uint64_t total_macs() const;
  double total_elapsed_us() const;
};

WorkSummary summarize(std::span<const StageTrace> traces);

}  // namespace cwseg
