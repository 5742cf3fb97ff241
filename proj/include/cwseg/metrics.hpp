#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cwseg/label_mask.hpp"

namespace cwseg {

// counts[truth][pred] pixel tallies. Matrices form a commutative monoid under
// merge, so shards can be accumulated independently.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_classes);

  std::size_t num_classes() const { return n_; }
  std::uint64_t at(std::size_t truth, std::size_t pred) const { return counts_[truth * n_ + pred]; }
  std::uint64_t total() const;
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t col_sum(std::size_t pred) const;

  // Throws ShapeError on size mismatch, ParamError on out-of-range labels.
  void accumulate(const LabelMask& truth, const LabelMask& pred);
  void add(std::size_t truth, std::size_t pred, std::uint64_t count = 1);
  void merge(const ConfusionMatrix& other);

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<std::uint64_t> counts_;
};

// Pure variant: returns the updated copy.
ConfusionMatrix accumulate(ConfusionMatrix cm, const LabelMask& truth, const LabelMask& pred);

// All of these throw ContractError on an empty matrix.
double pixel_accuracy(const ConfusionMatrix& cm);
double mean_class_accuracy(const ConfusionMatrix& cm);
double mean_iou(const ConfusionMatrix& cm);
double freq_weighted_iou(const ConfusionMatrix& cm);
// Per-class IU; nullopt for classes absent from both truth and prediction.
std::vector<std::optional<double>> per_class_iou(const ConfusionMatrix& cm);

// One-vs-rest counts for a positive class. A ratio whose denominator is zero
// is reported as 0 with its *_defined flag cleared.
struct BinaryStats {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
  bool precision_defined = false;
  bool recall_defined = false;
  bool f1_defined = false;
  bool fpr_defined = false;
  bool fnr_defined = false;
};

BinaryStats binary_stats(const ConfusionMatrix& cm, std::size_t positive_class);

inline constexpr int kApRecallLevels = 11;

// 11-point interpolated AP over the threshold sweep "positive iff score >= t".
// `is_positive` flags ground-truth positives. Throws ContractError when
// there are none.
double average_precision(std::span<const float> scores, std::span<const std::uint8_t> is_positive);
double average_precision(std::span<const float> scores, const LabelMask& truth,
                         std::size_t positive_class);

struct MetricsReport {
  double acc = 0.0;
  double cl_acc = 0.0;
  double miu = 0.0;
  double fwiu = 0.0;
  std::vector<std::optional<double>> per_class_iu;
  std::size_t positive_class = 1;
  BinaryStats binary;
  std::optional<double> average_precision;
};

struct ScoredPixels {
  std::vector<float> scores;
  std::vector<std::uint8_t> is_positive;
};

MetricsReport build_report(const ConfusionMatrix& cm, const ScoredPixels* scores,
                           std::size_t positive_class);

}  // namespace cwseg
