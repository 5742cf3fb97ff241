#include "cwseg/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "cwseg/error.hpp"

namespace cwseg {

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return static_cast<double>(num) / static_cast<double>(den);
}

void require_nonempty(const ConfusionMatrix& cm, const char* what) {
  if (cm.total() == 0) throw ContractError(std::string(what) + ": confusion matrix is empty");
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes)
    : n_(num_classes), counts_(num_classes * num_classes, 0) {
  if (num_classes == 0) throw ParamError("confusion matrix needs at least one class");
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < n_; ++p) s += at(truth, p);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t pred) const {
  std::uint64_t s = 0;
  for (std::size_t t = 0; t < n_; ++t) s += at(t, pred);
  return s;
}

void ConfusionMatrix::add(std::size_t truth, std::size_t pred, std::uint64_t count) {
  if (truth >= n_ || pred >= n_) {
    std::ostringstream os;
    os << "label pair (" << truth << ", " << pred << ") outside [0, " << n_ << ")";
    throw ParamError(os.str());
  }
  counts_[truth * n_ + pred] += count;
}

void ConfusionMatrix::accumulate(const LabelMask& truth, const LabelMask& pred) {
  if (truth.height != pred.height || truth.width != pred.width ||
      truth.labels.size() != pred.labels.size()) {
    std::ostringstream os;
    os << "accumulate: truth is " << truth.height << "x" << truth.width << ", prediction is "
       << pred.height << "x" << pred.width;
    throw ShapeError(os.str());
  }
  for (std::size_t i = 0; i < truth.labels.size(); ++i) {
    if (truth.labels[i] >= n_ || pred.labels[i] >= n_) {
      std::ostringstream os;
      os << "accumulate: pixel " << i << " has label pair (" << truth.labels[i] << ", "
         << pred.labels[i] << ") outside [0, " << n_ << ")";
      throw ParamError(os.str());
    }
  }
  for (std::size_t i = 0; i < truth.labels.size(); ++i) {
    counts_[truth.labels[i] * n_ + pred.labels[i]] += 1;
  }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.n_ != n_) throw ShapeError("merge: confusion matrices differ in class count");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

ConfusionMatrix accumulate(ConfusionMatrix cm, const LabelMask& truth, const LabelMask& pred) {
  cm.accumulate(truth, pred);
  return cm;
}

double pixel_accuracy(const ConfusionMatrix& cm) {
  require_nonempty(cm, "pixel_accuracy");
  std::uint64_t diag = 0;
  for (std::size_t i = 0; i < cm.num_classes(); ++i) diag += cm.at(i, i);
  return ratio(diag, cm.total());
}

double mean_class_accuracy(const ConfusionMatrix& cm) {
  require_nonempty(cm, "mean_class_accuracy");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < cm.num_classes(); ++i) {
    const std::uint64_t row = cm.row_sum(i);
    if (row == 0) continue;
    sum += ratio(cm.at(i, i), row);
    ++n;
  }
  return sum / static_cast<double>(n);
}

std::vector<std::optional<double>> per_class_iou(const ConfusionMatrix& cm) {
  std::vector<std::optional<double>> iu(cm.num_classes());
  for (std::size_t i = 0; i < cm.num_classes(); ++i) {
    const std::uint64_t uni = cm.row_sum(i) + cm.col_sum(i) - cm.at(i, i);
    if (uni > 0) iu[i] = ratio(cm.at(i, i), uni);
  }
  return iu;
}

double mean_iou(const ConfusionMatrix& cm) {
  require_nonempty(cm, "mean_iou");
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : per_class_iou(cm)) {
    if (!v) continue;
    sum += *v;
    ++n;
  }
  return sum / static_cast<double>(n);
}

double freq_weighted_iou(const ConfusionMatrix& cm) {
  require_nonempty(cm, "freq_weighted_iou");
  const auto iu = per_class_iou(cm);
  const double total = static_cast<double>(cm.total());
  double sum = 0.0;
  for (std::size_t i = 0; i < cm.num_classes(); ++i) {
    const std::uint64_t row = cm.row_sum(i);
    if (row == 0) continue;
    sum += (static_cast<double>(row) / total) * *iu[i];
  }
  return sum;
}

BinaryStats binary_stats(const ConfusionMatrix& cm, std::size_t positive_class) {
  if (positive_class >= cm.num_classes()) {
    throw ParamError("binary_stats: positive class " + std::to_string(positive_class) +
                     " outside [0, " + std::to_string(cm.num_classes()) + ")");
  }
  BinaryStats s;
  const std::size_t p = positive_class;
  s.tp = cm.at(p, p);
  s.fn = cm.row_sum(p) - s.tp;
  s.fp = cm.col_sum(p) - s.tp;
  s.tn = cm.total() - s.tp - s.fn - s.fp;

  if (s.tp + s.fp > 0) {
    s.precision = ratio(s.tp, s.tp + s.fp);
    s.precision_defined = true;
  }
  if (s.tp + s.fn > 0) {
    s.recall = ratio(s.tp, s.tp + s.fn);
    s.fnr = ratio(s.fn, s.tp + s.fn);
    s.recall_defined = s.fnr_defined = true;
  }
  if (s.fp + s.tn > 0) {
    s.fpr = ratio(s.fp, s.fp + s.tn);
    s.fpr_defined = true;
  }
  if (s.precision_defined && s.recall_defined && s.precision + s.recall > 0.0) {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
    s.f1_defined = true;
  }
  return s;
}

double average_precision(std::span<const float> scores, std::span<const std::uint8_t> is_positive) {
  if (scores.size() != is_positive.size()) {
    throw ShapeError("average_precision: " + std::to_string(scores.size()) + " scores but " +
                     std::to_string(is_positive.size()) + " labels");
  }
  const auto positives = static_cast<std::uint64_t>(
      std::count_if(is_positive.begin(), is_positive.end(), [](std::uint8_t v) { return v != 0; }));
  if (positives == 0) throw ContractError("average_precision: truth has no positive pixels");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  // One PR point per distinct threshold, in order of increasing recall.
  std::vector<double> recall;
  std::vector<double> precision;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (is_positive[order[i]] != 0) ++tp; else ++fp;
    const bool last_of_tie = i + 1 == order.size() || scores[order[i + 1]] != scores[order[i]];
    if (!last_of_tie) continue;
    recall.push_back(ratio(tp, positives));
    precision.push_back(ratio(tp, tp + fp));
  }
  // Suffix max: best precision at recall >= recall[i].
  for (std::size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }

  double sum = 0.0;
  std::size_t j = 0;
  for (int level = 0; level < kApRecallLevels; ++level) {
    const double r = level / static_cast<double>(kApRecallLevels - 1);
    while (j < recall.size() && recall[j] < r) ++j;
    if (j < recall.size()) sum += precision[j];
  }
  return sum / kApRecallLevels;
}

double average_precision(std::span<const float> scores, const LabelMask& truth,
                         std::size_t positive_class) {
  if (scores.size() != truth.size()) {
    throw ShapeError("average_precision: score map has " + std::to_string(scores.size()) +
                     " pixels, truth has " + std::to_string(truth.size()));
  }
  std::vector<std::uint8_t> positive(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) positive[i] = truth.labels[i] == positive_class;
  return average_precision(scores, positive);
}

MetricsReport build_report(const ConfusionMatrix& cm, const ScoredPixels* scores,
                           std::size_t positive_class) {
  MetricsReport r;
  r.acc = pixel_accuracy(cm);
  r.cl_acc = mean_class_accuracy(cm);
  r.miu = mean_iou(cm);
  r.fwiu = freq_weighted_iou(cm);
  r.per_class_iu = per_class_iou(cm);
  r.positive_class = positive_class;
  r.binary = binary_stats(cm, positive_class);
  if (scores != nullptr && r.binary.tp + r.binary.fn > 0) {
    r.average_precision = average_precision(scores->scores, scores->is_positive);
  }
  return r;
}

}  // namespace cwseg
