#pragma once

// Reference implementations used only by tests. Each one follows the
// textbook definition as literally as possible and shares no code with the
// library path it checks.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "cwseg/fcn_net.hpp"
#include "cwseg/label_mask.hpp"
#include "cwseg/tensor.hpp"

namespace cwseg::test {

using Rng = std::mt19937_64;

Tensor random_tensor(Rng& rng, std::size_t c, std::size_t h, std::size_t w, float lo = -1.0f,
                     float hi = 1.0f);
LabelMask random_mask(Rng& rng, std::size_t h, std::size_t w, std::size_t classes);
std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi);  // inclusive
double uniform_real(Rng& rng, double lo, double hi);

// Output element (oc, oy, ox) = bias + sum over (ic, ky, kx) with explicit
// bounds checks against the unpadded input.
Tensor conv2d_direct(const Tensor& input, const ConvParams& p);
Tensor maxpool_direct(const Tensor& input, std::size_t window, std::size_t stride);
// Evaluates the half-pixel bilinear formula per output sample.
Tensor upsample_direct(const Tensor& input, std::size_t factor);

// Metrics computed by counting pixel sets, with no confusion matrix.
struct BruteMetrics {
  double acc = 0.0;
  double cl_acc = 0.0;
  double miu = 0.0;
  double fwiu = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
};
BruteMetrics brute_metrics(const LabelMask& truth, const LabelMask& pred, std::size_t classes,
                           std::size_t positive_class);

// For every distinct score t, predict positive iff score >= t and count
// directly; then 11-point interpolation over those PR points.
double ap_exhaustive(std::span<const float> scores, std::span<const std::uint8_t> positive);

// Small network configuration for property tests that run many sequences.
NetConfig small_config();

}  // namespace cwseg::test
