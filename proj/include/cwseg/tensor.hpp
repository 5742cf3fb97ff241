#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cwseg {

// Dense rank-3 array (channels, height, width) of floats, row-major with x
// varying fastest.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t channels, std::size_t height, std::size_t width, float fill = 0.0f);
  Tensor(std::size_t channels, std::size_t height, std::size_t width, std::vector<float> data);

  std::size_t channels() const { return channels_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float& at(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * height_ + y) * width_ + x];
  }
  float at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * height_ + y) * width_ + x];
  }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool same_shape(const Tensor& other) const {
    return channels_ == other.channels_ && height_ == other.height_ && width_ == other.width_;
  }
  std::string shape_string() const;

  // Bitwise equality of shape and payload (distinguishes -0 from +0).
  bool bit_equal(const Tensor& other) const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t channels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> data_;
};

struct ConvParams {
  std::size_t out_channels = 0;
  std::size_t in_channels = 0;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  std::size_t stride = 1;
  std::size_t pad = 0;
  std::vector<float> weights;  // [out][in][kh][kw]
  std::vector<float> bias;     // [out]

  // Throws ParamError when the weight/bias lengths disagree with the dims.
  void validate() const;
  std::uint64_t macs_per_output() const { return in_channels * kernel_h * kernel_w; }
};

// Running tally of convolution work. Kernels add to it when one is supplied;
// their results do not depend on it.
struct WorkCounter {
  std::uint64_t conv_calls = 0;
  std::uint64_t macs = 0;

  WorkCounter& operator+=(const WorkCounter& o) {
    conv_calls += o.conv_calls;
    macs += o.macs;
    return *this;
  }
};

// Zero-padded cross-correlation plus bias. Reductions accumulate in double.
Tensor conv2d(const Tensor& input, const ConvParams& p, WorkCounter* counter = nullptr);

Tensor maxpool2d(const Tensor& input, std::size_t window, std::size_t stride);

Tensor relu(const Tensor& input);

// Bilinear resize by an integer factor, half-pixel centers, clamped borders.
Tensor upsample_bilinear(const Tensor& input, std::size_t factor);

Tensor crop_center(const Tensor& input, std::size_t target_h, std::size_t target_w);

Tensor add(const Tensor& a, const Tensor& b);

// (1/N) * sum |a_i - b_i|
double mean_abs_diff(const Tensor& a, const Tensor& b);

bool all_finite(const Tensor& t);

// FNV-1a over shape and the raw float bit patterns; used for golden pins.
std::uint64_t checksum(const Tensor& t);

}  // namespace cwseg
