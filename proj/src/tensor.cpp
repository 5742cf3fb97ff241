#include "cwseg/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "cwseg/error.hpp"

namespace cwseg {

namespace {

void require_positive_dims(std::size_t c, std::size_t h, std::size_t w) {
  if (c == 0 || h == 0 || w == 0) {
    std::ostringstream os;
    os << "tensor dims must be positive, got " << c << "x" << h << "x" << w;
    throw ShapeError(os.str());
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch, expected " + a.shape_string() +
                     ", got " + b.shape_string());
  }
}

}  // namespace

Tensor::Tensor(std::size_t channels, std::size_t height, std::size_t width, float fill)
    : channels_(channels), height_(height), width_(width) {
  require_positive_dims(channels, height, width);
  data_.assign(channels * height * width, fill);
}

Tensor::Tensor(std::size_t channels, std::size_t height, std::size_t width, std::vector<float> data)
    : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
  require_positive_dims(channels, height, width);
  if (data_.size() != channels * height * width) {
    std::ostringstream os;
    os << "tensor payload has " << data_.size() << " elements, expected "
       << channels * height * width << " for " << shape_string();
    throw ShapeError(os.str());
  }
}

std::string Tensor::shape_string() const {
  std::ostringstream os;
  os << channels_ << "x" << height_ << "x" << width_;
  return os.str();
}

bool Tensor::bit_equal(const Tensor& other) const {
  if (!same_shape(other)) return false;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (std::bit_cast<std::uint32_t>(data_[i]) != std::bit_cast<std::uint32_t>(other.data_[i])) {
      return false;
    }
  }
  return true;
}

void ConvParams::validate() const {
  if (out_channels == 0 || in_channels == 0 || kernel_h == 0 || kernel_w == 0 || stride == 0) {
    throw ParamError("conv params: dims and stride must be positive");
  }
  const std::size_t expected = out_channels * in_channels * kernel_h * kernel_w;
  if (weights.size() != expected) {
    std::ostringstream os;
    os << "conv params: weight length " << weights.size() << " != " << out_channels << "x"
       << in_channels << "x" << kernel_h << "x" << kernel_w << " = " << expected;
    throw ParamError(os.str());
  }
  if (bias.size() != out_channels) {
    std::ostringstream os;
    os << "conv params: bias length " << bias.size() << " != out_channels " << out_channels;
    throw ParamError(os.str());
  }
}

Tensor conv2d(const Tensor& input, const ConvParams& p, WorkCounter* counter) {
  p.validate();
  if (input.channels() != p.in_channels) {
    std::ostringstream os;
    os << "conv2d: expected " << p.in_channels << " input channels, got " << input.channels();
    throw ShapeError(os.str());
  }
  const std::size_t padded_h = input.height() + 2 * p.pad;
  const std::size_t padded_w = input.width() + 2 * p.pad;
  if (padded_h < p.kernel_h || padded_w < p.kernel_w) {
    std::ostringstream os;
    os << "conv2d: kernel " << p.kernel_h << "x" << p.kernel_w << " exceeds padded input "
       << padded_h << "x" << padded_w;
    throw ShapeError(os.str());
  }
  const std::size_t out_h = (padded_h - p.kernel_h) / p.stride + 1;
  const std::size_t out_w = (padded_w - p.kernel_w) / p.stride + 1;

  Tensor out(p.out_channels, out_h, out_w);
  const auto in = input.data();
  const auto in_h = static_cast<std::ptrdiff_t>(input.height());
  const auto in_w = static_cast<std::ptrdiff_t>(input.width());
  const auto pad = static_cast<std::ptrdiff_t>(p.pad);
  const auto stride = static_cast<std::ptrdiff_t>(p.stride);

  // Valid output range [lo, hi) for kernel tap k along one axis.
  auto valid_range = [&](std::size_t k, std::ptrdiff_t in_len, std::size_t out_len) {
    const std::ptrdiff_t offset = static_cast<std::ptrdiff_t>(k) - pad;
    std::ptrdiff_t lo = 0;
    if (offset < 0) lo = (-offset + stride - 1) / stride;
    std::ptrdiff_t hi = 0;
    if (in_len - offset > 0) hi = (in_len - offset - 1) / stride + 1;
    hi = std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(out_len));
    return std::pair{lo, std::max(lo, hi)};
  };

  // Each output sums bias, then input channels in order, then kernel taps in
  // row-major order; the loop nest below only hoists the weight.
  std::vector<std::pair<std::ptrdiff_t, std::ptrdiff_t>> y_range(p.kernel_h);
  std::vector<std::pair<std::ptrdiff_t, std::ptrdiff_t>> x_range(p.kernel_w);
  for (std::size_t ky = 0; ky < p.kernel_h; ++ky) y_range[ky] = valid_range(ky, in_h, out_h);
  for (std::size_t kx = 0; kx < p.kernel_w; ++kx) x_range[kx] = valid_range(kx, in_w, out_w);

  std::vector<double> acc(out_h * out_w);
  for (std::size_t oc = 0; oc < p.out_channels; ++oc) {
    std::fill(acc.begin(), acc.end(), static_cast<double>(p.bias[oc]));
    for (std::size_t ic = 0; ic < p.in_channels; ++ic) {
      const float* w = &p.weights[((oc * p.in_channels + ic) * p.kernel_h) * p.kernel_w];
      const float* plane = &in[ic * input.height() * input.width()];
      for (std::size_t ky = 0; ky < p.kernel_h; ++ky) {
        const auto [y_lo, y_hi] = y_range[ky];
        for (std::size_t kx = 0; kx < p.kernel_w; ++kx) {
          const auto [x_lo, x_hi] = x_range[kx];
          const double wv = w[ky * p.kernel_w + kx];
          for (std::ptrdiff_t oy = y_lo; oy < y_hi; ++oy) {
            const float* row = plane + (oy * stride + static_cast<std::ptrdiff_t>(ky) - pad) * in_w;
            double* a = &acc[static_cast<std::size_t>(oy) * out_w];
            for (std::ptrdiff_t ox = x_lo; ox < x_hi; ++ox) {
              a[ox] += wv * static_cast<double>(row[ox * stride + static_cast<std::ptrdiff_t>(kx) - pad]);
            }
          }
        }
      }
    }
    float* dst = &out.data()[oc * out_h * out_w];
    for (std::size_t i = 0; i < acc.size(); ++i) dst[i] = static_cast<float>(acc[i]);
  }
  if (counter != nullptr) {
    counter->conv_calls += 1;
    counter->macs += static_cast<std::uint64_t>(out.size()) * p.macs_per_output();
  }
  return out;
}

Tensor maxpool2d(const Tensor& input, std::size_t window, std::size_t stride) {
  if (window == 0 || stride == 0) throw ParamError("maxpool2d: window and stride must be positive");
  if (window > input.height() || window > input.width()) {
    std::ostringstream os;
    os << "maxpool2d: window " << window << " larger than input " << input.shape_string();
    throw ShapeError(os.str());
  }
  const std::size_t out_h = (input.height() - window) / stride + 1;
  const std::size_t out_w = (input.width() - window) / stride + 1;
  Tensor out(input.channels(), out_h, out_w);
  for (std::size_t c = 0; c < input.channels(); ++c) {
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        float m = input.at(c, oy * stride, ox * stride);
        for (std::size_t ky = 0; ky < window; ++ky) {
          for (std::size_t kx = 0; kx < window; ++kx) {
            m = std::max(m, input.at(c, oy * stride + ky, ox * stride + kx));
          }
        }
        out.at(c, oy, ox) = m;
      }
    }
  }
  return out;
}

Tensor relu(const Tensor& input) {
  Tensor out = input;
  for (float& v : out.data()) v = v > 0.0f ? v : 0.0f;
  return out;
}

Tensor upsample_bilinear(const Tensor& input, std::size_t factor) {
  if (factor == 0) throw ParamError("upsample_bilinear: factor must be >= 1");
  if (factor == 1) return input;
  const std::size_t in_h = input.height();
  const std::size_t in_w = input.width();
  const std::size_t out_h = in_h * factor;
  const std::size_t out_w = in_w * factor;

  struct Tap {
    std::size_t lo;
    std::size_t hi;
    double frac;
  };
  auto taps = [factor](std::size_t n_out, std::size_t n_in) {
    std::vector<Tap> t(n_out);
    for (std::size_t i = 0; i < n_out; ++i) {
      double src = (static_cast<double>(i) + 0.5) / static_cast<double>(factor) - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(n_in - 1));
      const auto lo = static_cast<std::size_t>(std::floor(src));
      t[i] = {lo, std::min(lo + 1, n_in - 1), src - static_cast<double>(lo)};
    }
    return t;
  };
  const auto ty = taps(out_h, in_h);
  const auto tx = taps(out_w, in_w);

  Tensor out(input.channels(), out_h, out_w);
  for (std::size_t c = 0; c < input.channels(); ++c) {
    for (std::size_t y = 0; y < out_h; ++y) {
      for (std::size_t x = 0; x < out_w; ++x) {
        const double top = (1.0 - tx[x].frac) * input.at(c, ty[y].lo, tx[x].lo) +
                           tx[x].frac * input.at(c, ty[y].lo, tx[x].hi);
        const double bottom = (1.0 - tx[x].frac) * input.at(c, ty[y].hi, tx[x].lo) +
                              tx[x].frac * input.at(c, ty[y].hi, tx[x].hi);
        out.at(c, y, x) = static_cast<float>((1.0 - ty[y].frac) * top + ty[y].frac * bottom);
      }
    }
  }
  return out;
}

Tensor crop_center(const Tensor& input, std::size_t target_h, std::size_t target_w) {
  if (target_h > input.height() || target_w > input.width()) {
    std::ostringstream os;
    os << "crop_center: target " << target_h << "x" << target_w << " larger than input "
       << input.shape_string();
    throw ShapeError(os.str());
  }
  if (target_h == input.height() && target_w == input.width()) return input;
  const std::size_t oy = (input.height() - target_h) / 2;
  const std::size_t ox = (input.width() - target_w) / 2;
  Tensor out(input.channels(), target_h, target_w);
  for (std::size_t c = 0; c < input.channels(); ++c) {
    for (std::size_t y = 0; y < target_h; ++y) {
      for (std::size_t x = 0; x < target_w; ++x) out.at(c, y, x) = input.at(c, y + oy, x + ox);
    }
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = a;
  auto o = out.data();
  const auto r = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += r[i];
  return out;
}

double mean_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mean_abs_diff");
  const auto x = a.data();
  const auto y = b.data();
  if (x.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sum += std::abs(static_cast<double>(x[i]) - static_cast<double>(y[i]));
  }
  return sum / static_cast<double>(x.size());
}

bool all_finite(const Tensor& t) {
  return std::all_of(t.data().begin(), t.data().end(), [](float v) { return std::isfinite(v); });
}

std::uint64_t checksum(const Tensor& t) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) {
      h ^= (v >> (8 * i)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(t.channels(), 8);
  mix(t.height(), 8);
  mix(t.width(), 8);
  for (float v : t.data()) mix(std::bit_cast<std::uint32_t>(v), 4);
  return h;
}

}  // namespace cwseg
