#include <cmath>
#include <limits>

#include "doctest.h"

#include "cwseg/error.hpp"
#include "cwseg/tensor.hpp"
#include "support/oracles.hpp"

using namespace cwseg;
using cwseg::test::Rng;

namespace {

Tensor ramp(std::size_t c, std::size_t h, std::size_t w) {
  Tensor t(c, h, w);
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = static_cast<float>(i);
  return t;
}

ConvParams conv(std::size_t out, std::size_t in, std::size_t k, std::vector<float> w,
                std::vector<float> b, std::size_t stride = 1, std::size_t pad = 0) {
  ConvParams p;
  p.out_channels = out;
  p.in_channels = in;
  p.kernel_h = k;
  p.kernel_w = k;
  p.stride = stride;
  p.pad = pad;
  p.weights = std::move(w);
  p.bias = std::move(b);
  return p;
}

ConvParams identity_1x1(std::size_t channels) {
  std::vector<float> w(channels * channels, 0.0f);
  for (std::size_t c = 0; c < channels; ++c) w[c * channels + c] = 1.0f;
  return conv(channels, channels, 1, w, std::vector<float>(channels, 0.0f));
}

}  // namespace

TEST_SUITE("tensor") {

TEST_CASE("tensor construction enforces payload length and positive dims") {
  CHECK_THROWS_AS(Tensor(1, 2, 2, std::vector<float>{1, 2, 3}), ShapeError);
  CHECK_THROWS_AS(Tensor(0, 2, 2), ShapeError);
  const Tensor t(2, 3, 4, 1.5f);
  CHECK(t.size() == 24);
  CHECK(t.at(1, 2, 3) == 1.5f);
}

TEST_CASE("conv2d hand examples") {
  SUBCASE("all-ones 3x3 sums to 9") {
    const Tensor in(1, 3, 3, 1.0f);
    const Tensor out = conv2d(in, conv(1, 1, 3, std::vector<float>(9, 1.0f), {0.0f}));
    CHECK(out.shape_string() == "1x1x1");
    CHECK(out.at(0, 0, 0) == 9.0f);
  }
  SUBCASE("diagonal kernel plus bias") {
    const Tensor in(1, 2, 2, std::vector<float>{1, 2, 3, 4});
    const Tensor out = conv2d(in, conv(1, 1, 2, {1, 0, 0, 1}, {0.5f}));
    CHECK(out.at(0, 0, 0) == 5.5f);
  }
  SUBCASE("identity 1x1 kernel") {
    Rng rng(1);
    const Tensor in = test::random_tensor(rng, 3, 5, 4);
    CHECK(conv2d(in, identity_1x1(3)).bit_equal(in));
  }
}

TEST_CASE("conv2d errors") {
  const Tensor in(2, 4, 4);
  CHECK_THROWS_WITH_AS(conv2d(in, conv(1, 3, 1, std::vector<float>(3, 1.0f), {0.0f})),
                       doctest::Contains("expected 3 input channels, got 2"), ShapeError);
  CHECK_THROWS_AS(conv2d(in, conv(1, 2, 5, std::vector<float>(50, 1.0f), {0.0f})), ShapeError);
  CHECK_THROWS_AS(conv2d(in, conv(1, 2, 1, std::vector<float>(1, 1.0f), {0.0f})), ParamError);
  CHECK_THROWS_AS(conv2d(in, conv(1, 2, 1, std::vector<float>(2, 1.0f), {})), ParamError);
}

TEST_CASE("conv2d agrees with the direct oracle and the shape law") {
  Rng rng(11);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t in_c = test::uniform_int(rng, 1, 3);
    const std::size_t out_c = test::uniform_int(rng, 1, 3);
    const std::size_t k = test::uniform_int(rng, 1, 4);
    const std::size_t stride = test::uniform_int(rng, 1, 3);
    const std::size_t pad = test::uniform_int(rng, 0, 2);
    const std::size_t h = test::uniform_int(rng, std::max<std::size_t>(1, k > 2 * pad ? k - 2 * pad : 1), 9);
    const std::size_t w = test::uniform_int(rng, std::max<std::size_t>(1, k > 2 * pad ? k - 2 * pad : 1), 9);
    const Tensor in = test::random_tensor(rng, in_c, h, w);
    const Tensor wt = test::random_tensor(rng, out_c * in_c, k, k);
    const Tensor b = test::random_tensor(rng, out_c, 1, 1);
    const ConvParams p = conv(out_c, in_c, k, {wt.data().begin(), wt.data().end()},
                              {b.data().begin(), b.data().end()}, stride, pad);

    WorkCounter work;
    const Tensor got = conv2d(in, p, &work);
    CHECK(got.height() == (h + 2 * pad - k) / stride + 1);
    CHECK(got.width() == (w + 2 * pad - k) / stride + 1);
    CHECK(got.channels() == out_c);
    CHECK(work.conv_calls == 1);
    CHECK(work.macs == got.size() * in_c * k * k);

    const Tensor want = test::conv2d_direct(in, p);
    REQUIRE(got.same_shape(want));
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got.data()[i] == doctest::Approx(want.data()[i]).epsilon(1e-6));
    }
    CHECK(all_finite(got));
  }
}

TEST_CASE("maxpool2d") {
  CHECK(maxpool2d(Tensor(1, 2, 2, std::vector<float>{1, 2, 3, 4}), 2, 2).at(0, 0, 0) == 4.0f);
  const Tensor pooled = maxpool2d(ramp(1, 4, 4), 2, 2);
  CHECK(pooled.data()[0] == 5.0f);
  CHECK(pooled.data()[1] == 7.0f);
  CHECK(pooled.data()[2] == 13.0f);
  CHECK(pooled.data()[3] == 15.0f);
  CHECK(maxpool2d(Tensor(2, 6, 4, 3.25f), 2, 2) == Tensor(2, 3, 2, 3.25f));
  CHECK_THROWS_AS(maxpool2d(Tensor(1, 2, 2), 3, 1), ShapeError);

  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t win = test::uniform_int(rng, 1, 3);
    const Tensor in = test::random_tensor(rng, test::uniform_int(rng, 1, 3),
                                          test::uniform_int(rng, win, 8), test::uniform_int(rng, win, 8));
    const std::size_t stride = test::uniform_int(rng, 1, 3);
    CHECK(maxpool2d(in, win, stride).bit_equal(test::maxpool_direct(in, win, stride)));
  }
}

TEST_CASE("relu") {
  const Tensor out = relu(Tensor(1, 1, 3, std::vector<float>{-1, 0, 2}));
  CHECK(out.data()[0] == 0.0f);
  CHECK(out.data()[1] == 0.0f);
  CHECK(out.data()[2] == 2.0f);
  Rng rng(3);
  const Tensor pos = test::random_tensor(rng, 2, 3, 3, 0.0f, 5.0f);
  CHECK(relu(pos).bit_equal(pos));
  CHECK(relu(test::random_tensor(rng, 2, 3, 3, -5.0f, -0.1f)) == Tensor(2, 3, 3, 0.0f));
}

TEST_CASE("upsample_bilinear") {
  Rng rng(8);
  const Tensor t = test::random_tensor(rng, 2, 3, 5);
  CHECK(upsample_bilinear(t, 1).bit_equal(t));
  CHECK(upsample_bilinear(Tensor(1, 1, 1, 5.0f), 4) == Tensor(1, 4, 4, 5.0f));

  const Tensor up = upsample_bilinear(Tensor(1, 1, 2, std::vector<float>{0, 2}), 2);
  REQUIRE(up.shape_string() == "1x2x4");
  for (std::size_t y = 0; y < 2; ++y) {
    CHECK(up.at(0, y, 0) == 0.0f);
    CHECK(up.at(0, y, 1) == 0.5f);
    CHECK(up.at(0, y, 2) == 1.5f);
    CHECK(up.at(0, y, 3) == 2.0f);
  }
  CHECK_THROWS_AS(upsample_bilinear(t, 0), ParamError);

  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t factor = test::uniform_int(rng, 1, 8);
    const Tensor in = test::random_tensor(rng, 1, test::uniform_int(rng, 1, 5), test::uniform_int(rng, 1, 5));
    const Tensor got = upsample_bilinear(in, factor);
    const Tensor want = test::upsample_direct(in, factor);
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got.data()[i] == doctest::Approx(want.data()[i]).epsilon(1e-6));
    }
    const float v = static_cast<float>(test::uniform_real(rng, -10, 10));
    const Tensor flat = upsample_bilinear(Tensor(2, in.height(), in.width(), v), factor);
    CHECK(flat == Tensor(2, in.height() * factor, in.width() * factor, v));
  }
}

TEST_CASE("crop_center") {
  const Tensor t = ramp(1, 3, 3);
  CHECK(crop_center(t, 3, 3).bit_equal(t));
  CHECK(crop_center(t, 1, 1).at(0, 0, 0) == 4.0f);
  const Tensor c = crop_center(ramp(1, 4, 4), 2, 2);
  CHECK(c.data()[0] == 5.0f);
  CHECK(c.data()[1] == 6.0f);
  CHECK(c.data()[2] == 9.0f);
  CHECK(c.data()[3] == 10.0f);
  CHECK(crop_center(ramp(2, 4, 4), 2, 2).channels() == 2);
  CHECK_THROWS_AS(crop_center(t, 4, 1), ShapeError);
}

TEST_CASE("add") {
  Rng rng(2);
  const Tensor a = test::random_tensor(rng, 2, 3, 4);
  CHECK(add(a, Tensor(2, 3, 4, 0.0f)).bit_equal(a));
  const Tensor s = add(Tensor(1, 1, 2, std::vector<float>{1, 2}), Tensor(1, 1, 2, std::vector<float>{3, 4}));
  CHECK(s.data()[0] == 4.0f);
  CHECK(s.data()[1] == 6.0f);
  Tensor neg = a;
  for (float& v : neg.data()) v = -v;
  CHECK(add(a, neg) == Tensor(2, 3, 4, 0.0f));
  CHECK_THROWS_AS(add(a, Tensor(2, 4, 3)), ShapeError);

  auto dyadic = [&rng](std::size_t n) {
    // Multiples of 2^-10 in [-1e3, 1e3]: sums of three stay exact in float.
    Tensor t(1, 1, n);
    for (float& v : t.data()) {
      v = static_cast<float>(static_cast<long>(test::uniform_int(rng, 0, 2048000)) - 1024000) / 1024.0f;
    }
    return t;
  };
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor x = test::random_tensor(rng, 2, 3, 3, -1e3f, 1e3f);
    const Tensor y = test::random_tensor(rng, 2, 3, 3, -1e3f, 1e3f);
    const Tensor z = test::random_tensor(rng, 2, 3, 3, -1e3f, 1e3f);
    CHECK(add(x, y).bit_equal(add(y, x)));
    const Tensor l = add(add(x, y), z);
    const Tensor r = add(x, add(y, z));
    for (std::size_t i = 0; i < l.size(); ++i) {
      const double scale = std::abs(x.data()[i]) + std::abs(y.data()[i]) + std::abs(z.data()[i]);
      CHECK(std::abs(static_cast<double>(l.data()[i]) - r.data()[i]) <= 1e-6 * std::max(scale, 1.0));
    }
    const Tensor dx = dyadic(9);
    const Tensor dy = dyadic(9);
    const Tensor dz = dyadic(9);
    const Tensor dl = add(add(dx, dy), dz);
    const Tensor dr = add(dx, add(dy, dz));
    for (std::size_t i = 0; i < dl.size(); ++i) CHECK(std::abs(dl.data()[i] - dr.data()[i]) <= 1e-6f);
  }
}

TEST_CASE("mean_abs_diff is a pseudometric") {
  CHECK(mean_abs_diff(Tensor(1, 1, 2, std::vector<float>{0, 0}), Tensor(1, 1, 2, std::vector<float>{1, 3})) == 2.0);
  CHECK_THROWS_AS(mean_abs_diff(Tensor(1, 1, 2), Tensor(1, 2, 1)), ShapeError);
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t c = test::uniform_int(rng, 1, 3);
    const std::size_t h = test::uniform_int(rng, 1, 6);
    const std::size_t w = test::uniform_int(rng, 1, 6);
    const Tensor a = test::random_tensor(rng, c, h, w);
    const Tensor b = test::random_tensor(rng, c, h, w);
    const Tensor d = test::random_tensor(rng, c, h, w);
    CHECK(mean_abs_diff(a, a) == 0.0);
    CHECK(mean_abs_diff(a, b) >= 0.0);
    CHECK(mean_abs_diff(a, b) == mean_abs_diff(b, a));
    CHECK(mean_abs_diff(a, d) <= mean_abs_diff(a, b) + mean_abs_diff(b, d) + 1e-6);
  }
}

TEST_CASE("kernels are pure and keep values finite") {
  Rng rng(9);
  const Tensor in = test::random_tensor(rng, 2, 8, 8);
  const Tensor wt = test::random_tensor(rng, 3 * 2, 3, 3);
  const ConvParams p = conv(3, 2, 3, {wt.data().begin(), wt.data().end()}, {0.1f, 0.2f, 0.3f}, 1, 1);
  CHECK(conv2d(in, p).bit_equal(conv2d(in, p)));
  CHECK(checksum(upsample_bilinear(in, 3)) == checksum(upsample_bilinear(in, 3)));
  for (const Tensor& t : {conv2d(in, p), maxpool2d(in, 2, 2), relu(in), upsample_bilinear(in, 2),
                          crop_center(in, 3, 5), add(in, in)}) {
    CHECK(all_finite(t));
  }
  Tensor bad = in;
  bad.data()[3] = std::numeric_limits<float>::quiet_NaN();
  CHECK_FALSE(all_finite(bad));
}

}  // TEST_SUITE
