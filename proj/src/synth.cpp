#include "cwseg/synth.hpp"

#include <algorithm>

#include "cwseg/random.hpp"

namespace cwseg::synth {

namespace {

float quantize(std::uint64_t v) { return static_cast<float>(v % 256) / 255.0f; }

}  // namespace

Tensor noise_frame(std::size_t channels, std::size_t height, std::size_t width, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Tensor t(channels, height, width);
  for (float& v : t.data()) v = quantize(rng.next() >> 32);
  return t;
}

Tensor scene_frame(std::size_t channels, std::size_t height, std::size_t width, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<std::uint8_t> bytes(channels * height * width);
  std::vector<std::uint8_t> background(channels);
  for (auto& b : background) b = static_cast<std::uint8_t>(rng.next() >> 56);
  for (std::size_t c = 0; c < channels; ++c) {
    std::fill_n(bytes.begin() + static_cast<std::ptrdiff_t>(c * height * width), height * width,
                background[c]);
  }
  const std::size_t rects = 3 + rng.next() % 5;
  for (std::size_t r = 0; r < rects; ++r) {
    const std::size_t y0 = rng.next() % height;
    const std::size_t x0 = rng.next() % width;
    const std::size_t h = 1 + rng.next() % std::max<std::size_t>(1, height / 2);
    const std::size_t w = 1 + rng.next() % std::max<std::size_t>(1, width / 2);
    for (std::size_t c = 0; c < channels; ++c) {
      const auto color = static_cast<std::uint8_t>(rng.next() >> 56);
      for (std::size_t y = y0; y < std::min(height, y0 + h); ++y) {
        for (std::size_t x = x0; x < std::min(width, x0 + w); ++x) {
          bytes[(c * height + y) * width + x] = color;
        }
      }
    }
  }
  Tensor t(channels, height, width);
  auto out = t.data();
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const int jitter = static_cast<int>(rng.next() % 9) - 4;
    out[i] = static_cast<float>(std::clamp(int{bytes[i]} + jitter, 0, 255)) / 255.0f;
  }
  return t;
}

std::vector<Tensor> static_scenes(std::size_t scenes, std::size_t frames_per_scene,
                                  std::size_t channels, std::size_t height, std::size_t width,
                                  std::uint64_t seed) {
  SplitMix64 seeds(seed);
  std::vector<Tensor> frames;
  frames.reserve(scenes * frames_per_scene);
  for (std::size_t s = 0; s < scenes; ++s) {
    const Tensor scene = scene_frame(channels, height, width, seeds.next());
    for (std::size_t f = 0; f < frames_per_scene; ++f) frames.push_back(scene);
  }
  return frames;
}

std::vector<Tensor> panning_sequence(std::size_t frames, std::size_t step, std::size_t channels,
                                     std::size_t height, std::size_t width, std::uint64_t seed) {
  const std::size_t wide = width + step * (frames == 0 ? 0 : frames - 1);
  const Tensor world = scene_frame(channels, height, wide, seed);
  std::vector<Tensor> out;
  out.reserve(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    Tensor t(channels, height, width);
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) t.at(c, y, x) = world.at(c, y, x + f * step);
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace cwseg::synth
