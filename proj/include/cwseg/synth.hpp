#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cwseg/tensor.hpp"

// Deterministic synthetic video. Every sample is a multiple of 1/255 so frames
// survive an 8-bit PNM round trip unchanged.
namespace cwseg::synth {

// Independent uniform noise per sample.
Tensor noise_frame(std::size_t channels, std::size_t height, std::size_t width, std::uint64_t seed);

// A flat background with a handful of colored rectangles plus light noise.
Tensor scene_frame(std::size_t channels, std::size_t height, std::size_t width, std::uint64_t seed);

// `scenes` distinct scenes, each repeated `frames_per_scene` times verbatim.
std::vector<Tensor> static_scenes(std::size_t scenes, std::size_t frames_per_scene,
                                  std::size_t channels, std::size_t height, std::size_t width,
                                  std::uint64_t seed);

// A window sliding `step` pixels per frame across one wide scene.
std::vector<Tensor> panning_sequence(std::size_t frames, std::size_t step, std::size_t channels,
                                     std::size_t height, std::size_t width, std::uint64_t seed);

}  // namespace cwseg::synth
