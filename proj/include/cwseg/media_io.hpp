#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cwseg/fcn_net.hpp"
#include "cwseg/label_mask.hpp"
#include "cwseg/tensor.hpp"
#include "cwseg/weight_store.hpp"

namespace cwseg {

// ---- Images ---------------------------------------------------------------
//
// Binary 8-bit netpbm: P5 (grayscale, 1 channel) and P6 (RGB, 3 channels).
// Samples map to byte / 255 in float. Header comments ('#') are accepted.

Tensor decode_pnm(std::span<const std::uint8_t> bytes);
// Inverse of decode_pnm for 1- or 3-channel tensors; samples are rounded to
// the nearest byte after clamping to [0, 1].
std::vector<std::uint8_t> encode_pnm(const Tensor& image);

Tensor read_image(const std::filesystem::path& path);
void write_image(const Tensor& image, const std::filesystem::path& path);

// Single-channel PFM ("Pf", little-endian, rows stored bottom to top).
std::vector<std::uint8_t> encode_pfm(std::span<const float> values, std::size_t height,
                                     std::size_t width);
Tensor decode_pfm(std::span<const std::uint8_t> bytes);

// ---- Palettes and masks ---------------------------------------------------

using Rgb = std::array<std::uint8_t, 3>;

struct PaletteEntry {
  Rgb color;
  std::uint32_t label;
  friend bool operator==(const PaletteEntry&, const PaletteEntry&) = default;
};

// Color -> class table. Several colors may share a class; encoding uses the
// first color listed for a class.
class Palette {
 public:
  Palette() = default;
  explicit Palette(std::vector<PaletteEntry> entries);

  // Black = 0 (background / other road), magenta (255,0,255) = 1 (road).
  static Palette road_default();
  // Tokens separated by whitespace or ';': "R,G,B" (class = token position)
  // or "R,G,B=K".
  static Palette parse(const std::string& text);

  std::optional<std::uint32_t> label_of(const Rgb& color) const;
  std::optional<Rgb> color_of(std::uint32_t label) const;
  const std::vector<PaletteEntry>& entries() const { return entries_; }
  std::string to_string() const;

  friend bool operator==(const Palette&, const Palette&) = default;

 private:
  std::vector<PaletteEntry> entries_;
};

inline constexpr Rgb kMagenta{255, 0, 255};

LabelMask decode_gt_mask(const Tensor& image, const Palette& palette);
Tensor encode_mask(const LabelMask& mask, const Palette& palette);
void write_mask(const LabelMask& mask, const Palette& palette, const std::filesystem::path& path);
LabelMask read_mask(const std::filesystem::path& path, const Palette& palette);

// ---- Weight stores --------------------------------------------------------
//
// Layout, all integers little-endian u32, reals little-endian IEEE binary32:
//   "CWFCN1"  entry_count
//   per entry: name_len name_bytes rank dims[rank] element_count payload[element_count]
// Entries are written in name order.

inline constexpr char kWeightMagic[] = "CWFCN1";

std::vector<std::uint8_t> serialize_weights(const WeightStore& store);
WeightStore deserialize_weights(std::span<const std::uint8_t> bytes);
void write_weights(const WeightStore& store, const std::filesystem::path& path);
WeightStore read_weights(const std::filesystem::path& path);

// Glorot-uniform kernels, zero biases. A single SplitMix64 stream seeded with
// `seed` is consumed layer by layer in topology order, kernel elements in
// [out][in][kh][kw] order; each element is (2u - 1) * s, u = (next() >> 40) *
// 2^-24, s = sqrt(6 / (fan_in + fan_out)) with fan = channels * kh * kw.
WeightStore gen_weights(const NetConfig& cfg, std::uint64_t seed);

// ---- Manifests ------------------------------------------------------------
//
// Plain text, one frame per line: "<frame path> [<ground-truth path>]".
// Blank lines and lines starting with '#' are ignored, except a
// "#palette <tokens>" line which sets the class palette. Relative paths are
// resolved against the manifest's directory.

struct SequenceManifest {
  std::vector<std::filesystem::path> frames;
  std::vector<std::filesystem::path> ground_truth;  // empty or frames.size()
  std::optional<Palette> palette;

  bool has_ground_truth() const { return !ground_truth.empty(); }
};

SequenceManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir);
SequenceManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const SequenceManifest& manifest, const std::filesystem::path& path);

// Mask / score file names derived from a frame path.
std::filesystem::path mask_path_for(const std::filesystem::path& dir,
                                    const std::filesystem::path& frame);
std::filesystem::path score_path_for(const std::filesystem::path& dir,
                                     const std::filesystem::path& frame);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace cwseg
