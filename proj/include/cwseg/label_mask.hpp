#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cwseg {

// Per-pixel class indices, row-major.
struct LabelMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint32_t> labels;

  LabelMask() = default;
  LabelMask(std::size_t h, std::size_t w, std::uint32_t fill = 0)
      : height(h), width(w), labels(h * w, fill) {}

  std::uint32_t& at(std::size_t y, std::size_t x) { return labels[y * width + x]; }
  std::uint32_t at(std::size_t y, std::size_t x) const { return labels[y * width + x]; }
  std::size_t size() const { return labels.size(); }

  friend bool operator==(const LabelMask&, const LabelMask&) = default;
};

}  // namespace cwseg
