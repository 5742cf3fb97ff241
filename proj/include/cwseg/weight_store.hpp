#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cwseg {

struct WeightEntry {
  std::vector<std::uint32_t> dims;
  std::vector<float> payload;

  std::uint64_t element_count() const;
  friend bool operator==(const WeightEntry&, const WeightEntry&) = default;
};

// Named parameter blobs. A conv layer "name" is stored as two entries:
// "name" holding the [out, in, kh, kw] kernel and "name/bias" holding [out].
using WeightStore = std::map<std::string, WeightEntry>;

inline std::string bias_key(const std::string& layer) { return layer + "/bias"; }

}  // namespace cwseg
