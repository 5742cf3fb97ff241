#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include "cwseg/error.hpp"
#include "cwseg/media_io.hpp"
#include "cwseg/random.hpp"

namespace cwseg {

namespace {

constexpr std::size_t kMagicLen = sizeof(kWeightMagic) - 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32(const std::string& context) {
    need(4, context);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * b);
    return v;
  }

  std::string text(std::size_t n, const std::string& context) {
    need(n, context);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const std::string& context) {
    if (remaining() < n) {
      std::ostringstream os;
      os << "truncated weight file while reading " << context << ": need " << n
         << " bytes at offset " << pos_ << ", " << remaining() << " left";
      throw FormatError(os.str());
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t WeightEntry::element_count() const {
  std::uint64_t n = 1;
  for (std::uint32_t d : dims) n *= d;
  return n;
}

std::vector<std::uint8_t> serialize_weights(const WeightStore& store) {
  std::vector<std::uint8_t> out(kWeightMagic, kWeightMagic + kMagicLen);
  put_u32(out, static_cast<std::uint32_t>(store.size()));
  for (const auto& [name, entry] : store) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put_u32(out, static_cast<std::uint32_t>(entry.dims.size()));
    for (std::uint32_t d : entry.dims) put_u32(out, d);
    put_u32(out, static_cast<std::uint32_t>(entry.payload.size()));
    for (float v : entry.payload) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

WeightStore deserialize_weights(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  const std::string magic = in.text(std::min(kMagicLen, bytes.size()), "magic");
  if (magic != kWeightMagic) {
    if (magic.size() == kMagicLen && magic.compare(0, kMagicLen - 1, "CWFCN") == 0) {
      throw FormatError("unsupported weight format version '" + magic.substr(kMagicLen - 1) +
                        "' (this build reads version 1, magic CWFCN1)");
    }
    throw FormatError("not a weight file: expected magic CWFCN1 (format version 1)");
  }
  const std::uint32_t count = in.u32("entry count");
  WeightStore store;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string where = "entry " + std::to_string(i);
    const std::uint32_t name_len = in.u32(where + " name length");
    const std::string name = in.text(name_len, where + " name");
    const std::string label = "entry \"" + name + "\"";
    WeightEntry entry;
    const std::uint32_t rank = in.u32(label + " rank");
    if (rank > 8) throw FormatError("corrupt " + label + ": rank " + std::to_string(rank));
    for (std::uint32_t r = 0; r < rank; ++r) entry.dims.push_back(in.u32(label + " dims"));
    const std::uint32_t length = in.u32(label + " payload length");
    if (length != entry.element_count()) {
      std::ostringstream os;
      os << "corrupt " << label << ": dims product " << entry.element_count()
         << " != payload length " << length;
      throw FormatError(os.str());
    }
    if (static_cast<std::uint64_t>(length) * 4 > in.remaining()) {
      std::ostringstream os;
      os << "truncated weight file: " << label << " needs " << std::uint64_t{length} * 4
         << " payload bytes at offset " << in.offset() << ", " << in.remaining() << " left";
      throw FormatError(os.str());
    }
    entry.payload.resize(length);
    for (float& v : entry.payload) v = std::bit_cast<float>(in.u32(label + " payload"));
    if (!store.emplace(name, std::move(entry)).second) {
      throw FormatError("duplicate weight entry \"" + name + "\"");
    }
  }
  if (in.remaining() != 0) {
    throw FormatError("trailing " + std::to_string(in.remaining()) + " bytes after last entry at offset " +
                      std::to_string(in.offset()));
  }
  return store;
}

void write_weights(const WeightStore& store, const std::filesystem::path& path) {
  write_file(path, serialize_weights(store));
}

WeightStore read_weights(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return deserialize_weights(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

WeightStore gen_weights(const NetConfig& cfg, std::uint64_t seed) {
  SplitMix64 rng(seed);
  WeightStore store;
  for (const LayerSpec& spec : topology(cfg)) {
    const std::size_t taps = spec.kernel * spec.kernel;
    const double fan_in = static_cast<double>(spec.in_channels * taps);
    const double fan_out = static_cast<double>(spec.out_channels * taps);
    const auto scale = static_cast<float>(std::sqrt(6.0 / (fan_in + fan_out)));

    WeightEntry w;
    w.dims = {static_cast<std::uint32_t>(spec.out_channels),
              static_cast<std::uint32_t>(spec.in_channels), static_cast<std::uint32_t>(spec.kernel),
              static_cast<std::uint32_t>(spec.kernel)};
    w.payload.resize(spec.out_channels * spec.in_channels * taps);
    for (float& v : w.payload) v = rng.uniform_symmetric(scale);

    WeightEntry b;
    b.dims = {static_cast<std::uint32_t>(spec.out_channels)};
    b.payload.assign(spec.out_channels, 0.0f);

    store.emplace(spec.name, std::move(w));
    store.emplace(bias_key(spec.name), std::move(b));
  }
  return store;
}

}  // namespace cwseg
