#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cwseg/error.hpp"
#include "cwseg/media_io.hpp"

namespace cwseg {

namespace fs = std::filesystem;

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return bytes;
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

// Netpbm-style header tokenizer: whitespace separated, '#' starts a comment
// running to end of line.
class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::string token() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) ++pos_;
    if (start == pos_) {
      throw FormatError("truncated header at byte offset " + std::to_string(pos_));
    }
    return std::string(bytes_.begin() + static_cast<std::ptrdiff_t>(start),
                       bytes_.begin() + static_cast<std::ptrdiff_t>(pos_));
  }

  std::size_t number(const char* what) {
    const std::size_t at = pos_;
    const std::string t = token();
    if (t.empty() || t.size() > 9 ||
        !std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      throw FormatError(std::string("bad ") + what + " \"" + t + "\" near byte offset " +
                        std::to_string(at));
    }
    return std::stoul(t);
  }

  // Exactly one whitespace byte separates the header from the payload.
  std::size_t payload_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw FormatError("missing separator before payload at byte offset " + std::to_string(pos_));
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint8_t to_byte(float v) {
  const double c = std::clamp(static_cast<double>(v), 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

void append(std::vector<std::uint8_t>& out, const std::string& s) {
  out.insert(out.end(), s.begin(), s.end());
}

}  // namespace

Tensor decode_pnm(std::span<const std::uint8_t> bytes) {
  HeaderReader header(bytes);
  const std::string magic = header.token();
  std::size_t channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw FormatError("unsupported image magic \"" + magic + "\" (expected P5 or P6)");
  }
  const std::size_t width = header.number("width");
  const std::size_t height = header.number("height");
  const std::size_t maxval = header.number("maxval");
  if (width == 0 || height == 0) throw FormatError("image has zero width or height");
  if (maxval != 255) {
    throw FormatError("unsupported maxval " + std::to_string(maxval) + " (only 8-bit, 255)");
  }
  const std::size_t offset = header.payload_offset();
  const std::size_t need = width * height * channels;
  if (bytes.size() < offset + need) {
    std::ostringstream os;
    os << "truncated " << magic << " payload: need " << need << " bytes from offset " << offset
       << ", data ends at byte offset " << bytes.size();
    throw FormatError(os.str());
  }

  Tensor t(channels, height, width);
  const std::uint8_t* p = bytes.data() + offset;
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      for (std::size_t c = 0; c < channels; ++c) {
        t.at(c, y, x) = static_cast<float>(*p++) / 255.0f;
      }
    }
  }
  return t;
}

std::vector<std::uint8_t> encode_pnm(const Tensor& image) {
  if (image.empty() || (image.channels() != 1 && image.channels() != 3)) {
    throw ShapeError("encode_pnm: need a 1- or 3-channel tensor, got " +
                     (image.empty() ? std::string("empty") : image.shape_string()));
  }
  std::vector<std::uint8_t> out;
  append(out, (image.channels() == 1 ? "P5\n" : "P6\n") + std::to_string(image.width()) + " " +
                  std::to_string(image.height()) + "\n255\n");
  out.reserve(out.size() + image.size());
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      for (std::size_t c = 0; c < image.channels(); ++c) out.push_back(to_byte(image.at(c, y, x)));
    }
  }
  return out;
}

Tensor read_image(const fs::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_pnm(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_image(const Tensor& image, const fs::path& path) { write_file(path, encode_pnm(image)); }

std::vector<std::uint8_t> encode_pfm(std::span<const float> values, std::size_t height,
                                     std::size_t width) {
  if (values.size() != height * width || height == 0 || width == 0) {
    throw ShapeError("encode_pfm: " + std::to_string(values.size()) + " values for " +
                     std::to_string(height) + "x" + std::to_string(width));
  }
  std::vector<std::uint8_t> out;
  append(out, "Pf\n" + std::to_string(width) + " " + std::to_string(height) + "\n-1.0\n");
  for (std::size_t row = height; row-- > 0;) {
    for (std::size_t x = 0; x < width; ++x) {
      const auto bits = std::bit_cast<std::uint32_t>(values[row * width + x]);
      for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
    }
  }
  return out;
}

Tensor decode_pfm(std::span<const std::uint8_t> bytes) {
  HeaderReader header(bytes);
  const std::string magic = header.token();
  if (magic != "Pf") throw FormatError("unsupported float map magic \"" + magic + "\"");
  const std::size_t width = header.number("width");
  const std::size_t height = header.number("height");
  const std::string scale = header.token();
  if (scale.empty() || scale[0] != '-') {
    throw FormatError("only little-endian PFM (negative scale) is supported");
  }
  if (width == 0 || height == 0) throw FormatError("float map has zero width or height");
  const std::size_t offset = header.payload_offset();
  const std::size_t need = width * height * 4;
  if (bytes.size() < offset + need) {
    std::ostringstream os;
    os << "truncated PFM payload: need " << need << " bytes from offset " << offset
       << ", data ends at byte offset " << bytes.size();
    throw FormatError(os.str());
  }
  Tensor t(1, height, width);
  const std::uint8_t* p = bytes.data() + offset;
  for (std::size_t row = height; row-- > 0;) {
    for (std::size_t x = 0; x < width; ++x) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(*p++) << (8 * b);
      t.at(0, row, x) = std::bit_cast<float>(bits);
    }
  }
  return t;
}

// ---- Palette ----------------------------------------------------------------

Palette::Palette(std::vector<PaletteEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (entries_[i].color == entries_[j].color && entries_[i].label != entries_[j].label) {
        throw ParamError("palette maps one color to two classes");
      }
    }
  }
}

Palette Palette::road_default() { return Palette({{{0, 0, 0}, 0}, {kMagenta, 1}}); }

Palette Palette::parse(const std::string& text) {
  std::string normalized = text;
  std::replace(normalized.begin(), normalized.end(), ';', ' ');
  std::istringstream in(normalized);
  std::vector<PaletteEntry> entries;
  std::string token;
  while (in >> token) {
    std::uint32_t label = static_cast<std::uint32_t>(entries.size());
    std::string color = token;
    if (const auto eq = token.find('='); eq != std::string::npos) {
      color = token.substr(0, eq);
      try {
        label = static_cast<std::uint32_t>(std::stoul(token.substr(eq + 1)));
      } catch (const std::exception&) {
        throw ParamError("palette token \"" + token + "\": bad class index");
      }
    }
    Rgb rgb{};
    std::istringstream cs(color);
    std::string part;
    int n = 0;
    while (std::getline(cs, part, ',')) {
      int v = -1;
      try {
        std::size_t used = 0;
        v = std::stoi(part, &used);
        if (used != part.size()) v = -1;
      } catch (const std::exception&) {
      }
      if (n >= 3 || v < 0 || v > 255) {
        throw ParamError("palette token \"" + token + "\": expected R,G,B with values 0..255");
      }
      rgb[n++] = static_cast<std::uint8_t>(v);
    }
    if (n != 3) throw ParamError("palette token \"" + token + "\": expected R,G,B");
    entries.push_back({rgb, label});
  }
  if (entries.empty()) throw ParamError("palette is empty");
  return Palette(std::move(entries));
}

std::optional<std::uint32_t> Palette::label_of(const Rgb& color) const {
  for (const auto& e : entries_) {
    if (e.color == color) return e.label;
  }
  return std::nullopt;
}

std::optional<Rgb> Palette::color_of(std::uint32_t label) const {
  for (const auto& e : entries_) {
    if (e.label == label) return e.color;
  }
  return std::nullopt;
}

std::string Palette::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    os << (i ? " " : "") << int{e.color[0]} << "," << int{e.color[1]} << "," << int{e.color[2]}
       << "=" << e.label;
  }
  return os.str();
}

// ---- Masks ------------------------------------------------------------------

LabelMask decode_gt_mask(const Tensor& image, const Palette& palette) {
  if (image.empty() || (image.channels() != 3 && image.channels() != 1)) {
    throw ShapeError("decode_gt_mask: need an RGB or grayscale image, got " +
                     (image.empty() ? std::string("empty") : image.shape_string()));
  }
  const bool gray = image.channels() == 1;
  LabelMask mask(image.height(), image.width());
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      Rgb c{};
      for (std::size_t ch = 0; ch < 3; ++ch) c[ch] = to_byte(image.at(gray ? 0 : ch, y, x));
      const auto label = palette.label_of(c);
      if (!label) {
        std::ostringstream os;
        os << "color (" << int{c[0]} << "," << int{c[1]} << "," << int{c[2]}
           << ") at pixel (x=" << x << ", y=" << y << ") is not in the palette ["
           << palette.to_string() << "]";
        throw FormatError(os.str());
      }
      mask.at(y, x) = *label;
    }
  }
  return mask;
}

Tensor encode_mask(const LabelMask& mask, const Palette& palette) {
  if (mask.height == 0 || mask.width == 0) throw ShapeError("encode_mask: empty mask");
  Tensor image(3, mask.height, mask.width);
  for (std::size_t y = 0; y < mask.height; ++y) {
    for (std::size_t x = 0; x < mask.width; ++x) {
      const auto color = palette.color_of(mask.at(y, x));
      if (!color) {
        throw ParamError("encode_mask: class " + std::to_string(mask.at(y, x)) +
                         " has no palette color");
      }
      for (std::size_t ch = 0; ch < 3; ++ch) {
        image.at(ch, y, x) = static_cast<float>((*color)[ch]) / 255.0f;
      }
    }
  }
  return image;
}

void write_mask(const LabelMask& mask, const Palette& palette, const fs::path& path) {
  write_image(encode_mask(mask, palette), path);
}

LabelMask read_mask(const fs::path& path, const Palette& palette) {
  try {
    return decode_gt_mask(read_image(path), palette);
  } catch (const FormatError& e) {
    const std::string what = e.what();
    if (what.rfind(path.string(), 0) == 0) throw;
    throw FormatError(path.string() + ": " + what);
  }
}

fs::path mask_path_for(const fs::path& dir, const fs::path& frame) {
  return dir / (frame.stem().string() + "_mask.ppm");
}

fs::path score_path_for(const fs::path& dir, const fs::path& frame) {
  return dir / (frame.stem().string() + "_score.pfm");
}

}  // namespace cwseg
