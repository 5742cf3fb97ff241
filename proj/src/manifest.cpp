#include <fstream>
#include <sstream>

#include "cwseg/error.hpp"
#include "cwseg/media_io.hpp"

namespace cwseg {

namespace fs = std::filesystem;

SequenceManifest parse_manifest(const std::string& text, const fs::path& base_dir) {
  SequenceManifest m;
  auto resolve = [&base_dir](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t with_gt = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;
    if (first == "#palette") {
      std::string rest;
      std::getline(fields, rest);
      m.palette = Palette::parse(rest);
      continue;
    }
    if (first[0] == '#') continue;

    std::string second;
    std::string extra;
    const bool has_gt = static_cast<bool>(fields >> second);
    if (fields >> extra) {
      throw FormatError("manifest line " + std::to_string(line_no) +
                        ": expected \"<frame> [<ground truth>]\", found extra field \"" + extra + "\"");
    }
    m.frames.push_back(resolve(first));
    if (has_gt) {
      m.ground_truth.push_back(resolve(second));
      ++with_gt;
    }
  }
  if (with_gt != 0 && with_gt != m.frames.size()) {
    throw FormatError("manifest lists ground truth for " + std::to_string(with_gt) + " of " +
                      std::to_string(m.frames.size()) + " frames; it must be all or none");
  }
  return m;
}

SequenceManifest read_manifest(const fs::path& path) {
  const auto bytes = read_file(path);
  try {
    return parse_manifest(std::string(bytes.begin(), bytes.end()), path.parent_path());
  } catch (const Error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_manifest(const SequenceManifest& manifest, const fs::path& path) {
  std::ostringstream os;
  if (manifest.palette) os << "#palette " << manifest.palette->to_string() << "\n";
  for (std::size_t i = 0; i < manifest.frames.size(); ++i) {
    os << manifest.frames[i].string();
    if (manifest.has_ground_truth()) os << " " << manifest.ground_truth.at(i).string();
    os << "\n";
  }
  const std::string s = os.str();
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

}  // namespace cwseg
