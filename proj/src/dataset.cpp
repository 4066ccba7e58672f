#include "ynet/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "ynet/errors.hpp"

namespace ynet {

namespace fs = std::filesystem;

namespace {

std::uint8_t quantize(float v) {
  return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(static_cast<double>(v), 0.0, 1.0)));
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

// Header tokens are separated by whitespace; '#' starts a comment line.
struct HeaderReader {
  std::string_view bytes;
  std::size_t pos = 0;

  void skip_space() {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos;
      } else {
        break;
      }
    }
  }

  std::size_t number(const char* what) {
    skip_space();
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(bytes.data() + pos, bytes.data() + bytes.size(), v);
    if (ec != std::errc() || v == 0) throw FormatError(std::string("PGM: bad ") + what);
    pos = static_cast<std::size_t>(ptr - bytes.data());
    return v;
  }
};

std::string pair_stem(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "pair_%06zu", index);
  return buf;
}

}  // namespace

std::string encode_pgm(const Tensor& field) {
  if (field.rank() != 2) throw ShapeError("encode_pgm: expected [H,W], got " + shape_string(field.shape()));
  std::string out = "P5\n" + std::to_string(field.dim(1)) + " " + std::to_string(field.dim(0)) + "\n255\n";
  out.reserve(out.size() + field.size());
  for (float v : field.values()) out.push_back(static_cast<char>(quantize(v)));
  return out;
}

Tensor decode_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes.substr(0, 2) != "P5") throw FormatError("PGM: missing P5 magic");
  HeaderReader h{bytes, 2};
  const std::size_t width = h.number("width");
  const std::size_t height = h.number("height");
  const std::size_t maxval = h.number("maxval");
  if (maxval > 255) throw FormatError("PGM: only 8-bit maxval supported");
  if (h.pos >= bytes.size()) throw FormatError("PGM: truncated header");
  ++h.pos;  // the single whitespace byte before the raster
  if (bytes.size() - h.pos != width * height) {
    throw FormatError("PGM: expected " + std::to_string(width * height) + " pixel bytes, found " +
                      std::to_string(bytes.size() - h.pos));
  }
  Tensor field({height, width});
  const float scale = 1.0f / static_cast<float>(maxval);
  for (std::size_t i = 0; i < field.size(); ++i) {
    const auto px = static_cast<unsigned char>(bytes[h.pos + i]);
    if (px > maxval) throw FormatError("PGM: pixel exceeds maxval");
    field[i] = static_cast<float>(px) * scale;
  }
  return field;
}

void write_pgm(const fs::path& path, const Tensor& field) { write_file(path, encode_pgm(field)); }

Tensor read_pgm(const fs::path& path) {
  try {
    return decode_pgm(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string format_condition(const Condition& cond) {
  auto decimal = [](double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
  };
  return "power=" + decimal(cond.power()) + "\nspeed=" + decimal(cond.speed()) + "\n";
}

Condition parse_condition(std::string_view text) {
  double values[2] = {0.0, 0.0};
  const char* keys[2] = {"power=", "speed="};
  std::size_t pos = 0;
  for (int i = 0; i < 2; ++i) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::string_view key = keys[i];
    if (!line.starts_with(key)) throw FormatError("condition: expected line '" + std::string(key) + "<decimal>'");
    line.remove_prefix(key.size());
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), values[i]);
    if (ec != std::errc() || ptr != line.data() + line.size() || line.empty()) {
      throw FormatError("condition: bad decimal '" + std::string(line) + "'");
    }
    pos = end + 1;
  }
  if (pos < text.size() && text.find_first_not_of("\r\n", pos) != std::string_view::npos) {
    throw FormatError("condition: unexpected trailing content");
  }
  return Condition(values[0], values[1]);
}

void write_dataset(const fs::path& dir, const std::vector<SamplePair>& pairs, std::size_t first_index) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::string stem = pair_stem(first_index + i);
    write_pgm(dir / (stem + "_in.pgm"), pairs[i].input);
    write_pgm(dir / (stem + "_out.pgm"), pairs[i].target);
    write_file(dir / (stem + "_cond.txt"), format_condition(pairs[i].cond));
  }
}

std::vector<SamplePair> load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("dataset directory not found: " + dir.string());
  // index -> bitmask of present parts (1 in, 2 out, 4 cond)
  std::map<std::size_t, int> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (!name.starts_with("pair_") || name.size() < 11) continue;
    std::size_t index = 0;
    const auto [ptr, ec] = std::from_chars(name.data() + 5, name.data() + 11, index);
    if (ec != std::errc() || ptr != name.data() + 11) continue;
    const std::string_view rest = std::string_view(name).substr(11);
    if (rest == "_in.pgm") found[index] |= 1;
    else if (rest == "_out.pgm") found[index] |= 2;
    else if (rest == "_cond.txt") found[index] |= 4;
  }
  std::vector<SamplePair> pairs;
  pairs.reserve(found.size());
  for (const auto& [index, parts] : found) {
    const std::string stem = pair_stem(index);
    if (parts != 7) throw FormatError("dataset: incomplete pair " + (dir / stem).string());
    SamplePair p;
    p.input = read_pgm(dir / (stem + "_in.pgm"));
    p.target = read_pgm(dir / (stem + "_out.pgm"));
    if (p.input.shape() != p.target.shape()) throw FormatError("dataset: shape mismatch in " + stem);
    try {
      p.cond = parse_condition(read_file(dir / (stem + "_cond.txt")));
    } catch (const FormatError& e) {
      throw FormatError((dir / stem).string() + ": " + e.what());
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::uint64_t dataset_hash(const std::vector<SamplePair>& pairs) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&](unsigned char byte) {
    h ^= byte;
    h *= 0x100000001b3ull;
  };
  for (const auto& p : pairs) {
    for (const Tensor* t : {&p.input, &p.target}) {
      for (std::size_t d : t->shape()) {
        for (int b = 0; b < 4; ++b) mix(static_cast<unsigned char>(d >> (8 * b)));
      }
      for (float v : t->values()) mix(quantize(v));
    }
    for (char c : format_condition(p.cond)) mix(static_cast<unsigned char>(c));
  }
  return h;
}

Tensor binarize(const Tensor& field) {
  Tensor out(field.shape());
  for (std::size_t i = 0; i < field.size(); ++i) out[i] = field[i] >= 0.5f ? 1.0f : 0.0f;
  return out;
}

}  // namespace ynet
