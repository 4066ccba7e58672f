#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ynet/condition.hpp"
#include "ynet/tensor.hpp"

namespace ynet {

/// One training/testing unit: initial patch, evolved patch, condition.
struct SamplePair {
  Tensor input;   // [128,128] in [0,1]
  Tensor target;  // [128,128] in [0,1]
  Condition cond;
};

/// Binary PGM ("P5", maxval 255), pixel = round(255 * clamp(v, 0, 1)).
std::string encode_pgm(const Tensor& field);
/// Accepts P5 with maxval 1..255; values come back as pixel / maxval.
Tensor decode_pgm(std::string_view bytes);

void write_pgm(const std::filesystem::path& path, const Tensor& field);
/// Throws IoError if unreadable, FormatError if malformed.
Tensor read_pgm(const std::filesystem::path& path);

/// Exactly two lines, "power=<decimal>" and "speed=<decimal>" (shortest
/// round-trip representation).
std::string format_condition(const Condition& cond);
/// Throws FormatError on malformed text, RangeError on out-of-range values.
Condition parse_condition(std::string_view text);

/// pair_<6-digit index>_{in.pgm,out.pgm,cond.txt}, indices first_index...
void write_dataset(const std::filesystem::path& dir, const std::vector<SamplePair>& pairs,
                   std::size_t first_index = 0);
/// Every pair in `dir`, in index order. Throws IoError for a missing
/// directory and FormatError for incomplete triples.
std::vector<SamplePair> load_dataset(const std::filesystem::path& dir);

/// FNV-1a over every pair's quantized pixels and condition text.
std::uint64_t dataset_hash(const std::vector<SamplePair>& pairs);

/// Binarizes at 0.5.
Tensor binarize(const Tensor& field);

}  // namespace ynet
