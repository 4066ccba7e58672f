#include "ynet/weights.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace ynet {

template <typename T>
void BasicModelWeights<T>::add(std::string name, BasicTensor<T> tensor) {
  if (index_.contains(name)) {
    throw WeightsFormatError(WeightsFormatError::Kind::duplicate_name,
                             "duplicate weight name '" + name + "'");
  }
  index_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), std::move(tensor)});
}

template <typename T>
bool BasicModelWeights<T>::contains(std::string_view name) const {
  return index_.contains(std::string(name));
}

template <typename T>
BasicTensor<T>& BasicModelWeights<T>::at(std::string_view name) {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) throw std::out_of_range("no weight named '" + std::string(name) + "'");
  return entries_[it->second].tensor;
}

template <typename T>
const BasicTensor<T>& BasicModelWeights<T>::at(std::string_view name) const {
  return const_cast<BasicModelWeights*>(this)->at(name);
}

template <typename T>
bool BasicModelWeights<T>::is_buffer(std::string_view name) {
  return name.ends_with(".running_mean") || name.ends_with(".running_var");
}

template <typename T>
std::size_t BasicModelWeights<T>::parameter_count() const {
  std::size_t count = 0;
  for (const auto& e : entries_) {
    if (!is_buffer(e.name)) count += e.tensor.size();
  }
  return count;
}

template <typename T>
BasicModelWeights<T> BasicModelWeights<T>::zeros_like() const {
  BasicModelWeights out;
  for (const auto& e : entries_) out.add(e.name, BasicTensor<T>::zeros_like(e.tensor));
  return out;
}

template <typename T>
bool BasicModelWeights<T>::operator==(const BasicModelWeights& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.name != b.name || a.tensor.shape() != b.tensor.shape()) return false;
    // Bitwise so that -0.0 and NaN payloads count as differences.
    if (std::memcmp(a.tensor.data(), b.tensor.data(), a.tensor.size() * sizeof(T)) != 0) {
      return false;
    }
  }
  return true;
}

template class BasicModelWeights<float>;
template class BasicModelWeights<double>;

// ------------------------------------------------------------------- YNW1

namespace {

constexpr char kMagic[4] = {'Y', 'N', 'W', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw WeightsFormatError(WeightsFormatError::Kind::truncated_payload,
                               std::string("truncated payload while reading ") + what);
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_weights(const ModelWeights& weights) {
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, static_cast<std::uint32_t>(weights.size()));
  for (const auto& e : weights.entries()) {
    put_u32(out, static_cast<std::uint32_t>(e.name.size()));
    out += e.name;
    put_u32(out, static_cast<std::uint32_t>(e.tensor.rank()));
    for (std::size_t d : e.tensor.shape()) put_u32(out, static_cast<std::uint32_t>(d));
    for (float v : e.tensor.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

ModelWeights deserialize_weights(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) || bytes.substr(0, sizeof(kMagic)) !=
                                           std::string_view(kMagic, sizeof(kMagic))) {
    throw WeightsFormatError(WeightsFormatError::Kind::bad_magic,
                             "bad magic: not a YNW1 weights file");
  }
  Reader in(bytes.substr(sizeof(kMagic)));
  const std::uint32_t count = in.u32("tensor count");
  ModelWeights weights;
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::uint32_t name_len = in.u32("name length");
    std::string name(in.take(name_len, "tensor name"));
    const std::uint32_t rank = in.u32("rank");
    if (rank < 1 || rank > 4) {
      throw WeightsFormatError(WeightsFormatError::Kind::invalid_rank,
                               "tensor '" + name + "' has invalid rank " + std::to_string(rank));
    }
    Shape shape(rank);
    for (auto& d : shape) d = in.u32("dimension");
    const std::size_t numel = shape_numel(shape);
    if (numel > in.remaining() / 4) {
      throw WeightsFormatError(WeightsFormatError::Kind::truncated_payload,
                               "truncated payload for tensor '" + name + "'");
    }
    std::vector<float> values(numel);
    for (auto& v : values) v = std::bit_cast<float>(in.u32("payload"));
    if (weights.contains(name)) {
      throw WeightsFormatError(WeightsFormatError::Kind::duplicate_name,
                               "duplicate tensor name '" + name + "'");
    }
    weights.add(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  if (in.remaining() != 0) {
    throw WeightsFormatError(WeightsFormatError::Kind::trailing_bytes,
                             std::to_string(in.remaining()) + " unexpected bytes after payload");
  }
  return weights;
}

void save_weights(const ModelWeights& weights, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw WeightsFormatError(WeightsFormatError::Kind::io, "cannot write " + path.string());
  }
  const std::string bytes = serialize_weights(weights);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw WeightsFormatError(WeightsFormatError::Kind::io, "write failed: " + path.string());
}

ModelWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WeightsFormatError(WeightsFormatError::Kind::io, "cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_weights(bytes);
}

}  // namespace ynet
