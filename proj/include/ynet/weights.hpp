#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ynet/tensor.hpp"

namespace ynet {

/// Ordered table of named tensors: learnable parameters plus batch-norm
/// running statistics ("buffers"). Iteration follows insertion order, which
/// for a built network is: encoder stages shallow to deep (conv weight, then
/// the four batch-norm tensors, per block), the condition MLP, the merge
/// layer if any, decoder stages deep to shallow, and the output head.
template <typename T>
class BasicModelWeights {
 public:
  struct Entry {
    std::string name;
    BasicTensor<T> tensor;
  };

  void add(std::string name, BasicTensor<T> tensor);

  bool contains(std::string_view name) const;
  BasicTensor<T>& at(std::string_view name);
  const BasicTensor<T>& at(std::string_view name) const;

  std::vector<Entry>& entries() noexcept { return entries_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  /// Batch-norm running statistics are buffers: stored, never optimized.
  static bool is_buffer(std::string_view name);

  /// Scalar count over learnable entries only.
  std::size_t parameter_count() const;

  /// Same names and shapes, all zeros.
  BasicModelWeights zeros_like() const;

  template <typename U>
  BasicModelWeights<U> cast() const {
    BasicModelWeights<U> out;
    for (const auto& e : entries_) out.add(e.name, e.tensor.template cast<U>());
    return out;
  }

  bool operator==(const BasicModelWeights& other) const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

using ModelWeights = BasicModelWeights<float>;

/// Failure reading or writing a weights file; `kind()` distinguishes causes.
class WeightsFormatError : public std::runtime_error {
 public:
  enum class Kind { bad_magic, truncated_payload, duplicate_name, invalid_rank, trailing_bytes, io };

  WeightsFormatError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// "YNW1" | u32 count | per tensor: u32 name length, name, u32 rank, u32 dims,
/// f32 payload. All integers and floats little-endian.
std::string serialize_weights(const ModelWeights& weights);
ModelWeights deserialize_weights(std::string_view bytes);

void save_weights(const ModelWeights& weights, const std::filesystem::path& path);
ModelWeights load_weights(const std::filesystem::path& path);

}  // namespace ynet
