#pragma once

#include <stdexcept>

namespace ynet {

/// A scalar input (condition value, CLI flag) outside its admissible range.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Malformed or unreadable data file (PGM, condition sidecar, dataset layout).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file or directory that is missing or cannot be opened.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ynet
