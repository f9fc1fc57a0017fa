#pragma once

#include <stdexcept>
#include <string>

namespace mixdens {

/// Bad arguments or contract violations caught before any computation.
class input_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Problems rooted in the data itself (parse failures, rows that make the
/// likelihood ill-defined).
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Nonfinite losses, overflows, and other numeric breakdowns discovered
/// mid-computation.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mixdens
