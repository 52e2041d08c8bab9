#pragma once

#include <stdexcept>
#include <string>

namespace mbc {

/// Raised for malformed inputs: bad dimensions, repeated modes, orders out of range.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computed quantity breaks an invariant it must satisfy
/// (non-real correlator, non-PSD reduced density, singular Weingarten system).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

}  // namespace detail
}  // namespace mbc
