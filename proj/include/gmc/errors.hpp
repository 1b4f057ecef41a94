#ifndef GMC_ERRORS_HPP_
#define GMC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace gmc {

// Shapes or lengths that do not line up.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// An index (label, action, group) outside its valid range.
class RangeError : public std::out_of_range {
 public:
  explicit RangeError(const std::string& what) : std::out_of_range(what) {}
};

// An operation invoked in the wrong lifecycle state.
class StateError : public std::logic_error {
 public:
  explicit StateError(const std::string& what) : std::logic_error(what) {}
};

// Malformed input files (IDX, CIFAR, CSV, config).
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Two inputs that are individually valid but disagree with each other.
class ConsistencyError : public std::runtime_error {
 public:
  explicit ConsistencyError(const std::string& what) : std::runtime_error(what) {}
};

// NaN or Inf where a finite value is required.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// An experiment configuration that cannot be run as written.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace gmc

#endif  // GMC_ERRORS_HPP_
