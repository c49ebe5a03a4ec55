#ifndef NETADV_ERROR_HPP
#define NETADV_ERROR_HPP

#include <stdexcept>
#include <string>

namespace netadv {

// malformed input text (CSV lines, JSON documents)
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// semantically invalid data or configuration (bad hyperparameters,
// unknown categories, single-class training sets, schema mismatches)
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// a capability was requested that the model does not provide
// (e.g. gradients from a KNN)
class CapabilityError : public std::runtime_error {
 public:
  explicit CapabilityError(const std::string& msg) : std::runtime_error(msg) {}
};

// broken internal invariant; indicates a bug, not bad input
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace netadv

#endif  // NETADV_ERROR_HPP
