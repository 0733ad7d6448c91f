#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nls {

// Bad input or violated precondition. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class GridMismatch : public ConfigError {
 public:
  GridMismatch() : ConfigError("fields live on different grids") {}
};

// A coefficient hypothesis failed at specific nodes.
class HypothesisError : public ConfigError {
 public:
  HypothesisError(const std::string& what, std::vector<int> nodes)
      : ConfigError(what), nodes_(std::move(nodes)) {}
  const std::vector<int>& nodes() const { return nodes_; }

 private:
  std::vector<int> nodes_;
};

// Failure while computing. Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The quadrature grid cannot resolve the requested weight or kernel.
class ResolutionError : public NumericalError {
 public:
  ResolutionError(const std::string& what, long required)
      : NumericalError(what), required_(required) {}
  long required() const { return required_; }

 private:
  long required_;
};

}  // namespace nls
