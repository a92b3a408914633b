#pragma once

#include <stdexcept>
#include <string>

namespace fdoe {

/// Invalid configuration or model specification. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A design search that never reached a feasible objective. CLI exit code 3.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, int start_index)
      : std::runtime_error(what), start_index_(start_index) {}

  /// 1-based index of the offending starting design (0 = aggregate failure).
  int start_index() const noexcept { return start_index_; }

 private:
  int start_index_;
};

}  // namespace fdoe
