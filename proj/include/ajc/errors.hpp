#pragma once

#include <stdexcept>
#include <string>

namespace ajc {

/// An iterative solve or truncated series did not reach its tolerance.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// A committor or coherence query was given an empty target set.
class EmptyTarget : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or unresolvable run configuration / input file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The command line or configuration does not describe any work to do.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ajc
