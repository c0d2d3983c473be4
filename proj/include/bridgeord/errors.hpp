#pragma once

#include <stdexcept>
#include <string>

namespace bridgeord {

/// Bad input: malformed data, unknown levels, inconsistent shapes.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The sampler could not produce a usable run (divergences, collapsed step size).
class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by a log-density evaluation that produced a non-finite value.
/// `block()` names the term that went bad ("likelihood", "prior:phi_v", ...).
class NonFiniteDensity : public SamplingError {
 public:
  NonFiniteDensity(std::string block, const std::string& what)
      : SamplingError(what), block_(std::move(block)) {}
  const std::string& block() const noexcept { return block_; }

 private:
  std::string block_;
};

/// Filesystem or file-format failure (missing file, truncated draws, bad version).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bridgeord
