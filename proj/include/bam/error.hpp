#pragma once

#include <stdexcept>
#include <string>

namespace bam {

enum class ErrorKind {
  InvalidInput,   // non-finite data, malformed arguments
  Shape,          // block structure / dimension mismatch
  Parameter,      // out-of-range scalar parameter (alpha, tau, lambda...)
  Evaluation,     // an oracle returned a non-finite value
  Configuration,  // strategy/oracle incompatibility, bad config
  Estimation,     // empirical estimator could not produce a value
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bam
