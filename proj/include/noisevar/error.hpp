#pragma once

#include <stdexcept>
#include <string>

namespace noisevar {

/// Failure category; the C API and the CLI exit codes are derived from it.
enum class ErrorKind {
  InvalidArgument,  // caller passed something malformed (bad spec, bad config)
  Io,               // file could not be opened or written
  Parse,            // malformed input file content
  Data,             // well-formed input that the analysis cannot use
  Numeric,          // numerical breakdown (collinearity, divergence, ...)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace noisevar
