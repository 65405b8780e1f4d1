#pragma once

#include <stdexcept>
#include <string>

namespace iaclint {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files (YAML, token files, model files, metadata).
class ParseError : public Error {
 public:
  ParseError(const std::string& path, int line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), path_(path), line_(line) {}

  const std::string& path() const { return path_; }
  int line() const { return line_; }

 private:
  std::string path_;
  int line_;
};

/// Violated operation precondition (too few examples, single class, shape mismatch, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Training diverged (non-finite loss or weights).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace iaclint
