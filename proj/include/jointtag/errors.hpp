#pragma once

#include <stdexcept>
#include <string>

namespace jointtag {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A morphological analysis string that cannot be split into root + tags.
class AnalysisError : public Error {
 public:
  explicit AnalysisError(const std::string& raw)
      : Error("malformed analysis: '" + raw + "'"), raw_(raw) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

// Corpus file could not be parsed; carries the 1-based line number (0 if none).
class LoadError : public Error {
 public:
  LoadError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Inconsistent dimensions, architecture/feature mismatch, bad hyperparameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Shape mismatch detected while evaluating an operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Data that violates a precondition (invalid labels, misaligned inputs...).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace jointtag
