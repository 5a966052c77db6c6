#pragma once

#include <stdexcept>
#include <string>

namespace siatext {

enum class ErrorCategory {
  invalid_argument,  // bad values or preconditions
  io,                // file system failures
  parse,             // malformed text inputs (corpora, specs, vocab files)
  format,            // malformed binary checkpoint
  numeric,           // non-finite values during training
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string message)
      : std::runtime_error(std::move(message)), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

enum class FormatErrorKind {
  bad_magic,
  version_mismatch,
  truncated,
  checksum_mismatch,
};

class FormatError : public Error {
 public:
  FormatError(FormatErrorKind kind, std::string message)
      : Error(ErrorCategory::format, std::move(message)), kind_(kind) {}

  FormatErrorKind kind() const { return kind_; }

 private:
  FormatErrorKind kind_;
};

}  // namespace siatext
