#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ndecode {

enum class ErrorKind {
  config,        // invalid configuration or precondition on user-supplied settings
  range,         // index or window outside the valid domain
  architecture,  // layer table is inconsistent
  data,          // inconsistent or missing data
  parse,         // malformed binary input
  shape,         // tensor dimension mismatch
  degenerate,    // zero-norm input where a direction is required
  contract,      // caller violated a documented input contract
  io,            // filesystem failure
  divergence,    // non-finite training loss
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; the kind selects the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

  /// 2 config, 3 data/format, 4 numerical divergence.
  int exit_code() const noexcept;

 private:
  ErrorKind kind_;
};

/// Malformed binary input; carries the byte offset where decoding failed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::uint64_t offset);
  std::uint64_t offset() const noexcept { return offset_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::uint64_t offset_;
};

/// Non-finite loss during training.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(std::uint64_t step);
  std::uint64_t step() const noexcept { return step_; }

 private:
  std::uint64_t step_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace ndecode
