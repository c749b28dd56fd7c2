#include "ndecode/error.hpp"

namespace ndecode {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config: return "config error";
    case ErrorKind::range: return "range error";
    case ErrorKind::architecture: return "architecture error";
    case ErrorKind::data: return "data error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::shape: return "shape error";
    case ErrorKind::degenerate: return "degenerate input";
    case ErrorKind::contract: return "contract error";
    case ErrorKind::io: return "io error";
    case ErrorKind::divergence: return "divergence";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

int Error::exit_code() const noexcept {
  switch (kind_) {
    case ErrorKind::config:
    case ErrorKind::range:
    case ErrorKind::architecture:
      return 2;
    case ErrorKind::divergence:
      return 4;
    default:
      return 3;
  }
}

ParseError::ParseError(const std::string& what, std::uint64_t offset)
    : Error(ErrorKind::parse, what + " at byte offset " + std::to_string(offset)), detail_(what), offset_(offset) {}

DivergenceError::DivergenceError(std::uint64_t step)
    : Error(ErrorKind::divergence, "non-finite loss at step " + std::to_string(step)), step_(step) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace ndecode
