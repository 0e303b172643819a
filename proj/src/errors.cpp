#include "qsd/errors.hpp"

namespace qsd {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument:
      return "invalid_argument";
    case ErrorKind::contract_violation:
      return "contract_violation";
    case ErrorKind::degenerate_state:
      return "degenerate_state";
    case ErrorKind::oracle_instability:
      return "oracle_instability";
    case ErrorKind::validation:
      return "validation";
    case ErrorKind::io:
      return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind) {}

}  // namespace qsd
