#pragma once

#include <stdexcept>
#include <string>

namespace qsd {

/// Failure categories used across the library.  The CLI maps these to exit
/// codes: validation and io problems exit 1, numerical failures exit 2.
enum class ErrorKind {
  invalid_argument,    // caller passed something structurally wrong
  contract_violation,  // an internal pre/postcondition failed
  degenerate_state,    // state norm collapsed below the renormalization floor
  oracle_instability,  // a reference integrator left its validity envelope
  validation,          // config file rejected
  io,                  // filesystem trouble
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qsd
