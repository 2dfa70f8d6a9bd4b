#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace htmob {

/// Error categories. The numeric values are the CLI exit codes.
enum class ErrorCode : int {
  kConfig = 2,
  kFormat = 3,
  kContract = 4,
};

/// Base of every error the library throws. `tag()` is the short
/// machine-readable token printed by the CLI (`tag: message`).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string tag, const std::string& message)
      : std::runtime_error(message), code_(code), tag_(std::move(tag)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& tag() const noexcept { return tag_; }
  int exit_code() const noexcept { return static_cast<int>(code_); }

 private:
  ErrorCode code_;
  std::string tag_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error(ErrorCode::kConfig, "config_error", message) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message)
      : Error(ErrorCode::kFormat, "format_error", message) {}
};

/// Unreadable or unwritable files. Shares the format exit code.
class IoError : public Error {
 public:
  explicit IoError(const std::string& message)
      : Error(ErrorCode::kFormat, "io_error", message) {}
};

class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& message)
      : Error(ErrorCode::kContract, "contract_violation", message) {}
};

}  // namespace htmob
