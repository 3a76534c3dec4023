/**
 * @file error.hpp
 * @brief Error type thrown by the core library.
 */
#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lesioneval {

enum class ErrorCode {
  InvalidArgument,
  Io,
  Format,
  UnsupportedShape,
  LabelDomain,
  Geometry,
  EmptyMask,
  Arity,
  MissingTeam,
  Coverage,
  Degenerate,
  Window,
  EmptyInput,
  Placement,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

// Non-fatal diagnostics (unknown label codes, skipped samples) go through a
// process-wide handler. The default writes to stderr.
using WarningHandler = std::function<void(std::string_view)>;
void set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

} // namespace lesioneval
