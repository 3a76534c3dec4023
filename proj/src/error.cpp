#include "lesioneval/error.hpp"

#include <iostream>
#include <mutex>

namespace lesioneval {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::InvalidArgument: return "invalid argument";
  case ErrorCode::Io: return "i/o error";
  case ErrorCode::Format: return "format error";
  case ErrorCode::UnsupportedShape: return "unsupported shape";
  case ErrorCode::LabelDomain: return "label domain error";
  case ErrorCode::Geometry: return "geometry mismatch";
  case ErrorCode::EmptyMask: return "empty mask";
  case ErrorCode::Arity: return "wrong arity";
  case ErrorCode::MissingTeam: return "missing team";
  case ErrorCode::Coverage: return "coverage error";
  case ErrorCode::Degenerate: return "degenerate input";
  case ErrorCode::Window: return "window error";
  case ErrorCode::EmptyInput: return "empty input";
  case ErrorCode::Placement: return "placement failure";
  }
  return "unknown error";
}

namespace {

std::mutex g_warning_mutex;

WarningHandler &handler_slot() {
  static WarningHandler handler = [](std::string_view msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return handler;
}

} // namespace

void set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(g_warning_mutex);
  handler_slot() = std::move(handler);
}

void warn(std::string_view message) {
  std::lock_guard lock(g_warning_mutex);
  if (handler_slot())
    handler_slot()(message);
}

} // namespace lesioneval
