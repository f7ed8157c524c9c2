#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bohmsteer {

/// Failure categories. The CLI prints the category name as the first field of
/// its single-line error report.
enum class ErrorKind {
  InvalidArgument,
  Node,
  OffGrid,
  FitFailure,
  FitDegenerate,
  NoNeighbor,
  Parse,
  Validation,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Node: return "node";
    case ErrorKind::OffGrid: return "off-grid";
    case ErrorKind::FitFailure: return "fit-failure";
    case ErrorKind::FitDegenerate: return "fit-degenerate";
    case ErrorKind::NoNeighbor: return "no-neighbor";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace bohmsteer
