#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vcgmm {

enum class ErrorKind {
  argument,
  dimension,
  parse,
  io,
  empty_window,
  singular,
  no_feasible_bandwidth,
  degenerate_covariance,
  validation,
};

std::string_view to_string(ErrorKind kind) noexcept;

//! Every failure raised by the library carries a kind so callers can map it
//! to an exit code or a retry policy without parsing messages.
class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(what)
    , kind_(kind)
  {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

//! Error re-raised by the estimation pipeline with the failing stage attached.
class StageError : public Error
{
public:
  StageError(std::string stage, const Error& cause)
    : Error(cause.kind(), "[" + stage + "] " + cause.what())
    , stage_(std::move(stage))
  {}

  const std::string& stage() const noexcept { return stage_; }

private:
  std::string stage_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
  throw Error(kind, what);
}

} // namespace vcgmm
