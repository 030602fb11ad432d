#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oatk {

/// Error categories. The CLI maps each to a distinct exit code and the
/// service maps them to HTTP statuses.
enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  non_finite,
  bad_magic,
  truncated,
  unsupported_version,
  io,
  parse,
  rank_deficient,
  degenerate,
  numerical,
  cancelled,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool cond, ErrorCode code, std::string_view what) {
  if (!cond) fail(code, std::string(what));
}

} // namespace oatk
