#include "oatk/error.hpp"

namespace oatk {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::invalid_argument: return "invalid_argument";
  case ErrorCode::dimension_mismatch: return "dimension_mismatch";
  case ErrorCode::non_finite: return "non_finite";
  case ErrorCode::bad_magic: return "bad_magic";
  case ErrorCode::truncated: return "truncated";
  case ErrorCode::unsupported_version: return "unsupported_version";
  case ErrorCode::io: return "io";
  case ErrorCode::parse: return "parse";
  case ErrorCode::rank_deficient: return "rank_deficient";
  case ErrorCode::degenerate: return "degenerate";
  case ErrorCode::numerical: return "numerical";
  case ErrorCode::cancelled: return "cancelled";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace oatk
