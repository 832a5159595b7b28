#include "chronoseq/error.hpp"

namespace chronoseq {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::validation: return "validation";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::checksum: return "checksum";
    case ErrorCode::internal: return "internal";
  }
  return "internal";
}

}  // namespace chronoseq
