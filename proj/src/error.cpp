#include "effdyn/error.hpp"

namespace effdyn {

std::string_view to_string(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::structural: return "structural";
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::resource: return "resource";
    case ErrorCategory::numerical: return "numerical";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

}  // namespace effdyn
