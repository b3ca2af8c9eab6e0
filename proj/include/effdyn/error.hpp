#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace effdyn {

/// Failure classes. The CLI maps each one to a distinct exit status.
enum class ErrorCategory {
  structural,  // shape / grid / time-stamp mismatches between inputs
  domain,      // input outside the mathematical domain of an operation
  resource,    // memory guard exceeded
  numerical,   // conservation drift, non-convergence
  parse,       // configuration text
  io,          // filesystem
};

std::string_view to_string(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory c, const std::string& what) {
  throw Error(c, what);
}

inline void require(bool cond, ErrorCategory c, const std::string& what) {
  if (!cond) fail(c, what);
}

}  // namespace effdyn
