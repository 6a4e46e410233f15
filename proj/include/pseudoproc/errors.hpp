#pragma once

#include <stdexcept>
#include <string>

namespace pseudoproc {

/// Error categories; mirrored one-to-one by the C API status codes.
enum class Errc {
  invalid_argument = 1,
  domain = 2,
  unsupported = 3,
  parse = 4,
  io = 5,
  estimation = 6,
  numeric = 7,
  internal = 8,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, Errc code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace pseudoproc
