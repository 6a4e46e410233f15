#pragma once

namespace pseudoproc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pseudoproc
