#pragma once

namespace msgd {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace msgd
