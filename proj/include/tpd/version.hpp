#pragma once

namespace tpd {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tpd
