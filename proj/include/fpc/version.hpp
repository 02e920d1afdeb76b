#pragma once

namespace fpc {

inline constexpr const char* k_version = "1.0.0";

}  // namespace fpc
