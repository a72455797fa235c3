#pragma once

namespace blockcert {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace blockcert
