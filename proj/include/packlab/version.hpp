#pragma once

namespace packlab {
inline constexpr const char* kVersion = "0.1.0";
}
