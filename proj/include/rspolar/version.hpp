#pragma once

namespace rspolar {
inline constexpr const char* kVersion = "rspolar 0.1.0";
}
