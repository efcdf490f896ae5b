#pragma once

namespace phonon {
inline constexpr const char* kVersion = "0.1.0";
}
