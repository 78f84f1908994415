#pragma once

namespace mortgp {
inline constexpr const char* kVersion = "0.1.0";
}
