#pragma once

namespace droplab {

inline constexpr const char *kVersion = "0.1.0";

} // namespace droplab
