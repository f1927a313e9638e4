#pragma once

#include <numbers>

namespace twophoton {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace twophoton
