#pragma once

#include <numbers>

namespace mqnd {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Everything inside the library is in SI seconds and angular frequency
// (rad/s). These helpers are the only place where Hz-denominated values are
// turned into angular ones.
constexpr double hz(double f) noexcept { return kTwoPi * f; }
constexpr double khz(double f) noexcept { return kTwoPi * f * 1e3; }
constexpr double mhz(double f) noexcept { return kTwoPi * f * 1e6; }
constexpr double ghz(double f) noexcept { return kTwoPi * f * 1e9; }

constexpr double to_hz(double omega) noexcept { return omega / kTwoPi; }
constexpr double to_mhz(double omega) noexcept { return omega / kTwoPi / 1e6; }

constexpr double ns(double t) noexcept { return t * 1e-9; }
constexpr double us(double t) noexcept { return t * 1e-6; }
constexpr double to_ns(double t) noexcept { return t * 1e9; }

}  // namespace mqnd
