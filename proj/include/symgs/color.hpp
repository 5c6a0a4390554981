#pragma once

#include <array>

namespace symgs {

/// Zeroth-order SH basis constant, 1 / (2 sqrt(pi)).
inline constexpr double kShC0 = 0.28209479177387814;

using Rgb = std::array<double, 3>;
using Hsv = std::array<double, 3>;

/// rgb = clamp(0.5 + C0 * dc, 0, 1)
Rgb dc_to_rgb(const std::array<double, 3>& dc);
Rgb dc_to_rgb(const std::array<float, 3>& dc);

/// Inverse of dc_to_rgb on [0,1]^3.
std::array<double, 3> rgb_to_dc(const Rgb& rgb);

/// Hue in [0,1), saturation and value in [0,1]. Grays get hue 0.
Hsv rgb_to_hsv(const Rgb& rgb);

}  // namespace symgs
