#include "symgs/color.hpp"

#include <algorithm>
#include <cmath>

namespace symgs {

Rgb dc_to_rgb(const std::array<double, 3>& dc) {
  Rgb rgb;
  for (int k = 0; k < 3; ++k) rgb[k] = std::clamp(0.5 + kShC0 * dc[k], 0.0, 1.0);
  return rgb;
}

Rgb dc_to_rgb(const std::array<float, 3>& dc) { return dc_to_rgb(std::array<double, 3>{dc[0], dc[1], dc[2]}); }

std::array<double, 3> rgb_to_dc(const Rgb& rgb) {
  std::array<double, 3> dc;
  for (int k = 0; k < 3; ++k) dc[k] = (rgb[k] - 0.5) / kShC0;
  return dc;
}

Hsv rgb_to_hsv(const Rgb& rgb) {
  const auto [r, g, b] = rgb;
  const double max = std::max({r, g, b});
  const double min = std::min({r, g, b});
  const double delta = max - min;

  double h = 0.0;
  if (delta > 0.0) {
    if (max == r) {
      h = std::fmod((g - b) / delta, 6.0);
    } else if (max == g) {
      h = (b - r) / delta + 2.0;
    } else {
      h = (r - g) / delta + 4.0;
    }
    h /= 6.0;
    if (h < 0.0) h += 1.0;
    if (h >= 1.0) h -= 1.0;
  }
  const double s = max > 0.0 ? delta / max : 0.0;
  return {h, s, max};
}

}  // namespace symgs
