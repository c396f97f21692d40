#pragma once

#include <cmath>
#include <stdexcept>

namespace seqnav {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Wrap an angle into (-pi, pi]. The boundary belongs to +pi: wrap(-pi) == pi.
inline double wrap(double angle) {
    if (!std::isfinite(angle)) {
        throw std::invalid_argument("wrap: non-finite angle");
    }
    double w = angle - kTwoPi * std::ceil((angle - kPi) / kTwoPi);
    // ceil() is exact but the subtraction can round onto the wrong side for
    // inputs many periods out; nudge back into the half-open interval.
    if (w <= -kPi) w += kTwoPi;
    if (w > kPi) w -= kTwoPi;
    return w;
}

/// Unit heading vector h(theta) = (cos, sin).
struct Heading {
    double cx;
    double cy;
};

inline Heading heading_vec(double theta) {
    return {std::cos(theta), std::sin(theta)};
}

}  // namespace seqnav
