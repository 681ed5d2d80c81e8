#pragma once

#include "smk/geometry.hpp"
#include "smk/mask.hpp"

namespace smk {

/// Radial count used when the caller does not choose one (10 degree spacing).
inline constexpr int kDefaultRadials = 36;

struct ShapeMarginReport {
    double ar = 0.0;    // h / w in original units
    double bcsi = 0.0;  // Boyce-Clark shape index of the contour radii
    double ir = 0.0;    // hull-based irregularity, in [0, 1)
    int n = 0;
    double h = 0.0;
    double w = 0.0;
};

/// Bounding-box height over width in original units. Taller-than-wide iff > 1.
double aspect_ratio(const BinaryMask& mask);

/// sum_i | r_i / sum_j r_j - 1/n | over the contour radii. Throws ZeroRadii.
double bcsi(const RadialProfile& profile);

/// tanh( sum_i (R_i - r_i) / R_i ). Throws DegenerateHull when some R_i is 0.
double irregularity(const RadialProfile& profile);

/// Largest component, then aspect ratio, BCSI and IR from one radial profile.
ShapeMarginReport assess(const BinaryMask& mask, int n = kDefaultRadials);

}  // namespace smk
