#pragma once

#include "smk/mask.hpp"

#include <span>
#include <vector>

namespace smk {

/// Perpendicular distance, in source pixels, below which a contour exit point
/// counts as lying on the hull. Digitized convex regions stay within ~0.7 px of
/// the hull of their pixel centers, so sub-pixel gaps are raster noise rather
/// than depressions. On a mask upsampled from its source (scale < 1) the
/// tolerance grows by 1 / scale, and any resampled mask (scale != 1) gets one
/// more canonical pixel for nearest-neighbor rounding.
inline constexpr double kHullContactTolerance = 1.0;

/// Distances along n evenly spaced rays (theta_i = 2*pi*i/n) from a center to the
/// mask contour (first exit) and to the convex hull of that contour.
struct RadialProfile {
    PlanarPoint center;
    int n = 0;
    std::vector<double> angles;
    std::vector<double> contour_dist;  // r_i; equals hull_dist when within contact tolerance
    std::vector<double> hull_dist;     // R_i
    Polygon hull;
};

/// (a - o) x (b - o)
inline double cross(const PlanarPoint& o, const PlanarPoint& a, const PlanarPoint& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/// Andrew's monotone chain. Output has positive orientation, starts at the
/// lexicographically smallest (x, y) point and keeps no collinear vertices.
/// One or two distinct points (or all collinear input) give a degenerate polygon.
Polygon convex_hull(std::span<const PlanarPoint> points);

/// True when p is strictly inside a positively oriented convex polygon.
bool strictly_inside(const Polygon& convex, const PlanarPoint& p, double tol = 1e-12);

/// Smallest distance from p to the supporting lines of a positively oriented
/// convex polygon. Positive inside, negative outside.
double hull_depth(const Polygon& convex, const PlanarPoint& p);

/// First-exit distance from center along (cos angle, sin angle) to the first
/// background cell. Exact cell traversal over the raster; outside the image is
/// background. Throws CenterOutsideMask if the center cell is not foreground.
double ray_contour_distance(const BinaryMask& mask, const PlanarPoint& center, double angle);

/// Exact distance from an interior center to the hull boundary along the ray.
/// Throws DegenerateHull (< 3 vertices) or CenterNotInterior.
double ray_hull_distance(const Polygon& hull, const PlanarPoint& center, double angle);

/// Centroid-centered radial profile of a single-component mask, n >= 3.
/// r_i is clamped to R_i, and snapped to R_i when the exit point lies within
/// one source pixel (see kHullContactTolerance) of the hull boundary.
RadialProfile radial_profile(const BinaryMask& mask, int n);

}  // namespace smk
