#include "smk/geometry.hpp"

#include "smk/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace smk {

Polygon convex_hull(std::span<const PlanarPoint> points) {
    std::vector<PlanarPoint> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(), [](const PlanarPoint& a, const PlanarPoint& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    Polygon hull;
    if (pts.size() <= 2) {
        hull.vertices = std::move(pts);
        return hull;
    }

    std::vector<PlanarPoint> chain(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(chain[k - 2], chain[k - 1], p) <= 0.0) --k;
        chain[k++] = p;
    }
    const std::size_t lower = k + 1;
    for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
        while (k >= lower && cross(chain[k - 2], chain[k - 1], *it) <= 0.0) --k;
        chain[k++] = *it;
    }
    chain.resize(k - 1);  // last point repeats the first
    hull.vertices = std::move(chain);
    return hull;
}

bool strictly_inside(const Polygon& convex, const PlanarPoint& p, double tol) {
    const auto& v = convex.vertices;
    if (v.size() < 3) return false;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (cross(v[i], v[(i + 1) % v.size()], p) <= tol) return false;
    }
    return true;
}

double hull_depth(const Polygon& convex, const PlanarPoint& p) {
    const auto& v = convex.vertices;
    double depth = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& a = v[i];
        const auto& b = v[(i + 1) % v.size()];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        if (len == 0.0) continue;
        depth = std::min(depth, cross(a, b, p) / len);
    }
    return depth;
}

double ray_contour_distance(const BinaryMask& mask, const PlanarPoint& center, double angle) {
    int col = static_cast<int>(std::floor(center.x + 0.5));
    int row = static_cast<int>(std::floor(center.y + 0.5));
    if (!mask.sample(row, col)) {
        throw Error(ErrorCode::CenterOutsideMask, "ray origin is not on a foreground pixel");
    }

    // Cell (row, col) spans [col - 0.5, col + 0.5) x [row - 0.5, row + 0.5).
    const double dx = std::cos(angle);
    const double dy = std::sin(angle);
    constexpr double inf = std::numeric_limits<double>::infinity();

    const int step_x = dx > 0.0 ? 1 : -1;
    const int step_y = dy > 0.0 ? 1 : -1;
    const double delta_x = dx != 0.0 ? std::abs(1.0 / dx) : inf;
    const double delta_y = dy != 0.0 ? std::abs(1.0 / dy) : inf;
    double next_x = dx != 0.0 ? ((col + 0.5 * step_x) - center.x) / dx : inf;
    double next_y = dy != 0.0 ? ((row + 0.5 * step_y) - center.y) / dy : inf;

    while (true) {
        double t;
        if (next_x < next_y) {
            t = next_x;
            col += step_x;
            next_x += delta_x;
        } else if (next_y < next_x) {
            t = next_y;
            row += step_y;
            next_y += delta_y;
        } else {
            // Exactly through a cell corner: move diagonally.
            t = next_x;
            col += step_x;
            row += step_y;
            next_x += delta_x;
            next_y += delta_y;
        }
        if (!mask.sample(row, col)) return t;
    }
}

double ray_hull_distance(const Polygon& hull, const PlanarPoint& center, double angle) {
    const auto& v = hull.vertices;
    if (v.size() < 3) throw Error(ErrorCode::DegenerateHull, "hull has fewer than 3 vertices");
    if (!strictly_inside(hull, center)) {
        throw Error(ErrorCode::CenterNotInterior, "ray origin is not strictly inside the hull");
    }

    const double dx = std::cos(angle);
    const double dy = std::sin(angle);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& a = v[i];
        const auto& b = v[(i + 1) % v.size()];
        const double ex = b.x - a.x;
        const double ey = b.y - a.y;
        const double denom = dx * ey - dy * ex;
        if (denom == 0.0) continue;
        const double ax = a.x - center.x;
        const double ay = a.y - center.y;
        const double t = (ax * ey - ay * ex) / denom;
        const double u = (ax * dy - ay * dx) / denom;
        if (t > 0.0 && u >= -1e-12 && u <= 1.0 + 1e-12) best = std::min(best, t);
    }
    if (!std::isfinite(best)) {
        throw Error(ErrorCode::CenterNotInterior, "ray does not meet the hull boundary");
    }
    return best;
}

RadialProfile radial_profile(const BinaryMask& mask, int n) {
    if (n < 3) throw Error(ErrorCode::InvalidArgument, "radial count must be >= 3");

    RadialProfile profile;
    profile.n = n;
    profile.center = centroid(mask);
    const int cr = static_cast<int>(std::floor(profile.center.y + 0.5));
    const int cc = static_cast<int>(std::floor(profile.center.x + 0.5));
    if (!mask.sample(cr, cc)) {
        throw Error(ErrorCode::CenterOutsideMask, "centroid does not lie on the foreground");
    }

    const Polygon contour = trace_contour(mask);
    profile.hull = convex_hull(contour.vertices);
    if (profile.hull.size() < 3) {
        throw Error(ErrorCode::DegenerateHull, "contour has fewer than 3 non-collinear points");
    }

    // One source pixel (upsampling stretches the staircase with it), plus one
    // canonical pixel of nearest-neighbor rounding when the mask was resampled.
    const bool resampled = mask.scale_x() != 1.0 || mask.scale_y() != 1.0;
    const double tolerance =
        kHullContactTolerance * std::max({1.0, 1.0 / mask.scale_x(), 1.0 / mask.scale_y()}) +
        (resampled ? 1.0 : 0.0);

    profile.angles.resize(n);
    profile.contour_dist.resize(n);
    profile.hull_dist.resize(n);
    for (int i = 0; i < n; ++i) {
        const double theta = 2.0 * std::numbers::pi * i / n;
        const double big_r = ray_hull_distance(profile.hull, profile.center, theta);
        double r = ray_contour_distance(mask, profile.center, theta);
        if (r < big_r) {
            const PlanarPoint exit{profile.center.x + r * std::cos(theta),
                                   profile.center.y + r * std::sin(theta)};
            if (hull_depth(profile.hull, exit) <= tolerance) r = big_r;
        }
        profile.angles[i] = theta;
        profile.hull_dist[i] = big_r;
        profile.contour_dist[i] = std::min(r, big_r);
    }
    return profile;
}

}  // namespace smk
