#include "smk/shape_margin.hpp"

#include "smk/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace smk {

double aspect_ratio(const BinaryMask& mask) {
    const Extent e = scaled_extent(mask);
    return e.h / e.w;
}

double bcsi(const RadialProfile& profile) {
    const auto& r = profile.contour_dist;
    const double sum = std::accumulate(r.begin(), r.end(), 0.0);
    if (r.empty() || !(sum > 0.0)) throw Error(ErrorCode::ZeroRadii, "all radii are zero");
    for (double v : r) {
        if (v < 0.0) throw Error(ErrorCode::InvalidArgument, "radii must be nonnegative");
    }

    // |r_i / S - 1/n| == |n r_i - S| / (n S); the right side stays exact for integral radii.
    const double n = static_cast<double>(r.size());
    double deviation = 0.0;
    for (double v : r) deviation += std::abs(n * v - sum);
    return deviation / (n * sum);
}

double irregularity(const RadialProfile& profile) {
    const auto& r = profile.contour_dist;
    const auto& big_r = profile.hull_dist;
    if (r.size() != big_r.size()) {
        throw Error(ErrorCode::DimensionMismatch, "contour and hull radii differ in length");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!(big_r[i] > 0.0)) throw Error(ErrorCode::DegenerateHull, "hull radius is zero");
        if (r[i] < 0.0 || r[i] > big_r[i]) {
            throw Error(ErrorCode::InvalidArgument, "contour radius must lie in [0, R_i]");
        }
        sum += (big_r[i] - r[i]) / big_r[i];
    }
    // tanh rounds to 1.0 for sums past ~19; keep the value inside [0, 1).
    return std::min(std::tanh(sum), std::nextafter(1.0, 0.0));
}

ShapeMarginReport assess(const BinaryMask& mask, int n) {
    const BinaryMask nodule = largest_component(mask);
    const Extent extent = scaled_extent(nodule);
    const RadialProfile profile = radial_profile(nodule, n);

    ShapeMarginReport report;
    report.h = extent.h;
    report.w = extent.w;
    report.ar = extent.h / extent.w;
    report.bcsi = bcsi(profile);
    report.ir = irregularity(profile);
    report.n = n;
    return report;
}

}  // namespace smk
