#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace smk {

/// Continuous pixel coordinate. Pixel (row r, col c) has its center at (x = c, y = r); y grows downward.
struct PlanarPoint {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const PlanarPoint&, const PlanarPoint&) = default;
};

/// Ordered planar vertex list. Convex hulls and traced contours are oriented with
/// positive signed (shoelace) area in (x, y) coordinates.
struct Polygon {
    std::vector<PlanarPoint> vertices;

    std::size_t size() const noexcept { return vertices.size(); }
    friend bool operator==(const Polygon&, const Polygon&) = default;
};

/// Twice the signed shoelace area of a closed vertex ring.
double signed_area2(std::span<const PlanarPoint> ring);

/// Rasterized foreground grid plus the ratios that map its pixels back to the
/// original image (original extent / this grid's extent, per axis).
class BinaryMask {
public:
    BinaryMask(int width, int height, double scale_x = 1.0, double scale_y = 1.0);
    BinaryMask(int width, int height, std::vector<std::uint8_t> grid, double scale_x = 1.0,
               double scale_y = 1.0);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    double scale_x() const noexcept { return scale_x_; }
    double scale_y() const noexcept { return scale_y_; }

    bool in_bounds(int row, int col) const noexcept {
        return row >= 0 && row < height_ && col >= 0 && col < width_;
    }
    bool at(int row, int col) const noexcept { return grid_[index(row, col)] != 0; }
    /// Out-of-bounds reads as background.
    bool sample(int row, int col) const noexcept { return in_bounds(row, col) && at(row, col); }
    void set(int row, int col, bool value) noexcept { grid_[index(row, col)] = value ? 1 : 0; }

    std::size_t count() const noexcept;
    bool empty() const noexcept { return count() == 0; }

    /// Row-major grid, one byte per pixel, 1 = foreground.
    std::span<const std::uint8_t> grid() const noexcept { return grid_; }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    std::size_t index(int row, int col) const noexcept {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    int width_;
    int height_;
    std::vector<std::uint8_t> grid_;
    double scale_x_;
    double scale_y_;
};

/// Parses an 8-bit PGM (P5 binary or P2 ASCII). Any pixel value > 0 is foreground.
/// Throws MalformedFile or InvalidScale.
BinaryMask load_mask(std::span<const std::uint8_t> file_bytes, double scale_x = 1.0,
                     double scale_y = 1.0);
BinaryMask load_mask_file(const std::string& path, double scale_x = 1.0, double scale_y = 1.0);

/// Serializes as P5, maxval 255, foreground 255 and background 0.
std::vector<std::uint8_t> write_mask(const BinaryMask& mask);
void write_mask_file(const BinaryMask& mask, const std::string& path);

/// Reads only the PGM header and returns (width, height).
std::pair<int, int> read_pgm_dimensions(const std::string& path);

/// Largest 8-connected foreground component; ties go to the component whose
/// first pixel comes first in row-major order.
BinaryMask largest_component(const BinaryMask& mask);

/// Moore-neighbor boundary trace of the component containing the row-major-first
/// foreground pixel. Vertices are pixel centers. One- and two-pixel shapes yield
/// one- and two-vertex polygons.
Polygon trace_contour(const BinaryMask& mask);

/// Mean of the foreground pixel centers.
PlanarPoint centroid(const BinaryMask& mask);

struct Extent {
    double h = 0.0;
    double w = 0.0;
};

/// Inclusive bounding-box extent in original units: rows * scale_y, cols * scale_x.
Extent scaled_extent(const BinaryMask& mask);

}  // namespace smk
