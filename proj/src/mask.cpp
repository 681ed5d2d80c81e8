#include "smk/mask.hpp"

#include "smk/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>

namespace smk {

double signed_area2(std::span<const PlanarPoint> ring) {
    double sum = 0.0;
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = ring[i];
        const auto& b = ring[(i + 1) % n];
        sum += a.x * b.y - b.x * a.y;
    }
    return sum;
}

namespace {

void check_scale(double scale_x, double scale_y) {
    if (!(scale_x > 0.0) || !(scale_y > 0.0) || !std::isfinite(scale_x) ||
        !std::isfinite(scale_y)) {
        throw Error(ErrorCode::InvalidScale, "scale ratios must be finite and > 0");
    }
}

void check_dims(int width, int height) {
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::InvalidArgument, "mask dimensions must be >= 1");
    }
}

}  // namespace

BinaryMask::BinaryMask(int width, int height, double scale_x, double scale_y)
    : width_(width), height_(height), scale_x_(scale_x), scale_y_(scale_y) {
    check_dims(width, height);
    check_scale(scale_x, scale_y);
    grid_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> grid, double scale_x,
                       double scale_y)
    : width_(width), height_(height), grid_(std::move(grid)), scale_x_(scale_x), scale_y_(scale_y) {
    check_dims(width, height);
    check_scale(scale_x, scale_y);
    if (grid_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw Error(ErrorCode::DimensionMismatch, "grid length must equal width * height");
    }
    for (auto& v : grid_) v = v ? 1 : 0;
}

std::size_t BinaryMask::count() const noexcept {
    return static_cast<std::size_t>(std::count(grid_.begin(), grid_.end(), std::uint8_t{1}));
}

// ---------------------------------------------------------------------------
// PGM I/O
// ---------------------------------------------------------------------------

namespace {

class PgmReader {
public:
    explicit PgmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const auto c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(c)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    int read_uint(const char* what) {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
            throw Error(ErrorCode::MalformedFile, std::string("expected ") + what);
        }
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > std::numeric_limits<int>::max()) {
                throw Error(ErrorCode::MalformedFile, std::string(what) + " out of range");
            }
            ++pos_;
        }
        return static_cast<int>(value);
    }

    std::size_t pos() const noexcept { return pos_; }
    void advance(std::size_t n) noexcept { pos_ += n; }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
    std::uint8_t peek() const { return bytes_[pos_]; }
    std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

struct PgmHeader {
    bool binary = true;
    int width = 0;
    int height = 0;
    int maxval = 0;
};

PgmHeader read_header(PgmReader& in) {
    const auto bytes = in.bytes();
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2')) {
        throw Error(ErrorCode::MalformedFile, "bad PGM magic (expected P5 or P2)");
    }
    PgmHeader header;
    header.binary = bytes[1] == '5';
    in.advance(2);
    header.width = in.read_uint("width");
    header.height = in.read_uint("height");
    header.maxval = in.read_uint("maxval");
    if (header.width < 1 || header.height < 1) {
        throw Error(ErrorCode::MalformedFile, "PGM dimensions must be >= 1");
    }
    if (header.maxval < 1 || header.maxval > 255) {
        throw Error(ErrorCode::MalformedFile, "only 8-bit PGM (maxval <= 255) is supported");
    }
    return header;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MalformedFile, "cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

BinaryMask load_mask(std::span<const std::uint8_t> file_bytes, double scale_x, double scale_y) {
    check_scale(scale_x, scale_y);
    PgmReader in(file_bytes);
    const PgmHeader header = read_header(in);
    const std::size_t count =
        static_cast<std::size_t>(header.width) * static_cast<std::size_t>(header.height);

    std::vector<std::uint8_t> grid(count);
    if (header.binary) {
        // Exactly one whitespace byte separates maxval from the raster.
        if (in.remaining() < 1 || !std::isspace(in.peek())) {
            throw Error(ErrorCode::MalformedFile, "missing separator before raster");
        }
        in.advance(1);
        if (in.remaining() < count) {
            throw Error(ErrorCode::MalformedFile, "truncated raster");
        }
        const auto raster = in.bytes().subspan(in.pos(), count);
        for (std::size_t i = 0; i < count; ++i) {
            if (raster[i] > header.maxval) {
                throw Error(ErrorCode::MalformedFile, "pixel value exceeds maxval");
            }
            grid[i] = raster[i] > 0 ? 1 : 0;
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const int value = in.read_uint("pixel value");
            if (value > header.maxval) {
                throw Error(ErrorCode::MalformedFile, "pixel value exceeds maxval");
            }
            grid[i] = value > 0 ? 1 : 0;
        }
    }
    return BinaryMask(header.width, header.height, std::move(grid), scale_x, scale_y);
}

BinaryMask load_mask_file(const std::string& path, double scale_x, double scale_y) {
    const auto bytes = read_file_bytes(path);
    return load_mask(bytes, scale_x, scale_y);
}

std::vector<std::uint8_t> write_mask(const BinaryMask& mask) {
    const std::string header = "P5\n" + std::to_string(mask.width()) + " " +
                               std::to_string(mask.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + mask.grid().size());
    for (auto v : mask.grid()) out.push_back(v ? 255 : 0);
    return out;
}

void write_mask_file(const BinaryMask& mask, const std::string& path) {
    const auto bytes = write_mask(mask);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::MalformedFile, "cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

std::pair<int, int> read_pgm_dimensions(const std::string& path) {
    const auto bytes = read_file_bytes(path);
    PgmReader in(bytes);
    const auto header = read_header(in);
    return {header.width, header.height};
}

// ---------------------------------------------------------------------------
// Components, contour, moments
// ---------------------------------------------------------------------------

namespace {

// Clockwise on screen (y down), starting west. Screen-clockwise is positive
// shoelace orientation in (x, y).
constexpr std::array<std::pair<int, int>, 8> kMoore = {{
    {-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1},
}};

void require_nonempty(const BinaryMask& mask) {
    if (mask.empty()) throw Error(ErrorCode::EmptyMask, "mask has no foreground pixels");
}

}  // namespace

BinaryMask largest_component(const BinaryMask& mask) {
    require_nonempty(mask);
    const int w = mask.width();
    const int h = mask.height();
    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    std::vector<std::size_t> sizes;
    std::vector<std::pair<int, int>> stack;

    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const auto idx = static_cast<std::size_t>(r) * w + c;
            if (!mask.at(r, c) || label[idx] >= 0) continue;
            const int id = static_cast<int>(sizes.size());
            std::size_t size = 0;
            label[idx] = id;
            stack.push_back({r, c});
            while (!stack.empty()) {
                const auto [pr, pc] = stack.back();
                stack.pop_back();
                ++size;
                for (int dr = -1; dr <= 1; ++dr) {
                    for (int dc = -1; dc <= 1; ++dc) {
                        const int nr = pr + dr;
                        const int nc = pc + dc;
                        if (!mask.sample(nr, nc)) continue;
                        auto& l = label[static_cast<std::size_t>(nr) * w + nc];
                        if (l >= 0) continue;
                        l = id;
                        stack.push_back({nr, nc});
                    }
                }
            }
            sizes.push_back(size);
        }
    }

    // Labels are assigned in row-major order of each component's first pixel,
    // so the first maximum is the tie-break winner.
    const int best = static_cast<int>(
        std::distance(sizes.begin(), std::max_element(sizes.begin(), sizes.end())));
    BinaryMask out(w, h, mask.scale_x(), mask.scale_y());
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (label[static_cast<std::size_t>(r) * w + c] == best) out.set(r, c, true);
        }
    }
    return out;
}

Polygon trace_contour(const BinaryMask& mask) {
    require_nonempty(mask);

    int start_r = -1;
    int start_c = -1;
    for (int r = 0; r < mask.height() && start_r < 0; ++r) {
        for (int c = 0; c < mask.width(); ++c) {
            if (mask.at(r, c)) {
                start_r = r;
                start_c = c;
                break;
            }
        }
    }

    // Tracer state: current pixel plus the Moore direction of the background
    // pixel we backtracked from. The west neighbor of the row-major-first pixel
    // is always background.
    struct State {
        int r, c, back;
        bool operator==(const State&) const = default;
    };

    auto step = [&](const State& s) -> std::optional<State> {
        for (int k = 1; k <= 8; ++k) {
            const int dir = (s.back + k) % 8;
            const int nr = s.r + kMoore[dir].second;
            const int nc = s.c + kMoore[dir].first;
            if (!mask.sample(nr, nc)) continue;
            // The previously examined neighbor is background; express it relative to the new pixel.
            const int prev = (s.back + k - 1) % 8;
            const int br = s.r + kMoore[prev].second;
            const int bc = s.c + kMoore[prev].first;
            int back = 0;
            for (int d = 0; d < 8; ++d) {
                if (nr + kMoore[d].second == br && nc + kMoore[d].first == bc) {
                    back = d;
                    break;
                }
            }
            return State{nr, nc, back};
        }
        return std::nullopt;
    };

    Polygon contour;
    const State origin{start_r, start_c, 0};
    contour.vertices.push_back({static_cast<double>(start_c), static_cast<double>(start_r)});

    const auto first = step(origin);
    if (!first) return contour;  // isolated pixel

    // Jacob's criterion: stop when the first move out of the start pixel repeats.
    State s = *first;
    const std::size_t limit = 8 * mask.count() + 8;
    for (std::size_t guard = 0; guard < limit; ++guard) {
        contour.vertices.push_back({static_cast<double>(s.c), static_cast<double>(s.r)});
        const auto next = step(s);
        if (*next == *first) break;
        s = *next;
    }
    if (contour.vertices.size() > 1 && contour.vertices.back() == contour.vertices.front()) {
        contour.vertices.pop_back();
    }
    return contour;
}

PlanarPoint centroid(const BinaryMask& mask) {
    require_nonempty(mask);
    double sx = 0.0;
    double sy = 0.0;
    std::size_t n = 0;
    for (int r = 0; r < mask.height(); ++r) {
        for (int c = 0; c < mask.width(); ++c) {
            if (!mask.at(r, c)) continue;
            sx += c;
            sy += r;
            ++n;
        }
    }
    return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

Extent scaled_extent(const BinaryMask& mask) {
    require_nonempty(mask);
    int min_r = mask.height(), max_r = -1, min_c = mask.width(), max_c = -1;
    for (int r = 0; r < mask.height(); ++r) {
        for (int c = 0; c < mask.width(); ++c) {
            if (!mask.at(r, c)) continue;
            min_r = std::min(min_r, r);
            max_r = std::max(max_r, r);
            min_c = std::min(min_c, c);
            max_c = std::max(max_c, c);
        }
    }
    return {static_cast<double>(max_r - min_r + 1) * mask.scale_y(),
            static_cast<double>(max_c - min_c + 1) * mask.scale_x()};
}

}  // namespace smk
