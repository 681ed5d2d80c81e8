#include "smk/mixture.hpp"

#include "smk/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace smk {

namespace {

void require_finite(const std::vector<double>& values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::InvalidArgument, std::string(what) + " contains non-finite values");
        }
    }
}

void require_single_channel(const FeatureGrid& g, const char* what) {
    if (g.channels() != 1) {
        throw Error(ErrorCode::DimensionMismatch, std::string(what) + " must have one channel");
    }
}

// Saturates to the nearest representable values inside (0, 1).
double sigmoid(double z) {
    const double s = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    return std::clamp(s, std::numeric_limits<double>::denorm_min(), std::nextafter(1.0, 0.0));
}

}  // namespace

FeatureGrid::FeatureGrid(int height, int width, int channels)
    : FeatureGrid(height, width, channels,
                  std::vector<double>(static_cast<std::size_t>(std::max(height, 0)) *
                                      std::max(width, 0) * std::max(channels, 0))) {}

FeatureGrid::FeatureGrid(int height, int width, int channels, std::vector<double> values)
    : height_(height), width_(width), channels_(channels), values_(std::move(values)) {
    if (height < 1 || width < 1 || channels < 1) {
        throw Error(ErrorCode::InvalidArgument, "feature grid dimensions must be >= 1");
    }
    if (values_.size() != static_cast<std::size_t>(height) * width * channels) {
        throw Error(ErrorCode::DimensionMismatch, "value count must equal H * W * C");
    }
    require_finite(values_, "feature grid");
}

FeatureGrid bilinear_upsample(const FeatureGrid& grid, int target_h, int target_w) {
    require_single_channel(grid, "upsample input");
    if (target_h < 1 || target_w < 1) {
        throw Error(ErrorCode::InvalidArgument, "target dimensions must be >= 1");
    }
    const int src_h = grid.height();
    const int src_w = grid.width();
    const double scale_y = static_cast<double>(src_h) / target_h;
    const double scale_x = static_cast<double>(src_w) / target_w;

    FeatureGrid out(target_h, target_w, 1);
    for (int ty = 0; ty < target_h; ++ty) {
        const double sy = std::clamp((ty + 0.5) * scale_y - 0.5, 0.0, src_h - 1.0);
        const int y0 = static_cast<int>(std::floor(sy));
        const int y1 = std::min(y0 + 1, src_h - 1);
        const double fy = sy - y0;
        for (int tx = 0; tx < target_w; ++tx) {
            const double sx = std::clamp((tx + 0.5) * scale_x - 0.5, 0.0, src_w - 1.0);
            const int x0 = static_cast<int>(std::floor(sx));
            const int x1 = std::min(x0 + 1, src_w - 1);
            const double fx = sx - x0;
            const double top = grid.at(y0, x0) * (1.0 - fx) + grid.at(y0, x1) * fx;
            const double bottom = grid.at(y1, x0) * (1.0 - fx) + grid.at(y1, x1) * fx;
            out.at(ty, tx) = top * (1.0 - fy) + bottom * fy;
        }
    }
    return out;
}

FeatureGrid attention_map(const EmbeddingSet& emb, int target_h, int target_w) {
    const Matrix& z = emb.patch;
    const Matrix& c = emb.cls;
    if (emb.grid_rows < 1 || emb.grid_cols < 1 || z.rows != emb.grid_rows * emb.grid_cols) {
        throw Error(ErrorCode::DimensionMismatch, "patch count must equal grid_rows * grid_cols");
    }
    if (c.rows != 2 || c.cols != z.cols) {
        throw Error(ErrorCode::DimensionMismatch, "need two class tokens of the patch width");
    }
    if (z.data.size() != static_cast<std::size_t>(z.rows) * z.cols ||
        c.data.size() != static_cast<std::size_t>(c.rows) * c.cols) {
        throw Error(ErrorCode::DimensionMismatch, "embedding storage does not match its shape");
    }
    require_finite(z.data, "patch embeddings");
    require_finite(c.data, "class embeddings");

    FeatureGrid s(emb.grid_rows, emb.grid_cols, 1);
    for (int i = 0; i < z.rows; ++i) {
        double dot = 0.0;
        for (int d = 0; d < z.cols; ++d) dot += z.at(i, d) * c.at(1, d);
        s.at(i / emb.grid_cols, i % emb.grid_cols) = dot;
    }
    return bilinear_upsample(s, target_h, target_w);
}

FeatureGrid squeeze(const FeatureGrid& x_conv, const MixParams& params) {
    if (params.w1.size() != static_cast<std::size_t>(x_conv.channels())) {
        throw Error(ErrorCode::DimensionMismatch, "w1 length must equal the input channel count");
    }
    FeatureGrid out(x_conv.height(), x_conv.width(), 1);
    for (int r = 0; r < x_conv.height(); ++r) {
        for (int c = 0; c < x_conv.width(); ++c) {
            double acc = params.b1;
            for (int k = 0; k < x_conv.channels(); ++k) acc += x_conv.at(r, c, k) * params.w1[k];
            out.at(r, c) = std::max(acc, 0.0);
        }
    }
    return out;
}

FeatureGrid exp_mix(const FeatureGrid& attn, const FeatureGrid& squeezed) {
    require_single_channel(attn, "attention map");
    require_single_channel(squeezed, "squeezed features");
    if (attn.height() != squeezed.height() || attn.width() != squeezed.width()) {
        throw Error(ErrorCode::DimensionMismatch, "attention and squeezed grids differ in size");
    }
    FeatureGrid out(attn.height(), attn.width(), 1);
    for (int r = 0; r < attn.height(); ++r) {
        for (int c = 0; c < attn.width(); ++c) {
            const double v = std::exp(attn.at(r, c)) * squeezed.at(r, c);
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::InvalidArgument, "exponential mixing overflowed");
            }
            out.at(r, c) = v;
        }
    }
    return out;
}

FeatureGrid excite(const FeatureGrid& mixed, const MixParams& params) {
    require_single_channel(mixed, "mixed features");
    if (params.w2.empty() || params.w2.size() != params.b2.size()) {
        throw Error(ErrorCode::DimensionMismatch, "w2 and b2 must have the same nonzero length");
    }
    const int channels = static_cast<int>(params.w2.size());
    FeatureGrid out(mixed.height(), mixed.width(), channels);
    for (int r = 0; r < mixed.height(); ++r) {
        for (int c = 0; c < mixed.width(); ++c) {
            const double m = mixed.at(r, c);
            for (int k = 0; k < channels; ++k) {
                out.at(r, c, k) = sigmoid(m * params.w2[k] + params.b2[k]);
            }
        }
    }
    return out;
}

FeatureGrid exponential_mixture(const FeatureGrid& x_conv, const EmbeddingSet& emb,
                                const MixParams& params) {
    if (params.w2.size() != static_cast<std::size_t>(x_conv.channels())) {
        throw Error(ErrorCode::DimensionMismatch, "w2 length must equal the input channel count");
    }
    const FeatureGrid attn = attention_map(emb, x_conv.height(), x_conv.width());
    const FeatureGrid squeezed = squeeze(x_conv, params);
    return excite(exp_mix(attn, squeezed), params);
}

}  // namespace smk
