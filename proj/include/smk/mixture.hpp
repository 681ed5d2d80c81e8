#pragma once

#include <cstddef>
#include <vector>

namespace smk {

/// Patch size and embedding width used by the reference network configuration.
inline constexpr int kPatchSize = 16;
inline constexpr int kEmbeddingDim = 64;

/// Dense height x width x channels grid, row-major with channels innermost.
class FeatureGrid {
public:
    FeatureGrid(int height, int width, int channels);
    FeatureGrid(int height, int width, int channels, std::vector<double> values);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    int channels() const noexcept { return channels_; }

    double at(int row, int col, int ch = 0) const { return values_[index(row, col, ch)]; }
    double& at(int row, int col, int ch = 0) { return values_[index(row, col, ch)]; }

    const std::vector<double>& values() const noexcept { return values_; }

    friend bool operator==(const FeatureGrid&, const FeatureGrid&) = default;

private:
    std::size_t index(int row, int col, int ch) const noexcept {
        return (static_cast<std::size_t>(row) * width_ + col) * channels_ + ch;
    }

    int height_;
    int width_;
    int channels_;
    std::vector<double> values_;
};

/// Row-major dense matrix.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

/// Transformer outputs: N patch embeddings and the two class tokens
/// (row 0 background, row 1 nodule), all of width D.
struct EmbeddingSet {
    Matrix patch;  // N x D
    Matrix cls;    // 2 x D
    int grid_rows = 0;
    int grid_cols = 0;
};

struct MixParams {
    std::vector<double> w1;  // C squeeze weights (1x1 conv)
    double b1 = 0.0;
    std::vector<double> w2;  // C excitation weights
    std::vector<double> b2;  // C excitation biases
};

/// Half-pixel-center bilinear resampling with edge clamping (single channel).
FeatureGrid bilinear_upsample(const FeatureGrid& grid, int target_h, int target_w);

/// Nodule-token similarity per patch, reshaped to the patch grid and upsampled.
FeatureGrid attention_map(const EmbeddingSet& emb, int target_h, int target_w);

/// ReLU(w1 . x + b1) per cell.
FeatureGrid squeeze(const FeatureGrid& x_conv, const MixParams& params);

/// exp(attn) * squeezed per cell.
FeatureGrid exp_mix(const FeatureGrid& attn, const FeatureGrid& squeezed);

/// sigmoid(m * w2[k] + b2[k]) per cell and channel k; results stay inside (0, 1).
FeatureGrid excite(const FeatureGrid& mixed, const MixParams& params);

/// excite(exp_mix(attention_map(emb, H', W'), squeeze(x_conv))).
FeatureGrid exponential_mixture(const FeatureGrid& x_conv, const EmbeddingSet& emb,
                                const MixParams& params);

}  // namespace smk
