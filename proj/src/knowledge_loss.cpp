#include "smk/knowledge_loss.hpp"

#include "smk/error.hpp"

#include <algorithm>
#include <cmath>

namespace smk {

ProbabilityGrid::ProbabilityGrid(int width, int height, std::vector<double> values)
    : width(width), height(height), values(std::move(values)) {
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::InvalidArgument, "probability grid dimensions must be >= 1");
    }
    if (this->values.size() != static_cast<std::size_t>(width) * height) {
        throw Error(ErrorCode::DimensionMismatch, "grid length must equal width * height");
    }
    for (double v : this->values) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "probabilities must lie in [0, 1]");
        }
    }
}

ArPenalties ar_penalties(double ar) {
    if (!(ar > 0.0) || !std::isfinite(ar)) {
        throw Error(ErrorCode::NonPositiveAR, "aspect ratio must be finite and > 0");
    }
    if (ar < 1.0) return {1.0 - ar, 0.0};
    return {0.0, ar - 1.0};
}

double penalty_term(const PenaltyInput& s) {
    if (!(s.p >= 0.0 && s.p <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "probability must lie in [0, 1]");
    }
    if (!(s.ir >= 0.0 && s.ir <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "irregularity must lie in [0, 1]");
    }
    const auto [p_ar, n_ar] = ar_penalties(s.ar);
    return s.p * (p_ar + 1.0 - s.ir) + (1.0 - s.p) * (n_ar + s.ir);
}

double constraint_penalty(std::span<const PenaltyInput> samples) {
    if (samples.empty()) throw Error(ErrorCode::EmptyBatch, "constraint penalty of empty batch");
    double sum = 0.0;
    for (const auto& s : samples) sum += penalty_term(s);
    return sum / static_cast<double>(samples.size());
}

double constraint_penalty(std::span<const SampleRecord> samples, int n) {
    std::vector<PenaltyInput> inputs;
    inputs.reserve(samples.size());
    for (const auto& s : samples) {
        const auto report = assess(s.pred_mask, n);
        inputs.push_back({s.p, report.ar, report.ir});
    }
    return constraint_penalty(inputs);
}

namespace {

double clamp_probability(double p) {
    return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

}  // namespace

double classification_loss(std::span<const LabeledPrediction> pairs) {
    if (pairs.empty()) throw Error(ErrorCode::EmptyBatch, "classification loss of empty batch");
    double sum = 0.0;
    for (const auto& [y, p_raw] : pairs) {
        if (y != 0 && y != 1) throw Error(ErrorCode::InvalidArgument, "label must be 0 or 1");
        const double p = clamp_probability(p_raw);
        sum += y * std::log(p) + (1 - y) * std::log(1.0 - p);
    }
    return -sum / static_cast<double>(pairs.size());
}

double segmentation_loss(std::span<const ProbabilityGrid> soft, std::span<const BinaryMask> gt) {
    if (soft.empty() || soft.size() != gt.size()) {
        throw Error(ErrorCode::DimensionMismatch, "need one ground-truth mask per soft mask");
    }
    // g is one-hot over {bg, fg}, so sum g^2 equals the pixel count and the
    // Dice denominator is never zero.
    double intersection = 0.0;
    double g_sq = 0.0;
    double s_sq = 0.0;
    double ce = 0.0;
    std::size_t sites = 0;
    for (std::size_t k = 0; k < soft.size(); ++k) {
        const auto& s = soft[k];
        const auto& g = gt[k];
        if (s.width != g.width() || s.height != g.height()) {
            throw Error(ErrorCode::DimensionMismatch, "soft and ground-truth masks differ in size");
        }
        for (int r = 0; r < s.height; ++r) {
            for (int c = 0; c < s.width; ++c) {
                const double fg = s.at(r, c);
                const double bg = 1.0 - fg;
                const bool is_fg = g.at(r, c);
                intersection += is_fg ? fg : bg;
                g_sq += 1.0;
                s_sq += fg * fg + bg * bg;
                ce -= std::log(is_fg ? clamp_probability(fg) : clamp_probability(bg));
            }
        }
        sites += static_cast<std::size_t>(s.width) * s.height;
    }
    const double dice_loss = 1.0 - 2.0 * intersection / (g_sq + s_sq);
    return 0.5 * (dice_loss + ce / static_cast<double>(sites));
}

double segmentation_loss(const ProbabilityGrid& soft, const BinaryMask& gt) {
    return segmentation_loss(std::span(&soft, 1), std::span(&gt, 1));
}

ObjectiveTerms evaluate_objective(std::span<const SampleRecord> samples, const LossWeights& w,
                                  int n) {
    if (samples.empty()) throw Error(ErrorCode::EmptyBatch, "objective of empty batch");
    std::vector<LabeledPrediction> labeled;
    std::vector<ProbabilityGrid> soft;
    std::vector<BinaryMask> gt;
    for (const auto& s : samples) {
        if (!s.y || !s.soft_mask || !s.gt_mask) {
            throw Error(ErrorCode::InvalidArgument,
                        "objective needs label, soft mask and ground truth for every sample");
        }
        labeled.push_back({*s.y, s.p});
        soft.push_back(*s.soft_mask);
        gt.push_back(*s.gt_mask);
    }
    ObjectiveTerms t;
    t.l_seg = segmentation_loss(soft, gt);
    t.l_cls = classification_loss(labeled);
    t.phi = constraint_penalty(samples, n);
    t.overall = overall_loss(t.l_seg, t.l_cls, t.phi, w);
    return t;
}

LossWeights weights_for(SchedulePhase phase) {
    return phase == SchedulePhase::Initial ? kInitialWeights : kSwitchedWeights;
}

std::pair<ScheduleState, LossWeights> update_schedule(ScheduleState state, double epoch_seg_loss) {
    if (!std::isfinite(epoch_seg_loss)) {
        throw Error(ErrorCode::InvalidArgument, "epoch segmentation loss must be finite");
    }
    if (state.window < 1) throw Error(ErrorCode::InvalidArgument, "window must be >= 1");

    auto& losses = state.epoch_seg_losses;
    losses.push_back(epoch_seg_loss);
    const auto window = static_cast<std::size_t>(state.window);
    if (state.phase == SchedulePhase::Initial && losses.size() >= window + 1) {
        double diff_sum = 0.0;
        for (std::size_t i = losses.size() - window; i < losses.size(); ++i) {
            diff_sum += std::abs(losses[i] - losses[i - 1]);
        }
        if (diff_sum / static_cast<double>(window) < state.threshold) {
            state.phase = SchedulePhase::Switched;
        }
    }
    const LossWeights weights = weights_for(state.phase);
    return {std::move(state), weights};
}

}  // namespace smk
