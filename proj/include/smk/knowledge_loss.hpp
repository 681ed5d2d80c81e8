#pragma once

#include "smk/mask.hpp"
#include "smk/shape_margin.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace smk {

/// Per-pixel foreground probabilities, row-major.
struct ProbabilityGrid {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    ProbabilityGrid() = default;
    ProbabilityGrid(int width, int height, std::vector<double> values);

    double at(int row, int col) const {
        return values[static_cast<std::size_t>(row) * width + col];
    }
};

/// Ground-truth label (1 = malignant) paired with a predicted malignancy probability.
struct LabeledPrediction {
    int y = 0;
    double p = 0.0;
};

struct SampleRecord {
    double p = 0.0;
    std::optional<int> y;
    BinaryMask pred_mask{1, 1};
    std::optional<ProbabilityGrid> soft_mask;
    std::optional<BinaryMask> gt_mask;
};

struct LossWeights {
    double alpha = 1.0;   // segmentation
    double beta = 0.2;    // classification
    double lambda = 0.1;  // constraint penalty

    friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

/// Weights while segmentation is still being learned, and after it settles.
inline constexpr LossWeights kInitialWeights{1.0, 0.2, 0.1};
inline constexpr LossWeights kSwitchedWeights{0.01, 2.0, 1.0};

inline constexpr double kProbabilityClamp = 1e-7;

struct ArPenalties {
    double p_ar = 0.0;  // shortfall below 1, charged against a malignant call
    double n_ar = 0.0;  // excess above 1, charged against a benign call
};

/// Throws NonPositiveAR for ar <= 0.
ArPenalties ar_penalties(double ar);

/// Shape-margin evidence for one sample.
struct PenaltyInput {
    double p = 0.0;
    double ar = 1.0;
    double ir = 0.0;
};

/// p (P_AR + 1 - IR) + (1 - p) (N_AR + IR) for a single sample.
double penalty_term(const PenaltyInput& sample);

/// Batch mean of penalty_term. Throws EmptyBatch.
double constraint_penalty(std::span<const PenaltyInput> samples);

/// Assesses each predicted mask with n radials, then averages penalty_term.
double constraint_penalty(std::span<const SampleRecord> samples, int n = kDefaultRadials);

/// Binary cross-entropy averaged over the batch; p clamped to [1e-7, 1 - 1e-7].
double classification_loss(std::span<const LabeledPrediction> pairs);

/// Half of (soft Dice loss + pixel cross-entropy) over the two classes
/// {background, foreground}. Dice sums run over every pixel of every sample;
/// cross-entropy is averaged over pixel sites.
double segmentation_loss(const ProbabilityGrid& soft, const BinaryMask& gt);
double segmentation_loss(std::span<const ProbabilityGrid> soft, std::span<const BinaryMask> gt);

inline double overall_loss(double l_seg, double l_cls, double phi, const LossWeights& w) {
    return w.alpha * l_seg + w.beta * l_cls + w.lambda * phi;
}

struct ObjectiveTerms {
    double l_seg = 0.0;
    double l_cls = 0.0;
    double phi = 0.0;
    double overall = 0.0;
};

/// Evaluates all three terms on a batch. Every sample needs y, soft_mask and gt_mask.
ObjectiveTerms evaluate_objective(std::span<const SampleRecord> samples, const LossWeights& w,
                                  int n = kDefaultRadials);

enum class SchedulePhase { Initial, Switched };

struct ScheduleState {
    SchedulePhase phase = SchedulePhase::Initial;
    std::vector<double> epoch_seg_losses;
    double threshold = 0.02;
    int window = 2;
};

LossWeights weights_for(SchedulePhase phase);

/// Records one epoch's mean segmentation loss. Switches (once, for good) when
/// the mean absolute difference over the last `window` adjacent epoch pairs
/// drops below `threshold`.
std::pair<ScheduleState, LossWeights> update_schedule(ScheduleState state, double epoch_seg_loss);

}  // namespace smk
