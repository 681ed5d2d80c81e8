#pragma once

#include "smk/knowledge_loss.hpp"
#include "smk/mask.hpp"

#include <cstdint>
#include <optional>
#include <span>

namespace smk {

struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;

    std::int64_t total() const noexcept { return tp + fp + tn + fn; }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// A prediction is malignant iff p >= threshold. Throws EmptyBatch.
ConfusionCounts confusion(std::span<const LabeledPrediction> samples, double threshold = 0.5);

/// Ratios with a zero denominator are absent rather than 0.
struct ClassificationMetrics {
    std::optional<double> acc;
    std::optional<double> spec;
    std::optional<double> sens;
    std::optional<double> f1;
};

ClassificationMetrics classification_metrics(const ConfusionCounts& c);

struct Overlap {
    double iou = 0.0;
    double dice = 0.0;
};

/// IoU and Dice of two same-sized masks; two empty masks score 1.
Overlap iou_dice(const BinaryMask& s, const BinaryMask& t);

}  // namespace smk
