#include "smk/metrics.hpp"

#include "smk/error.hpp"

namespace smk {

ConfusionCounts confusion(std::span<const LabeledPrediction> samples, double threshold) {
    if (samples.empty()) throw Error(ErrorCode::EmptyBatch, "no samples to count");
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "threshold must lie in (0, 1)");
    }
    ConfusionCounts c;
    for (const auto& [y, p] : samples) {
        const bool malignant = p >= threshold;
        if (y == 1) {
            malignant ? ++c.tp : ++c.fn;
        } else {
            malignant ? ++c.fp : ++c.tn;
        }
    }
    return c;
}

namespace {

std::optional<double> ratio(std::int64_t num, std::int64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ClassificationMetrics classification_metrics(const ConfusionCounts& c) {
    ClassificationMetrics m;
    m.acc = ratio(c.tp + c.tn, c.total());
    m.spec = ratio(c.tn, c.tn + c.fp);
    m.sens = ratio(c.tp, c.tp + c.fn);
    const auto precision = ratio(c.tp, c.tp + c.fp);
    if (precision && m.sens && *precision + *m.sens > 0.0) {
        m.f1 = 2.0 * *precision * *m.sens / (*precision + *m.sens);
    }
    return m;
}

Overlap iou_dice(const BinaryMask& s, const BinaryMask& t) {
    if (s.width() != t.width() || s.height() != t.height()) {
        throw Error(ErrorCode::DimensionMismatch, "masks differ in size");
    }
    std::size_t inter = 0;
    std::size_t s_count = 0;
    std::size_t t_count = 0;
    const auto a = s.grid();
    const auto b = t.grid();
    for (std::size_t i = 0; i < a.size(); ++i) {
        inter += (a[i] && b[i]) ? 1 : 0;
        s_count += a[i] ? 1 : 0;
        t_count += b[i] ? 1 : 0;
    }
    const std::size_t uni = s_count + t_count - inter;
    if (uni == 0) return {1.0, 1.0};
    return {static_cast<double>(inter) / static_cast<double>(uni),
            2.0 * static_cast<double>(inter) / static_cast<double>(s_count + t_count)};
}

}  // namespace smk
