#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lesionfuse {

/// C x C counts, rows indexed by true class, columns by predicted class.
struct ConfusionMatrix {
    std::size_t num_classes = 0;
    std::vector<std::int64_t> counts;  // row-major C*C
    std::vector<std::string> class_names;

    std::int64_t& at(std::size_t t, std::size_t p) { return counts[t * num_classes + p]; }
    std::int64_t at(std::size_t t, std::size_t p) const { return counts[t * num_classes + p]; }
    std::int64_t total() const;
};

/// One-vs-all counts for a single class read out of a confusion matrix.
struct OvaCounts {
    std::int64_t tp = 0, tn = 0, fp = 0, fn = 0;
};

/// Sensitivity/specificity pair; `degenerate` is set when a denominator was
/// empty and the corresponding value was forced to 0.
struct SensSpec {
    double sensitivity = 0.0;
    double specificity = 0.0;
    bool degenerate = false;
};

ConfusionMatrix confusion(const std::vector<int>& true_labels,
                          const std::vector<int>& predicted_labels,
                          std::size_t num_classes,
                          std::vector<std::string> class_names = {});

OvaCounts ova_counts(const ConfusionMatrix& cm, std::size_t c);

SensSpec sens_spec(const ConfusionMatrix& cm, std::size_t c);

/// Mean over classes of (sensitivity_c + specificity_c) / 2 with each class
/// read one-vs-all. Chance level is 0.5. Empty-denominator classes
/// contribute 0 (see SensSpec::degenerate).
double balanced_accuracy(const ConfusionMatrix& cm);

/// Mean per-class recall (the ISIC contest metric), provided alongside the
/// default balanced accuracy.
double mean_recall(const ConfusionMatrix& cm);

}  // namespace lesionfuse
