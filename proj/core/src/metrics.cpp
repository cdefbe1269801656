#include "lesionfuse/metrics.hpp"

#include <numeric>
#include <stdexcept>

#include "lesionfuse/errors.hpp"

namespace lesionfuse {

std::int64_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

ConfusionMatrix confusion(const std::vector<int>& true_labels,
                          const std::vector<int>& predicted_labels,
                          std::size_t num_classes,
                          std::vector<std::string> class_names) {
    if (true_labels.size() != predicted_labels.size())
        throw DataError("confusion: label vectors differ in length");
    ConfusionMatrix cm;
    cm.num_classes = num_classes;
    cm.counts.assign(num_classes * num_classes, 0);
    cm.class_names = std::move(class_names);
    for (std::size_t i = 0; i < true_labels.size(); ++i) {
        const int t = true_labels[i];
        const int p = predicted_labels[i];
        if (t < 0 || static_cast<std::size_t>(t) >= num_classes ||
            p < 0 || static_cast<std::size_t>(p) >= num_classes)
            throw DataError("confusion: label out of range at sample " + std::to_string(i));
        ++cm.at(static_cast<std::size_t>(t), static_cast<std::size_t>(p));
    }
    return cm;
}

OvaCounts ova_counts(const ConfusionMatrix& cm, std::size_t c) {
    OvaCounts k;
    const std::size_t C = cm.num_classes;
    for (std::size_t t = 0; t < C; ++t) {
        for (std::size_t p = 0; p < C; ++p) {
            const std::int64_t n = cm.at(t, p);
            if (t == c && p == c) k.tp += n;
            else if (t == c) k.fn += n;
            else if (p == c) k.fp += n;
            else k.tn += n;
        }
    }
    return k;
}

SensSpec sens_spec(const ConfusionMatrix& cm, std::size_t c) {
    const OvaCounts k = ova_counts(cm, c);
    SensSpec r;
    if (k.tp + k.fn > 0) {
        r.sensitivity = static_cast<double>(k.tp) / static_cast<double>(k.tp + k.fn);
    } else {
        r.degenerate = true;
    }
    if (k.tn + k.fp > 0) {
        r.specificity = static_cast<double>(k.tn) / static_cast<double>(k.tn + k.fp);
    } else {
        r.degenerate = true;
    }
    return r;
}

double balanced_accuracy(const ConfusionMatrix& cm) {
    if (cm.num_classes == 0 || cm.total() == 0)
        throw DataError("balanced_accuracy: empty confusion matrix");
    double sum = 0.0;
    for (std::size_t c = 0; c < cm.num_classes; ++c) {
        const SensSpec s = sens_spec(cm, c);
        sum += s.sensitivity + s.specificity;
    }
    return sum / (2.0 * static_cast<double>(cm.num_classes));
}

double mean_recall(const ConfusionMatrix& cm) {
    if (cm.num_classes == 0 || cm.total() == 0)
        throw DataError("mean_recall: empty confusion matrix");
    double sum = 0.0;
    for (std::size_t c = 0; c < cm.num_classes; ++c)
        sum += sens_spec(cm, c).sensitivity;
    return sum / static_cast<double>(cm.num_classes);
}

}  // namespace lesionfuse
