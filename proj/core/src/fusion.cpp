#include "lesionfuse/fusion.hpp"

#include <cmath>

#include "lesionfuse/errors.hpp"

namespace lesionfuse {

namespace {

// Sample (n-1) mean/std over a range accessed through an indexable getter.
struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

MeanStd sample_stats(const std::vector<double>& values) {
    MeanStd r;
    const std::size_t n = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    r.mean = sum / static_cast<double>(n);
    if (n >= 2) {
        double ss = 0.0;
        for (double v : values) {
            const double d = v - r.mean;
            ss += d * d;
        }
        r.std = std::sqrt(ss / static_cast<double>(n - 1));
    }
    return r;
}

}  // namespace

NormStats znorm_fit(const ScoreMatrix& reference, NormMode mode) {
    const std::size_t n = reference.scores.rows();
    const std::size_t C = reference.scores.cols();
    if (n == 0 || C == 0) throw DataError("znorm_fit: empty score matrix");

    NormStats stats;
    stats.mode = mode;
    if (mode == NormMode::global) {
        const MeanStd ms = sample_stats(reference.scores.data());
        stats.means = {ms.mean};
        stats.stds = {ms.std};
        stats.passthrough = {static_cast<char>(ms.std == 0.0)};
    } else {
        stats.means.resize(C);
        stats.stds.resize(C);
        stats.passthrough.resize(C);
        std::vector<double> col(n);
        for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t r = 0; r < n; ++r) col[r] = reference.scores(r, c);
            const MeanStd ms = sample_stats(col);
            stats.means[c] = ms.mean;
            stats.stds[c] = ms.std;
            stats.passthrough[c] = static_cast<char>(ms.std == 0.0);
        }
    }
    return stats;
}

ScoreMatrix znorm_apply(const NormStats& stats, const ScoreMatrix& x) {
    const std::size_t C = x.scores.cols();
    if (stats.mode == NormMode::per_column && stats.means.size() != C)
        throw DataError("znorm_apply: stats fitted for " + std::to_string(stats.means.size()) +
                        " columns, matrix has " + std::to_string(C));

    ScoreMatrix out = x;
    for (std::size_t r = 0; r < x.scores.rows(); ++r) {
        for (std::size_t c = 0; c < C; ++c) {
            const std::size_t k = stats.mode == NormMode::global ? 0 : c;
            const double centered = x.scores(r, c) - stats.means[k];
            out.scores(r, c) = stats.passthrough[k] ? centered : centered / stats.stds[k];
        }
    }
    return out;
}

bool member_survives(double train_bacc, double chance_margin) {
    return train_bacc + 1e-12 >= 0.5 + chance_margin;
}

std::vector<EnsembleMember> filter_members(std::vector<EnsembleMember> members,
                                           double chance_margin) {
    if (chance_margin < 0.0) throw ConfigError("filter_members: chance_margin must be >= 0");
    std::vector<EnsembleMember> kept;
    kept.reserve(members.size());
    for (auto& m : members) {
        if (member_survives(m.train_bacc, chance_margin)) kept.push_back(std::move(m));
    }
    if (kept.empty() && !members.empty())
        throw DataError("filter_members: empty ensemble (all members at chance level)");
    return kept;
}

ScoreMatrix sum_rule(const std::vector<ScoreMatrix>& members) {
    if (members.empty()) throw DataError("sum_rule: no members");
    const ScoreMatrix& first = members.front();
    ScoreMatrix out = first;
    out.member_id = "fusion";
    for (std::size_t m = 1; m < members.size(); ++m) {
        const ScoreMatrix& s = members[m];
        if (s.scores.cols() != first.scores.cols())
            throw DataError("sum_rule: member '" + s.member_id + "' has a different class count");
        if (s.ids != first.ids)
            throw DataError("sum_rule: member '" + s.member_id + "' ids do not match (same order required)");
        for (std::size_t i = 0; i < out.scores.data().size(); ++i)
            out.scores.data()[i] += s.scores.data()[i];
    }
    return out;
}

}  // namespace lesionfuse
