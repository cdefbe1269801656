#pragma once

#include <string>
#include <vector>

#include "lesionfuse/scores.hpp"

namespace lesionfuse {

enum class NormMode { global, per_column };

/// z-normalization statistics fitted on a reference (training) score matrix
/// and frozen for later application. `global` fits one mean/std over all
/// n*C entries, `per_column` fits one pair per class column. Standard
/// deviations use the sample (n-1) convention. A zero-deviation column sets
/// its passthrough flag: applying then centers without scaling.
struct NormStats {
    NormMode mode = NormMode::global;
    std::vector<double> means;        // size 1 (global) or C (per_column)
    std::vector<double> stds;         // same size as means
    std::vector<char> passthrough;    // same size; 1 where std was zero
};

NormStats znorm_fit(const ScoreMatrix& reference, NormMode mode);

ScoreMatrix znorm_apply(const NormStats& stats, const ScoreMatrix& x);

/// One classifier's contribution to the ensemble, with its training-set
/// balanced accuracy used by the chance-level discard rule.
struct EnsembleMember {
    std::string member_id;
    ScoreMatrix train_scores;
    ScoreMatrix eval_scores;
    double train_bacc = 0.0;
};

/// Keeps members whose training balanced accuracy clears 0.5 + margin
/// (chance level is 0.5); order is preserved. The comparison tolerates
/// 1e-12 of rounding so thresholds like 0.5 + 0.05 behave as written.
/// Throws if every member is discarded.
std::vector<EnsembleMember> filter_members(std::vector<EnsembleMember> members,
                                           double chance_margin);

bool member_survives(double train_bacc, double chance_margin);

/// Entry-wise sum of the given score matrices. All members must carry the
/// same ids in the same order and the same class count. The result has
/// member_id "fusion".
ScoreMatrix sum_rule(const std::vector<ScoreMatrix>& members);

}  // namespace lesionfuse
