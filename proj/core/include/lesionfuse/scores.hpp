#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lesionfuse/matrix.hpp"

namespace lesionfuse {

/// Per-member classifier outputs: one row per sample id, one column per
/// class. Values are raw decision scores, not probabilities.
struct ScoreMatrix {
    std::string member_id;
    std::vector<std::string> ids;          // n
    std::vector<std::string> class_names;  // C
    Matrix scores;                         // n x C

    std::size_t n() const { return ids.size(); }
    std::size_t num_classes() const { return class_names.size(); }
};

/// Argmax per row; ties resolve to the lowest class index.
std::vector<int> predictions(const ScoreMatrix& s);

/// Score CSV: a `# member_id=...` comment line, then header
/// `id,<class_0>,...,<class_{C-1}>`, then one row per sample.
/// This is also the ingestion format for externally produced CNN scores.
void write_scores(const std::filesystem::path& path, const ScoreMatrix& s);
ScoreMatrix read_scores(const std::filesystem::path& path);

}  // namespace lesionfuse
