#pragma once

#include <filesystem>
#include <vector>

#include "lesionfuse/features.hpp"
#include "lesionfuse/matrix.hpp"

namespace lesionfuse {

/// Linear projection fitted on training features. Component rows are
/// orthonormal, ordered by descending explained variance, with each row's
/// largest-magnitude entry made positive so refits are reproducible.
struct PcaModel {
    std::vector<double> mean;                 // d
    Matrix components;                        // k x d
    std::vector<double> explained_variance;   // k, non-increasing

    std::size_t k() const { return components.rows(); }
    std::size_t d() const { return components.cols(); }
};

/// Fits on the rows of `train` with k = min(target_k, d, n-1): reduction
/// never expands a descriptor. Uses the covariance eigendecomposition, or
/// the Gram-matrix route when there are fewer samples than dimensions.
PcaModel pca_fit(const FeatureMatrix& train, std::size_t target_k);

/// Rows mapped to (row - mean) * components^T.
FeatureMatrix pca_project(const PcaModel& m, const FeatureMatrix& x);

/// Inverse map back into the original space (identity on the span of the
/// components).
FeatureMatrix pca_reconstruct(const PcaModel& m, const FeatureMatrix& projected);

void save_pca(const std::filesystem::path& path, const PcaModel& m);
PcaModel load_pca(const std::filesystem::path& path);

/// Orthonormal DCT-II of the sequence, truncated to the first
/// min(target_k, d) coefficients. Stateless.
std::vector<double> dct_reduce(const std::vector<double>& x, std::size_t target_k);
FeatureVector dct_reduce(const FeatureVector& x, std::size_t target_k);

/// Inverse of the full-length transform; `coeffs` may be truncated, missing
/// coefficients are treated as zero.
std::vector<double> dct_inverse(const std::vector<double>& coeffs, std::size_t original_dim);

}  // namespace lesionfuse
