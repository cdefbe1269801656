#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lesionfuse/matrix.hpp"
#include "lesionfuse/scores.hpp"

namespace lesionfuse {

struct KernelParams {
    double C = 1.0;      // box constraint, > 0
    double gamma = 1.0;  // RBF width, > 0
};

/// One binary RBF machine: decision(x) = sum_i dual_coef_i K(sv_i, x) + bias
/// with K(x,z) = exp(-gamma ||x-z||^2). dual_coef_i = alpha_i y_i holds
/// 0 < |alpha_i| <= C for every stored vector.
struct BinarySvm {
    Matrix support_vectors;         // m x d
    std::vector<double> dual_coef;  // m
    double bias = 0.0;
    KernelParams params;
};

/// SMO with maximal-violating-pair selection, run to KKT tolerance 1e-3
/// (at most 1e6 pair updates). Labels are -1/+1 and both classes must be
/// present.
BinarySvm train_binary(const Matrix& X, const std::vector<int>& y, const KernelParams& p);

double decision_value(const BinarySvm& m, std::span<const double> x);

/// Per-dimension z-standardization fitted on training features
/// (sample std; zero-variance dimensions are centered but not scaled).
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;  // 1 for zero-variance dimensions

    std::vector<double> apply(std::span<const double> row) const;
};

Standardizer fit_standardizer(const Matrix& X);

/// One-vs-all ensemble: machine c is trained class c against the rest on
/// internally standardized features.
struct OvaSvm {
    std::vector<BinarySvm> machines;  // one per class
    std::vector<std::string> class_names;
    Standardizer standardizer;

    std::size_t num_classes() const { return machines.size(); }
    std::size_t dim() const { return standardizer.mean.size(); }
};

OvaSvm train_ova(const Matrix& X, const std::vector<int>& labels,
                 const std::vector<std::string>& class_names, const KernelParams& p);

/// n x C raw decision values (not probabilities); the predicted label is
/// the argmax, ties to the lowest class index.
ScoreMatrix score_matrix(const OvaSvm& m, const Matrix& X,
                         const std::vector<std::string>& ids,
                         const std::string& member_id = "svm");

struct TuneOptions {
    std::vector<double> c_grid;      // empty -> default_c_grid()
    std::vector<double> gamma_grid;  // empty -> default_gamma_grid(d)
    std::size_t folds = 5;
    std::uint64_t seed = 0;
};

/// Deterministic stratified fold assignment: indices of each class are
/// shuffled by a generator seeded from (seed, class) and dealt round-robin.
std::vector<std::size_t> stratified_folds(const std::vector<int>& labels, std::size_t num_classes,
                                          std::size_t folds, std::uint64_t seed);

/// Stratified k-fold selection of (C, gamma) maximizing mean validation
/// balanced accuracy; ties prefer smaller C, then smaller gamma. Fold
/// assignment is deterministic given the seed.
KernelParams tune(const Matrix& X, const std::vector<int>& labels,
                  const std::vector<std::string>& class_names, const TuneOptions& opts);

std::vector<double> default_c_grid();
std::vector<double> default_gamma_grid(std::size_t dim);

/// Self-describing CSV bundle: params, standardization stats, then support
/// vectors and coefficients per class.
void save_ova(const std::filesystem::path& path, const OvaSvm& m);
OvaSvm load_ova(const std::filesystem::path& path);

}  // namespace lesionfuse
