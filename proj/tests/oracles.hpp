#pragma once

// Independent naive reimplementations used as oracles. Everything here is
// written from the documented contracts with straightforward loops and its
// own helpers; none of it shares code with the library implementations it
// checks.

#include <cstdint>
#include <vector>

#include "lesionfuse/descriptors.hpp"
#include "lesionfuse/image.hpp"
#include "lesionfuse/matrix.hpp"
#include "lesionfuse/metrics.hpp"
#include "lesionfuse/svm.hpp"

namespace oracle {

// Deterministic integer-valued test images (integer pixels keep threshold
// comparisons exact under constant shifts).
lesionfuse::ImageGray random_gray(std::size_t width, std::size_t height, std::uint32_t seed,
                                  int lo = 0, int hi = 255);
lesionfuse::ImageRGB random_rgb(std::size_t width, std::size_t height, std::uint32_t seed);

std::vector<double> ltp(const lesionfuse::ImageGray& img,
                        const std::vector<lesionfuse::NeighborhoodConfig>& scales,
                        double threshold);
std::vector<double> clbp(const lesionfuse::ImageGray& img,
                         const std::vector<lesionfuse::NeighborhoodConfig>& scales);
std::vector<double> ric(const lesionfuse::ImageGray& img,
                        const std::vector<lesionfuse::RicConfig>& configs, bool toroidal);
std::vector<double> hog(const lesionfuse::ImageGray& img);
std::vector<double> lpq(const lesionfuse::ImageGray& img, const lesionfuse::LpqParams& params);
std::vector<double> bsif(const lesionfuse::ImageGray& img, const lesionfuse::FilterBank& bank,
                         double threshold);
std::vector<double> col(const lesionfuse::ImageRGB& img);
std::vector<double> mor(const lesionfuse::ImageGray& img);

std::vector<double> dct(const std::vector<double>& x, std::size_t keep);

// Cyclic Jacobi eigensolver for small symmetric matrices: fills
// eigenvalues/eigenvectors (column v_i matches eigenvalue i), unsorted.
void jacobi_eig(std::vector<double> a, int n, std::vector<double>& eigenvalues,
                std::vector<double>& eigenvectors);

double naive_decision(const lesionfuse::BinarySvm& m, std::span<const double> x);

// Maximum KKT residual over the training set (alphas recovered by matching
// support vector rows bitwise, so training rows must be distinct).
double kkt_max_violation(const lesionfuse::BinarySvm& m, const lesionfuse::Matrix& X,
                         const std::vector<int>& y);

double bacc(const lesionfuse::ConfusionMatrix& cm);

}  // namespace oracle
