#pragma once

// Internal helpers shared by the LBP-family descriptors.

#include <cstddef>
#include <vector>

#include "lesionfuse/descriptors.hpp"

namespace lesionfuse::detail {

// Precomputed sample offsets for one neighborhood, snapped to the grid
// where they land within 1e-9.
struct CircleOffsets {
    std::vector<double> dx;
    std::vector<double> dy;
};
CircleOffsets circle_offsets(const NeighborhoodConfig& cfg);

// Bilinear read at (x, y); both coordinates' 4-neighborhoods must be in
// bounds (exact-grid coordinates read a single pixel).
double sample_at(const ImageGray& img, double x, double y);

// Number of circular 0/1 transitions of a P-bit code.
int transitions(unsigned code, int points);

// code -> u2 bin: uniform codes in ascending order, then one trailing
// non-uniform bin. Table size 2^points, bins points*(points-1)+3.
const std::vector<int>& u2_table(int points);

// code -> riu2 bin: popcount for uniform codes, points+1 otherwise.
const std::vector<int>& riu2_table(int points);

void l1_normalize(std::vector<double>& hist, std::size_t begin, std::size_t end);

// Interior margin (smallest integer m with m >= radius).
std::size_t margin_for(double radius);

}  // namespace lesionfuse::detail
