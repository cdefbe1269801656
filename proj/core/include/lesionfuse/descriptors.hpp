#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lesionfuse/features.hpp"
#include "lesionfuse/image.hpp"
#include "lesionfuse/matrix.hpp"

namespace lesionfuse {

// ---------------------------------------------------------------------------
// Circular neighborhoods (shared by the LBP family)
// ---------------------------------------------------------------------------

struct NeighborhoodConfig {
    double radius = 1.0;  // > 0
    int points = 8;       // >= 2
};

/// Samples `points` values on the circle of `radius` around (cx, cy).
/// Sample k sits at angle 2*pi*k/points, with angle 0 along +x and +y
/// pointing down the image. Off-grid positions are bilinearly interpolated;
/// offsets within 1e-9 of the pixel grid are snapped onto it so axis
/// neighbors are read exactly. The full circle must lie inside the image.
std::vector<double> sample_circular(const ImageGray& img, double cx, double cy,
                                    const NeighborhoodConfig& cfg);

// ---------------------------------------------------------------------------
// LTP — multiscale uniform local ternary patterns
// ---------------------------------------------------------------------------

struct LtpConfig {
    std::vector<NeighborhoodConfig> scales = {{1.0, 8}, {2.0, 16}};
    double threshold = 3.0;  // dead-zone half width, >= 0
};

/// Per scale, each interior pixel yields a ternary code against the center
/// (+1 at >= center+t, -1 at <= center-t, 0 between), split into an upper
/// (the +1s) and lower (the -1s) binary pattern. Both are histogrammed with
/// the uniform-2 mapping: uniform codes (at most 2 circular bit transitions)
/// in ascending numeric order, then one trailing bin for everything else,
/// P*(P-1)+3 bins total. Blocks are concatenated upper/lower per scale in
/// scale order and L1-normalized individually. Default dim 604.
FeatureVector extract_ltp(const ImageGray& img, const LtpConfig& cfg = {});

// ---------------------------------------------------------------------------
// CLBP — completed LBP (sign / magnitude / center, joint histogram)
// ---------------------------------------------------------------------------

/// Per scale: S_k = neighbor-center difference > 0, M_k = |difference|
/// strictly above the image-wide mean |difference| at that scale, C = center
/// >= image-wide mean intensity. S and M are mapped rotation-invariant
/// uniform (riu2: uniform codes map to their popcount, the rest to P+1),
/// then counted in a joint (P+2) x (P+2) x 2 histogram indexed
/// (s * (P+2) + m) * 2 + c. One L1-normalized block per scale; default dim
/// 200 + 648 = 848.
FeatureVector extract_clbp(const ImageGray& img,
                           const std::vector<NeighborhoodConfig>& scales = {{1.0, 8},
                                                                            {2.0, 16}});

// ---------------------------------------------------------------------------
// RIC-LBP — rotation invariant co-occurrence of adjacent LBPs
// ---------------------------------------------------------------------------

struct RicConfig {
    int radius = 1;        // 4-neighbor LBP radius
    int displacement = 2;  // co-occurrence offset
};

enum class RicBorder {
    interior,  // pairs restricted to pixels whose neighborhoods fit
    toroidal,  // wrap-around indexing; every pixel is a valid center
};

/// Per (radius, displacement): 4-point LBP codes (bit k set when the
/// neighbor at angle 2*pi*k/4 is strictly brighter than the center), paired
/// at displacements (d,0), (0,d), (d,d), (d,-d). Pair (A,B) is identified
/// with (rot180(B), rot180(A)) where rot180 circularly shifts the 4-bit code
/// by 2, giving (256+16)/2 = 136 equivalence classes indexed by ascending
/// canonical label. One L1-normalized block per config; default dim 408.
FeatureVector extract_riclbp(const ImageGray& img,
                             const std::vector<RicConfig>& configs = {{1, 2},
                                                                      {2, 4},
                                                                      {4, 8}},
                             RicBorder border = RicBorder::interior);

// ---------------------------------------------------------------------------
// HOG — histogram of oriented gradients on a fixed 5x6 cell grid
// ---------------------------------------------------------------------------

/// Central-difference gradients (edge replicated), unsigned orientation in
/// [0, 180) split into 9 equal bins (magnitude-weighted vote to the
/// containing bin), 5 rows x 6 cols of cells, each cell L2-normalized with
/// epsilon 1e-6. Dim 270.
FeatureVector extract_hog(const ImageGray& img);

// ---------------------------------------------------------------------------
// LPQ — local phase quantization, multithreshold variant
// ---------------------------------------------------------------------------

struct LpqParams {
    int win_radius = 1;         // window side 2R+1, R >= 1
    double freq_scale = 1.0;    // a; sample frequency f = a / (2R+1)
    double decorr_rho = 0.9;    // adjacent-pixel correlation of the decorrelation model
    double bin_threshold = 0.0; // tau; 0 recovers standard LPQ
};

/// Windowed Fourier coefficients at u1=(f,0), u2=(0,f), u3=(f,f), u4=(f,-f)
/// with f = a/(2R+1): F_i = sum over offsets (dx,dy) in [-R,R]^2 of
/// I(x+dx, y+dy) * exp(-2*pi*j*(u_i . (dx,dy))). The 8-vector
/// [Re F1..Re F4, Im F1..Im F4] is whitened against the covariance implied
/// by a first-order Markov model with correlation rho^distance (regularized
/// by +1e-9 I; eigenvalue magnitudes are used so the transform stays real
/// when rho >= 1 makes the model indefinite). Bit i is set when whitened
/// component i >= tau; the 8-bit codes over interior pixels form one
/// L1-normalized 256-bin histogram.
FeatureVector extract_lpq(const ImageGray& img, const LpqParams& params = {});

/// The 8x8 whitening transform W used by extract_lpq (rows ordered by
/// descending eigenvalue magnitude, each row's largest-magnitude entry made
/// positive). Exposed so its algebra can be checked directly.
Matrix lpq_whitening(const LpqParams& params);

// ---------------------------------------------------------------------------
// BSIF — binarized statistical image features
// ---------------------------------------------------------------------------

/// A bank of square filters applied as correlation kernels. Kernels are
/// recentered to zero mean when loaded from file.
struct FilterBank {
    int size = 3;       // odd kernel side
    int n_filters = 8;
    std::vector<double> coefficients;  // n_filters * size * size, row-major

    double at(int filter, int ky, int kx) const {
        return coefficients[(static_cast<std::size_t>(filter) * size + ky) * size + kx];
    }
};

/// Deterministic built-in bank: 8 orthonormal zero-mean kernels obtained by
/// Gram-Schmidt of an mt19937(42)-seeded random matrix against the constant
/// direction. Lets the pipeline run without externally learned filters.
FilterBank default_filter_bank(int size);

/// FilterBank file: first line `size n_filters`, then n_filters blocks of
/// size x size whitespace-separated reals, row-major.
FilterBank load_filter_bank(const std::filesystem::path& path);
void save_filter_bank(const std::filesystem::path& path, const FilterBank& bank);

struct BsifConfig {
    int filter_size = 3;
    double threshold = 0.0;  // th
    FilterBank bank;
};

/// Correlates each filter over the image (edge replication), sets bit i
/// when response_i > th, and histograms the 8-bit codes over all pixels
/// into one L1-normalized 256-bin block.
FeatureVector extract_bsif(const ImageGray& img, const BsifConfig& cfg);

// ---------------------------------------------------------------------------
// Parameter grids for the MLPQ / FBSIF variant ensembles
// ---------------------------------------------------------------------------

struct BsifVariant {
    int filter_size = 3;
    double threshold = 0.0;
};

/// Full MLPQ grid: tau {0.2,0.4,0.6,0.8,1} x R {1,3,5} x a {0.8,1,1.2,1.4,1.6}
/// x rho {0.75,...,1.95}, 525 entries in lexicographic (tau, R, a, rho)
/// order with rho varying fastest.
std::vector<LpqParams> mlpq_grid();

/// Full FBSIF grid: size {3,5,7,9,11} x th {-9,-6,-3,0,3,6,9}, 35 entries,
/// th varying fastest.
std::vector<BsifVariant> fbsif_grid();

std::string variant_id(const LpqParams& p);
std::string variant_id(const BsifVariant& v);

// ---------------------------------------------------------------------------
// COL — color statistics
// ---------------------------------------------------------------------------

/// 12 values: per channel (R, G, B) the population mean, standard deviation
/// and skewness, then the Pearson correlations RG, RB, GB. Zero-variance
/// channels yield skewness 0 and correlation 0.
FeatureVector extract_col(const ImageRGB& img);

// ---------------------------------------------------------------------------
// MOR — morphology of the Otsu-thresholded dark region
// ---------------------------------------------------------------------------

/// Otsu binarization with the darker side as foreground (lesions are dark),
/// 8-connected components. 8 values: object count, then for the largest
/// object: area fraction, perimeter (boundary-pixel count), bounding-box
/// aspect ratio w/h, eccentricity of the second-moment ellipse, area /
/// bounding-box area, centroid offset from the image center normalized by
/// the half diagonal, and circularity 4*pi*A/P^2. All-background images
/// give the zero vector.
FeatureVector extract_mor(const ImageGray& img);

}  // namespace lesionfuse
