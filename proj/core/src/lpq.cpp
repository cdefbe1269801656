#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "lbp_common.hpp"
#include "lesionfuse/descriptors.hpp"
#include "lesionfuse/errors.hpp"

namespace lesionfuse {

namespace {

constexpr int kComponents = 8;  // Re/Im of 4 frequency vectors

void check_params(const LpqParams& p) {
    if (p.win_radius < 1) throw ConfigError("extract_lpq: win_radius must be >= 1");
    if (!(p.freq_scale > 0)) throw ConfigError("extract_lpq: freq_scale must be > 0");
    if (p.bin_threshold < 0) throw ConfigError("extract_lpq: bin_threshold must be >= 0");
}

// Rows 0..3: Re of the four frequencies; rows 4..7: Im. Window offsets are
// flattened as (dy+R)*(2R+1) + (dx+R).
Eigen::MatrixXd stft_basis(const LpqParams& p) {
    const int R = p.win_radius;
    const int side = 2 * R + 1;
    const double f = p.freq_scale / side;
    const double dirs[4][2] = {{f, 0.0}, {0.0, f}, {f, f}, {f, -f}};
    Eigen::MatrixXd m(kComponents, side * side);
    for (int i = 0; i < 4; ++i) {
        for (int dy = -R; dy <= R; ++dy) {
            for (int dx = -R; dx <= R; ++dx) {
                const int j = (dy + R) * side + (dx + R);
                const double phase =
                    -2.0 * std::numbers::pi * (dirs[i][0] * dx + dirs[i][1] * dy);
                m(i, j) = std::cos(phase);
                m(i + 4, j) = std::sin(phase);
            }
        }
    }
    return m;
}

Eigen::MatrixXd markov_covariance(const LpqParams& p) {
    const int R = p.win_radius;
    const int side = 2 * R + 1;
    Eigen::MatrixXd c(side * side, side * side);
    for (int j = 0; j < side * side; ++j) {
        const int jx = j % side;
        const int jy = j / side;
        for (int k = 0; k < side * side; ++k) {
            const int kx = k % side;
            const int ky = k / side;
            const double dist = std::sqrt(static_cast<double>((jx - kx) * (jx - kx) +
                                                              (jy - ky) * (jy - ky)));
            c(j, k) = std::pow(p.decorr_rho, dist);
        }
    }
    return c;
}

Eigen::MatrixXd whitening_matrix(const LpqParams& p) {
    const Eigen::MatrixXd m = stft_basis(p);
    const Eigen::MatrixXd cov = markov_covariance(p);
    Eigen::MatrixXd d = m * cov * m.transpose();
    d += 1e-9 * Eigen::MatrixXd::Identity(kComponents, kComponents);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(d);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("extract_lpq: eigendecomposition failed");

    // Order by descending eigenvalue magnitude; scale rows by 1/sqrt(|l|) so
    // the transform stays real for indefinite model covariances (rho >= 1).
    std::vector<int> order(kComponents);
    for (int i = 0; i < kComponents; ++i) order[i] = i;
    const auto& evals = solver.eigenvalues();
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(evals(a)) > std::abs(evals(b));
    });

    Eigen::MatrixXd w(kComponents, kComponents);
    for (int r = 0; r < kComponents; ++r) {
        Eigen::VectorXd v = solver.eigenvectors().col(order[r]);
        int max_idx = 0;
        for (int i = 1; i < kComponents; ++i)
            if (std::abs(v(i)) > std::abs(v(max_idx))) max_idx = i;
        if (v(max_idx) < 0) v = -v;
        const double scale = 1.0 / std::sqrt(std::max(std::abs(evals(order[r])), 1e-12));
        w.row(r) = scale * v.transpose();
    }
    return w;
}

}  // namespace

Matrix lpq_whitening(const LpqParams& params) {
    check_params(params);
    const Eigen::MatrixXd w = whitening_matrix(params);
    Matrix out(kComponents, kComponents);
    for (int r = 0; r < kComponents; ++r)
        for (int c = 0; c < kComponents; ++c) out(r, c) = w(r, c);
    return out;
}

FeatureVector extract_lpq(const ImageGray& img, const LpqParams& params) {
    check_params(params);
    const int R = params.win_radius;
    const int side = 2 * R + 1;
    if (img.width < static_cast<std::size_t>(side) || img.height < static_cast<std::size_t>(side))
        throw DataError("extract_lpq: window of side " + std::to_string(side) +
                        " larger than the image");

    // Fold whitening into the basis once: codes come from G * window.
    const Eigen::MatrixXd g = whitening_matrix(params) * stft_basis(params);

    std::vector<double> hist(256, 0.0);
    Eigen::VectorXd window(side * side);
    const std::size_t m = static_cast<std::size_t>(R);
    for (std::size_t y = m; y + m < img.height; ++y) {
        for (std::size_t x = m; x + m < img.width; ++x) {
            for (int dy = -R; dy <= R; ++dy)
                for (int dx = -R; dx <= R; ++dx)
                    window((dy + R) * side + (dx + R)) =
                        img.at(x + dx, y + dy);
            const Eigen::VectorXd comps = g * window;
            unsigned code = 0;
            for (int i = 0; i < kComponents; ++i)
                if (comps(i) >= params.bin_threshold) code |= 1u << i;
            ++hist[code];
        }
    }
    detail::l1_normalize(hist, 0, hist.size());

    FeatureVector out{"lpq", std::move(hist)};
    if (out.dim() != 256) throw std::logic_error("extract_lpq: dimension contract broken");
    return out;
}

}  // namespace lesionfuse
