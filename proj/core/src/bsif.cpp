#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "csv.hpp"
#include "lbp_common.hpp"
#include "lesionfuse/descriptors.hpp"
#include "lesionfuse/errors.hpp"

namespace lesionfuse {

namespace {

constexpr int kFilters = 8;

void check_size(int size) {
    if (size < 3 || size % 2 == 0)
        throw ConfigError("filter size must be odd and >= 3, got " + std::to_string(size));
}

void recenter(FilterBank& bank) {
    const int n = bank.size * bank.size;
    for (int f = 0; f < bank.n_filters; ++f) {
        double* k = bank.coefficients.data() + static_cast<std::size_t>(f) * n;
        double mean = 0.0;
        for (int i = 0; i < n; ++i) mean += k[i];
        mean /= n;
        for (int i = 0; i < n; ++i) k[i] -= mean;
    }
}

}  // namespace

FilterBank default_filter_bank(int size) {
    check_size(size);
    const int n = size * size;
    if (n < kFilters + 1)
        throw ConfigError("filter size too small for " + std::to_string(kFilters) + " filters");

    std::mt19937 rng(42);
    const auto draw = [&rng]() {
        return static_cast<double>(rng()) * (2.0 / 4294967296.0) - 1.0;
    };

    // Basis starts with the constant direction so Gram-Schmidt leaves every
    // kept kernel exactly zero-mean as well as orthonormal.
    std::vector<std::vector<double>> basis;
    basis.emplace_back(n, 1.0 / std::sqrt(static_cast<double>(n)));

    while (basis.size() < kFilters + 1) {
        std::vector<double> v(n);
        for (double& x : v) x = draw();
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& b : basis) {
                double dot = 0.0;
                for (int i = 0; i < n; ++i) dot += v[i] * b[i];
                for (int i = 0; i < n; ++i) v[i] -= dot * b[i];
            }
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 1e-9) continue;  // degenerate draw, take the next one
        for (double& x : v) x /= norm;
        basis.push_back(std::move(v));
    }

    FilterBank bank;
    bank.size = size;
    bank.n_filters = kFilters;
    bank.coefficients.reserve(static_cast<std::size_t>(kFilters) * n);
    for (int f = 1; f <= kFilters; ++f)
        bank.coefficients.insert(bank.coefficients.end(), basis[f].begin(), basis[f].end());
    return bank;
}

FilterBank load_filter_bank(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    std::size_t i = 0;
    while (i < lines.size() && (lines[i].empty() || lines[i].starts_with("#"))) ++i;
    if (i >= lines.size()) throw DataError(path.string() + ": empty filter bank file");

    std::istringstream head(lines[i]);
    int size = 0, n_filters = 0;
    if (!(head >> size >> n_filters))
        throw DataError(path.string() + ": first line must be 'size n_filters'");
    check_size(size);
    if (n_filters < 1) throw DataError(path.string() + ": n_filters must be >= 1");
    ++i;

    FilterBank bank;
    bank.size = size;
    bank.n_filters = n_filters;
    const std::size_t expected = static_cast<std::size_t>(n_filters) * size * size;
    for (; i < lines.size(); ++i) {
        std::istringstream row(lines[i]);
        double v;
        while (row >> v) bank.coefficients.push_back(v);
    }
    if (bank.coefficients.size() != expected)
        throw DataError(path.string() + ": expected " + std::to_string(expected) +
                        " coefficients, found " + std::to_string(bank.coefficients.size()));
    recenter(bank);
    return bank;
}

void save_filter_bank(const std::filesystem::path& path, const FilterBank& bank) {
    std::ostringstream out;
    out << bank.size << ' ' << bank.n_filters << '\n';
    for (int f = 0; f < bank.n_filters; ++f) {
        for (int ky = 0; ky < bank.size; ++ky) {
            for (int kx = 0; kx < bank.size; ++kx) {
                if (kx) out << ' ';
                out << csv::format_double(bank.at(f, ky, kx));
            }
            out << '\n';
        }
    }
    csv::write_file_atomic(path, out.str());
}

FeatureVector extract_bsif(const ImageGray& img, const BsifConfig& cfg) {
    check_size(cfg.filter_size);
    if (cfg.bank.size != cfg.filter_size)
        throw ConfigError("extract_bsif: bank of size " + std::to_string(cfg.bank.size) +
                          " does not match filter_size " + std::to_string(cfg.filter_size));
    if (cfg.bank.n_filters != kFilters)
        throw ConfigError("extract_bsif: bank must hold exactly 8 filters");
    if (img.width < static_cast<std::size_t>(cfg.filter_size) ||
        img.height < static_cast<std::size_t>(cfg.filter_size))
        throw DataError("extract_bsif: image smaller than the filter");

    const int R = (cfg.filter_size - 1) / 2;
    const auto w = static_cast<std::ptrdiff_t>(img.width);
    const auto h = static_cast<std::ptrdiff_t>(img.height);
    std::vector<double> hist(256, 0.0);
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            unsigned code = 0;
            for (int f = 0; f < kFilters; ++f) {
                double resp = 0.0;
                for (int dy = -R; dy <= R; ++dy) {
                    const std::ptrdiff_t yy = std::clamp<std::ptrdiff_t>(y + dy, 0, h - 1);
                    for (int dx = -R; dx <= R; ++dx) {
                        const std::ptrdiff_t xx = std::clamp<std::ptrdiff_t>(x + dx, 0, w - 1);
                        resp += cfg.bank.at(f, dy + R, dx + R) *
                                img.px[static_cast<std::size_t>(yy) * img.width +
                                       static_cast<std::size_t>(xx)];
                    }
                }
                if (resp > cfg.threshold) code |= 1u << f;
            }
            ++hist[code];
        }
    }
    detail::l1_normalize(hist, 0, hist.size());

    FeatureVector out{"bsif", std::move(hist)};
    if (out.dim() != 256) throw std::logic_error("extract_bsif: dimension contract broken");
    return out;
}

std::vector<LpqParams> mlpq_grid() {
    const double taus[] = {0.2, 0.4, 0.6, 0.8, 1.0};
    const int radii[] = {1, 3, 5};
    const double alphas[] = {0.8, 1.0, 1.2, 1.4, 1.6};
    const double rhos[] = {0.75, 0.95, 1.15, 1.35, 1.55, 1.75, 1.95};
    std::vector<LpqParams> grid;
    grid.reserve(525);
    for (double tau : taus)
        for (int r : radii)
            for (double a : alphas)
                for (double rho : rhos)
                    grid.push_back({r, a, rho, tau});
    return grid;
}

std::vector<BsifVariant> fbsif_grid() {
    const int sizes[] = {3, 5, 7, 9, 11};
    const double thresholds[] = {-9, -6, -3, 0, 3, 6, 9};
    std::vector<BsifVariant> grid;
    grid.reserve(35);
    for (int s : sizes)
        for (double th : thresholds) grid.push_back({s, th});
    return grid;
}

namespace {
std::string short_num(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}
}  // namespace

std::string variant_id(const LpqParams& p) {
    return "mlpq_t" + short_num(p.bin_threshold) + "_R" + std::to_string(p.win_radius) +
           "_a" + short_num(p.freq_scale) + "_r" + short_num(p.decorr_rho);
}

std::string variant_id(const BsifVariant& v) {
    return "fbsif_s" + std::to_string(v.filter_size) + "_th" + short_num(v.threshold);
}

}  // namespace lesionfuse
