#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

namespace oracle {

using lesionfuse::BinarySvm;
using lesionfuse::ConfusionMatrix;
using lesionfuse::FilterBank;
using lesionfuse::ImageGray;
using lesionfuse::ImageRGB;
using lesionfuse::LpqParams;
using lesionfuse::Matrix;
using lesionfuse::NeighborhoodConfig;
using lesionfuse::RicConfig;

namespace {

constexpr double kPi = std::numbers::pi;

double bilinear(const ImageGray& img, double x, double y) {
    const double xf = std::floor(x);
    const double yf = std::floor(y);
    const auto x0 = static_cast<std::size_t>(xf);
    const auto y0 = static_cast<std::size_t>(yf);
    const double tx = x - xf;
    const double ty = y - yf;
    if (tx == 0.0 && ty == 0.0) return img.at(x0, y0);
    const std::size_t x1 = tx == 0.0 ? x0 : x0 + 1;
    const std::size_t y1 = ty == 0.0 ? y0 : y0 + 1;
    const double top = (1.0 - tx) * img.at(x0, y0) + tx * img.at(x1, y0);
    const double bot = (1.0 - tx) * img.at(x0, y1) + tx * img.at(x1, y1);
    return (1.0 - ty) * top + ty * bot;
}

// Neighbor position for sample k of a (radius, points) circle, snapped to
// the grid within 1e-9, +y down, angle 0 along +x.
void neighbor_offset(const NeighborhoodConfig& cfg, int k, double& dx, double& dy) {
    const double angle = 2.0 * kPi * k / cfg.points;
    dx = cfg.radius * std::cos(angle);
    dy = cfg.radius * std::sin(angle);
    if (std::abs(dx - std::round(dx)) < 1e-9) dx = std::round(dx);
    if (std::abs(dy - std::round(dy)) < 1e-9) dy = std::round(dy);
}

int circular_transitions(unsigned code, int points) {
    int t = 0;
    for (int k = 0; k < points; ++k) {
        const int a = (code >> k) & 1;
        const int b = (code >> ((k + 1) % points)) & 1;
        if (a != b) ++t;
    }
    return t;
}

// Uniform codes in ascending order followed by one catch-all bin,
// implemented here by collecting-then-searching rather than a table.
std::vector<unsigned> uniform_codes(int points) {
    std::vector<unsigned> codes;
    for (unsigned c = 0; c < (1u << points); ++c)
        if (circular_transitions(c, points) <= 2) codes.push_back(c);
    return codes;
}

std::size_t u2_bin(const std::vector<unsigned>& uniform, unsigned code) {
    const auto it = std::lower_bound(uniform.begin(), uniform.end(), code);
    if (it != uniform.end() && *it == code)
        return static_cast<std::size_t>(std::distance(uniform.begin(), it));
    return uniform.size();  // catch-all
}

int popcount_slow(unsigned v) {
    int c = 0;
    while (v) {
        c += static_cast<int>(v & 1);
        v >>= 1;
    }
    return c;
}

void normalize_block(std::vector<double>& h, std::size_t begin, std::size_t end) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += h[i];
    if (s > 0)
        for (std::size_t i = begin; i < end; ++i) h[i] /= s;
}

}  // namespace

ImageGray random_gray(std::size_t width, std::size_t height, std::uint32_t seed, int lo, int hi) {
    std::mt19937 rng(seed);
    ImageGray img;
    img.width = width;
    img.height = height;
    img.px.resize(width * height);
    const auto span = static_cast<std::uint32_t>(hi - lo + 1);
    for (double& v : img.px) v = static_cast<double>(lo + static_cast<int>(rng() % span));
    return img;
}

ImageRGB random_rgb(std::size_t width, std::size_t height, std::uint32_t seed) {
    std::mt19937 rng(seed);
    ImageRGB img;
    img.width = width;
    img.height = height;
    img.px.resize(width * height * 3);
    for (double& v : img.px) v = static_cast<double>(rng() % 256);
    return img;
}

std::vector<double> ltp(const ImageGray& img, const std::vector<NeighborhoodConfig>& scales,
                        double threshold) {
    std::vector<double> out;
    for (const auto& scale : scales) {
        const auto uniform = uniform_codes(scale.points);
        const std::size_t bins = uniform.size() + 1;
        std::vector<double> upper_hist(bins, 0.0), lower_hist(bins, 0.0);
        const auto margin = static_cast<std::size_t>(std::ceil(scale.radius));
        for (std::size_t y = margin; y + margin < img.height; ++y) {
            for (std::size_t x = margin; x + margin < img.width; ++x) {
                const double c = img.at(x, y);
                unsigned up = 0, lo = 0;
                for (int k = 0; k < scale.points; ++k) {
                    double dx, dy;
                    neighbor_offset(scale, k, dx, dy);
                    const double n = bilinear(img, static_cast<double>(x) + dx,
                                              static_cast<double>(y) + dy);
                    if (n >= c + threshold) up |= 1u << k;
                    else if (n <= c - threshold) lo |= 1u << k;
                }
                ++upper_hist[u2_bin(uniform, up)];
                ++lower_hist[u2_bin(uniform, lo)];
            }
        }
        normalize_block(upper_hist, 0, bins);
        normalize_block(lower_hist, 0, bins);
        out.insert(out.end(), upper_hist.begin(), upper_hist.end());
        out.insert(out.end(), lower_hist.begin(), lower_hist.end());
    }
    return out;
}

std::vector<double> clbp(const ImageGray& img, const std::vector<NeighborhoodConfig>& scales) {
    double img_mean = 0.0;
    for (double v : img.px) img_mean += v;
    img_mean /= static_cast<double>(img.px.size());

    std::vector<double> out;
    for (const auto& scale : scales) {
        const int P = scale.points;
        const auto margin = static_cast<std::size_t>(std::ceil(scale.radius));

        double mag_sum = 0.0;
        std::size_t count = 0;
        for (std::size_t y = margin; y + margin < img.height; ++y) {
            for (std::size_t x = margin; x + margin < img.width; ++x) {
                for (int k = 0; k < P; ++k) {
                    double dx, dy;
                    neighbor_offset(scale, k, dx, dy);
                    mag_sum += std::abs(bilinear(img, static_cast<double>(x) + dx,
                                                 static_cast<double>(y) + dy) -
                                        img.at(x, y));
                    ++count;
                }
            }
        }
        const double mag_mean = count ? mag_sum / static_cast<double>(count) : 0.0;

        const std::size_t riu_bins = static_cast<std::size_t>(P) + 2;
        std::vector<double> hist(riu_bins * riu_bins * 2, 0.0);
        for (std::size_t y = margin; y + margin < img.height; ++y) {
            for (std::size_t x = margin; x + margin < img.width; ++x) {
                const double c = img.at(x, y);
                unsigned sc = 0, mc = 0;
                for (int k = 0; k < P; ++k) {
                    double dx, dy;
                    neighbor_offset(scale, k, dx, dy);
                    const double d = bilinear(img, static_cast<double>(x) + dx,
                                              static_cast<double>(y) + dy) -
                                     c;
                    if (d > 0) sc |= 1u << k;
                    if (std::abs(d) > mag_mean) mc |= 1u << k;
                }
                const auto riu = [P](unsigned code) {
                    return circular_transitions(code, P) <= 2 ? popcount_slow(code) : P + 1;
                };
                const std::size_t idx =
                    (static_cast<std::size_t>(riu(sc)) * riu_bins +
                     static_cast<std::size_t>(riu(mc))) * 2 +
                    (c >= img_mean ? 1 : 0);
                ++hist[idx];
            }
        }
        normalize_block(hist, 0, hist.size());
        out.insert(out.end(), hist.begin(), hist.end());
    }
    return out;
}

namespace {

unsigned ric_rot180(unsigned code) { return ((code << 2) | (code >> 2)) & 0xFu; }

// Canonical labels of the 136 pair classes, enumerated independently.
std::vector<unsigned> ric_canonicals() {
    std::vector<unsigned> canon;
    for (unsigned label = 0; label < 256; ++label) {
        const unsigned a = label / 16, b = label % 16;
        const unsigned mate = ric_rot180(b) * 16 + ric_rot180(a);
        if (label <= mate) canon.push_back(label);
    }
    return canon;
}

double value_wrapped(const ImageGray& img, long x, long y) {
    const long w = static_cast<long>(img.width);
    const long h = static_cast<long>(img.height);
    x = ((x % w) + w) % w;
    y = ((y % h) + h) % h;
    return img.px[static_cast<std::size_t>(y) * img.width + static_cast<std::size_t>(x)];
}

unsigned ric_code(const ImageGray& img, long x, long y, int r, bool toroidal) {
    const auto value = [&](long xx, long yy) {
        if (toroidal) return value_wrapped(img, xx, yy);
        return img.px[static_cast<std::size_t>(yy) * img.width + static_cast<std::size_t>(xx)];
    };
    const double c = value(x, y);
    unsigned code = 0;
    if (value(x + r, y) > c) code |= 1u;
    if (value(x, y + r) > c) code |= 2u;
    if (value(x - r, y) > c) code |= 4u;
    if (value(x, y - r) > c) code |= 8u;
    return code;
}

}  // namespace

std::vector<double> ric(const ImageGray& img, const std::vector<RicConfig>& configs,
                        bool toroidal) {
    const auto canon = ric_canonicals();
    const auto class_of = [&canon](unsigned a, unsigned b) {
        unsigned label = a * 16 + b;
        const unsigned mate = ric_rot180(b) * 16 + ric_rot180(a);
        if (mate < label) label = mate;
        const auto it = std::lower_bound(canon.begin(), canon.end(), label);
        return static_cast<std::size_t>(std::distance(canon.begin(), it));
    };

    std::vector<double> out;
    for (const auto& cfg : configs) {
        std::vector<double> hist(canon.size(), 0.0);
        const long r = cfg.radius;
        const long d = cfg.displacement;
        const long deltas[4][2] = {{d, 0}, {0, d}, {d, d}, {d, -d}};
        const long w = static_cast<long>(img.width);
        const long h = static_cast<long>(img.height);
        if (toroidal) {
            for (long y = 0; y < h; ++y)
                for (long x = 0; x < w; ++x)
                    for (const auto& dd : deltas) {
                        const unsigned a = ric_code(img, x, y, cfg.radius, true);
                        const unsigned b = ric_code(img, x + dd[0], y + dd[1], cfg.radius, true);
                        ++hist[class_of(a, b)];
                    }
        } else {
            for (long y = r; y < h - r; ++y)
                for (long x = r; x < w - r; ++x)
                    for (const auto& dd : deltas) {
                        const long qx = x + dd[0];
                        const long qy = y + dd[1];
                        if (qx < r || qy < r || qx >= w - r || qy >= h - r) continue;
                        const unsigned a = ric_code(img, x, y, cfg.radius, false);
                        const unsigned b = ric_code(img, qx, qy, cfg.radius, false);
                        ++hist[class_of(a, b)];
                    }
        }
        normalize_block(hist, 0, hist.size());
        out.insert(out.end(), hist.begin(), hist.end());
    }
    return out;
}

std::vector<double> hog(const ImageGray& img) {
    const std::size_t rows = 5, cols = 6, bins = 9;
    std::vector<double> hist(rows * cols * bins, 0.0);
    for (std::size_t y = 0; y < img.height; ++y) {
        for (std::size_t x = 0; x < img.width; ++x) {
            const std::size_t xl = x > 0 ? x - 1 : 0;
            const std::size_t xr = x + 1 < img.width ? x + 1 : img.width - 1;
            const std::size_t yu = y > 0 ? y - 1 : 0;
            const std::size_t yd = y + 1 < img.height ? y + 1 : img.height - 1;
            const double gx = img.at(xr, y) - img.at(xl, y);
            const double gy = img.at(x, yd) - img.at(x, yu);
            const double mag = std::sqrt(gx * gx + gy * gy);
            if (mag == 0.0) continue;
            double ang = std::atan2(gy, gx);
            if (ang < 0) ang += kPi;
            if (ang >= kPi) ang -= kPi;
            std::size_t bin = static_cast<std::size_t>(ang / (kPi / bins));
            if (bin > bins - 1) bin = bins - 1;
            const std::size_t cr = y * rows / img.height;
            const std::size_t cc = x * cols / img.width;
            hist[(cr * cols + cc) * bins + bin] += mag;
        }
    }
    for (std::size_t cell = 0; cell < rows * cols; ++cell) {
        double ss = 0.0;
        for (std::size_t b = 0; b < bins; ++b) ss += hist[cell * bins + b] * hist[cell * bins + b];
        const double norm = std::sqrt(ss + 1e-6 * 1e-6);
        for (std::size_t b = 0; b < bins; ++b) hist[cell * bins + b] /= norm;
    }
    return hist;
}

void jacobi_eig(std::vector<double> a, int n, std::vector<double>& eigenvalues,
                std::vector<double>& eigenvectors) {
    std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;
    const auto A = [&a, n](int r, int c) -> double& { return a[static_cast<std::size_t>(r) * n + c]; };
    const auto V = [&v, n](int r, int c) -> double& { return v[static_cast<std::size_t>(r) * n + c]; };

    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (A(p, q) == 0.0) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    eigenvalues.resize(n);
    for (int i = 0; i < n; ++i) eigenvalues[static_cast<std::size_t>(i)] = A(i, i);
    eigenvectors = v;
}

std::vector<double> lpq(const ImageGray& img, const LpqParams& p) {
    const int R = p.win_radius;
    const int side = 2 * R + 1;
    const int wlen = side * side;
    const double f = p.freq_scale / side;
    const double dirs[4][2] = {{f, 0.0}, {0.0, f}, {f, f}, {f, -f}};

    // The 8 x wlen transform rows (Re then Im), built with explicit sums.
    std::vector<double> basis(8 * static_cast<std::size_t>(wlen));
    for (int i = 0; i < 4; ++i) {
        for (int dy = -R; dy <= R; ++dy) {
            for (int dx = -R; dx <= R; ++dx) {
                const int j = (dy + R) * side + (dx + R);
                const double phase = -2.0 * kPi * (dirs[i][0] * dx + dirs[i][1] * dy);
                basis[static_cast<std::size_t>(i) * wlen + j] = std::cos(phase);
                basis[static_cast<std::size_t>(i + 4) * wlen + j] = std::sin(phase);
            }
        }
    }

    // Model covariance, the 8x8 coefficient covariance, and its whitening
    // via the local Jacobi solver.
    std::vector<double> cov(static_cast<std::size_t>(wlen) * wlen);
    for (int j = 0; j < wlen; ++j) {
        for (int k = 0; k < wlen; ++k) {
            const double ddx = j % side - k % side;
            const double ddy = j / side - k / side;
            cov[static_cast<std::size_t>(j) * wlen + k] =
                std::pow(p.decorr_rho, std::sqrt(ddx * ddx + ddy * ddy));
        }
    }
    std::vector<double> d(64, 0.0);
    for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) {
            double acc = 0.0;
            for (int j = 0; j < wlen; ++j)
                for (int k = 0; k < wlen; ++k)
                    acc += basis[static_cast<std::size_t>(r) * wlen + j] *
                           cov[static_cast<std::size_t>(j) * wlen + k] *
                           basis[static_cast<std::size_t>(c) * wlen + k];
            d[static_cast<std::size_t>(r) * 8 + c] = acc;
        }
    }
    for (int i = 0; i < 8; ++i) d[static_cast<std::size_t>(i) * 8 + i] += 1e-9;

    std::vector<double> evals, evecs;
    jacobi_eig(d, 8, evals, evecs);
    std::vector<int> order{0, 1, 2, 3, 4, 5, 6, 7};
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return std::abs(evals[a]) > std::abs(evals[b]); });

    std::vector<double> whiten(64);
    for (int r = 0; r < 8; ++r) {
        const int src = order[static_cast<std::size_t>(r)];
        double column[8];
        for (int i = 0; i < 8; ++i) column[i] = evecs[static_cast<std::size_t>(i) * 8 + src];
        int max_i = 0;
        for (int i = 1; i < 8; ++i)
            if (std::abs(column[i]) > std::abs(column[max_i])) max_i = i;
        const double flip = column[max_i] < 0 ? -1.0 : 1.0;
        const double scale =
            1.0 / std::sqrt(std::max(std::abs(evals[static_cast<std::size_t>(src)]), 1e-12));
        for (int i = 0; i < 8; ++i)
            whiten[static_cast<std::size_t>(r) * 8 + i] = flip * scale * column[i];
    }

    std::vector<double> hist(256, 0.0);
    for (std::size_t y = static_cast<std::size_t>(R); y + R < img.height; ++y) {
        for (std::size_t x = static_cast<std::size_t>(R); x + R < img.width; ++x) {
            double comps[8] = {};
            for (int i = 0; i < 8; ++i) {
                double acc = 0.0;
                for (int dy = -R; dy <= R; ++dy)
                    for (int dx = -R; dx <= R; ++dx)
                        acc += basis[static_cast<std::size_t>(i) * wlen + (dy + R) * side +
                                     (dx + R)] *
                               img.at(x + dx, y + dy);
                comps[i] = acc;
            }
            unsigned code = 0;
            for (int b = 0; b < 8; ++b) {
                double white = 0.0;
                for (int i = 0; i < 8; ++i)
                    white += whiten[static_cast<std::size_t>(b) * 8 + i] * comps[i];
                if (white >= p.bin_threshold) code |= 1u << b;
            }
            ++hist[code];
        }
    }
    normalize_block(hist, 0, hist.size());
    return hist;
}

std::vector<double> bsif(const ImageGray& img, const FilterBank& bank, double threshold) {
    const int R = (bank.size - 1) / 2;
    const long w = static_cast<long>(img.width);
    const long h = static_cast<long>(img.height);
    std::vector<double> hist(256, 0.0);
    for (long y = 0; y < h; ++y) {
        for (long x = 0; x < w; ++x) {
            unsigned code = 0;
            for (int f = 0; f < bank.n_filters; ++f) {
                double acc = 0.0;
                for (int dy = -R; dy <= R; ++dy) {
                    for (int dx = -R; dx <= R; ++dx) {
                        long xx = x + dx, yy = y + dy;
                        if (xx < 0) xx = 0;
                        if (yy < 0) yy = 0;
                        if (xx >= w) xx = w - 1;
                        if (yy >= h) yy = h - 1;
                        acc += bank.at(f, dy + R, dx + R) *
                               img.px[static_cast<std::size_t>(yy) * img.width +
                                      static_cast<std::size_t>(xx)];
                    }
                }
                if (acc > threshold) code |= 1u << f;
            }
            ++hist[code];
        }
    }
    normalize_block(hist, 0, hist.size());
    return hist;
}

std::vector<double> col(const ImageRGB& img) {
    const std::size_t n = img.width * img.height;
    std::vector<double> out;
    double mean[3] = {}, sd[3] = {}, sk[3] = {};
    for (int ch = 0; ch < 3; ++ch) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += img.px[i * 3 + static_cast<std::size_t>(ch)];
        mean[ch] = s / static_cast<double>(n);
        double v2 = 0.0, v3 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = img.px[i * 3 + static_cast<std::size_t>(ch)] - mean[ch];
            v2 += d * d;
            v3 += d * d * d;
        }
        sd[ch] = std::sqrt(v2 / static_cast<double>(n));
        sk[ch] = sd[ch] > 0 ? (v3 / static_cast<double>(n)) / (sd[ch] * sd[ch] * sd[ch]) : 0.0;
        out.push_back(mean[ch]);
        out.push_back(sd[ch]);
        out.push_back(sk[ch]);
    }
    const auto corr = [&](int a, int b) {
        if (sd[a] == 0 || sd[b] == 0) return 0.0;
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            c += (img.px[i * 3 + static_cast<std::size_t>(a)] - mean[a]) *
                 (img.px[i * 3 + static_cast<std::size_t>(b)] - mean[b]);
        return (c / static_cast<double>(n)) / (sd[a] * sd[b]);
    };
    out.push_back(corr(0, 1));
    out.push_back(corr(0, 2));
    out.push_back(corr(1, 2));
    return out;
}

std::vector<double> mor(const ImageGray& img) {
    const std::size_t n = img.width * img.height;
    const long w = static_cast<long>(img.width);
    const long h = static_cast<long>(img.height);

    std::vector<int> lv(n);
    std::vector<double> hist(256, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double v = img.px[i];
        if (v < 0) v = 0;
        if (v > 255) v = 255;
        lv[i] = static_cast<int>(std::lround(v));
        hist[static_cast<std::size_t>(lv[i])] += 1.0;
    }

    double total_sum = 0.0;
    for (int v = 0; v < 256; ++v) total_sum += v * hist[static_cast<std::size_t>(v)];
    int best_t = -1;
    double best = -1.0;
    double w0 = 0.0, s0 = 0.0;
    for (int t = 0; t < 255; ++t) {
        w0 += hist[static_cast<std::size_t>(t)];
        s0 += t * hist[static_cast<std::size_t>(t)];
        const double w1 = static_cast<double>(n) - w0;
        if (w0 == 0 || w1 == 0) continue;
        const double m0 = s0 / w0;
        const double m1 = (total_sum - s0) / w1;
        const double sep = w0 * w1 * (m0 - m1) * (m0 - m1);
        if (sep > best) {
            best = sep;
            best_t = t;
        }
    }
    std::vector<double> out(8, 0.0);
    if (best_t < 0) return out;

    std::vector<int> label(n, -1);
    int next_label = 0;
    std::vector<std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < n; ++i) {
        if (lv[i] > best_t || label[i] >= 0) continue;
        std::vector<std::size_t> queue{i};
        label[i] = next_label;
        members.emplace_back();
        std::size_t head = 0;
        while (head < queue.size()) {
            const std::size_t p = queue[head++];
            members.back().push_back(p);
            const long px = static_cast<long>(p % img.width);
            const long py = static_cast<long>(p / img.width);
            for (long dy = -1; dy <= 1; ++dy) {
                for (long dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const long qx = px + dx, qy = py + dy;
                    if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
                    const std::size_t q =
                        static_cast<std::size_t>(qy) * img.width + static_cast<std::size_t>(qx);
                    if (lv[q] <= best_t && label[q] < 0) {
                        label[q] = next_label;
                        queue.push_back(q);
                    }
                }
            }
        }
        ++next_label;
    }
    if (members.empty()) return out;

    std::size_t big = 0;
    for (std::size_t i = 1; i < members.size(); ++i)
        if (members[i].size() > members[big].size()) big = i;
    const auto& px_list = members[big];
    const double area = static_cast<double>(px_list.size());

    double cx = 0.0, cy = 0.0;
    long min_x = w, max_x = -1, min_y = h, max_y = -1;
    for (std::size_t p : px_list) {
        const long x = static_cast<long>(p % img.width);
        const long y = static_cast<long>(p / img.width);
        cx += static_cast<double>(x);
        cy += static_cast<double>(y);
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
    }
    cx /= area;
    cy /= area;

    double perim = 0.0;
    for (std::size_t p : px_list) {
        const long x = static_cast<long>(p % img.width);
        const long y = static_cast<long>(p / img.width);
        const long nb[4][2] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
        for (const auto& q : nb) {
            if (q[0] < 0 || q[1] < 0 || q[0] >= w || q[1] >= h ||
                lv[static_cast<std::size_t>(q[1]) * img.width + static_cast<std::size_t>(q[0])] >
                    best_t) {
                perim += 1.0;
                break;
            }
        }
    }

    double mxx = 0.0, myy = 0.0, mxy = 0.0;
    for (std::size_t p : px_list) {
        const double dx = static_cast<double>(p % img.width) - cx;
        const double dy = static_cast<double>(p / img.width) - cy;
        mxx += dx * dx;
        myy += dy * dy;
        mxy += dx * dy;
    }
    mxx /= area;
    myy /= area;
    mxy /= area;
    const double root = std::sqrt((mxx - myy) * (mxx - myy) + 4 * mxy * mxy);
    const double hi = (mxx + myy + root) / 2;
    const double lo = (mxx + myy - root) / 2;

    const double bw = static_cast<double>(max_x - min_x + 1);
    const double bh = static_cast<double>(max_y - min_y + 1);
    const double icx = (static_cast<double>(w) - 1) / 2;
    const double icy = (static_cast<double>(h) - 1) / 2;
    const double halfd = std::sqrt(icx * icx + icy * icy);

    out[0] = static_cast<double>(members.size());
    out[1] = area / static_cast<double>(n);
    out[2] = perim;
    out[3] = bw / bh;
    out[4] = hi > 0 ? std::sqrt(std::max(0.0, 1.0 - lo / hi)) : 0.0;
    out[5] = area / (bw * bh);
    out[6] = halfd > 0 ? std::sqrt((cx - icx) * (cx - icx) + (cy - icy) * (cy - icy)) / halfd : 0.0;
    out[7] = perim > 0 ? 4.0 * kPi * area / (perim * perim) : 0.0;
    return out;
}

std::vector<double> dct(const std::vector<double>& x, std::size_t keep) {
    const std::size_t d = x.size();
    const std::size_t k_max = std::min(keep, d);
    std::vector<double> out(k_max);
    for (std::size_t k = 0; k < k_max; ++k) {
        double acc = 0.0;
        for (std::size_t m = 0; m < d; ++m)
            acc += x[m] * std::cos(kPi * (static_cast<double>(m) + 0.5) * static_cast<double>(k) /
                                   static_cast<double>(d));
        const double scale = k == 0 ? std::sqrt(1.0 / static_cast<double>(d))
                                    : std::sqrt(2.0 / static_cast<double>(d));
        out[k] = scale * acc;
    }
    return out;
}

double naive_decision(const BinarySvm& m, std::span<const double> x) {
    double acc = m.bias;
    for (std::size_t s = 0; s < m.support_vectors.rows(); ++s) {
        double ss = 0.0;
        for (std::size_t c = 0; c < m.support_vectors.cols(); ++c) {
            const double d = m.support_vectors(s, c) - x[c];
            ss += d * d;
        }
        acc += m.dual_coef[s] * std::exp(-m.params.gamma * ss);
    }
    return acc;
}

double kkt_max_violation(const BinarySvm& m, const Matrix& X, const std::vector<int>& y) {
    const double C = m.params.C;
    double worst = 0.0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
        // Recover alpha_i by matching the row against the stored vectors.
        double alpha = 0.0;
        for (std::size_t s = 0; s < m.support_vectors.rows(); ++s) {
            bool same = true;
            for (std::size_t c = 0; c < X.cols() && same; ++c)
                same = m.support_vectors(s, c) == X(i, c);
            if (same) {
                alpha = std::abs(m.dual_coef[s]);
                break;
            }
        }
        const double margin = y[i] * naive_decision(m, X.row(i));
        double violation = 0.0;
        if (alpha <= 1e-8) violation = std::max(0.0, 1.0 - margin);
        else if (alpha >= C - 1e-8) violation = std::max(0.0, margin - 1.0);
        else violation = std::abs(margin - 1.0);
        worst = std::max(worst, violation);
    }
    return worst;
}

double bacc(const ConfusionMatrix& cm) {
    const std::size_t C = cm.num_classes;
    long total = 0;
    for (std::size_t t = 0; t < C; ++t)
        for (std::size_t p = 0; p < C; ++p) total += cm.at(t, p);
    double acc = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
        long tp = cm.at(c, c);
        long fn = 0, fp = 0;
        for (std::size_t o = 0; o < C; ++o) {
            if (o == c) continue;
            fn += cm.at(c, o);
            fp += cm.at(o, c);
        }
        const long tn = total - tp - fn - fp;
        const double sens = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        const double spec = (tn + fp) > 0 ? static_cast<double>(tn) / (tn + fp) : 0.0;
        acc += sens + spec;
    }
    return acc / (2.0 * static_cast<double>(C));
}

}  // namespace oracle
