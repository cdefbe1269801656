#include "lbp_common.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "lesionfuse/errors.hpp"

namespace lesionfuse::detail {

CircleOffsets circle_offsets(const NeighborhoodConfig& cfg) {
    if (!(cfg.radius > 0)) throw ConfigError("neighborhood radius must be > 0");
    if (cfg.points < 2) throw ConfigError("neighborhood needs at least 2 points");
    CircleOffsets off;
    off.dx.resize(cfg.points);
    off.dy.resize(cfg.points);
    for (int k = 0; k < cfg.points; ++k) {
        const double angle = 2.0 * std::numbers::pi * k / cfg.points;
        double dx = cfg.radius * std::cos(angle);
        double dy = cfg.radius * std::sin(angle);
        if (std::abs(dx - std::round(dx)) < 1e-9) dx = std::round(dx);
        if (std::abs(dy - std::round(dy)) < 1e-9) dy = std::round(dy);
        off.dx[k] = dx;
        off.dy[k] = dy;
    }
    return off;
}

double sample_at(const ImageGray& img, double x, double y) {
    const double xf = std::floor(x);
    const double yf = std::floor(y);
    const auto x0 = static_cast<std::ptrdiff_t>(xf);
    const auto y0 = static_cast<std::ptrdiff_t>(yf);
    const double tx = x - xf;
    const double ty = y - yf;
    const auto w = static_cast<std::ptrdiff_t>(img.width);
    const auto h = static_cast<std::ptrdiff_t>(img.height);
    const std::ptrdiff_t x1 = tx == 0.0 ? x0 : x0 + 1;
    const std::ptrdiff_t y1 = ty == 0.0 ? y0 : y0 + 1;
    if (x0 < 0 || y0 < 0 || x1 >= w || y1 >= h)
        throw DataError("sample_circular: sample out of image bounds");
    const auto v = [&](std::ptrdiff_t xx, std::ptrdiff_t yy) {
        return img.px[static_cast<std::size_t>(yy) * img.width + static_cast<std::size_t>(xx)];
    };
    if (tx == 0.0 && ty == 0.0) return v(x0, y0);
    const double top = (1.0 - tx) * v(x0, y0) + tx * v(x1, y0);
    const double bot = (1.0 - tx) * v(x0, y1) + tx * v(x1, y1);
    return (1.0 - ty) * top + ty * bot;
}

int transitions(unsigned code, int points) {
    int t = 0;
    for (int k = 0; k < points; ++k) {
        const unsigned a = (code >> k) & 1u;
        const unsigned b = (code >> ((k + 1) % points)) & 1u;
        t += static_cast<int>(a ^ b);
    }
    return t;
}

namespace {

std::vector<int> build_u2(int points) {
    const std::size_t n = std::size_t{1} << points;
    std::vector<int> table(n);
    int next = 0;
    for (std::size_t code = 0; code < n; ++code)
        if (transitions(static_cast<unsigned>(code), points) <= 2) table[code] = next++;
    const int catch_all = next;  // == points*(points-1)+2
    for (std::size_t code = 0; code < n; ++code)
        if (transitions(static_cast<unsigned>(code), points) > 2) table[code] = catch_all;
    return table;
}

std::vector<int> build_riu2(int points) {
    const std::size_t n = std::size_t{1} << points;
    std::vector<int> table(n);
    for (std::size_t code = 0; code < n; ++code) {
        if (transitions(static_cast<unsigned>(code), points) <= 2)
            table[code] = std::popcount(code);
        else
            table[code] = points + 1;
    }
    return table;
}

std::map<int, std::vector<int>> u2_cache;
std::map<int, std::vector<int>> riu2_cache;
std::mutex table_mutex;

}  // namespace

const std::vector<int>& u2_table(int points) {
    std::lock_guard lock(table_mutex);
    auto it = u2_cache.find(points);
    if (it == u2_cache.end()) it = u2_cache.emplace(points, build_u2(points)).first;
    return it->second;
}

const std::vector<int>& riu2_table(int points) {
    std::lock_guard lock(table_mutex);
    auto it = riu2_cache.find(points);
    if (it == riu2_cache.end()) it = riu2_cache.emplace(points, build_riu2(points)).first;
    return it->second;
}

void l1_normalize(std::vector<double>& hist, std::size_t begin, std::size_t end) {
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += hist[i];
    if (sum > 0.0)
        for (std::size_t i = begin; i < end; ++i) hist[i] /= sum;
}

std::size_t margin_for(double radius) {
    return static_cast<std::size_t>(std::ceil(radius));
}

}  // namespace lesionfuse::detail

namespace lesionfuse {

std::vector<double> sample_circular(const ImageGray& img, double cx, double cy,
                                    const NeighborhoodConfig& cfg) {
    const double w = static_cast<double>(img.width);
    const double h = static_cast<double>(img.height);
    if (cx - cfg.radius < 0 || cx + cfg.radius > w - 1 || cy - cfg.radius < 0 ||
        cy + cfg.radius > h - 1)
        throw DataError("sample_circular: circle does not fit in the image");
    const auto off = detail::circle_offsets(cfg);
    std::vector<double> samples(cfg.points);
    for (int k = 0; k < cfg.points; ++k)
        samples[k] = detail::sample_at(img, cx + off.dx[k], cy + off.dy[k]);
    return samples;
}

}  // namespace lesionfuse
