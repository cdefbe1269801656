#include <array>
#include <stdexcept>
#include <string>

#include "lbp_common.hpp"
#include "lesionfuse/descriptors.hpp"
#include "lesionfuse/errors.hpp"

namespace lesionfuse {

namespace {

constexpr unsigned rot180(unsigned code) { return ((code << 2) | (code >> 2)) & 0xFu; }

// Pair (A,B) of 4-bit codes ~ (rot180(B), rot180(A)); classes indexed by
// ascending canonical 8-bit label. 136 classes.
struct PairClasses {
    std::array<int, 256> index{};
    int count = 0;

    PairClasses() {
        std::array<int, 256> canon{};
        for (unsigned a = 0; a < 16; ++a) {
            for (unsigned b = 0; b < 16; ++b) {
                const unsigned label = a * 16 + b;
                const unsigned mate = rot180(b) * 16 + rot180(a);
                canon[label] = static_cast<int>(label < mate ? label : mate);
            }
        }
        std::array<int, 256> seen{};
        seen.fill(-1);
        for (int l = 0; l < 256; ++l) {
            if (seen[canon[l]] < 0) seen[canon[l]] = count++;
            index[l] = seen[canon[l]];
        }
    }
};

const PairClasses& pair_classes() {
    static const PairClasses pc;
    return pc;
}

// 4-neighbor LBP code at integer radius; bit k for the neighbor at angle
// 2*pi*k/4, set when strictly brighter than the center.
unsigned code_interior(const ImageGray& img, std::size_t x, std::size_t y, int r) {
    const double c = img.at(x, y);
    unsigned code = 0;
    if (img.at(x + r, y) > c) code |= 1u;
    if (img.at(x, y + r) > c) code |= 2u;
    if (img.at(x - r, y) > c) code |= 4u;
    if (img.at(x, y - r) > c) code |= 8u;
    return code;
}

unsigned code_toroidal(const ImageGray& img, std::ptrdiff_t x, std::ptrdiff_t y, int r) {
    const auto w = static_cast<std::ptrdiff_t>(img.width);
    const auto h = static_cast<std::ptrdiff_t>(img.height);
    const auto wrap = [](std::ptrdiff_t v, std::ptrdiff_t n) { return ((v % n) + n) % n; };
    const auto at = [&](std::ptrdiff_t xx, std::ptrdiff_t yy) {
        return img.px[static_cast<std::size_t>(wrap(yy, h)) * img.width +
                      static_cast<std::size_t>(wrap(xx, w))];
    };
    const double c = at(x, y);
    unsigned code = 0;
    if (at(x + r, y) > c) code |= 1u;
    if (at(x, y + r) > c) code |= 2u;
    if (at(x - r, y) > c) code |= 4u;
    if (at(x, y - r) > c) code |= 8u;
    return code;
}

}  // namespace

FeatureVector extract_riclbp(const ImageGray& img, const std::vector<RicConfig>& configs,
                             RicBorder border) {
    if (configs.empty()) throw ConfigError("extract_riclbp: no configs");
    const auto& classes = pair_classes();
    const std::size_t bins = static_cast<std::size_t>(classes.count);  // 136

    const std::size_t total_dim = bins * configs.size();
    std::vector<double> hist(total_dim, 0.0);

    std::size_t block = 0;
    for (const auto& cfg : configs) {
        if (cfg.radius < 1 || cfg.displacement < 1)
            throw ConfigError("extract_riclbp: radius and displacement must be >= 1");
        const int r = cfg.radius;
        const int d = cfg.displacement;
        const std::array<std::pair<int, int>, 4> deltas{{{d, 0}, {0, d}, {d, d}, {d, -d}}};

        if (border == RicBorder::interior) {
            const std::size_t m = static_cast<std::size_t>(r);
            if (img.width < 2 * m + 1 || img.height < 2 * m + 1)
                throw DataError("extract_riclbp: image smaller than " +
                                std::to_string(2 * m + 1) + " pixels per side required by radius " +
                                std::to_string(r));
            const auto xmax = static_cast<std::ptrdiff_t>(img.width) - 1 - r;
            const auto ymax = static_cast<std::ptrdiff_t>(img.height) - 1 - r;
            for (std::ptrdiff_t y = r; y <= ymax; ++y) {
                for (std::ptrdiff_t x = r; x <= xmax; ++x) {
                    const unsigned a =
                        code_interior(img, static_cast<std::size_t>(x), static_cast<std::size_t>(y), r);
                    for (const auto& [ddx, ddy] : deltas) {
                        const std::ptrdiff_t qx = x + ddx;
                        const std::ptrdiff_t qy = y + ddy;
                        if (qx < r || qx > xmax || qy < r || qy > ymax) continue;
                        const unsigned b = code_interior(img, static_cast<std::size_t>(qx),
                                                         static_cast<std::size_t>(qy), r);
                        ++hist[block + static_cast<std::size_t>(classes.index[a * 16 + b])];
                    }
                }
            }
        } else {
            const auto w = static_cast<std::ptrdiff_t>(img.width);
            const auto h = static_cast<std::ptrdiff_t>(img.height);
            for (std::ptrdiff_t y = 0; y < h; ++y) {
                for (std::ptrdiff_t x = 0; x < w; ++x) {
                    const unsigned a = code_toroidal(img, x, y, r);
                    for (const auto& [ddx, ddy] : deltas) {
                        const unsigned b = code_toroidal(img, x + ddx, y + ddy, r);
                        ++hist[block + static_cast<std::size_t>(classes.index[a * 16 + b])];
                    }
                }
            }
        }
        detail::l1_normalize(hist, block, block + bins);
        block += bins;
    }

    FeatureVector out{"ric", std::move(hist)};
    if (out.dim() != total_dim) throw std::logic_error("extract_riclbp: dimension contract broken");
    return out;
}

}  // namespace lesionfuse
