#include <stdexcept>
#include <string>

#include "lbp_common.hpp"
#include "lesionfuse/descriptors.hpp"
#include "lesionfuse/errors.hpp"

namespace lesionfuse {

FeatureVector extract_ltp(const ImageGray& img, const LtpConfig& cfg) {
    if (cfg.threshold < 0) throw ConfigError("extract_ltp: threshold must be >= 0");
    if (cfg.scales.empty()) throw ConfigError("extract_ltp: no scales");

    std::size_t total_dim = 0;
    for (const auto& s : cfg.scales) {
        const std::size_t m = detail::margin_for(s.radius);
        if (img.width < 2 * m + 1 || img.height < 2 * m + 1)
            throw DataError("extract_ltp: image smaller than " + std::to_string(2 * m + 1) +
                            " pixels per side required by radius " + std::to_string(s.radius));
        total_dim += 2 * (static_cast<std::size_t>(s.points) * (s.points - 1) + 3);
    }

    std::vector<double> hist(total_dim, 0.0);
    std::size_t block = 0;
    for (const auto& scale : cfg.scales) {
        const auto& map = detail::u2_table(scale.points);
        const std::size_t bins = static_cast<std::size_t>(scale.points) * (scale.points - 1) + 3;
        const std::size_t m = detail::margin_for(scale.radius);
        const auto off = detail::circle_offsets(scale);
        for (std::size_t y = m; y + m < img.height; ++y) {
            for (std::size_t x = m; x + m < img.width; ++x) {
                const double center = img.at(x, y);
                unsigned upper = 0;
                unsigned lower = 0;
                for (int k = 0; k < scale.points; ++k) {
                    const double n = detail::sample_at(img, static_cast<double>(x) + off.dx[k],
                                                       static_cast<double>(y) + off.dy[k]);
                    if (n >= center + cfg.threshold) upper |= 1u << k;
                    else if (n <= center - cfg.threshold) lower |= 1u << k;
                }
                ++hist[block + static_cast<std::size_t>(map[upper])];
                ++hist[block + bins + static_cast<std::size_t>(map[lower])];
            }
        }
        detail::l1_normalize(hist, block, block + bins);
        detail::l1_normalize(hist, block + bins, block + 2 * bins);
        block += 2 * bins;
    }

    FeatureVector out{"ltp", std::move(hist)};
    if (out.dim() != total_dim) throw std::logic_error("extract_ltp: dimension contract broken");
    return out;
}

}  // namespace lesionfuse
