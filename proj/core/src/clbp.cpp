#include <cmath>
#include <stdexcept>
#include <string>

#include "lbp_common.hpp"
#include "lesionfuse/descriptors.hpp"
#include "lesionfuse/errors.hpp"

namespace lesionfuse {

FeatureVector extract_clbp(const ImageGray& img,
                           const std::vector<NeighborhoodConfig>& scales) {
    if (scales.empty()) throw ConfigError("extract_clbp: no scales");

    double intensity_sum = 0.0;
    for (double v : img.px) intensity_sum += v;
    const double mean_intensity = intensity_sum / static_cast<double>(img.px.size());

    std::size_t total_dim = 0;
    for (const auto& s : scales) {
        const std::size_t m = detail::margin_for(s.radius);
        if (img.width < 2 * m + 1 || img.height < 2 * m + 1)
            throw DataError("extract_clbp: image smaller than " + std::to_string(2 * m + 1) +
                            " pixels per side required by radius " + std::to_string(s.radius));
        total_dim += static_cast<std::size_t>(s.points + 2) * (s.points + 2) * 2;
    }

    std::vector<double> hist(total_dim, 0.0);
    std::size_t block = 0;
    for (const auto& scale : scales) {
        const auto& riu2 = detail::riu2_table(scale.points);
        const std::size_t m = detail::margin_for(scale.radius);
        const auto off = detail::circle_offsets(scale);
        const std::size_t bins = static_cast<std::size_t>(scale.points + 2) * (scale.points + 2) * 2;

        // Pass 1: the scale-wide mean magnitude that thresholds CLBP_M.
        double mag_sum = 0.0;
        std::size_t mag_count = 0;
        for (std::size_t y = m; y + m < img.height; ++y) {
            for (std::size_t x = m; x + m < img.width; ++x) {
                const double center = img.at(x, y);
                for (int k = 0; k < scale.points; ++k) {
                    const double n = detail::sample_at(img, static_cast<double>(x) + off.dx[k],
                                                       static_cast<double>(y) + off.dy[k]);
                    mag_sum += std::abs(n - center);
                    ++mag_count;
                }
            }
        }
        const double mean_magnitude = mag_count ? mag_sum / static_cast<double>(mag_count) : 0.0;

        // Pass 2: joint S x M x C histogram. Ties: |d| == mean counts as 0,
        // center == mean intensity counts as 1.
        for (std::size_t y = m; y + m < img.height; ++y) {
            for (std::size_t x = m; x + m < img.width; ++x) {
                const double center = img.at(x, y);
                unsigned s_code = 0;
                unsigned m_code = 0;
                for (int k = 0; k < scale.points; ++k) {
                    const double d = detail::sample_at(img, static_cast<double>(x) + off.dx[k],
                                                       static_cast<double>(y) + off.dy[k]) -
                                     center;
                    if (d > 0) s_code |= 1u << k;
                    if (std::abs(d) > mean_magnitude) m_code |= 1u << k;
                }
                const std::size_t c_bit = center >= mean_intensity ? 1 : 0;
                const std::size_t s_bin = static_cast<std::size_t>(riu2[s_code]);
                const std::size_t m_bin = static_cast<std::size_t>(riu2[m_code]);
                const std::size_t idx =
                    (s_bin * static_cast<std::size_t>(scale.points + 2) + m_bin) * 2 + c_bit;
                ++hist[block + idx];
            }
        }
        detail::l1_normalize(hist, block, block + bins);
        block += bins;
    }

    FeatureVector out{"clbp", std::move(hist)};
    if (out.dim() != total_dim) throw std::logic_error("extract_clbp: dimension contract broken");
    return out;
}

}  // namespace lesionfuse
