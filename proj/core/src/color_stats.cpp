#include <cmath>
#include <stdexcept>

#include "lesionfuse/descriptors.hpp"
#include "lesionfuse/errors.hpp"

namespace lesionfuse {

FeatureVector extract_col(const ImageRGB& img) {
    const std::size_t n = img.width * img.height;
    if (n == 0) throw DataError("extract_col: empty image");

    // Population moments per channel.
    double mean[3] = {}, var[3] = {}, skew[3] = {};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < 3; ++k) mean[k] += img.px[i * 3 + k];
    for (auto& m : mean) m /= static_cast<double>(n);

    double cov[3][3] = {};
    double cube[3] = {};
    for (std::size_t i = 0; i < n; ++i) {
        double d[3];
        for (std::size_t k = 0; k < 3; ++k) d[k] = img.px[i * 3 + k] - mean[k];
        for (std::size_t a = 0; a < 3; ++a) {
            cube[a] += d[a] * d[a] * d[a];
            for (std::size_t b = a; b < 3; ++b) cov[a][b] += d[a] * d[b];
        }
    }
    double sd[3];
    for (std::size_t k = 0; k < 3; ++k) {
        var[k] = cov[k][k] / static_cast<double>(n);
        sd[k] = std::sqrt(var[k]);
        skew[k] = sd[k] > 0 ? (cube[k] / static_cast<double>(n)) / (sd[k] * sd[k] * sd[k]) : 0.0;
    }
    const auto corr = [&](std::size_t a, std::size_t b) {
        if (sd[a] == 0 || sd[b] == 0) return 0.0;
        return (cov[a][b] / static_cast<double>(n)) / (sd[a] * sd[b]);
    };

    FeatureVector out{"col",
                      {mean[0], sd[0], skew[0],
                       mean[1], sd[1], skew[1],
                       mean[2], sd[2], skew[2],
                       corr(0, 1), corr(0, 2), corr(1, 2)}};
    if (out.dim() != 12) throw std::logic_error("extract_col: dimension contract broken");
    return out;
}

}  // namespace lesionfuse
