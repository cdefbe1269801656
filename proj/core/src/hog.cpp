#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lesionfuse/descriptors.hpp"
#include "lesionfuse/errors.hpp"

namespace lesionfuse {

namespace {
constexpr std::size_t kCellRows = 5;
constexpr std::size_t kCellCols = 6;
constexpr std::size_t kBins = 9;
constexpr double kEps = 1e-6;
}  // namespace

FeatureVector extract_hog(const ImageGray& img) {
    if (img.height < kCellRows || img.width < kCellCols)
        throw DataError("extract_hog: image smaller than the 5x6 cell grid");

    const std::size_t w = img.width;
    const std::size_t h = img.height;
    std::vector<double> hist(kCellRows * kCellCols * kBins, 0.0);

    const double bin_width = std::numbers::pi / kBins;
    for (std::size_t y = 0; y < h; ++y) {
        const std::size_t cell_row = y * kCellRows / h;
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t xm = x == 0 ? 0 : x - 1;
            const std::size_t xp = x + 1 >= w ? w - 1 : x + 1;
            const std::size_t ym = y == 0 ? 0 : y - 1;
            const std::size_t yp = y + 1 >= h ? h - 1 : y + 1;
            const double gx = img.at(xp, y) - img.at(xm, y);
            const double gy = img.at(x, yp) - img.at(x, ym);
            const double mag = std::sqrt(gx * gx + gy * gy);
            if (mag == 0.0) continue;
            double angle = std::atan2(gy, gx);
            if (angle < 0) angle += std::numbers::pi;
            if (angle >= std::numbers::pi) angle -= std::numbers::pi;
            std::size_t bin = static_cast<std::size_t>(angle / bin_width);
            if (bin >= kBins) bin = kBins - 1;
            const std::size_t cell_col = x * kCellCols / w;
            hist[(cell_row * kCellCols + cell_col) * kBins + bin] += mag;
        }
    }

    for (std::size_t cell = 0; cell < kCellRows * kCellCols; ++cell) {
        double ss = 0.0;
        for (std::size_t b = 0; b < kBins; ++b) {
            const double v = hist[cell * kBins + b];
            ss += v * v;
        }
        const double norm = std::sqrt(ss + kEps * kEps);
        for (std::size_t b = 0; b < kBins; ++b) hist[cell * kBins + b] /= norm;
    }

    FeatureVector out{"hog", std::move(hist)};
    if (out.dim() != 270) throw std::logic_error("extract_hog: dimension contract broken");
    return out;
}

}  // namespace lesionfuse
