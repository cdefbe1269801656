#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "lesionfuse/descriptors.hpp"
#include "lesionfuse/errors.hpp"

namespace lesionfuse {

namespace {

// Otsu threshold over a 256-bin histogram of rounded intensities. Returns
// -1 when no split leaves both sides occupied (constant image).
int otsu_threshold(const std::vector<std::size_t>& hist, std::size_t total) {
    double total_sum = 0.0;
    for (int v = 0; v < 256; ++v) total_sum += static_cast<double>(v) * hist[v];

    int best_t = -1;
    double best_between = -1.0;
    double w0 = 0.0, sum0 = 0.0;
    for (int t = 0; t < 255; ++t) {
        w0 += static_cast<double>(hist[t]);
        sum0 += static_cast<double>(t) * hist[t];
        const double w1 = static_cast<double>(total) - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (total_sum - sum0) / w1;
        const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (between > best_between) {
            best_between = between;
            best_t = t;
        }
    }
    return best_t;
}

struct Component {
    std::size_t area = 0;
    std::size_t perimeter = 0;
    std::size_t min_x = 0, max_x = 0, min_y = 0, max_y = 0;
    double sum_x = 0.0, sum_y = 0.0;
    std::vector<std::size_t> pixels;  // flat indices
};

}  // namespace

FeatureVector extract_mor(const ImageGray& img) {
    const std::size_t n = img.width * img.height;
    if (n == 0) throw DataError("extract_mor: empty image");
    const std::size_t w = img.width;
    const std::size_t h = img.height;

    std::vector<std::size_t> hist(256, 0);
    std::vector<int> level(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int v = static_cast<int>(std::lround(std::clamp(img.px[i], 0.0, 255.0)));
        level[i] = v;
        ++hist[static_cast<std::size_t>(v)];
    }

    FeatureVector out{"mor", std::vector<double>(8, 0.0)};
    const int t = otsu_threshold(hist, n);
    if (t < 0) return out;  // constant image: no foreground

    // Foreground is the darker side (lesions are dark on light skin).
    std::vector<char> fg(n);
    for (std::size_t i = 0; i < n; ++i) fg[i] = level[i] <= t;

    // 8-connected labeling.
    std::vector<int> label(n, -1);
    std::vector<Component> comps;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < n; ++start) {
        if (!fg[start] || label[start] >= 0) continue;
        const int id = static_cast<int>(comps.size());
        comps.emplace_back();
        Component& comp = comps.back();
        comp.min_x = comp.max_x = start % w;
        comp.min_y = comp.max_y = start / w;
        stack.assign(1, start);
        label[start] = id;
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            const std::size_t px = p % w;
            const std::size_t py = p / w;
            ++comp.area;
            comp.sum_x += static_cast<double>(px);
            comp.sum_y += static_cast<double>(py);
            comp.min_x = std::min(comp.min_x, px);
            comp.max_x = std::max(comp.max_x, px);
            comp.min_y = std::min(comp.min_y, py);
            comp.max_y = std::max(comp.max_y, py);
            comp.pixels.push_back(p);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const auto qx = static_cast<std::ptrdiff_t>(px) + dx;
                    const auto qy = static_cast<std::ptrdiff_t>(py) + dy;
                    if (qx < 0 || qy < 0 || qx >= static_cast<std::ptrdiff_t>(w) ||
                        qy >= static_cast<std::ptrdiff_t>(h))
                        continue;
                    const std::size_t q = static_cast<std::size_t>(qy) * w +
                                          static_cast<std::size_t>(qx);
                    if (fg[q] && label[q] < 0) {
                        label[q] = id;
                        stack.push_back(q);
                    }
                }
            }
        }
    }
    if (comps.empty()) return out;

    // Largest object by area; scan order breaks ties.
    std::size_t largest = 0;
    for (std::size_t i = 1; i < comps.size(); ++i)
        if (comps[i].area > comps[largest].area) largest = i;
    const Component& c = comps[largest];

    // Boundary pixels: any 4-neighbor is background or out of frame.
    std::size_t perimeter = 0;
    for (std::size_t p : c.pixels) {
        const auto px = static_cast<std::ptrdiff_t>(p % w);
        const auto py = static_cast<std::ptrdiff_t>(p / w);
        const std::array<std::pair<std::ptrdiff_t, std::ptrdiff_t>, 4> nbrs{
            {{px + 1, py}, {px - 1, py}, {px, py + 1}, {px, py - 1}}};
        for (const auto& [qx, qy] : nbrs) {
            if (qx < 0 || qy < 0 || qx >= static_cast<std::ptrdiff_t>(w) ||
                qy >= static_cast<std::ptrdiff_t>(h) ||
                !fg[static_cast<std::size_t>(qy) * w + static_cast<std::size_t>(qx)]) {
                ++perimeter;
                break;
            }
        }
    }

    const double area = static_cast<double>(c.area);
    const double cx = c.sum_x / area;
    const double cy = c.sum_y / area;
    double mxx = 0.0, myy = 0.0, mxy = 0.0;
    for (std::size_t p : c.pixels) {
        const double dx = static_cast<double>(p % w) - cx;
        const double dy = static_cast<double>(p / w) - cy;
        mxx += dx * dx;
        myy += dy * dy;
        mxy += dx * dy;
    }
    mxx /= area;
    myy /= area;
    mxy /= area;
    const double common = std::sqrt((mxx - myy) * (mxx - myy) + 4.0 * mxy * mxy);
    const double lam_hi = (mxx + myy + common) / 2.0;
    const double lam_lo = (mxx + myy - common) / 2.0;
    const double eccentricity = lam_hi > 0 ? std::sqrt(std::max(0.0, 1.0 - lam_lo / lam_hi)) : 0.0;

    const double bbox_w = static_cast<double>(c.max_x - c.min_x + 1);
    const double bbox_h = static_cast<double>(c.max_y - c.min_y + 1);
    const double img_cx = (static_cast<double>(w) - 1.0) / 2.0;
    const double img_cy = (static_cast<double>(h) - 1.0) / 2.0;
    const double half_diag = std::sqrt(img_cx * img_cx + img_cy * img_cy);
    const double offset = half_diag > 0
                              ? std::sqrt((cx - img_cx) * (cx - img_cx) +
                                          (cy - img_cy) * (cy - img_cy)) / half_diag
                              : 0.0;
    const double perim = static_cast<double>(perimeter);

    out.values[0] = static_cast<double>(comps.size());
    out.values[1] = area / static_cast<double>(n);
    out.values[2] = perim;
    out.values[3] = bbox_w / bbox_h;
    out.values[4] = eccentricity;
    out.values[5] = area / (bbox_w * bbox_h);
    out.values[6] = offset;
    out.values[7] = perim > 0 ? 4.0 * std::numbers::pi * area / (perim * perim) : 0.0;
    return out;
}

}  // namespace lesionfuse
