#include "lesionfuse/image.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "lesionfuse/errors.hpp"

namespace lesionfuse {

namespace {

double sample_edge_clamped(const ImageRGB& img, double x, double y, std::size_t ch) {
    const double w = static_cast<double>(img.width);
    const double h = static_cast<double>(img.height);
    x = std::clamp(x, 0.0, w - 1.0);
    y = std::clamp(y, 0.0, h - 1.0);
    const std::size_t x0 = static_cast<std::size_t>(std::floor(x));
    const std::size_t y0 = static_cast<std::size_t>(std::floor(y));
    const std::size_t x1 = std::min(x0 + 1, img.width - 1);
    const std::size_t y1 = std::min(y0 + 1, img.height - 1);
    const double tx = x - static_cast<double>(x0);
    const double ty = y - static_cast<double>(y0);
    const double top = (1.0 - tx) * img.at(x0, y0, ch) + tx * img.at(x1, y0, ch);
    const double bot = (1.0 - tx) * img.at(x0, y1, ch) + tx * img.at(x1, y1, ch);
    return (1.0 - ty) * top + ty * bot;
}

ImageRGB center_crop(const ImageRGB& img, std::size_t crop_width, std::size_t crop_height) {
    const std::size_t cw = std::min(crop_width, img.width);
    const std::size_t ch = std::min(crop_height, img.height);
    const std::size_t x0 = (img.width - cw) / 2;
    const std::size_t y0 = (img.height - ch) / 2;
    ImageRGB out;
    out.width = cw;
    out.height = ch;
    out.px.resize(cw * ch * 3);
    for (std::size_t y = 0; y < ch; ++y)
        for (std::size_t x = 0; x < cw; ++x)
            for (std::size_t k = 0; k < 3; ++k)
                out.at(x, y, k) = img.at(x0 + x, y0 + y, k);
    return out;
}

double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

ImageGray to_grayscale(const ImageRGB& img) {
    ImageGray out;
    out.width = img.width;
    out.height = img.height;
    out.px.resize(img.width * img.height);
    for (std::size_t i = 0; i < out.px.size(); ++i) {
        out.px[i] = 0.299 * img.px[i * 3] + 0.587 * img.px[i * 3 + 1] +
                    0.114 * img.px[i * 3 + 2];
    }
    return out;
}

ImageRGB resize_bilinear(const ImageRGB& img, std::size_t target_width,
                         std::size_t target_height) {
    if (target_width == 0 || target_height == 0)
        throw ConfigError("resize_bilinear: target dimensions must be >= 1");
    ImageRGB out;
    out.width = target_width;
    out.height = target_height;
    out.px.resize(target_width * target_height * 3);
    const double sx = static_cast<double>(img.width) / static_cast<double>(target_width);
    const double sy = static_cast<double>(img.height) / static_cast<double>(target_height);
    for (std::size_t y = 0; y < target_height; ++y) {
        // Half-pixel-centered mapping so a same-size resize is an exact copy.
        const double src_y = (static_cast<double>(y) + 0.5) * sy - 0.5;
        for (std::size_t x = 0; x < target_width; ++x) {
            const double src_x = (static_cast<double>(x) + 0.5) * sx - 0.5;
            for (std::size_t k = 0; k < 3; ++k)
                out.at(x, y, k) = sample_edge_clamped(img, src_x, src_y, k);
        }
    }
    return out;
}

ImageRGB prepare_input(const ImageRGB& img, const PrepareOptions& opts) {
    if (opts.strategy == PrepareStrategy::cr1) {
        const ImageRGB cropped = center_crop(img, opts.crop_width, opts.crop_height);
        return resize_bilinear(cropped, opts.target_width, opts.target_height);
    }
    return resize_bilinear(img, opts.target_width, opts.target_height);
}

ImageRGB augment(const ImageRGB& img, const AugmentParams& params,
                 std::uint64_t draw_index) {
    if (params.flip_h_prob < 0 || params.flip_h_prob > 1 ||
        params.flip_v_prob < 0 || params.flip_v_prob > 1)
        throw ConfigError("augment: flip probabilities must be in [0,1]");
    if (params.rotation_max < 0) throw ConfigError("augment: rotation_max must be >= 0");
    if (!(params.scale_low > 0) || params.scale_low > params.scale_high)
        throw ConfigError("augment: scale range must satisfy 0 < low <= high");

    std::seed_seq seq{
        static_cast<std::uint32_t>(params.seed), static_cast<std::uint32_t>(params.seed >> 32),
        static_cast<std::uint32_t>(draw_index), static_cast<std::uint32_t>(draw_index >> 32)};
    std::mt19937_64 rng(seq);

    const bool flip_h = unit_draw(rng) < params.flip_h_prob;
    const bool flip_v = unit_draw(rng) < params.flip_v_prob;
    const double angle_deg = params.rotation_max * (2.0 * unit_draw(rng) - 1.0);
    const double dx = params.translate_max * (2.0 * unit_draw(rng) - 1.0) *
                      static_cast<double>(img.width);
    const double dy = params.translate_max * (2.0 * unit_draw(rng) - 1.0) *
                      static_cast<double>(img.height);
    const double scale = params.scale_low + unit_draw(rng) * (params.scale_high - params.scale_low);

    const double theta = angle_deg * std::numbers::pi / 180.0;
    const double cx = (static_cast<double>(img.width) - 1.0) / 2.0;
    const double cy = (static_cast<double>(img.height) - 1.0) / 2.0;
    const double cos_t = std::cos(theta);
    const double sin_t = std::sin(theta);

    ImageRGB out;
    out.width = img.width;
    out.height = img.height;
    out.px.resize(img.px.size());
    for (std::size_t oy = 0; oy < img.height; ++oy) {
        for (std::size_t ox = 0; ox < img.width; ++ox) {
            // Invert the forward chain flip -> rotate -> translate -> scale.
            double x = (static_cast<double>(ox) - cx) / scale + cx;
            double y = (static_cast<double>(oy) - cy) / scale + cy;
            x -= dx;
            y -= dy;
            const double rx = cos_t * (x - cx) + sin_t * (y - cy) + cx;
            const double ry = -sin_t * (x - cx) + cos_t * (y - cy) + cy;
            x = rx;
            y = ry;
            if (flip_v) y = static_cast<double>(img.height) - 1.0 - y;
            if (flip_h) x = static_cast<double>(img.width) - 1.0 - x;
            for (std::size_t k = 0; k < 3; ++k)
                out.at(ox, oy, k) = sample_edge_clamped(img, x, y, k);
        }
    }
    return out;
}

ImageRGB load_image(const std::filesystem::path& path) {
    const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw DataError("cannot decode image: " + path.string());
    ImageRGB out;
    out.width = static_cast<std::size_t>(bgr.cols);
    out.height = static_cast<std::size_t>(bgr.rows);
    out.px.resize(out.width * out.height * 3);
    for (std::size_t y = 0; y < out.height; ++y) {
        const auto* row = bgr.ptr<cv::Vec3b>(static_cast<int>(y));
        for (std::size_t x = 0; x < out.width; ++x) {
            out.at(x, y, 0) = row[x][2];
            out.at(x, y, 1) = row[x][1];
            out.at(x, y, 2) = row[x][0];
        }
    }
    return out;
}

void save_image_png(const std::filesystem::path& path, const ImageRGB& img) {
    cv::Mat bgr(static_cast<int>(img.height), static_cast<int>(img.width), CV_8UC3);
    for (std::size_t y = 0; y < img.height; ++y) {
        auto* row = bgr.ptr<cv::Vec3b>(static_cast<int>(y));
        for (std::size_t x = 0; x < img.width; ++x) {
            for (std::size_t k = 0; k < 3; ++k) {
                const double v = std::clamp(img.at(x, y, k), 0.0, 255.0);
                row[x][2 - k] = static_cast<unsigned char>(std::lround(v));
            }
        }
    }
    std::filesystem::create_directories(path.parent_path().empty()
                                            ? std::filesystem::path(".")
                                            : path.parent_path());
    if (!cv::imwrite(path.string(), bgr))
        throw DataError("cannot write image: " + path.string());
}

}  // namespace lesionfuse
