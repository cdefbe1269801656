#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace lesionfuse {

/// Row-major RGB image, channel values in [0,255]. Values are kept as
/// doubles so resampling chains do not quantize between stages.
struct ImageRGB {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> px;  // height*width*3, r,g,b per pixel

    double& at(std::size_t x, std::size_t y, std::size_t ch) {
        return px[(y * width + x) * 3 + ch];
    }
    double at(std::size_t x, std::size_t y, std::size_t ch) const {
        return px[(y * width + x) * 3 + ch];
    }
};

/// Row-major single-channel intensity image in [0,255], real valued.
struct ImageGray {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> px;  // height*width

    double& at(std::size_t x, std::size_t y) { return px[y * width + x]; }
    double at(std::size_t x, std::size_t y) const { return px[y * width + x]; }
};

/// ITU-R BT.601 luminance: 0.299 R + 0.587 G + 0.114 B.
ImageGray to_grayscale(const ImageRGB& img);

enum class PrepareStrategy {
    res,  // bilinear resize of the whole image to the target size
    cr1,  // center crop (default 150 rows x 200 cols), then bilinear resize
};

struct PrepareOptions {
    PrepareStrategy strategy = PrepareStrategy::res;
    std::size_t target_width = 224;
    std::size_t target_height = 224;
    std::size_t crop_height = 150;  // cr1 crop box, clamped to the image
    std::size_t crop_width = 200;
};

/// Input preparation. The cr1 crop box is centered and clamped to the image
/// bounds when the source is smaller than the box.
ImageRGB prepare_input(const ImageRGB& img, const PrepareOptions& opts);

/// Plain bilinear resize (half-pixel-centered sampling, edge replication).
ImageRGB resize_bilinear(const ImageRGB& img, std::size_t target_width,
                         std::size_t target_height);

struct AugmentParams {
    double flip_h_prob = 0.5;
    double flip_v_prob = 0.5;
    double rotation_max = 15.0;   // degrees
    double translate_max = 0.1;   // fraction of each dimension
    double scale_low = 0.9;
    double scale_high = 1.1;
    std::uint64_t seed = 0;
};

/// Random flip / rotation / translation / scaling, in that order, resampled
/// bilinearly with edge replication for out-of-frame pixels. All randomness
/// comes from a generator keyed by (params.seed, draw_index): the same pair
/// always produces the same output, distinct draw_index values produce
/// independent draws.
ImageRGB augment(const ImageRGB& img, const AugmentParams& params,
                 std::uint64_t draw_index);

/// PNG/JPEG decoding and encoding.
ImageRGB load_image(const std::filesystem::path& path);
void save_image_png(const std::filesystem::path& path, const ImageRGB& img);

}  // namespace lesionfuse
