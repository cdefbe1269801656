#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lesionfuse/matrix.hpp"

namespace lesionfuse {

/// Fixed-length real descriptor for one image. Histogram descriptors are
/// L1-normalized per constituent block (each block sums to 1 or is all-zero
/// when its domain was empty).
struct FeatureVector {
    std::string descriptor_id;
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
};

/// Descriptor rows for a set of images, in manifest order.
struct FeatureMatrix {
    std::string descriptor_id;
    std::vector<std::string> ids;  // n
    Matrix data;                   // n x d

    std::size_t n() const { return ids.size(); }
    std::size_t dim() const { return data.cols(); }
};

/// Feature CSV: `# descriptor_id=...;dim=...` comment, then header
/// `id,v0,v1,...`, then one row per image.
void write_features(const std::filesystem::path& path, const FeatureMatrix& m);
FeatureMatrix read_features(const std::filesystem::path& path);

}  // namespace lesionfuse
