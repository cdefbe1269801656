#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lesionfuse {

enum class Split { train, val, test };

const char* to_string(Split s);
Split split_from_string(const std::string& s);

struct ManifestRow {
    std::string id;
    std::filesystem::path path;
    int label = 0;  // index into class_names
    Split split = Split::train;
};

/// The dataset description that drives every pipeline stage.
struct DatasetManifest {
    std::vector<ManifestRow> rows;
    std::vector<std::string> class_names;

    std::size_t num_classes() const { return class_names.size(); }
    std::vector<const ManifestRow*> split_rows(Split s) const;
};

/// Reads a manifest CSV with header `id,path,label,split`. Labels are class
/// name strings; split is one of train/val/test. An optional leading
/// `# classes=a,b,c` comment fixes the class set and order; otherwise class
/// names are the distinct labels in sorted order. Relative image paths are
/// resolved against the manifest's directory.
DatasetManifest load_manifest(const std::filesystem::path& path);

}  // namespace lesionfuse
