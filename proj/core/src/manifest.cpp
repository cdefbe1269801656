#include "lesionfuse/manifest.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "csv.hpp"
#include "lesionfuse/errors.hpp"

namespace lesionfuse {

const char* to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    throw DataError("unknown split tag '" + s + "'");
}

std::vector<const ManifestRow*> DatasetManifest::split_rows(Split s) const {
    std::vector<const ManifestRow*> out;
    for (const auto& r : rows)
        if (r.split == s) out.push_back(&r);
    return out;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    const std::filesystem::path base = path.parent_path();

    DatasetManifest m;
    bool classes_pinned = false;
    std::size_t i = 0;
    for (; i < lines.size() && lines[i].starts_with("#"); ++i) {
        const auto pos = lines[i].find("classes=");
        if (pos != std::string::npos) {
            m.class_names = csv::split(lines[i].substr(pos + 8));
            classes_pinned = true;
        }
    }
    if (i >= lines.size()) throw DataError(path.string() + ": no rows");
    const auto header = csv::split(lines[i]);
    if (header != std::vector<std::string>{"id", "path", "label", "split"})
        throw DataError(path.string() + ": header must be 'id,path,label,split'");
    ++i;

    struct RawRow {
        std::string id, label;
        std::filesystem::path p;
        Split split;
        std::size_t line_no;
    };
    std::vector<RawRow> raw;
    std::map<std::string, std::size_t> first_seen;  // id -> line number
    std::set<std::string> labels;
    for (; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const std::size_t line_no = i + 1;
        const auto f = csv::split(lines[i]);
        if (f.size() != 4)
            throw DataError(path.string() + ": row " + std::to_string(line_no) +
                            " has " + std::to_string(f.size()) + " fields, expected 4");
        if (auto it = first_seen.find(f[0]); it != first_seen.end())
            throw DataError(path.string() + ": duplicate id '" + f[0] + "' at rows " +
                            std::to_string(it->second) + " and " + std::to_string(line_no));
        first_seen.emplace(f[0], line_no);
        Split split;
        try {
            split = split_from_string(f[3]);
        } catch (const DataError& e) {
            throw DataError(path.string() + ": row " + std::to_string(line_no) + ": " + e.what());
        }
        std::filesystem::path p(f[1]);
        if (p.is_relative()) p = base / p;
        raw.push_back({f[0], f[2], std::move(p), split, line_no});
        labels.insert(f[2]);
    }
    if (raw.empty()) throw DataError(path.string() + ": no rows");

    if (!classes_pinned) m.class_names.assign(labels.begin(), labels.end());
    if (m.class_names.size() < 2)
        throw DataError(path.string() + ": need at least 2 classes, found " +
                        std::to_string(m.class_names.size()));

    bool has_train = false;
    for (const auto& r : raw) {
        const auto it = std::find(m.class_names.begin(), m.class_names.end(), r.label);
        if (it == m.class_names.end())
            throw DataError(path.string() + ": row " + std::to_string(r.line_no) +
                            ": label '" + r.label + "' not in class set");
        m.rows.push_back({r.id, r.p,
                          static_cast<int>(std::distance(m.class_names.begin(), it)), r.split});
        has_train = has_train || r.split == Split::train;
    }
    if (!has_train) throw DataError(path.string() + ": no train rows");
    return m;
}

}  // namespace lesionfuse
