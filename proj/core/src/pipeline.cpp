#include "lesionfuse/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "hashing.hpp"
#include "lesionfuse/errors.hpp"
#include "lesionfuse/features.hpp"
#include "lesionfuse/metrics.hpp"
#include "lesionfuse/reduce.hpp"
#include "lesionfuse/svm.hpp"
#include "parallel.hpp"

namespace lesionfuse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Config parsing / serialization
// ---------------------------------------------------------------------------

const std::set<std::string> kImplementedIds = {"ltp", "clbp", "ric", "hog",
                                               "mlpq", "fbsif", "col", "mor"};
const std::set<std::string> kOutOfScopeIds = {"gold", "clm", "let", "ahp"};

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.contains(key))
            throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
std::vector<T> read_array(const json& j) {
    return j.get<std::vector<T>>();
}

DescriptorSpec parse_descriptor(const json& j) {
    if (!j.is_object() || !j.contains("id"))
        throw ConfigError("each descriptor entry needs an 'id'");
    DescriptorSpec spec;
    spec.id = j.at("id").get<std::string>();
    if (kOutOfScopeIds.contains(spec.id))
        throw ConfigError("descriptor '" + spec.id + "': unimplemented, out of scope");
    if (!kImplementedIds.contains(spec.id))
        throw ConfigError("unknown descriptor id '" + spec.id + "'");

    require_keys(j, {"id", "threshold", "taus", "radii", "alphas", "rhos",
                     "sizes", "thresholds", "combine", "filter_bank_dir"},
                 "descriptor '" + spec.id + "'");
    if (j.contains("threshold")) spec.ltp_threshold = j.at("threshold").get<double>();
    if (j.contains("taus")) spec.taus = read_array<double>(j.at("taus"));
    if (j.contains("radii")) spec.radii = read_array<int>(j.at("radii"));
    if (j.contains("alphas")) spec.alphas = read_array<double>(j.at("alphas"));
    if (j.contains("rhos")) spec.rhos = read_array<double>(j.at("rhos"));
    if (j.contains("sizes")) spec.sizes = read_array<int>(j.at("sizes"));
    if (j.contains("thresholds")) spec.thresholds = read_array<double>(j.at("thresholds"));
    if (j.contains("combine")) {
        const auto mode = j.at("combine").get<std::string>();
        if (mode != "ensemble" && mode != "concat")
            throw ConfigError("descriptor '" + spec.id + "': combine must be ensemble or concat");
        spec.concat = mode == "concat";
    }
    if (j.contains("filter_bank_dir"))
        spec.filter_bank_dir = j.at("filter_bank_dir").get<std::string>();
    return spec;
}

ExternalMember parse_external(const json& j, const std::string& where) {
    require_keys(j, {"member_id", "train", "val", "test"}, where);
    ExternalMember m;
    if (!j.contains("member_id") || !j.contains("train"))
        throw ConfigError(where + ": member_id and train are required "
                          "(normalization and the discard rule fit on training scores)");
    m.member_id = j.at("member_id").get<std::string>();
    m.train = j.at("train").get<std::string>();
    if (j.contains("val")) m.val = j.at("val").get<std::string>();
    if (j.contains("test")) m.test = j.at("test").get<std::string>();
    return m;
}

json descriptor_to_json(const DescriptorSpec& s) {
    json j;
    j["id"] = s.id;
    if (s.id == "ltp") j["threshold"] = s.ltp_threshold;
    if (!s.taus.empty()) j["taus"] = s.taus;
    if (!s.radii.empty()) j["radii"] = s.radii;
    if (!s.alphas.empty()) j["alphas"] = s.alphas;
    if (!s.rhos.empty()) j["rhos"] = s.rhos;
    if (!s.sizes.empty()) j["sizes"] = s.sizes;
    if (!s.thresholds.empty()) j["thresholds"] = s.thresholds;
    j["combine"] = s.concat ? "concat" : "ensemble";
    if (!s.filter_bank_dir.empty()) j["filter_bank_dir"] = s.filter_bank_dir.string();
    return j;
}

json config_to_json(const PipelineConfig& c) {
    json j;
    j["manifest"] = c.manifest_path.string();
    j["descriptor_input"] = c.descriptor_input;
    json descs = json::array();
    for (const auto& d : c.descriptors) descs.push_back(descriptor_to_json(d));
    j["descriptors"] = descs;
    j["prepare"] = {{"strategy", c.prepare.strategy == PrepareStrategy::res ? "res" : "cr1"},
                    {"target", {{"width", c.prepare.target_width}, {"height", c.prepare.target_height}}},
                    {"crop", {{"width", c.prepare.crop_width}, {"height", c.prepare.crop_height}}}};
    j["augment"] = {{"copies", c.augment.copies},
                    {"flip_h_prob", c.augment.params.flip_h_prob},
                    {"flip_v_prob", c.augment.params.flip_v_prob},
                    {"rotation_max", c.augment.params.rotation_max},
                    {"translate_max", c.augment.params.translate_max},
                    {"scale_range", {c.augment.params.scale_low, c.augment.params.scale_high}}};
    j["reduction"] = {{"method", c.reduction}, {"target_k", c.reduction_target_k}};
    j["svm"] = {{"c_grid", c.svm_c_grid}, {"gamma_grid", c.svm_gamma_grid}, {"folds", c.svm_folds}};
    j["fusion"] = {{"mode", c.fusion_mode == NormMode::global ? "global" : "per_column"},
                   {"chance_margin", c.chance_margin}};
    json ext_s = json::array();
    for (const auto& e : c.external_scores)
        ext_s.push_back({{"member_id", e.member_id}, {"train", e.train.string()},
                         {"val", e.val.string()}, {"test", e.test.string()}});
    j["external_scores"] = ext_s;
    json ext_f = json::array();
    for (const auto& e : c.external_features)
        ext_f.push_back({{"member_id", e.member_id}, {"train", e.train.string()},
                         {"val", e.val.string()}, {"test", e.test.string()}});
    j["external_features"] = ext_f;
    j["out"] = c.out_dir.string();
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    return j;
}

// ---------------------------------------------------------------------------
// Member expansion
// ---------------------------------------------------------------------------

template <typename T>
std::vector<T> subset_or_all(const std::vector<T>& requested, const std::vector<T>& grid,
                             const std::string& what) {
    if (requested.empty()) return grid;
    for (const T& v : requested)
        if (std::find(grid.begin(), grid.end(), v) == grid.end()) {
            std::ostringstream msg;
            msg << what << " value " << v << " is not in the paper grid";
            throw ConfigError(msg.str());
        }
    return requested;
}

std::vector<LpqParams> mlpq_variants(const DescriptorSpec& spec) {
    const auto taus = subset_or_all(spec.taus, {0.2, 0.4, 0.6, 0.8, 1.0}, "mlpq tau");
    const auto radii = subset_or_all(spec.radii, {1, 3, 5}, "mlpq radius");
    const auto alphas = subset_or_all(spec.alphas, {0.8, 1.0, 1.2, 1.4, 1.6}, "mlpq a");
    const auto rhos = subset_or_all(spec.rhos, {0.75, 0.95, 1.15, 1.35, 1.55, 1.75, 1.95},
                                    "mlpq rho");
    std::vector<LpqParams> out;
    for (double tau : taus)
        for (int r : radii)
            for (double a : alphas)
                for (double rho : rhos) out.push_back({r, a, rho, tau});
    return out;
}

std::vector<BsifVariant> fbsif_variants(const DescriptorSpec& spec) {
    const auto sizes = subset_or_all(spec.sizes, {3, 5, 7, 9, 11}, "fbsif size");
    const auto ths = subset_or_all(spec.thresholds, {-9.0, -6.0, -3.0, 0.0, 3.0, 6.0, 9.0},
                                   "fbsif th");
    std::vector<BsifVariant> out;
    for (int s : sizes)
        for (double th : ths) out.push_back({s, th});
    return out;
}

struct MemberExtractor {
    std::string member_id;
    std::string fingerprint;  // config slice that defines the features
    std::function<FeatureVector(const ImageRGB&, const ImageGray&)> run;
};

// Resolves the bank for one size: explicit directory if configured,
// otherwise the bank persisted under out/banks (generated on first use).
FilterBank resolve_bank(const PipelineConfig& cfg, const DescriptorSpec& spec, int size) {
    if (!spec.filter_bank_dir.empty()) {
        const fs::path p = spec.filter_bank_dir / ("bsif_" + std::to_string(size) + ".txt");
        if (!fs::exists(p)) throw DataError("filter bank file not found: " + p.string());
        return load_filter_bank(p);
    }
    const fs::path p = cfg.out_dir / "banks" / ("bsif_" + std::to_string(size) + ".txt");
    if (fs::exists(p)) return load_filter_bank(p);
    const FilterBank bank = default_filter_bank(size);
    save_filter_bank(p, bank);
    return bank;
}

std::vector<MemberExtractor> build_extractors(const PipelineConfig& cfg) {
    std::vector<MemberExtractor> out;
    for (const auto& spec : cfg.descriptors) {
        const std::string fp = descriptor_to_json(spec).dump();
        if (spec.id == "ltp") {
            LtpConfig ltp;
            ltp.threshold = spec.ltp_threshold;
            out.push_back({"ltp", fp, [ltp](const ImageRGB&, const ImageGray& g) {
                               return extract_ltp(g, ltp);
                           }});
        } else if (spec.id == "clbp") {
            out.push_back({"clbp", fp, [](const ImageRGB&, const ImageGray& g) {
                               return extract_clbp(g);
                           }});
        } else if (spec.id == "ric") {
            out.push_back({"ric", fp, [](const ImageRGB&, const ImageGray& g) {
                               return extract_riclbp(g);
                           }});
        } else if (spec.id == "hog") {
            out.push_back({"hog", fp, [](const ImageRGB&, const ImageGray& g) {
                               return extract_hog(g);
                           }});
        } else if (spec.id == "col") {
            out.push_back({"col", fp, [](const ImageRGB& rgb, const ImageGray&) {
                               return extract_col(rgb);
                           }});
        } else if (spec.id == "mor") {
            out.push_back({"mor", fp, [](const ImageRGB&, const ImageGray& g) {
                               return extract_mor(g);
                           }});
        } else if (spec.id == "mlpq") {
            const auto variants = mlpq_variants(spec);
            if (spec.concat) {
                out.push_back({"mlpq", fp, [variants](const ImageRGB&, const ImageGray& g) {
                                   FeatureVector cat{"mlpq", {}};
                                   for (const auto& p : variants) {
                                       const auto v = extract_lpq(g, p);
                                       cat.values.insert(cat.values.end(), v.values.begin(),
                                                         v.values.end());
                                   }
                                   return cat;
                               }});
            } else {
                for (const auto& p : variants)
                    out.push_back({variant_id(p), fp + variant_id(p),
                                   [p](const ImageRGB&, const ImageGray& g) {
                                       return extract_lpq(g, p);
                                   }});
            }
        } else if (spec.id == "fbsif") {
            const auto variants = fbsif_variants(spec);
            std::map<int, FilterBank> banks;
            for (const auto& v : variants)
                if (!banks.contains(v.filter_size))
                    banks.emplace(v.filter_size, resolve_bank(cfg, spec, v.filter_size));
            if (spec.concat) {
                auto banks_ptr = std::make_shared<std::map<int, FilterBank>>(std::move(banks));
                out.push_back({"fbsif", fp,
                               [variants, banks_ptr](const ImageRGB&, const ImageGray& g) {
                                   FeatureVector cat{"fbsif", {}};
                                   for (const auto& v : variants) {
                                       BsifConfig c{v.filter_size, v.threshold,
                                                    banks_ptr->at(v.filter_size)};
                                       const auto fv = extract_bsif(g, c);
                                       cat.values.insert(cat.values.end(), fv.values.begin(),
                                                         fv.values.end());
                                   }
                                   return cat;
                               }});
            } else {
                for (const auto& v : variants) {
                    BsifConfig c{v.filter_size, v.threshold, banks.at(v.filter_size)};
                    out.push_back({variant_id(v), fp + variant_id(v),
                                   [c](const ImageRGB&, const ImageGray& g) {
                                       return extract_bsif(g, c);
                                   }});
                }
            }
        }
    }
    std::set<std::string> seen;
    for (const auto& m : out)
        if (!seen.insert(m.member_id).second)
            throw ConfigError("duplicate member id '" + m.member_id +
                              "' (repeated descriptor entry?)");
    return out;
}

// ---------------------------------------------------------------------------
// Shared paths and small helpers
// ---------------------------------------------------------------------------

fs::path feature_path(const PipelineConfig& cfg, const std::string& member, Split s) {
    return cfg.out_dir / "features" / (member + "_" + to_string(s) + ".csv");
}
fs::path score_path(const PipelineConfig& cfg, const std::string& member, Split s) {
    return cfg.out_dir / "scores" / (member + "_" + to_string(s) + ".csv");
}
fs::path model_path(const PipelineConfig& cfg, const std::string& member) {
    return cfg.out_dir / "models" / (member + "_svm.csv");
}
fs::path pca_path(const PipelineConfig& cfg, const std::string& member) {
    return cfg.out_dir / "models" / (member + "_pca.csv");
}
fs::path reduction_note_path(const PipelineConfig& cfg, const std::string& member) {
    return cfg.out_dir / "models" / (member + "_reduction.json");
}
fs::path norm_path(const PipelineConfig& cfg, const std::string& member) {
    return cfg.out_dir / "fusion" / (member + "_norm.csv");
}

constexpr Split kSplits[] = {Split::train, Split::val, Split::test};

std::vector<Split> present_splits(const DatasetManifest& m) {
    std::vector<Split> out;
    for (Split s : kSplits)
        if (!m.split_rows(s).empty()) out.push_back(s);
    return out;
}

bool cache_valid(const fs::path& artifact, const fs::path& meta, const std::string& expected) {
    if (!fs::exists(artifact) || !fs::exists(meta)) return false;
    const auto lines = csv::read_lines(meta);
    return !lines.empty() && lines[0] == expected;
}

std::string strip_augment_suffix(const std::string& id) {
    const auto pos = id.find("~aug");
    return pos == std::string::npos ? id : id.substr(0, pos);
}

int label_for_id(const std::map<std::string, int>& by_id, const std::string& id) {
    const auto it = by_id.find(strip_augment_suffix(id));
    if (it == by_id.end()) throw DataError("id '" + id + "' not found in manifest");
    return it->second;
}

std::map<std::string, int> manifest_label_map(const DatasetManifest& m) {
    std::map<std::string, int> by_id;
    for (const auto& r : m.rows) by_id.emplace(r.id, r.label);
    return by_id;
}

}  // namespace

std::vector<std::string> member_ids_for(const DescriptorSpec& spec) {
    std::vector<std::string> out;
    if (spec.id == "mlpq" && !spec.concat) {
        for (const auto& p : mlpq_variants(spec)) out.push_back(variant_id(p));
    } else if (spec.id == "fbsif" && !spec.concat) {
        for (const auto& v : fbsif_variants(spec)) out.push_back(variant_id(v));
    } else {
        out.push_back(spec.id);
    }
    return out;
}

PipelineConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }

    require_keys(j, {"manifest", "descriptors", "descriptor_input", "prepare", "augment",
                     "reduction", "svm", "fusion", "external_scores", "external_features",
                     "out", "seed", "jobs"},
                 "config");

    PipelineConfig c;
    try {
        if (!j.contains("manifest")) throw ConfigError("config: 'manifest' is required");
        c.manifest_path = j.at("manifest").get<std::string>();

        for (const auto& d : j.value("descriptors", json::array()))
            c.descriptors.push_back(parse_descriptor(d));

        c.descriptor_input = j.value("descriptor_input", std::string("original"));
        if (c.descriptor_input != "original" && c.descriptor_input != "prepared")
            throw ConfigError("descriptor_input must be 'original' or 'prepared'");

        if (j.contains("prepare")) {
            const json& p = j.at("prepare");
            require_keys(p, {"strategy", "target", "crop"}, "prepare");
            const auto strategy = p.value("strategy", std::string("res"));
            if (strategy == "res") c.prepare.strategy = PrepareStrategy::res;
            else if (strategy == "cr1") c.prepare.strategy = PrepareStrategy::cr1;
            else throw ConfigError("prepare.strategy must be 'res' or 'cr1'");
            if (p.contains("target")) {
                c.prepare.target_width = p.at("target").at("width").get<std::size_t>();
                c.prepare.target_height = p.at("target").at("height").get<std::size_t>();
            }
            if (p.contains("crop")) {
                c.prepare.crop_width = p.at("crop").at("width").get<std::size_t>();
                c.prepare.crop_height = p.at("crop").at("height").get<std::size_t>();
            }
            if (c.prepare.target_width == 0 || c.prepare.target_height == 0)
                throw ConfigError("prepare.target dimensions must be >= 1");
        }

        if (j.contains("augment")) {
            const json& a = j.at("augment");
            require_keys(a, {"copies", "flip_h_prob", "flip_v_prob", "rotation_max",
                             "translate_max", "scale_range"},
                         "augment");
            c.augment.copies = a.value("copies", std::size_t{0});
            auto& p = c.augment.params;
            p.flip_h_prob = a.value("flip_h_prob", p.flip_h_prob);
            p.flip_v_prob = a.value("flip_v_prob", p.flip_v_prob);
            p.rotation_max = a.value("rotation_max", p.rotation_max);
            p.translate_max = a.value("translate_max", p.translate_max);
            if (a.contains("scale_range")) {
                const auto r = read_array<double>(a.at("scale_range"));
                if (r.size() != 2) throw ConfigError("augment.scale_range must be [low, high]");
                p.scale_low = r[0];
                p.scale_high = r[1];
            }
            if (p.flip_h_prob < 0 || p.flip_h_prob > 1 || p.flip_v_prob < 0 || p.flip_v_prob > 1)
                throw ConfigError("augment flip probabilities must be in [0,1]");
            if (!(p.scale_low > 0) || p.scale_low > p.scale_high)
                throw ConfigError("augment.scale_range must satisfy 0 < low <= high");
        }

        if (j.contains("reduction")) {
            const json& r = j.at("reduction");
            require_keys(r, {"method", "target_k"}, "reduction");
            c.reduction = r.value("method", std::string("none"));
            if (c.reduction != "none" && c.reduction != "pca" && c.reduction != "dct")
                throw ConfigError("reduction.method must be none, pca or dct");
            c.reduction_target_k = r.value("target_k", std::size_t{4000});
            if (c.reduction_target_k < 1) throw ConfigError("reduction.target_k must be >= 1");
        }

        if (j.contains("svm")) {
            const json& s = j.at("svm");
            require_keys(s, {"c_grid", "gamma_grid", "folds"}, "svm");
            if (s.contains("c_grid")) c.svm_c_grid = read_array<double>(s.at("c_grid"));
            if (s.contains("gamma_grid")) c.svm_gamma_grid = read_array<double>(s.at("gamma_grid"));
            c.svm_folds = s.value("folds", std::size_t{5});
            if (c.svm_folds < 2) throw ConfigError("svm.folds must be >= 2");
        }

        if (j.contains("fusion")) {
            const json& f = j.at("fusion");
            require_keys(f, {"mode", "chance_margin"}, "fusion");
            const auto mode = f.value("mode", std::string("global"));
            if (mode == "global") c.fusion_mode = NormMode::global;
            else if (mode == "per_column") c.fusion_mode = NormMode::per_column;
            else throw ConfigError("fusion.mode must be 'global' or 'per_column'");
            c.chance_margin = f.value("chance_margin", 0.05);
            if (c.chance_margin < 0) throw ConfigError("fusion.chance_margin must be >= 0");
        }

        for (const auto& e : j.value("external_scores", json::array()))
            c.external_scores.push_back(parse_external(e, "external_scores"));
        for (const auto& e : j.value("external_features", json::array()))
            c.external_features.push_back(parse_external(e, "external_features"));

        if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
        c.seed = j.value("seed", std::uint64_t{0});
        c.jobs = j.value("jobs", std::size_t{1});
    } catch (const json::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }

    // Resolve relative data paths against the config file's directory.
    const fs::path base = path.parent_path();
    const auto resolve = [&base](fs::path& p) {
        if (!p.empty() && p.is_relative()) p = base / p;
    };
    resolve(c.manifest_path);
    for (auto& e : c.external_scores) {
        resolve(e.train);
        resolve(e.val);
        resolve(e.test);
    }
    for (auto& e : c.external_features) {
        resolve(e.train);
        resolve(e.val);
        resolve(e.test);
    }
    for (auto& d : c.descriptors) resolve(d.filter_bank_dir);

    // Member id collisions across descriptors and external members.
    std::set<std::string> ids;
    const auto claim = [&ids](const std::string& id) {
        if (!ids.insert(id).second) throw ConfigError("duplicate member id '" + id + "'");
    };
    for (const auto& d : c.descriptors)
        for (const auto& id : member_ids_for(d)) claim(id);
    for (const auto& e : c.external_features) claim(e.member_id);
    for (const auto& e : c.external_scores) claim(e.member_id);
    if (ids.empty()) throw ConfigError("config defines no members");
    return c;
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

std::vector<std::string> cmd_extract(const PipelineConfig& cfg) {
    const DatasetManifest manifest = load_manifest(cfg.manifest_path);
    const auto extractors = build_extractors(cfg);
    if (extractors.empty()) return {};

    json slice;
    slice["descriptor_input"] = cfg.descriptor_input;
    slice["prepare"] = config_to_json(cfg)["prepare"];
    slice["augment"] = config_to_json(cfg)["augment"];
    slice["seed"] = cfg.seed;
    const std::string global_slice = slice.dump();

    for (Split split : present_splits(manifest)) {
        const auto rows = manifest.split_rows(split);

        detail::Fnv64 data_hash;
        for (const auto* r : rows) {
            data_hash.update(r->id);
            data_hash.update(manifest.class_names[static_cast<std::size_t>(r->label)]);
            detail::hash_file(data_hash, r->path);
        }
        const std::string split_digest = data_hash.hex();

        std::vector<std::size_t> needed;  // extractor indices
        for (std::size_t m = 0; m < extractors.size(); ++m) {
            detail::Fnv64 h;
            h.update(extractors[m].fingerprint);
            h.update(global_slice);
            h.update(split_digest);
            const fs::path file = feature_path(cfg, extractors[m].member_id, split);
            const fs::path meta = file.string() + ".meta";
            if (cache_valid(file, meta, h.hex())) {
                std::cerr << "[extract] " << extractors[m].member_id << ' ' << to_string(split)
                          << ": cache hit\n";
            } else {
                needed.push_back(m);
            }
        }
        if (needed.empty()) continue;

        const std::size_t copies = split == Split::train ? cfg.augment.copies : 0;
        struct Job {
            const ManifestRow* row;
            std::size_t copy;  // 0 = original
        };
        std::vector<Job> jobs;
        for (const auto* r : rows) {
            jobs.push_back({r, 0});
            for (std::size_t k = 1; k <= copies; ++k) jobs.push_back({r, k});
        }

        std::vector<std::string> row_ids(jobs.size());
        std::vector<std::vector<FeatureVector>> results(jobs.size());
        detail::parallel_for(jobs.size(), cfg.jobs, [&](std::size_t ji) {
            const Job& job = jobs[ji];
            ImageRGB rgb;
            try {
                rgb = load_image(job.row->path);
            } catch (const DataError& e) {
                throw DataError("image for id '" + job.row->id + "': " + e.what());
            }
            if (cfg.descriptor_input == "prepared") rgb = prepare_input(rgb, cfg.prepare);
            std::string id = job.row->id;
            if (job.copy > 0) {
                AugmentParams params = cfg.augment.params;
                params.seed = cfg.seed;
                rgb = augment(rgb, params, detail::fnv64(job.row->id) ^ job.copy);
                id += "~aug" + std::to_string(job.copy);
            }
            const ImageGray gray = to_grayscale(rgb);
            row_ids[ji] = id;
            auto& out = results[ji];
            out.reserve(needed.size());
            for (std::size_t m : needed) out.push_back(extractors[m].run(rgb, gray));
        });

        for (std::size_t k = 0; k < needed.size(); ++k) {
            const auto& ex = extractors[needed[k]];
            FeatureMatrix fm;
            fm.descriptor_id = ex.member_id;
            fm.ids = row_ids;
            fm.data = Matrix(jobs.size(), results.empty() ? 0 : results[0][k].dim());
            for (std::size_t ji = 0; ji < jobs.size(); ++ji) {
                const auto& fv = results[ji][k];
                if (fv.dim() != fm.dim())
                    throw std::logic_error("descriptor dim varies across images");
                for (std::size_t c = 0; c < fv.dim(); ++c) fm.data(ji, c) = fv.values[c];
            }
            const fs::path file = feature_path(cfg, ex.member_id, split);
            write_features(file, fm);
            detail::Fnv64 h;
            h.update(ex.fingerprint);
            h.update(global_slice);
            h.update(split_digest);
            csv::write_file_atomic(fs::path(file.string() + ".meta"), h.hex() + "\n");
        }
    }

    std::vector<std::string> ids;
    for (const auto& e : extractors) ids.push_back(e.member_id);
    return ids;
}

// ---------------------------------------------------------------------------
// train + predict
// ---------------------------------------------------------------------------

namespace {

// Aligns an external feature file's rows to the manifest split order.
FeatureMatrix align_features(const FeatureMatrix& fm, const DatasetManifest& manifest,
                             Split split, const std::string& member,
                             const fs::path& origin) {
    const auto rows = manifest.split_rows(split);
    std::map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < fm.n(); ++i) by_id.emplace(fm.ids[i], i);
    FeatureMatrix out;
    out.descriptor_id = member;
    out.data = Matrix(rows.size(), fm.dim());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto it = by_id.find(rows[r]->id);
        if (it == by_id.end())
            throw DataError(origin.string() + ": missing id '" + rows[r]->id + "' for split " +
                            to_string(split));
        out.ids.push_back(rows[r]->id);
        for (std::size_t c = 0; c < fm.dim(); ++c) out.data(r, c) = fm.data(it->second, c);
    }
    return out;
}

struct MemberFeatureSet {
    std::string member_id;
    std::map<Split, FeatureMatrix> by_split;  // train always present
};

void apply_reduction(const PipelineConfig& cfg, MemberFeatureSet& set) {
    const std::size_t d = set.by_split.at(Split::train).dim();
    json note;
    note["method"] = cfg.reduction;
    note["input_dim"] = d;
    note["target_k"] = cfg.reduction_target_k;
    bool applied = false;
    if (cfg.reduction == "pca" && d > cfg.reduction_target_k) {
        const PcaModel model = pca_fit(set.by_split.at(Split::train), cfg.reduction_target_k);
        save_pca(pca_path(cfg, set.member_id), model);
        for (auto& [split, fm] : set.by_split) fm = pca_project(model, fm);
        applied = true;
    } else if (cfg.reduction == "dct" && d > cfg.reduction_target_k) {
        for (auto& [split, fm] : set.by_split) {
            Matrix reduced(fm.n(), cfg.reduction_target_k);
            for (std::size_t r = 0; r < fm.n(); ++r) {
                const auto row = fm.data.row(r);
                const auto coeffs = dct_reduce(std::vector<double>(row.begin(), row.end()),
                                               cfg.reduction_target_k);
                for (std::size_t c = 0; c < coeffs.size(); ++c) reduced(r, c) = coeffs[c];
            }
            fm.data = std::move(reduced);
        }
        applied = true;
    }
    note["applied"] = applied;
    note["output_dim"] = set.by_split.at(Split::train).dim();
    if (!applied && cfg.reduction != "none") note["note"] = "passthrough (dim <= target_k)";
    csv::write_file_atomic(reduction_note_path(cfg, set.member_id), note.dump(2) + "\n");
}

void train_one_member(const PipelineConfig& cfg, const DatasetManifest& manifest,
                      MemberFeatureSet set) {
    const auto by_id = manifest_label_map(manifest);
    apply_reduction(cfg, set);

    const FeatureMatrix& train = set.by_split.at(Split::train);
    std::vector<int> labels(train.n());
    for (std::size_t i = 0; i < train.n(); ++i) labels[i] = label_for_id(by_id, train.ids[i]);

    TuneOptions topts;
    topts.c_grid = cfg.svm_c_grid;
    topts.gamma_grid = cfg.svm_gamma_grid;
    topts.folds = cfg.svm_folds;
    topts.seed = cfg.seed;
    const KernelParams params = tune(train.data, labels, manifest.class_names, topts);

    const OvaSvm model = train_ova(train.data, labels, manifest.class_names, params);
    save_ova(model_path(cfg, set.member_id), model);

    for (const auto& [split, fm] : set.by_split) {
        const ScoreMatrix scores = score_matrix(model, fm.data, fm.ids, set.member_id);
        write_scores(score_path(cfg, set.member_id, split), scores);
    }
}

}  // namespace

void cmd_train_predict(const PipelineConfig& cfg) {
    const DatasetManifest manifest = load_manifest(cfg.manifest_path);
    const auto splits = present_splits(manifest);

    json slice;
    slice["svm"] = config_to_json(cfg)["svm"];
    slice["reduction"] = config_to_json(cfg)["reduction"];
    slice["seed"] = cfg.seed;
    const std::string train_slice = slice.dump();

    struct Pending {
        std::string member_id;
        bool external;
        const ExternalMember* ext = nullptr;
    };
    std::vector<Pending> members;
    for (const auto& d : cfg.descriptors)
        for (const auto& id : member_ids_for(d)) members.push_back({id, false, nullptr});
    for (const auto& e : cfg.external_features) members.push_back({e.member_id, true, &e});

    std::vector<Pending> todo;
    for (const auto& m : members) {
        detail::Fnv64 h;
        h.update(train_slice);
        h.update(m.member_id);
        for (Split s : splits) {
            if (m.external) {
                const fs::path p = s == Split::train ? m.ext->train
                                  : s == Split::val  ? m.ext->val
                                                     : m.ext->test;
                if (!p.empty()) detail::hash_file(h, p);
            } else {
                detail::hash_file(h, feature_path(cfg, m.member_id, s));
            }
        }
        const fs::path meta = model_path(cfg, m.member_id).string() + ".meta";
        bool outputs_exist = fs::exists(model_path(cfg, m.member_id));
        for (Split s : splits) {
            if (m.external) {
                const fs::path p = s == Split::train ? m.ext->train
                                  : s == Split::val  ? m.ext->val
                                                     : m.ext->test;
                if (p.empty()) continue;
            }
            outputs_exist = outputs_exist && fs::exists(score_path(cfg, m.member_id, s));
        }
        if (outputs_exist && cache_valid(model_path(cfg, m.member_id), meta, h.hex())) {
            std::cerr << "[train] " << m.member_id << ": cache hit\n";
        } else {
            todo.push_back(m);
        }
    }

    detail::parallel_for(todo.size(), cfg.jobs, [&](std::size_t i) {
        const Pending& m = todo[i];
        MemberFeatureSet set;
        set.member_id = m.member_id;
        for (Split s : splits) {
            if (m.external) {
                const fs::path p = s == Split::train ? m.ext->train
                                  : s == Split::val  ? m.ext->val
                                                     : m.ext->test;
                if (p.empty()) {
                    if (s == Split::train)
                        throw ConfigError("external feature member '" + m.member_id +
                                          "' needs a train file");
                    continue;
                }
                set.by_split[s] = align_features(read_features(p), manifest, s, m.member_id, p);
            } else {
                const fs::path p = feature_path(cfg, m.member_id, s);
                if (!fs::exists(p))
                    throw DataError("missing feature file " + p.string() + " (run extract first)");
                FeatureMatrix fm = read_features(p);
                fm.descriptor_id = m.member_id;
                set.by_split[s] = std::move(fm);
            }
        }
        train_one_member(cfg, manifest, std::move(set));
    });

    // Record cache stamps once the artifacts exist.
    for (const auto& m : todo) {
        detail::Fnv64 h;
        h.update(train_slice);
        h.update(m.member_id);
        for (Split s : splits) {
            if (m.external) {
                const fs::path p = s == Split::train ? m.ext->train
                                  : s == Split::val  ? m.ext->val
                                                     : m.ext->test;
                if (!p.empty()) detail::hash_file(h, p);
            } else {
                detail::hash_file(h, feature_path(cfg, m.member_id, s));
            }
        }
        csv::write_file_atomic(fs::path(model_path(cfg, m.member_id).string() + ".meta"),
                               h.hex() + "\n");
    }
}

// ---------------------------------------------------------------------------
// fuse + evaluate
// ---------------------------------------------------------------------------

ScoreMatrix ingest_external_scores(const fs::path& path, const DatasetManifest& manifest,
                                   Split split) {
    const ScoreMatrix raw = read_scores(path);
    const std::size_t C = manifest.num_classes();

    // Columns matched by name, never by position.
    std::vector<std::size_t> col_of(C);
    for (std::size_t c = 0; c < C; ++c) {
        const auto it = std::find(raw.class_names.begin(), raw.class_names.end(),
                                  manifest.class_names[c]);
        if (it == raw.class_names.end())
            throw DataError(path.string() + ": missing class column '" +
                            manifest.class_names[c] + "'");
        col_of[c] = static_cast<std::size_t>(std::distance(raw.class_names.begin(), it));
    }
    for (const auto& name : raw.class_names)
        if (std::find(manifest.class_names.begin(), manifest.class_names.end(), name) ==
            manifest.class_names.end())
            throw DataError(path.string() + ": unknown class name '" + name + "'");

    const auto rows = manifest.split_rows(split);
    std::map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < raw.n(); ++i)
        if (!by_id.emplace(raw.ids[i], i).second)
            throw DataError(path.string() + ": duplicate id '" + raw.ids[i] + "'");
    for (const auto& id : raw.ids)
        if (!std::any_of(rows.begin(), rows.end(),
                         [&](const ManifestRow* r) { return r->id == id; }))
            throw DataError(path.string() + ": id '" + id + "' is not in the manifest's " +
                            std::string(to_string(split)) + " split");

    ScoreMatrix out;
    out.member_id = raw.member_id;
    out.class_names = manifest.class_names;
    out.scores = Matrix(rows.size(), C);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto it = by_id.find(rows[r]->id);
        if (it == by_id.end())
            throw DataError(path.string() + ": missing id '" + rows[r]->id + "'");
        out.ids.push_back(rows[r]->id);
        for (std::size_t c = 0; c < C; ++c) out.scores(r, c) = raw.scores(it->second, col_of[c]);
    }
    return out;
}

namespace {

// Internal score files may carry augmented training rows; fusion and all
// metrics run on the manifest's base rows only.
ScoreMatrix align_scores_loose(const ScoreMatrix& raw, const DatasetManifest& manifest,
                               Split split, const fs::path& origin) {
    const std::size_t C = manifest.num_classes();
    std::vector<std::size_t> col_of(C);
    for (std::size_t c = 0; c < C; ++c) {
        const auto it = std::find(raw.class_names.begin(), raw.class_names.end(),
                                  manifest.class_names[c]);
        if (it == raw.class_names.end())
            throw DataError(origin.string() + ": missing class column '" +
                            manifest.class_names[c] + "'");
        col_of[c] = static_cast<std::size_t>(std::distance(raw.class_names.begin(), it));
    }
    const auto rows = manifest.split_rows(split);
    std::map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < raw.n(); ++i) by_id.emplace(raw.ids[i], i);
    ScoreMatrix out;
    out.member_id = raw.member_id;
    out.class_names = manifest.class_names;
    out.scores = Matrix(rows.size(), C);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto it = by_id.find(rows[r]->id);
        if (it == by_id.end())
            throw DataError(origin.string() + ": missing id '" + rows[r]->id + "'");
        out.ids.push_back(rows[r]->id);
        for (std::size_t c = 0; c < C; ++c) out.scores(r, c) = raw.scores(it->second, col_of[c]);
    }
    return out;
}

struct LoadedMember {
    std::string member_id;
    std::map<Split, ScoreMatrix> raw;  // aligned to manifest base rows
    double train_bacc = 0.0;
};

double bacc_of(const ScoreMatrix& s, const DatasetManifest& manifest) {
    const auto by_id = manifest_label_map(manifest);
    std::vector<int> truth(s.n());
    for (std::size_t i = 0; i < s.n(); ++i) truth[i] = label_for_id(by_id, s.ids[i]);
    return balanced_accuracy(confusion(truth, predictions(s), manifest.num_classes()));
}

SplitMetrics metrics_for(const ScoreMatrix& s, const DatasetManifest& manifest) {
    const auto by_id = manifest_label_map(manifest);
    std::vector<int> truth(s.n());
    for (std::size_t i = 0; i < s.n(); ++i) truth[i] = label_for_id(by_id, s.ids[i]);
    const ConfusionMatrix cm =
        confusion(truth, predictions(s), manifest.num_classes(), manifest.class_names);
    SplitMetrics out;
    out.bacc = balanced_accuracy(cm);
    out.mean_recall = mean_recall(cm);
    for (std::size_t c = 0; c < manifest.num_classes(); ++c) {
        const SensSpec ss = sens_spec(cm, c);
        out.per_class.push_back(
            {manifest.class_names[c], ss.sensitivity, ss.specificity, ss.degenerate});
    }
    return out;
}

void save_norm_stats(const fs::path& path, const std::string& member, const NormStats& st) {
    std::ostringstream out;
    out << "# normstats;member_id=" << member << ";mode="
        << (st.mode == NormMode::global ? "global" : "per_column") << "\n";
    out << "mean";
    for (double v : st.means) out << ',' << csv::format_double(v);
    out << "\nstd";
    for (double v : st.stds) out << ',' << csv::format_double(v);
    out << "\npassthrough";
    for (char f : st.passthrough) out << ',' << static_cast<int>(f);
    out << '\n';
    csv::write_file_atomic(path, out.str());
}

std::vector<LoadedMember> load_all_members(const PipelineConfig& cfg,
                                           const DatasetManifest& manifest,
                                           const std::vector<Split>& splits) {
    std::vector<LoadedMember> members;
    for (const auto& d : cfg.descriptors) {
        for (const auto& id : member_ids_for(d)) {
            LoadedMember m;
            m.member_id = id;
            for (Split s : splits) {
                const fs::path p = score_path(cfg, id, s);
                if (!fs::exists(p))
                    throw DataError("missing score file " + p.string() + " (run train first)");
                m.raw[s] = align_scores_loose(read_scores(p), manifest, s, p);
            }
            members.push_back(std::move(m));
        }
    }
    for (const auto& e : cfg.external_features) {
        LoadedMember m;
        m.member_id = e.member_id;
        for (Split s : splits) {
            const fs::path p = score_path(cfg, e.member_id, s);
            if (!fs::exists(p))
                throw DataError("missing score file " + p.string() + " (run train first)");
            m.raw[s] = align_scores_loose(read_scores(p), manifest, s, p);
        }
        members.push_back(std::move(m));
    }
    for (const auto& e : cfg.external_scores) {
        LoadedMember m;
        m.member_id = e.member_id;
        for (Split s : splits) {
            const fs::path p = s == Split::train ? e.train : s == Split::val ? e.val : e.test;
            if (p.empty())
                throw DataError("external member '" + e.member_id + "' has no file for split '" +
                                to_string(s) + "' but the manifest contains that split");
            if (s == Split::train && !fs::exists(p))
                throw DataError("external member '" + e.member_id +
                                "' is missing its train sibling file " + p.string());
            ScoreMatrix aligned = ingest_external_scores(p, manifest, s);
            aligned.member_id = e.member_id;
            m.raw[s] = std::move(aligned);
        }
        members.push_back(std::move(m));
    }
    for (auto& m : members) m.train_bacc = bacc_of(m.raw.at(Split::train), manifest);
    return members;
}

json report_to_json(const PipelineConfig& cfg, const RunReport& report) {
    json j;
    j["config"] = config_to_json(cfg);
    json members = json::array();
    for (const auto& m : report.members) {
        json e;
        e["member_id"] = m.member_id;
        e["train_bacc"] = m.train_bacc;
        if (m.val_bacc) e["val_bacc"] = *m.val_bacc;
        if (m.test_bacc) e["test_bacc"] = *m.test_bacc;
        e["discarded"] = m.discarded;
        if (m.discarded) e["reason"] = m.reason;
        members.push_back(e);
    }
    j["members"] = members;
    json fusion;
    for (const auto& [split, metrics] : report.fusion) {
        json f;
        f["bacc"] = metrics.bacc;
        f["mean_recall"] = metrics.mean_recall;
        json per_class = json::array();
        for (const auto& c : metrics.per_class)
            per_class.push_back({{"class", c.class_name},
                                 {"sensitivity", c.sensitivity},
                                 {"specificity", c.specificity},
                                 {"degenerate", c.degenerate}});
        f["per_class"] = per_class;
        fusion[split] = f;
    }
    j["fusion"] = fusion;
    if (!report.reduction_note.empty()) j["reduction"] = json::parse(report.reduction_note);
    return j;
}

std::string collect_reduction_notes(const PipelineConfig& cfg) {
    json notes;
    for (const auto& d : cfg.descriptors) {
        for (const auto& id : member_ids_for(d)) {
            const fs::path p = reduction_note_path(cfg, id);
            if (fs::exists(p)) notes[id] = json::parse(std::ifstream(p));
        }
    }
    for (const auto& e : cfg.external_features) {
        const fs::path p = reduction_note_path(cfg, e.member_id);
        if (fs::exists(p)) notes[e.member_id] = json::parse(std::ifstream(p));
    }
    return notes.empty() ? std::string{} : notes.dump();
}

void print_report(const RunReport& report) {
    std::ostringstream out;
    out << "member                          train    val   test  status\n";
    const auto fmt = [](std::optional<double> v) {
        char buf[16];
        if (!v) return std::string("     -");
        std::snprintf(buf, sizeof(buf), "%6.3f", *v);
        return std::string(buf);
    };
    for (const auto& m : report.members) {
        char name[33];
        std::snprintf(name, sizeof(name), "%-30s", m.member_id.c_str());
        out << name << ' ' << fmt(m.train_bacc) << ' ' << fmt(m.val_bacc) << ' '
            << fmt(m.test_bacc) << "  " << (m.discarded ? "discarded" : "kept") << '\n';
    }
    const auto at = [&](const char* split) -> std::optional<double> {
        const auto it = report.fusion.find(split);
        if (it == report.fusion.end()) return std::nullopt;
        return it->second.bacc;
    };
    out << "fusion                         " << fmt(at("train")) << ' ' << fmt(at("val")) << ' '
        << fmt(at("test")) << "  sum-rule\n";
    std::cout << out.str();
}

RunReport fuse_or_evaluate(const PipelineConfig& cfg, bool refit) {
    const auto t0 = std::chrono::steady_clock::now();
    const DatasetManifest manifest = load_manifest(cfg.manifest_path);
    const auto splits = present_splits(manifest);
    auto members = load_all_members(cfg, manifest, splits);

    RunReport report;
    for (const auto& m : members) {
        MemberReport mr;
        mr.member_id = m.member_id;
        mr.train_bacc = m.train_bacc;
        if (m.raw.contains(Split::val)) mr.val_bacc = bacc_of(m.raw.at(Split::val), manifest);
        if (m.raw.contains(Split::test)) mr.test_bacc = bacc_of(m.raw.at(Split::test), manifest);
        if (!member_survives(m.train_bacc, cfg.chance_margin)) {
            mr.discarded = true;
            std::ostringstream why;
            why << "train bAcc " << m.train_bacc << " below chance threshold "
                << 0.5 + cfg.chance_margin;
            mr.reason = why.str();
        }
        report.members.push_back(std::move(mr));
    }

    std::map<std::string, ScoreMatrix> fused;
    if (refit) {
        std::vector<const LoadedMember*> survivors;
        for (const auto& m : members)
            if (member_survives(m.train_bacc, cfg.chance_margin)) survivors.push_back(&m);
        if (survivors.empty())
            throw DataError("empty ensemble: every member is at chance level on train");

        std::map<std::string, NormStats> stats;
        for (const auto* m : survivors) {
            NormStats st = znorm_fit(m->raw.at(Split::train), cfg.fusion_mode);
            save_norm_stats(norm_path(cfg, m->member_id), m->member_id, st);
            stats.emplace(m->member_id, std::move(st));
        }
        for (Split s : splits) {
            std::vector<ScoreMatrix> normalized;
            normalized.reserve(survivors.size());
            for (const auto* m : survivors)
                normalized.push_back(znorm_apply(stats.at(m->member_id), m->raw.at(s)));
            ScoreMatrix f = sum_rule(normalized);
            write_scores(score_path(cfg, "fusion", s), f);
            fused.emplace(to_string(s), std::move(f));
        }
    } else {
        for (Split s : splits) {
            const fs::path p = score_path(cfg, "fusion", s);
            if (!fs::exists(p))
                throw DataError("missing fused scores " + p.string() + " (run fuse first)");
            fused.emplace(to_string(s), align_scores_loose(read_scores(p), manifest, s, p));
        }
    }

    for (const auto& [split, f] : fused) report.fusion[split] = metrics_for(f, manifest);
    report.reduction_note = collect_reduction_notes(cfg);
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    csv::write_file_atomic(cfg.out_dir / "report.json",
                           report_to_json(cfg, report).dump(2) + "\n");
    json timing;
    timing["elapsed_seconds"] = report.elapsed_seconds;
    csv::write_file_atomic(cfg.out_dir / "timing.json", timing.dump(2) + "\n");
    print_report(report);
    return report;
}

}  // namespace

RunReport cmd_fuse_evaluate(const PipelineConfig& cfg) { return fuse_or_evaluate(cfg, true); }

RunReport cmd_evaluate(const PipelineConfig& cfg) { return fuse_or_evaluate(cfg, false); }

RunReport cmd_run_all(const PipelineConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    cmd_extract(cfg);
    cmd_train_predict(cfg);
    RunReport report = cmd_fuse_evaluate(cfg);
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json timing;
    timing["elapsed_seconds"] = report.elapsed_seconds;
    csv::write_file_atomic(cfg.out_dir / "timing.json", timing.dump(2) + "\n");
    return report;
}

}  // namespace lesionfuse
