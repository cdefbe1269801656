#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lesionfuse/descriptors.hpp"
#include "lesionfuse/fusion.hpp"
#include "lesionfuse/image.hpp"
#include "lesionfuse/manifest.hpp"
#include "lesionfuse/scores.hpp"

namespace lesionfuse {

/// One entry of the config's descriptor list. Variant ensembles (mlpq,
/// fbsif) may restrict the parameter grid and may concatenate all variants
/// into a single member instead of fanning out one member per variant.
struct DescriptorSpec {
    std::string id;  // ltp | clbp | ric | hog | mlpq | fbsif | col | mor
    double ltp_threshold = 3.0;
    std::vector<double> taus, alphas, rhos;  // mlpq subsets; empty = full grid
    std::vector<int> radii;
    std::vector<int> sizes;                  // fbsif subsets
    std::vector<double> thresholds;
    bool concat = false;
    std::filesystem::path filter_bank_dir;   // optional bsif_<size>.txt files
};

struct ExternalMember {
    std::string member_id;
    std::filesystem::path train;  // required: normalization and the discard
                                  // rule are fitted on training scores
    std::filesystem::path val;    // optional
    std::filesystem::path test;   // optional
};

struct AugmentConfig {
    std::size_t copies = 0;  // extra augmented rows per train image
    AugmentParams params;
};

struct PipelineConfig {
    std::filesystem::path manifest_path;
    std::vector<DescriptorSpec> descriptors;
    std::string descriptor_input = "original";  // or "prepared"
    PrepareOptions prepare;
    AugmentConfig augment;

    std::string reduction = "none";  // none | pca | dct, applied when longer
    std::size_t reduction_target_k = 4000;

    std::vector<double> svm_c_grid;      // empty = defaults
    std::vector<double> svm_gamma_grid;  // empty = 2^-7..2^3 / d
    std::size_t svm_folds = 5;

    NormMode fusion_mode = NormMode::global;
    double chance_margin = 0.05;

    std::vector<ExternalMember> external_scores;
    std::vector<ExternalMember> external_features;

    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
};

/// Parses the JSON config, validating descriptor ids: gold/clm/let/ahp are
/// recognized but rejected as unimplemented (out of scope), anything else
/// unknown is rejected outright.
PipelineConfig load_config(const std::filesystem::path& path);

struct MemberReport {
    std::string member_id;
    double train_bacc = 0.0;
    std::optional<double> val_bacc;
    std::optional<double> test_bacc;
    bool discarded = false;
    std::string reason;
};

struct ClassReport {
    std::string class_name;
    double sensitivity = 0.0;
    double specificity = 0.0;
    bool degenerate = false;
};

struct SplitMetrics {
    double bacc = 0.0;
    double mean_recall = 0.0;
    std::vector<ClassReport> per_class;
};

struct RunReport {
    std::vector<MemberReport> members;
    std::map<std::string, SplitMetrics> fusion;  // keyed "train"/"val"/"test"
    std::string reduction_note;                  // applied or passthrough, per member
    double elapsed_seconds = 0.0;                // written to timing.json only
};

/// Feature extraction for every configured member and manifest split.
/// Results are cached: a member/split file is reused when its recorded
/// input hash (config slice + image bytes) still matches. Returns the
/// member ids in config order.
std::vector<std::string> cmd_extract(const PipelineConfig& cfg);

/// Per member: optional reduction fitted on train only, hyperparameter
/// tuning on train, one-vs-all training, and score files for every split.
void cmd_train_predict(const PipelineConfig& cfg);

/// Normalization (fitted on train scores, frozen), chance-level discard,
/// sum-rule fusion, metrics, and the report files.
RunReport cmd_fuse_evaluate(const PipelineConfig& cfg);

/// Metrics/report recomputation from score files already on disk.
RunReport cmd_evaluate(const PipelineConfig& cfg);

RunReport cmd_run_all(const PipelineConfig& cfg);

/// Reads an external score CSV and aligns it to the manifest: class columns
/// are matched by name (never by position) and rows are re-keyed to the
/// manifest's split order. Every split row must be present exactly once.
ScoreMatrix ingest_external_scores(const std::filesystem::path& path,
                                   const DatasetManifest& manifest, Split split);

/// Expanded member ids for a descriptor spec (one per variant unless
/// concatenation was requested).
std::vector<std::string> member_ids_for(const DescriptorSpec& spec);

}  // namespace lesionfuse
