// Command line front end: extract features, train the SVM members, fuse
// score matrices and evaluate, driven by a JSON config.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lesionfuse/errors.hpp"
#include "lesionfuse/pipeline.hpp"

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> jobs;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "pipeline config (JSON)")->required();
    cmd->add_option("--seed", o.seed, "override the config's seed");
    cmd->add_option("--out", o.out, "override the output directory");
    cmd->add_option("--jobs", o.jobs, "worker threads for per-image / per-member fan-out");
}

lesionfuse::PipelineConfig resolve(const Overrides& o) {
    lesionfuse::PipelineConfig cfg = lesionfuse::load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.out) cfg.out_dir = *o.out;
    if (o.jobs) cfg.jobs = *o.jobs;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"handcrafted-descriptor ensemble pipeline for skin lesion classification"};
    app.require_subcommand(1);

    Overrides o_extract, o_train, o_fuse, o_eval, o_all;
    add_common(app.add_subcommand("extract", "compute descriptor feature files"), o_extract);
    add_common(app.add_subcommand("train", "tune and train the SVM members, write scores"),
               o_train);
    add_common(app.add_subcommand("fuse", "normalize, filter, sum-rule fuse and evaluate"),
               o_fuse);
    add_common(app.add_subcommand("evaluate", "recompute the report from existing score files"),
               o_eval);
    add_common(app.add_subcommand("run-all", "extract, train, fuse and evaluate in one go"),
               o_all);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("extract")) {
            lesionfuse::cmd_extract(resolve(o_extract));
        } else if (app.got_subcommand("train")) {
            lesionfuse::cmd_train_predict(resolve(o_train));
        } else if (app.got_subcommand("fuse")) {
            lesionfuse::cmd_fuse_evaluate(resolve(o_fuse));
        } else if (app.got_subcommand("evaluate")) {
            lesionfuse::cmd_evaluate(resolve(o_eval));
        } else if (app.got_subcommand("run-all")) {
            lesionfuse::cmd_run_all(resolve(o_all));
        }
    } catch (const lesionfuse::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const lesionfuse::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
