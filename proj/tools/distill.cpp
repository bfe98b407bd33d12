#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "distill/pipeline.hpp"

namespace {

struct Options {
    std::string config_path;
    long long seed_override = -1;
};

distill::RunConfig load_config(const Options& opt) {
    distill::RunConfig cfg = distill::RunConfig::load(opt.config_path);
    if (opt.seed_override >= 0) {
        cfg.seed = static_cast<std::uint64_t>(opt.seed_override);
    }
    return cfg;
}

void add_common(CLI::App* cmd, Options& opt) {
    cmd->add_option("--config", opt.config_path, "Run configuration file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", opt.seed_override, "Override the config seed");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Teacher-to-student reasoning distillation pipeline"};
    app.require_subcommand(1);

    Options opt;
    auto* prepare = app.add_subcommand("prepare", "Load or generate corpora and write canonical splits");
    auto* annotate = app.add_subcommand("annotate", "Run the teacher over the prepared splits");
    auto* train = app.add_subcommand("train", "Fine-tune student configurations");
    auto* infer = app.add_subcommand("infer", "Run trained students on the held-out split");
    auto* eval = app.add_subcommand("eval", "Score traces against gold answers");
    auto* report = app.add_subcommand("report", "Merge eval reports into one comparison table");
    auto* pipeline = app.add_subcommand("pipeline", "prepare, annotate, train, infer, eval in sequence");
    for (auto* cmd : {prepare, annotate, train, infer, eval, report, pipeline}) {
        add_common(cmd, opt);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        const distill::RunConfig cfg = load_config(opt);
        if (prepare->parsed()) {
            distill::cmd_prepare(cfg);
            std::cout << "prepared splits under " << cfg.out_dir << "/data\n";
        } else if (annotate->parsed()) {
            distill::cmd_annotate(cfg);
            std::cout << "annotated splits under " << cfg.out_dir << "/data\n";
        } else if (train->parsed()) {
            distill::cmd_train(cfg);
            std::cout << "checkpoints under " << cfg.out_dir << "/models\n";
        } else if (infer->parsed()) {
            distill::cmd_infer(cfg);
            std::cout << "traces under " << cfg.out_dir << "/traces\n";
        } else if (eval->parsed()) {
            distill::cmd_eval(cfg);
            std::cout << "reports under " << cfg.out_dir << "/eval\n";
        } else if (report->parsed()) {
            std::cout << distill::cmd_report(cfg);
        } else if (pipeline->parsed()) {
            distill::cmd_prepare(cfg);
            distill::cmd_annotate(cfg);
            distill::cmd_train(cfg);
            distill::cmd_infer(cfg);
            distill::cmd_eval(cfg);
            std::cout << distill::cmd_report(cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
