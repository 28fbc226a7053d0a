// Command-line front end: prepare | train | evaluate | identify | cross-eval | grid.

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "earface/harness.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Experiment config file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", args.seed, "Override the experiment seed");
    cmd->add_option("--out", args.out_dir, "Override the output directory");
}

earface::ExperimentConfig load_config(const CommonArgs& args) {
    auto cfg = earface::ExperimentConfig::from_file(args.config_path);
    if (args.seed) cfg.override_seed(*args.seed);
    if (!args.out_dir.empty()) cfg.override_out_dir(args.out_dir);
    if (cfg.out_dir.empty())
        throw earface::Error("no output directory (set out_dir in the config or pass --out)");
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Paired ear-to-face translation: training and evaluation harness"};
    app.require_subcommand(1);

    CommonArgs prep_args;
    CLI::App* prep = app.add_subcommand("prepare", "Generate/validate data and build splits");
    add_common(prep, prep_args);

    CommonArgs train_args;
    std::string resume;
    CLI::App* train = app.add_subcommand("train", "Train the translation model");
    add_common(train, train_args);
    train->add_option("--resume", resume, "Resume from a training-state checkpoint")
        ->check(CLI::ExistingFile);

    CommonArgs eval_args;
    std::string eval_checkpoint;
    std::vector<std::string> eval_splits;
    CLI::App* eval = app.add_subcommand("evaluate", "Reconstruction-quality metrics on splits");
    add_common(eval, eval_args);
    eval->add_option("--checkpoint", eval_checkpoint, "Training checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
    eval->add_option("--split", eval_splits, "Splits to evaluate (default: sd_test_1 sid_test)");

    CommonArgs id_args;
    std::string id_checkpoint, id_split = "sd_test_1", id_gallery;
    CLI::App* ident = app.add_subcommand("identify", "Rank-k identification from reconstructions");
    add_common(ident, id_args);
    ident->add_option("--checkpoint", id_checkpoint, "Training checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
    ident->add_option("--split", id_split, "Probe split (default sd_test_1)");
    ident->add_option("--gallery-split", id_gallery,
                      "Gallery split (default: ground-truth faces of the probe split)");

    CommonArgs cross_args;
    std::string cross_checkpoint, cross_model_label;
    std::vector<std::string> cross_splits;
    CLI::App* cross = app.add_subcommand("cross-eval", "Evaluate a foreign-model checkpoint here");
    add_common(cross, cross_args);
    cross->add_option("--checkpoint", cross_checkpoint, "Checkpoint trained on another dataset")
        ->required()
        ->check(CLI::ExistingFile);
    cross->add_option("--split", cross_splits, "Splits to evaluate (default: sd_test_1 sid_test)");
    cross->add_option("--model-label", cross_model_label,
                      "Label for the foreign model (default: inferred from the checkpoint dir)");

    CommonArgs grid_args;
    std::string grid_checkpoint, grid_out;
    std::vector<std::string> grid_pairs;
    CLI::App* grid = app.add_subcommand("grid", "Triptych image grid (ear | output | target)");
    add_common(grid, grid_args);
    grid->add_option("--checkpoint", grid_checkpoint, "Training checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
    grid->add_option("--pairs", grid_pairs, "pair_ids to render (default: first 3 of sd_test_1)");
    grid->add_option("--out-image", grid_out, "Output PNG path (default: <out>/grid.png)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (prep->parsed()) {
            earface::cmd_prepare(load_config(prep_args));
        } else if (train->parsed()) {
            std::optional<std::filesystem::path> r;
            if (!resume.empty()) r = resume;
            earface::cmd_train(load_config(train_args), r);
        } else if (eval->parsed()) {
            if (eval_splits.empty()) eval_splits = {"sd_test_1", "sid_test"};
            earface::cmd_evaluate(load_config(eval_args), eval_checkpoint, eval_splits);
        } else if (ident->parsed()) {
            earface::cmd_identify(load_config(id_args), id_checkpoint, id_split, id_gallery);
        } else if (cross->parsed()) {
            if (cross_splits.empty()) cross_splits = {"sd_test_1", "sid_test"};
            earface::cmd_cross_eval(load_config(cross_args), cross_checkpoint, cross_splits,
                                    cross_model_label);
        } else if (grid->parsed()) {
            earface::cmd_grid(load_config(grid_args), grid_checkpoint, grid_pairs, grid_out);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
