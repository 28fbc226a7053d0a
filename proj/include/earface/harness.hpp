#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "earface/config_io.hpp"
#include "earface/embedder_registry.hpp"
#include "earface/identification.hpp"
#include "earface/trainer.hpp"

namespace earface {

/// One experiment: data source, protocol, model and evaluation settings.
/// Component seeds left unset in the file derive deterministically from the
/// top-level seed so one value pins the whole pipeline.
struct ExperimentConfig {
    uint64_t seed = 0;
    std::filesystem::path out_dir;
    std::string dataset_name = "dataset";
    std::optional<SynthConfig> synthetic;
    std::optional<std::filesystem::path> manifest_path;  // external data alternative
    SplitSpec split;
    int target_size = 64;
    nn::GeneratorConfig generator;
    nn::DiscriminatorConfig discriminator;
    TrainConfig train;
    EmbedderSpec embedder;
    SsimConfig ssim_cfg;
    std::vector<int> ranks{1, 2, 5, 10, 20};
    std::string raw_text;  // verbatim config file contents, echoed to out_dir

    static ExperimentConfig from_file(const std::filesystem::path& path);
    static ExperimentConfig from_json(const Json& j, const std::filesystem::path& base_dir);
    Json to_json() const;

    /// Overrides the top seed and re-derives component seeds that were not
    /// pinned explicitly in the file.
    void override_seed(uint64_t seed);
    void override_out_dir(const std::filesystem::path& dir);

    std::filesystem::path manifest_file() const;
    std::filesystem::path splits_file() const { return out_dir / "splits.json"; }
};

struct CommandResult {
    std::vector<std::filesystem::path> artifacts;
};

/// Generates or validates the dataset and writes the split assignment.
CommandResult cmd_prepare(const ExperimentConfig& cfg);

CommandResult cmd_train(const ExperimentConfig& cfg,
                        std::optional<std::filesystem::path> resume = std::nullopt);

/// Reconstruction-quality reports over the named splits. sd_test_2 is derived
/// from sd_test_1's per-pair table when both are requested in one invocation.
CommandResult cmd_evaluate(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint,
                           const std::vector<std::string>& split_names);

/// Rank-k identification of reconstructed probes against a real-face gallery
/// (default: ground-truth faces of the same split).
CommandResult cmd_identify(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint,
                           const std::string& split_name, const std::string& gallery_split = "");

/// Evaluate a checkpoint trained elsewhere on this config's data. The report
/// carries both the model and data labels.
CommandResult cmd_cross_eval(const ExperimentConfig& data_cfg,
                             const std::filesystem::path& foreign_checkpoint,
                             const std::vector<std::string>& split_names,
                             std::string model_label = "");

/// Triptych grid: one column (ear | reconstruction | target) per pair.
CommandResult cmd_grid(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint,
                       std::vector<std::string> pair_ids, const std::filesystem::path& out_png);

/// Wraps a generator checkpoint as a [0,1]-space reconstructor. eval_seed
/// feeds inference-time dropout when the config keeps it on.
Reconstructor make_checkpoint_reconstructor(const std::filesystem::path& checkpoint,
                                            uint64_t eval_seed);

}  // namespace earface
