#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "earface/checkpoint.hpp"
#include "earface/dataset.hpp"
#include "earface/losses.hpp"
#include "earface/nn/discriminator.hpp"
#include "earface/nn/embedder.hpp"
#include "earface/nn/generator.hpp"
#include "earface/optim.hpp"
#include "earface/trainer_config.hpp"

namespace earface {

/// Everything the alternating optimization owns: both networks, optimizer
/// moments, the dropout RNG and the step counter. Serializable to a single
/// archive and restorable to a bit-identical continuation.
class TrainState {
public:
    TrainState(const nn::GeneratorConfig& gcfg, const nn::DiscriminatorConfig& dcfg,
               const TrainConfig& tcfg);

    TrainState(const TrainState&) = delete;
    TrainState& operator=(const TrainState&) = delete;
    TrainState(TrainState&&) = default;

    nn::Generator generator;
    nn::Discriminator discriminator;
    std::unique_ptr<Adam> opt_g;
    std::unique_ptr<Adam> opt_d;
    Rng rng;
    int64_t step = 0;

    const TrainConfig& train_config() const { return tcfg_; }
    const nn::GeneratorConfig& generator_config() const { return gcfg_; }
    const nn::DiscriminatorConfig& discriminator_config() const { return dcfg_; }

private:
    nn::GeneratorConfig gcfg_;
    nn::DiscriminatorConfig dcfg_;
    TrainConfig tcfg_;
};

struct Batch {
    Tensor ears;   // [-1, 1]
    Tensor faces;  // [-1, 1]
};

/// One discriminator update on a fresh detached fake batch, then one
/// generator update on the composite objective. psi stays frozen.
LossBreakdown train_step(TrainState& state, const Batch& batch, nn::EmbeddingNetwork& psi);

void save_train_state(const TrainState& state, const std::filesystem::path& path);
TrainState load_train_state(const std::filesystem::path& path);

/// Rebuilds just the generator (eval use) from a training checkpoint.
nn::Generator load_generator_checkpoint(const std::filesystem::path& path,
                                        nn::GeneratorConfig* cfg_out = nullptr);

struct TrainResult {
    std::filesystem::path final_checkpoint;
    std::filesystem::path log_path;
    std::vector<std::filesystem::path> checkpoints;
    int64_t steps = 0;
};

struct TrainRun {
    nn::GeneratorConfig generator;
    nn::DiscriminatorConfig discriminator;
    TrainConfig train;
    IngestConfig ingest{64, ValueRange::Symmetric};
    std::optional<std::filesystem::path> resume;  // train-state archive
};

/// Seeded epoch loop over the train split with periodic checkpoints and a
/// JSON-lines loss log (one breakdown per step).
TrainResult train(const TrainRun& run, const DatasetManifest& manifest,
                  const SplitAssignment& splits, nn::EmbeddingNetwork& psi,
                  const std::filesystem::path& out_dir);

}  // namespace earface
