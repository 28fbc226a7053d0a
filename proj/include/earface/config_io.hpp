#pragma once

#include <json.hpp>

#include "earface/dataset.hpp"
#include "earface/losses.hpp"
#include "earface/metrics.hpp"
#include "earface/nn/discriminator.hpp"
#include "earface/nn/embedder.hpp"
#include "earface/nn/generator.hpp"
#include "earface/trainer_config.hpp"

namespace earface {

using Json = nlohmann::ordered_json;

Json to_json(const nn::GeneratorConfig& c);
nn::GeneratorConfig generator_config_from_json(const Json& j);

Json to_json(const nn::DiscriminatorConfig& c);
nn::DiscriminatorConfig discriminator_config_from_json(const Json& j);

Json to_json(const nn::EmbedderConfig& c);
nn::EmbedderConfig embedder_config_from_json(const Json& j);

Json to_json(const LossWeights& w);
LossWeights loss_weights_from_json(const Json& j);

Json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j);

Json to_json(const SplitSpec& s);
SplitSpec split_spec_from_json(const Json& j);

Json to_json(const SynthConfig& s);
SynthConfig synth_config_from_json(const Json& j);

Json to_json(const SsimConfig& s);
SsimConfig ssim_config_from_json(const Json& j);

}  // namespace earface
