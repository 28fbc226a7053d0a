#pragma once

#include <filesystem>
#include <string>

#include "earface/nn/embedder.hpp"

namespace earface {

/// How to obtain the feature extractor: the seeded built-in CNN, or external
/// pretrained weights shipped as a tensor archive. Preprocessing contract:
/// inputs are [-1, 1] images, resized upstream to builtin.input_size when set.
struct EmbedderSpec {
    std::string kind = "builtin-seeded";  // "builtin-seeded" | "external"
    std::filesystem::path weight_path;    // external only
    nn::EmbedderConfig builtin;           // dims/seed; for external, embedding_dim is validated

    void validate() const;
};

/// Builds the embedding network. External archives must agree with the
/// spec'd embedding dimension.
nn::EmbeddingNetwork load_embedder(const EmbedderSpec& spec);

/// Exports weights in the external-archive format (same container as
/// checkpoints, kind "embedder").
void save_embedder_weights(nn::EmbeddingNetwork& net, const std::filesystem::path& path);

}  // namespace earface
