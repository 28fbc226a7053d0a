#pragma once

#include <memory>
#include <vector>

#include "earface/nn/features.hpp"
#include "earface/nn/layers.hpp"

namespace earface::nn {

struct EmbedderConfig {
    int in_channels = 3;
    int blocks = 4;          // stride-2 conv stages
    int base_channels = 16;
    int embedding_dim = 128;
    int input_size = 0;      // 0 accepts any size; otherwise enforced on embed
    uint64_t seed = 0x5eedface;

    void validate() const;
};

/// Fixed feature extractor: strided conv + tanh blocks ending in global
/// average pooling. Parameters are seeded at construction and never trained;
/// backward() propagates gradients to the input image only.
class EmbeddingNetwork {
public:
    explicit EmbeddingNetwork(const EmbedderConfig& cfg);

    /// Images must be in the network range [-1, 1].
    FeatureBatch embed(const Tensor& image_batch);

    /// Gradient w.r.t. the input images of the last embed() call.
    Tensor backward(const FeatureBatch& d_features);

    /// Digest of the (frozen) parameters; stable across calls.
    uint64_t param_hash() const;

    std::vector<Param*> params();
    void load_params(const std::vector<Tensor>& named_in_order);

    const EmbedderConfig& config() const { return cfg_; }
    int dim() const { return cfg_.embedding_dim; }

private:
    EmbedderConfig cfg_;
    std::vector<std::unique_ptr<Layer>> stack_;
    GlobalAvgPool pool_;
};

}  // namespace earface::nn
