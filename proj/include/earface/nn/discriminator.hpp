#pragma once

#include <memory>
#include <vector>

#include "earface/nn/layers.hpp"

namespace earface::nn {

struct DiscriminatorConfig {
    int cond_channels = 3;   // conditioning (ear) image
    int image_channels = 3;  // judged (face) image
    int base_channels = 64;
    int n_layers = 3;        // stride-2 stages; receptive field 70x70 at the default 3
    int max_channel_mult = 8;

    void validate() const;
};

/// Patch critic over channel-concatenated (condition, image) pairs. Output is
/// a grid of per-patch logits whose size follows the conv stride arithmetic.
class Discriminator {
public:
    explicit Discriminator(const DiscriminatorConfig& cfg);

    void init(uint64_t seed);

    /// Returns [n, 1, ph, pw] patch logits.
    Tensor forward(const Tensor& cond_batch, const Tensor& image_batch);

    /// Returns gradients w.r.t. (cond, image) inputs; accumulates param grads.
    std::pair<Tensor, Tensor> backward(const Tensor& d_logits);

    /// Logit grid spatial size for a given input size.
    int logits_size(int input_size) const;

    std::vector<Param*> params();
    void zero_grad();

    const DiscriminatorConfig& config() const { return cfg_; }

private:
    DiscriminatorConfig cfg_;
    std::vector<std::unique_ptr<Layer>> stack_;
};

}  // namespace earface::nn
