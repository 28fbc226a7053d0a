#pragma once

#include <memory>
#include <set>
#include <vector>

#include "earface/nn/layers.hpp"

namespace earface::nn {

enum class Mode { Train, Eval };

struct GeneratorConfig {
    int depth = 6;
    int base_channels = 64;
    int in_channels = 3;
    int out_channels = 3;
    int max_channel_mult = 8;
    double dropout_rate = 0.5;
    int dropout_levels = 3;       // innermost decoder blocks carrying dropout
    bool dropout_at_eval = true;  // the noise source stays on at inference by default
    std::set<int> disabled_skips; // ablation hook: encoder levels whose skip is zeroed

    void validate() const;
    int channels_at(int level) const;
};

/// Encoder/decoder image translator with skip connections. Decoder level j
/// consumes the channel-concatenation of encoder level j-1 features and the
/// upsampled path, so output spatial size always equals input spatial size.
class Generator {
public:
    explicit Generator(const GeneratorConfig& cfg);

    void init(uint64_t seed);

    /// dropout_rng may be null when no dropout is active in this mode.
    Tensor forward(const Tensor& ear_batch, Mode mode, Rng* dropout_rng = nullptr);

    /// Accumulates parameter gradients; returns gradient w.r.t. the input.
    Tensor backward(const Tensor& d_output);

    std::vector<Param*> params();
    void zero_grad();

    const GeneratorConfig& config() const { return cfg_; }

private:
    GeneratorConfig cfg_;
    std::vector<std::unique_ptr<Conv2d>> enc_conv_;
    std::vector<std::unique_ptr<InstanceNorm2d>> enc_norm_;     // levels 1..depth-2
    std::vector<std::unique_ptr<LeakyReLU>> enc_act_;           // before conv 1..depth-1
    std::vector<std::unique_ptr<ConvTranspose2d>> dec_conv_;
    std::vector<std::unique_ptr<InstanceNorm2d>> dec_norm_;     // levels 1..depth-1
    std::vector<std::unique_ptr<LeakyReLU>> dec_act_;           // ReLU (slope 0)
    std::vector<std::unique_ptr<Dropout>> dec_drop_;
    Tanh out_act_;

    bool has_enc_norm(int i) const { return i >= 1 && i <= cfg_.depth - 2; }
    bool has_dropout(int j) const;

    std::vector<Tensor> enc_feats_;  // skip sources from the last forward
};

}  // namespace earface::nn
