#include "earface/nn/embedder.hpp"

#include <algorithm>
#include <cmath>

namespace earface::nn {

void EmbedderConfig::validate() const {
    if (embedding_dim < 1) throw Error("EmbedderConfig: embedding_dim must be positive");
    if (blocks < 1) throw Error("EmbedderConfig: blocks must be >= 1");
    if (base_channels < 1) throw Error("EmbedderConfig: base_channels must be >= 1");
}

EmbeddingNetwork::EmbeddingNetwork(const EmbedderConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(cfg_.seed);
    int prev = cfg_.in_channels;
    for (int i = 0; i < cfg_.blocks; ++i) {
        int cur = i == cfg_.blocks - 1
                      ? cfg_.embedding_dim
                      : std::min(cfg_.base_channels << i, cfg_.embedding_dim);
        auto conv = std::make_unique<Conv2d>(prev, cur, 3, 2, 1, "psi" + std::to_string(i));
        conv->init(rng, 1.0 / std::sqrt(static_cast<double>(prev) * 9), 0.05);
        conv->trainable = false;
        stack_.push_back(std::move(conv));
        auto act = std::make_unique<Tanh>();
        act->trainable = false;
        stack_.push_back(std::move(act));
        prev = cur;
    }
}

FeatureBatch EmbeddingNetwork::embed(const Tensor& images) {
    if (images.c() != cfg_.in_channels)
        throw Error("EmbeddingNetwork: expected " + std::to_string(cfg_.in_channels) +
                    " channels, got " + std::to_string(images.c()));
    if (cfg_.input_size > 0 && (images.h() != cfg_.input_size || images.w() != cfg_.input_size))
        throw Error("EmbeddingNetwork: expected " + std::to_string(cfg_.input_size) + "x" +
                    std::to_string(cfg_.input_size) + " input, got " + images.shape_str());
    Tensor z = images;
    for (auto& l : stack_) z = l->forward(z);
    FeatureBatch fb;
    fb.values = pool_.forward(z);
    fb.cj = cfg_.embedding_dim;
    fb.hj = 1;
    fb.wj = 1;
    return fb;
}

Tensor EmbeddingNetwork::backward(const FeatureBatch& d_features) {
    Tensor g = pool_.backward(d_features.values);
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) g = (*it)->backward(g);
    return g;
}

std::vector<Param*> EmbeddingNetwork::params() {
    std::vector<Param*> out;
    for (auto& l : stack_) l->collect_params(out);
    return out;
}

void EmbeddingNetwork::load_params(const std::vector<Tensor>& in_order) {
    auto ps = params();
    if (in_order.size() != ps.size())
        throw Error("EmbeddingNetwork::load_params: expected " + std::to_string(ps.size()) +
                    " tensors, got " + std::to_string(in_order.size()));
    for (size_t i = 0; i < ps.size(); ++i) {
        if (!ps[i]->value.same_shape(in_order[i]))
            throw Error("EmbeddingNetwork::load_params: shape mismatch for " + ps[i]->name);
        ps[i]->value = in_order[i];
    }
}

uint64_t EmbeddingNetwork::param_hash() const {
    std::vector<const Tensor*> ts;
    for (const auto& l : stack_) {
        std::vector<Param*> ps;
        const_cast<Layer&>(*l).collect_params(ps);
        for (Param* p : ps) ts.push_back(&p->value);
    }
    return hash_tensors(ts);
}

}  // namespace earface::nn
