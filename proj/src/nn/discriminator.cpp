#include "earface/nn/discriminator.hpp"

#include <algorithm>
#include <cstring>

namespace earface::nn {

void DiscriminatorConfig::validate() const {
    if (n_layers < 1) throw Error("DiscriminatorConfig: n_layers must be >= 1");
    if (base_channels < 1) throw Error("DiscriminatorConfig: base_channels must be >= 1");
    if (cond_channels < 1 || image_channels < 1)
        throw Error("DiscriminatorConfig: channel counts must be positive");
}

Discriminator::Discriminator(const DiscriminatorConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    const int in = cfg_.cond_channels + cfg_.image_channels;
    auto ch = [&](int stage) {
        int mult = 1;
        for (int i = 0; i < stage && mult < cfg_.max_channel_mult; ++i) mult *= 2;
        return cfg_.base_channels * std::min(mult, cfg_.max_channel_mult);
    };

    int prev = in;
    for (int i = 0; i < cfg_.n_layers; ++i) {
        const int cur = ch(i);
        stack_.push_back(std::make_unique<Conv2d>(prev, cur, 4, 2, 1, "disc" + std::to_string(i)));
        if (i > 0) stack_.push_back(std::make_unique<InstanceNorm2d>(cur, "disc" + std::to_string(i) + ".norm"));
        stack_.push_back(std::make_unique<LeakyReLU>(0.2));
        prev = cur;
    }
    const int cur = ch(cfg_.n_layers);
    stack_.push_back(std::make_unique<Conv2d>(prev, cur, 4, 1, 1, "disc_pre"));
    stack_.push_back(std::make_unique<InstanceNorm2d>(cur, "disc_pre.norm"));
    stack_.push_back(std::make_unique<LeakyReLU>(0.2));
    stack_.push_back(std::make_unique<Conv2d>(cur, 1, 4, 1, 1, "disc_out"));
}

void Discriminator::init(uint64_t seed) {
    Rng rng(seed);
    for (auto& l : stack_)
        if (auto* c = dynamic_cast<Conv2d*>(l.get())) c->init(rng, 0.02);
}

int Discriminator::logits_size(int s) const {
    for (int i = 0; i < cfg_.n_layers; ++i) s = Conv2d::out_size(s, 4, 2, 1);
    s = Conv2d::out_size(s, 4, 1, 1);
    s = Conv2d::out_size(s, 4, 1, 1);
    return s;
}

Tensor Discriminator::forward(const Tensor& cond, const Tensor& image) {
    if (cond.n() != image.n())
        throw Error("Discriminator: batch size mismatch " + std::to_string(cond.n()) + " vs " +
                    std::to_string(image.n()));
    if (cond.h() != image.h() || cond.w() != image.w())
        throw Error("Discriminator: spatially misaligned inputs " + cond.shape_str() + " vs " +
                    image.shape_str());
    Tensor z(cond.n(), cond.c() + image.c(), cond.h(), cond.w());
    const size_t cc = cond.sample_size(), ic = image.sample_size();
    for (int n = 0; n < cond.n(); ++n) {
        std::memcpy(z.sample(n), cond.sample(n), cc * sizeof(double));
        std::memcpy(z.sample(n) + cc, image.sample(n), ic * sizeof(double));
    }
    for (auto& l : stack_) z = l->forward(z);
    return z;
}

std::pair<Tensor, Tensor> Discriminator::backward(const Tensor& d_logits) {
    Tensor g = d_logits;
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) g = (*it)->backward(g);
    Tensor dcond(g.n(), cfg_.cond_channels, g.h(), g.w());
    Tensor dimage(g.n(), cfg_.image_channels, g.h(), g.w());
    const size_t cc = dcond.sample_size(), ic = dimage.sample_size();
    for (int n = 0; n < g.n(); ++n) {
        std::memcpy(dcond.sample(n), g.sample(n), cc * sizeof(double));
        std::memcpy(dimage.sample(n), g.sample(n) + cc, ic * sizeof(double));
    }
    return {dcond, dimage};
}

std::vector<Param*> Discriminator::params() {
    std::vector<Param*> out;
    for (auto& l : stack_) l->collect_params(out);
    return out;
}

void Discriminator::zero_grad() {
    for (Param* p : params()) p->grad.fill(0.0);
}

}  // namespace earface::nn
