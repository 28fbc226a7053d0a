#include "earface/nn/generator.hpp"

#include <algorithm>
#include <cstring>

namespace earface::nn {

namespace {

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w())
        throw Error("concat_channels: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    Tensor out(a.n(), a.c() + b.c(), a.h(), a.w());
    const size_t ac = a.sample_size(), bc = b.sample_size();
    for (int n = 0; n < a.n(); ++n) {
        std::memcpy(out.sample(n), a.sample(n), ac * sizeof(double));
        std::memcpy(out.sample(n) + ac, b.sample(n), bc * sizeof(double));
    }
    return out;
}

std::pair<Tensor, Tensor> split_channels(const Tensor& z, int c_first) {
    Tensor a(z.n(), c_first, z.h(), z.w());
    Tensor b(z.n(), z.c() - c_first, z.h(), z.w());
    const size_t ac = a.sample_size(), bc = b.sample_size();
    for (int n = 0; n < z.n(); ++n) {
        std::memcpy(a.sample(n), z.sample(n), ac * sizeof(double));
        std::memcpy(b.sample(n), z.sample(n) + ac, bc * sizeof(double));
    }
    return {a, b};
}

}  // namespace

void GeneratorConfig::validate() const {
    if (depth < 1) throw Error("GeneratorConfig: depth must be >= 1");
    if (base_channels < 1) throw Error("GeneratorConfig: base_channels must be >= 1");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw Error("GeneratorConfig: dropout_rate must lie in [0, 1)");
    if (in_channels < 1 || out_channels < 1)
        throw Error("GeneratorConfig: channel counts must be positive");
}

int GeneratorConfig::channels_at(int level) const {
    int mult = 1;
    for (int i = 0; i < level && mult < max_channel_mult; ++i) mult *= 2;
    return base_channels * std::min(mult, max_channel_mult);
}

bool Generator::has_dropout(int j) const {
    return j > 0 && j >= cfg_.depth - cfg_.dropout_levels && cfg_.dropout_rate > 0.0;
}

Generator::Generator(const GeneratorConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    const int L = cfg_.depth;
    enc_conv_.resize(L);
    enc_norm_.resize(L);
    enc_act_.resize(L);
    dec_conv_.resize(L);
    dec_norm_.resize(L);
    dec_act_.resize(L);
    dec_drop_.resize(L);

    for (int i = 0; i < L; ++i) {
        const int cin = i == 0 ? cfg_.in_channels : cfg_.channels_at(i - 1);
        const int cout = cfg_.channels_at(i);
        enc_conv_[i] = std::make_unique<Conv2d>(cin, cout, 4, 2, 1, "enc" + std::to_string(i));
        if (has_enc_norm(i))
            enc_norm_[i] = std::make_unique<InstanceNorm2d>(cout, "enc" + std::to_string(i) + ".norm");
        if (i > 0) enc_act_[i] = std::make_unique<LeakyReLU>(0.2);
    }
    for (int j = L - 1; j >= 0; --j) {
        const int cin = j == L - 1 ? cfg_.channels_at(L - 1) : 2 * cfg_.channels_at(j);
        const int cout = j == 0 ? cfg_.out_channels : cfg_.channels_at(j - 1);
        dec_conv_[j] = std::make_unique<ConvTranspose2d>(cin, cout, 4, 2, 1, "dec" + std::to_string(j));
        if (j > 0)
            dec_norm_[j] = std::make_unique<InstanceNorm2d>(cout, "dec" + std::to_string(j) + ".norm");
        dec_act_[j] = std::make_unique<LeakyReLU>(0.0);  // plain ReLU
        if (has_dropout(j)) dec_drop_[j] = std::make_unique<Dropout>(cfg_.dropout_rate);
    }
}

void Generator::init(uint64_t seed) {
    Rng rng(seed);
    for (auto& c : enc_conv_) c->init(rng, 0.02);
    for (auto& c : dec_conv_) c->init(rng, 0.02);
}

Tensor Generator::forward(const Tensor& x, Mode mode, Rng* dropout_rng) {
    const int L = cfg_.depth;
    if (x.h() % (1 << L) != 0 || x.w() % (1 << L) != 0)
        throw Error("Generator: spatial size " + x.shape_str() + " not divisible by 2^" +
                    std::to_string(L));
    const bool drop_active = mode == Mode::Train || cfg_.dropout_at_eval;

    enc_feats_.assign(L, Tensor());
    Tensor a = x;
    for (int i = 0; i < L; ++i) {
        if (i > 0) a = enc_act_[i]->forward(a);
        a = enc_conv_[i]->forward(a);
        if (has_enc_norm(i)) a = enc_norm_[i]->forward(a);
        enc_feats_[i] = a;
    }

    Tensor y = enc_feats_[L - 1];
    for (int j = L - 1; j >= 0; --j) {
        y = dec_act_[j]->forward(y);
        y = dec_conv_[j]->forward(y);
        if (j > 0) {
            y = dec_norm_[j]->forward(y);
            if (dec_drop_[j]) {
                dec_drop_[j]->configure(dropout_rng, drop_active);
                y = dec_drop_[j]->forward(y);
            }
            Tensor skip = enc_feats_[j - 1];
            if (cfg_.disabled_skips.count(j - 1)) skip.fill(0.0);
            y = concat_channels(skip, y);
        }
    }
    return out_act_.forward(y);
}

Tensor Generator::backward(const Tensor& d_output) {
    const int L = cfg_.depth;
    std::vector<Tensor> skip_grads(L);

    Tensor g = out_act_.backward(d_output);
    for (int j = 0; j < L; ++j) {
        if (j > 0) {
            auto [ds, dy] = split_channels(g, cfg_.channels_at(j - 1));
            skip_grads[j - 1] = std::move(ds);
            g = std::move(dy);
            if (dec_drop_[j]) g = dec_drop_[j]->backward(g);
            g = dec_norm_[j]->backward(g);
        }
        g = dec_conv_[j]->backward(g);
        g = dec_act_[j]->backward(g);
    }

    for (int i = L - 1; i >= 0; --i) {
        if (i < L - 1 && !cfg_.disabled_skips.count(i)) {
            const Tensor& sg = skip_grads[i];
            for (size_t k = 0; k < g.size(); ++k) g[k] += sg[k];
        }
        if (has_enc_norm(i)) g = enc_norm_[i]->backward(g);
        g = enc_conv_[i]->backward(g);
        if (i > 0) g = enc_act_[i]->backward(g);
    }
    return g;
}

std::vector<Param*> Generator::params() {
    std::vector<Param*> out;
    for (auto& c : enc_conv_) c->collect_params(out);
    for (auto& n : enc_norm_)
        if (n) n->collect_params(out);
    for (auto& c : dec_conv_) c->collect_params(out);
    for (auto& n : dec_norm_)
        if (n) n->collect_params(out);
    return out;
}

void Generator::zero_grad() {
    for (Param* p : params()) p->grad.fill(0.0);
}

}  // namespace earface::nn
