#include "earface/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "earface/config_io.hpp"

namespace earface {

namespace fs = std::filesystem;

TrainState::TrainState(const nn::GeneratorConfig& gcfg, const nn::DiscriminatorConfig& dcfg,
                       const TrainConfig& tcfg)
    : generator(gcfg),
      discriminator(dcfg),
      rng(Rng::derive(tcfg.seed, "train-stream")),
      gcfg_(gcfg),
      dcfg_(dcfg),
      tcfg_(tcfg) {
    generator.init(Rng::derive(tcfg.seed, "generator-init"));
    discriminator.init(Rng::derive(tcfg.seed, "discriminator-init"));
    opt_g = std::make_unique<Adam>(generator.params(), tcfg.learning_rate, tcfg.beta1, tcfg.beta2);
    opt_d = std::make_unique<Adam>(discriminator.params(), tcfg.learning_rate, tcfg.beta1,
                                   tcfg.beta2);
}

namespace {

void check_finite(double v, const char* component, int64_t step) {
    if (!std::isfinite(v))
        throw Error("train_step: non-finite " + std::string(component) + " loss at step " +
                    std::to_string(step + 1));
}

}  // namespace

LossBreakdown train_step(TrainState& state, const Batch& batch, nn::EmbeddingNetwork& psi) {
    if (batch.ears.n() == 0) throw Error("train_step: empty batch");
    if (batch.ears.n() != batch.faces.n()) throw Error("train_step: ear/face batch size mismatch");
    const int b = batch.ears.n();
    const LossWeights& w = state.train_config().weights;

    // Fake faces; the generator cache from this pass backs the G update below.
    Tensor fake = state.generator.forward(batch.ears, nn::Mode::Train, &state.rng);

    // --- Discriminator update on (real, fake-detached); one stacked pass.
    {
        Tensor ears2 = Tensor::stack_samples(batch.ears, batch.ears);
        Tensor faces2 = Tensor::stack_samples(batch.faces, fake);
        Tensor logits2 = state.discriminator.forward(ears2, faces2);
        Tensor real_logits = logits2.slice_samples(0, b);
        Tensor fake_logits = logits2.slice_samples(b, 2 * b);
        const double loss_d = adversarial_loss_d(real_logits, fake_logits);
        check_finite(loss_d, "adversarial_d", state.step);

        auto [dreal_logits, dfake_logits] = adversarial_loss_d_grads(real_logits, fake_logits);
        state.discriminator.zero_grad();
        state.discriminator.backward(Tensor::stack_samples(dreal_logits, dfake_logits));
        state.opt_d->step();

        // --- Generator update against the updated discriminator.
        Tensor logits_g = state.discriminator.forward(batch.ears, fake);
        const double adv_g = adversarial_loss_g(logits_g);
        check_finite(adv_g, "adversarial_g", state.step);

        auto [dcond, dface_adv] = state.discriminator.backward(adversarial_loss_g_grad(logits_g));
        state.discriminator.zero_grad();  // this pass serves the generator only

        const double pix = pixel_loss(fake, batch.faces);
        check_finite(pix, "pixel", state.step);
        Tensor dpix = pixel_loss_grad(fake, batch.faces);

        // Stacked psi pass: rows [0, b) are fake, [b, 2b) real.
        FeatureBatch feats2 = psi.embed(Tensor::stack_samples(fake, batch.faces));
        FeatureBatch fake_feats{feats2.values.slice_samples(0, b), feats2.cj, feats2.hj, feats2.wj};
        FeatureBatch real_feats{feats2.values.slice_samples(b, 2 * b), feats2.cj, feats2.hj,
                                feats2.wj};
        const double feat = feature_loss(fake_feats, real_feats);
        check_finite(feat, "feature", state.step);
        const double style = style_loss(fake_feats, real_feats);
        check_finite(style, "style", state.step);

        Tensor dfeat = feature_loss_grad(fake_feats, real_feats);
        Tensor dstyle = style_loss_grad(fake_feats, real_feats);
        FeatureBatch dpsi{Tensor(2 * b, feats2.dim(), 1, 1), feats2.cj, feats2.hj, feats2.wj};
        for (int i = 0; i < b; ++i)
            for (int k = 0; k < feats2.dim(); ++k)
                dpsi.row(i)[k] = w.beta * dfeat.sample(i)[k] + w.gamma * dstyle.sample(i)[k];
        Tensor dpsi_images = psi.backward(dpsi);

        Tensor dfake = dface_adv;
        for (size_t i = 0; i < dfake.size(); ++i) dfake[i] += w.lambda * dpix[i];
        const size_t per_img = fake.sample_size();
        for (int i = 0; i < b; ++i) {
            const double* dsrc = dpsi_images.sample(i);
            double* ddst = dfake.sample(i);
            for (size_t k = 0; k < per_img; ++k) ddst[k] += dsrc[k];
        }

        state.generator.zero_grad();
        state.generator.backward(dfake);
        state.opt_g->step();

        LossBreakdown out = composite_generator_loss(adv_g, pix, feat, style, w);
        out.adversarial_d = loss_d;
        state.step += 1;
        return out;
    }
}

// ---------------------------------------------------------------------------
// State serialization

namespace {

void add_params(TensorArchive& a, const std::string& prefix, std::vector<nn::Param*> params) {
    for (nn::Param* p : params) a.add(prefix + p->name, p->value);
}

void add_moments(TensorArchive& a, const std::string& prefix, Adam& opt) {
    auto& m = opt.moments_m();
    auto& v = opt.moments_v();
    for (size_t i = 0; i < m.size(); ++i) {
        a.add(prefix + "m." + std::to_string(i), m[i]);
        a.add(prefix + "v." + std::to_string(i), v[i]);
    }
}

void load_params(const TensorArchive& a, const std::string& prefix,
                 std::vector<nn::Param*> params) {
    for (nn::Param* p : params) p->value = a.get_like(prefix + p->name, p->value);
}

void load_moments(const TensorArchive& a, const std::string& prefix, Adam& opt, int64_t t) {
    auto& m = opt.moments_m();
    auto& v = opt.moments_v();
    for (size_t i = 0; i < m.size(); ++i) {
        m[i] = a.get_like(prefix + "m." + std::to_string(i), m[i]);
        v[i] = a.get_like(prefix + "v." + std::to_string(i), v[i]);
    }
    opt.set_t(t);
}

}  // namespace

void save_train_state(const TrainState& state, const fs::path& path) {
    TensorArchive a;
    a.kind = "train_state";
    a.config["generator"] = to_json(state.generator_config());
    a.config["discriminator"] = to_json(state.discriminator_config());
    a.config["train"] = to_json(state.train_config());
    a.extra["step"] = state.step;
    a.extra["rng"] = state.rng.serialize();
    auto& self = const_cast<TrainState&>(state);
    add_params(a, "g.", self.generator.params());
    add_params(a, "d.", self.discriminator.params());
    add_moments(a, "optg.", *self.opt_g);
    add_moments(a, "optd.", *self.opt_d);
    a.save(path);
}

TrainState load_train_state(const fs::path& path) {
    TensorArchive a = TensorArchive::load(path);
    if (a.kind != "train_state")
        throw Error("load_train_state: '" + path.string() + "' holds kind '" + a.kind + "'");
    const auto gcfg = generator_config_from_json(a.config.at("generator"));
    const auto dcfg = discriminator_config_from_json(a.config.at("discriminator"));
    const auto tcfg = train_config_from_json(a.config.at("train"));
    TrainState state(gcfg, dcfg, tcfg);
    state.step = a.extra.at("step").get<int64_t>();
    state.rng = Rng::deserialize(a.extra.at("rng").get<std::string>());
    load_params(a, "g.", state.generator.params());
    load_params(a, "d.", state.discriminator.params());
    load_moments(a, "optg.", *state.opt_g, state.step);
    load_moments(a, "optd.", *state.opt_d, state.step);
    return state;
}

nn::Generator load_generator_checkpoint(const fs::path& path, nn::GeneratorConfig* cfg_out) {
    TensorArchive a = TensorArchive::load(path);
    if (a.kind != "train_state")
        throw Error("load_generator_checkpoint: '" + path.string() + "' holds kind '" + a.kind +
                    "'");
    const auto gcfg = generator_config_from_json(a.config.at("generator"));
    nn::Generator g(gcfg);
    for (nn::Param* p : g.params()) p->value = a.get_like("g." + p->name, p->value);
    if (cfg_out) *cfg_out = gcfg;
    return g;
}

// ---------------------------------------------------------------------------
// Training loop

namespace {

std::string breakdown_line(int64_t step, const LossBreakdown& b) {
    char buf[360];
    std::snprintf(buf, sizeof(buf),
                  "{\"step\":%lld,\"adversarial_d\":%.17g,\"adversarial_g\":%.17g,"
                  "\"pixel\":%.17g,\"feature\":%.17g,\"style\":%.17g,\"total_g\":%.17g}",
                  static_cast<long long>(step), b.adversarial_d, b.adversarial_g, b.pixel,
                  b.feature, b.style, b.total_g);
    return buf;
}

Batch make_batch(const std::vector<PairedSample>& pairs, const std::vector<size_t>& order,
                 size_t begin, size_t end) {
    const Tensor& probe = pairs[order[begin]].ear.data;
    Batch batch{Tensor(static_cast<int>(end - begin), probe.c(), probe.h(), probe.w()),
                Tensor(static_cast<int>(end - begin), probe.c(), probe.h(), probe.w())};
    for (size_t i = begin; i < end; ++i) {
        const PairedSample& s = pairs[order[i]];
        std::memcpy(batch.ears.sample(static_cast<int>(i - begin)), s.ear.data.data(),
                    s.ear.data.size() * sizeof(double));
        std::memcpy(batch.faces.sample(static_cast<int>(i - begin)), s.face.data.data(),
                    s.face.data.size() * sizeof(double));
    }
    return batch;
}

std::string checkpoint_name(int64_t step) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "checkpoint_%06lld.efa", static_cast<long long>(step));
    return buf;
}

}  // namespace

TrainResult train(const TrainRun& run, const DatasetManifest& manifest,
                  const SplitAssignment& splits, nn::EmbeddingNetwork& psi,
                  const fs::path& out_dir) {
    run.train.validate();
    if (run.ingest.range != ValueRange::Symmetric)
        throw Error("train: ingestion range must be the network range");
    if (splits.train.empty()) throw Error("train: empty train split");
    fs::create_directories(out_dir);

    const std::vector<PairedSample> pairs =
        load_split_pairs(manifest, splits, "train", run.ingest);
    const size_t n = pairs.size();
    const size_t bs = static_cast<size_t>(run.train.batch_size);
    const int64_t steps_per_epoch = static_cast<int64_t>((n + bs - 1) / bs);
    int64_t total_steps = steps_per_epoch * run.train.epochs;
    if (run.train.max_steps > 0) total_steps = std::min<int64_t>(total_steps, run.train.max_steps);

    std::unique_ptr<TrainState> state;
    if (run.resume) {
        state = std::make_unique<TrainState>(load_train_state(*run.resume));
        if (state->step >= total_steps)
            throw Error("train: resume checkpoint is already at or past the final step");
    } else {
        state = std::make_unique<TrainState>(run.generator, run.discriminator, run.train);
    }

    const fs::path log_path = out_dir / "training_log.jsonl";
    std::ofstream log(log_path, run.resume ? std::ios::app : std::ios::trunc);
    if (!log) throw Error("train: cannot open log '" + log_path.string() + "'");

    const uint64_t phash_before = psi.param_hash();
    TrainResult result;
    result.log_path = log_path;

    while (state->step < total_steps) {
        const int64_t epoch = state->step / steps_per_epoch;
        const int64_t batch_index = state->step % steps_per_epoch;

        // Order is a pure function of (seed, epoch) so resume can rebuild it.
        std::vector<size_t> order(n);
        for (size_t i = 0; i < n; ++i) order[i] = i;
        Rng epoch_rng(Rng::derive(run.train.seed, "epoch-order", static_cast<uint64_t>(epoch)));
        epoch_rng.shuffle(order);

        for (int64_t bi = batch_index; bi < steps_per_epoch && state->step < total_steps; ++bi) {
            const size_t begin = static_cast<size_t>(bi) * bs;
            const size_t end = std::min(begin + bs, n);
            const Batch batch = make_batch(pairs, order, begin, end);
            const LossBreakdown breakdown = train_step(*state, batch, psi);
            log << breakdown_line(state->step, breakdown) << '\n';
            if (state->step % run.train.checkpoint_every == 0 && state->step < total_steps) {
                const fs::path cp = out_dir / checkpoint_name(state->step);
                save_train_state(*state, cp);
                result.checkpoints.push_back(cp);
            }
        }
    }
    log.flush();
    if (!log) throw Error("train: log write failed");

    if (psi.param_hash() != phash_before)
        throw Error("train: embedding network parameters changed during training");

    result.final_checkpoint = out_dir / "checkpoint_final.efa";
    save_train_state(*state, result.final_checkpoint);
    result.checkpoints.push_back(result.final_checkpoint);
    result.steps = state->step;
    return result;
}

}  // namespace earface
