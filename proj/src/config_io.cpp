#include "earface/config_io.hpp"

namespace earface {

namespace {

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

}  // namespace

Json to_json(const nn::GeneratorConfig& c) {
    Json j;
    j["depth"] = c.depth;
    j["base_channels"] = c.base_channels;
    j["in_channels"] = c.in_channels;
    j["out_channels"] = c.out_channels;
    j["max_channel_mult"] = c.max_channel_mult;
    j["dropout_rate"] = c.dropout_rate;
    j["dropout_levels"] = c.dropout_levels;
    j["dropout_at_eval"] = c.dropout_at_eval;
    return j;
}

nn::GeneratorConfig generator_config_from_json(const Json& j) {
    nn::GeneratorConfig c;
    c.depth = get_or(j, "depth", c.depth);
    c.base_channels = get_or(j, "base_channels", c.base_channels);
    c.in_channels = get_or(j, "in_channels", c.in_channels);
    c.out_channels = get_or(j, "out_channels", c.out_channels);
    c.max_channel_mult = get_or(j, "max_channel_mult", c.max_channel_mult);
    c.dropout_rate = get_or(j, "dropout_rate", c.dropout_rate);
    c.dropout_levels = get_or(j, "dropout_levels", c.dropout_levels);
    c.dropout_at_eval = get_or(j, "dropout_at_eval", c.dropout_at_eval);
    c.validate();
    return c;
}

Json to_json(const nn::DiscriminatorConfig& c) {
    Json j;
    j["cond_channels"] = c.cond_channels;
    j["image_channels"] = c.image_channels;
    j["base_channels"] = c.base_channels;
    j["n_layers"] = c.n_layers;
    j["max_channel_mult"] = c.max_channel_mult;
    return j;
}

nn::DiscriminatorConfig discriminator_config_from_json(const Json& j) {
    nn::DiscriminatorConfig c;
    c.cond_channels = get_or(j, "cond_channels", c.cond_channels);
    c.image_channels = get_or(j, "image_channels", c.image_channels);
    c.base_channels = get_or(j, "base_channels", c.base_channels);
    c.n_layers = get_or(j, "n_layers", c.n_layers);
    c.max_channel_mult = get_or(j, "max_channel_mult", c.max_channel_mult);
    c.validate();
    return c;
}

Json to_json(const nn::EmbedderConfig& c) {
    Json j;
    j["in_channels"] = c.in_channels;
    j["blocks"] = c.blocks;
    j["base_channels"] = c.base_channels;
    j["embedding_dim"] = c.embedding_dim;
    j["input_size"] = c.input_size;
    j["seed"] = c.seed;
    return j;
}

nn::EmbedderConfig embedder_config_from_json(const Json& j) {
    nn::EmbedderConfig c;
    c.in_channels = get_or(j, "in_channels", c.in_channels);
    c.blocks = get_or(j, "blocks", c.blocks);
    c.base_channels = get_or(j, "base_channels", c.base_channels);
    c.embedding_dim = get_or(j, "embedding_dim", c.embedding_dim);
    c.input_size = get_or(j, "input_size", c.input_size);
    c.seed = get_or(j, "seed", c.seed);
    c.validate();
    return c;
}

Json to_json(const LossWeights& w) {
    Json j;
    j["lambda"] = w.lambda;
    j["beta"] = w.beta;
    j["gamma"] = w.gamma;
    return j;
}

LossWeights loss_weights_from_json(const Json& j) {
    LossWeights w;
    w.lambda = get_or(j, "lambda", w.lambda);
    w.beta = get_or(j, "beta", w.beta);
    w.gamma = get_or(j, "gamma", w.gamma);
    w.validate();
    return w;
}

Json to_json(const TrainConfig& c) {
    Json j;
    j["epochs"] = c.epochs;
    j["max_steps"] = c.max_steps;
    j["batch_size"] = c.batch_size;
    j["learning_rate"] = c.learning_rate;
    j["beta1"] = c.beta1;
    j["beta2"] = c.beta2;
    j["weights"] = to_json(c.weights);
    j["seed"] = c.seed;
    j["checkpoint_every"] = c.checkpoint_every;
    return j;
}

TrainConfig train_config_from_json(const Json& j) {
    TrainConfig c;
    c.epochs = get_or(j, "epochs", c.epochs);
    c.max_steps = get_or(j, "max_steps", c.max_steps);
    c.batch_size = get_or(j, "batch_size", c.batch_size);
    c.learning_rate = get_or(j, "learning_rate", c.learning_rate);
    c.beta1 = get_or(j, "beta1", c.beta1);
    c.beta2 = get_or(j, "beta2", c.beta2);
    if (j.contains("weights")) c.weights = loss_weights_from_json(j.at("weights"));
    c.seed = get_or(j, "seed", c.seed);
    c.checkpoint_every = get_or(j, "checkpoint_every", c.checkpoint_every);
    c.validate();
    return c;
}

Json to_json(const SplitSpec& s) {
    Json j;
    j["sid_subject_count"] = s.sid_subject_count;
    j["sd2_subject_count"] = s.sd2_subject_count;
    j["train_fraction"] = s.train_fraction;
    j["seed"] = s.seed;
    return j;
}

SplitSpec split_spec_from_json(const Json& j) {
    SplitSpec s;
    s.sid_subject_count = get_or(j, "sid_subject_count", s.sid_subject_count);
    s.sd2_subject_count = get_or(j, "sd2_subject_count", s.sd2_subject_count);
    s.train_fraction = get_or(j, "train_fraction", s.train_fraction);
    s.seed = get_or(j, "seed", s.seed);
    return s;
}

Json to_json(const SynthConfig& s) {
    Json j;
    j["name"] = s.name;
    j["n_subjects"] = s.n_subjects;
    j["pairs_per_subject"] = s.pairs_per_subject;
    j["image_size"] = s.image_size;
    j["seed"] = s.seed;
    j["family"] = s.family;
    return j;
}

SynthConfig synth_config_from_json(const Json& j) {
    SynthConfig s;
    s.name = get_or<std::string>(j, "name", s.name);
    s.n_subjects = get_or(j, "n_subjects", s.n_subjects);
    s.pairs_per_subject = get_or(j, "pairs_per_subject", s.pairs_per_subject);
    s.image_size = get_or(j, "image_size", s.image_size);
    s.seed = get_or(j, "seed", s.seed);
    s.family = get_or(j, "family", s.family);
    return s;
}

Json to_json(const SsimConfig& s) {
    Json j;
    j["window_size"] = s.window_size;
    j["sigma"] = s.sigma;
    j["k1"] = s.k1;
    j["k2"] = s.k2;
    j["max_val"] = s.max_val;
    return j;
}

SsimConfig ssim_config_from_json(const Json& j) {
    SsimConfig s;
    s.window_size = get_or(j, "window_size", s.window_size);
    s.sigma = get_or(j, "sigma", s.sigma);
    s.k1 = get_or(j, "k1", s.k1);
    s.k2 = get_or(j, "k2", s.k2);
    s.max_val = get_or(j, "max_val", s.max_val);
    return s;
}

}  // namespace earface
