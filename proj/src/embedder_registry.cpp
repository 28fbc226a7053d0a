#include "earface/embedder_registry.hpp"

#include "earface/checkpoint.hpp"
#include "earface/config_io.hpp"

namespace earface {

void EmbedderSpec::validate() const {
    if (kind != "builtin-seeded" && kind != "external")
        throw Error("EmbedderSpec: unknown kind '" + kind + "'");
    builtin.validate();
    if (kind == "external" && weight_path.empty())
        throw Error("EmbedderSpec: external embedder requires a weight_path");
}

nn::EmbeddingNetwork load_embedder(const EmbedderSpec& spec) {
    spec.validate();
    if (spec.kind == "builtin-seeded") return nn::EmbeddingNetwork(spec.builtin);

    TensorArchive a = TensorArchive::load(spec.weight_path);
    if (a.kind != "embedder")
        throw Error("load_embedder: '" + spec.weight_path.string() + "' holds kind '" + a.kind +
                    "', expected 'embedder'");
    const nn::EmbedderConfig file_cfg = embedder_config_from_json(a.config);
    if (file_cfg.embedding_dim != spec.builtin.embedding_dim)
        throw Error("load_embedder: weight file embedding_dim " +
                    std::to_string(file_cfg.embedding_dim) + " does not match spec " +
                    std::to_string(spec.builtin.embedding_dim));
    nn::EmbeddingNetwork net(file_cfg);
    std::vector<Tensor> tensors;
    for (nn::Param* p : net.params()) tensors.push_back(a.get_like(p->name, p->value));
    net.load_params(tensors);
    return net;
}

void save_embedder_weights(nn::EmbeddingNetwork& net, const std::filesystem::path& path) {
    TensorArchive a;
    a.kind = "embedder";
    a.config = to_json(net.config());
    for (nn::Param* p : net.params()) a.add(p->name, p->value);
    a.save(path);
}

}  // namespace earface
