#include "earface/identification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

namespace earface {

SimilarityMatrix similarity_matrix(const FeatureBatch& probe_feats,
                                   const FeatureBatch& gallery_feats,
                                   const std::vector<std::string>& probe_ids,
                                   const std::vector<std::string>& gallery_ids) {
    if (probe_feats.dim() != gallery_feats.dim())
        throw Error("similarity_matrix: feature dimension mismatch");
    if (static_cast<size_t>(probe_feats.count()) != probe_ids.size() ||
        static_cast<size_t>(gallery_feats.count()) != gallery_ids.size())
        throw Error("similarity_matrix: label list length does not match feature count");
    if (probe_feats.count() == 0 || gallery_feats.count() == 0)
        throw Error("similarity_matrix: empty probe or gallery");

    const int d = probe_feats.dim();
    auto norms = [&](const FeatureBatch& fb, const std::vector<std::string>& ids,
                     const char* side) {
        std::vector<double> out(fb.count());
        for (int i = 0; i < fb.count(); ++i) {
            double s = 0;
            const double* v = fb.row(i);
            for (int k = 0; k < d; ++k) s += v[k] * v[k];
            if (s == 0.0)
                throw Error("similarity_matrix: zero-norm feature for " + std::string(side) + " " +
                            std::to_string(i) + " (id '" + ids[i] + "')");
            out[i] = std::sqrt(s);
        }
        return out;
    };
    const auto pn = norms(probe_feats, probe_ids, "probe");
    const auto gn = norms(gallery_feats, gallery_ids, "gallery");

    SimilarityMatrix sim;
    sim.probe_ids = probe_ids;
    sim.gallery_ids = gallery_ids;
    sim.values.resize(probe_feats.count(), gallery_feats.count());
    for (int i = 0; i < probe_feats.count(); ++i) {
        const double* p = probe_feats.row(i);
        for (int j = 0; j < gallery_feats.count(); ++j) {
            const double* g = gallery_feats.row(j);
            double dot = 0;
            for (int k = 0; k < d; ++k) dot += p[k] * g[k];
            sim.values(i, j) = std::clamp(dot / (pn[i] * gn[j]), -1.0, 1.0);
        }
    }
    return sim;
}

CmcCurve cmc(const SimilarityMatrix& sim, std::vector<int> ks) {
    const int np = static_cast<int>(sim.values.rows());
    const int ng = static_cast<int>(sim.values.cols());
    if (np == 0 || ng == 0) throw Error("cmc: empty similarity matrix");
    if (ks.empty()) throw Error("cmc: no ranks requested");
    for (int k : ks)
        if (k < 1) throw Error("cmc: ranks must be >= 1");
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

    std::set<std::string> gallery_identities(sim.gallery_ids.begin(), sim.gallery_ids.end());

    CmcCurve out;
    out.ranks = ks;
    out.accuracy_at_k.assign(ks.size(), 0.0);
    std::vector<int> hits(ks.size(), 0);

    for (int i = 0; i < np; ++i) {
        const std::string& identity = sim.probe_ids[i];
        if (!gallery_identities.count(identity)) {
            ++out.excluded_probes;
            continue;
        }
        ++out.n_valid_probes;
        // Rank of gallery item j under stable descending order: one plus the
        // number of strictly greater entries plus earlier-indexed ties.
        int best_rank = ng + 1;
        for (int j = 0; j < ng; ++j) {
            if (sim.gallery_ids[j] != identity) continue;
            const double s = sim.values(i, j);
            int rank = 1;
            for (int j2 = 0; j2 < ng; ++j2) {
                if (j2 == j) continue;
                if (sim.values(i, j2) > s || (sim.values(i, j2) == s && j2 < j)) ++rank;
            }
            best_rank = std::min(best_rank, rank);
        }
        for (size_t t = 0; t < ks.size(); ++t)
            if (best_rank <= ks[t]) ++hits[t];
    }
    if (out.n_valid_probes == 0) throw Error("cmc: no probe identity occurs in the gallery");
    for (size_t t = 0; t < ks.size(); ++t)
        out.accuracy_at_k[t] = static_cast<double>(hits[t]) / out.n_valid_probes;
    return out;
}

IdentifyResult identify(const Reconstructor& reconstruct, nn::EmbeddingNetwork& psi,
                        const std::vector<PairedSample>& probe_pairs,
                        const std::vector<GalleryImage>& gallery, const std::vector<int>& ks) {
    if (probe_pairs.empty() || gallery.empty())
        throw Error("identify: probe and gallery sets must be nonempty");

    FeatureBatch probe_feats;
    std::vector<std::string> probe_ids;
    for (size_t i = 0; i < probe_pairs.size(); ++i) {
        const Tensor recon = reconstruct(probe_pairs[i]);
        const Tensor net = convert_range(recon, ValueRange::Unit, ValueRange::Symmetric);
        const FeatureBatch fb = psi.embed(net);
        if (i == 0) {
            probe_feats.values = Tensor(static_cast<int>(probe_pairs.size()), fb.dim(), 1, 1);
            probe_feats.cj = fb.cj;
            probe_feats.hj = fb.hj;
            probe_feats.wj = fb.wj;
        }
        std::copy(fb.row(0), fb.row(0) + fb.dim(), probe_feats.row(static_cast<int>(i)));
        probe_ids.push_back(probe_pairs[i].subject_id);
    }

    FeatureBatch gallery_feats;
    std::vector<std::string> gallery_ids;
    for (size_t i = 0; i < gallery.size(); ++i) {
        const Tensor net = convert_range(gallery[i].face, ValueRange::Unit, ValueRange::Symmetric);
        const FeatureBatch fb = psi.embed(net);
        if (i == 0) {
            gallery_feats.values = Tensor(static_cast<int>(gallery.size()), fb.dim(), 1, 1);
            gallery_feats.cj = fb.cj;
            gallery_feats.hj = fb.hj;
            gallery_feats.wj = fb.wj;
        }
        std::copy(fb.row(0), fb.row(0) + fb.dim(), gallery_feats.row(static_cast<int>(i)));
        gallery_ids.push_back(gallery[i].subject_id);
    }

    IdentifyResult out;
    out.sim = similarity_matrix(probe_feats, gallery_feats, probe_ids, gallery_ids);
    out.curve = cmc(out.sim, ks);
    return out;
}

std::string cmc_report_json(const IdentifyResult& result, const std::string& model_label,
                            const std::string& data_label, const std::string& split_name) {
    nlohmann::ordered_json j;
    j["model"] = model_label;
    j["data"] = data_label;
    j["split"] = split_name;
    j["ranks"] = result.curve.ranks;
    j["accuracies"] = result.curve.accuracy_at_k;
    j["n_probe"] = result.sim.probe_ids.size();
    j["n_gallery"] = result.sim.gallery_ids.size();
    j["n_valid_probes"] = result.curve.n_valid_probes;
    j["excluded_probes"] = result.curve.excluded_probes;
    return j.dump(2) + "\n";
}

void write_similarity_csv(const SimilarityMatrix& sim, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw Error("write_similarity_csv: cannot write '" + path.string() + "'");
    os << "probe_id";
    for (const auto& g : sim.gallery_ids) os << ',' << g;
    os << '\n';
    char buf[40];
    for (Eigen::Index i = 0; i < sim.values.rows(); ++i) {
        os << sim.probe_ids[static_cast<size_t>(i)];
        for (Eigen::Index j = 0; j < sim.values.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", sim.values(i, j));
            os << ',' << buf;
        }
        os << '\n';
    }
}

}  // namespace earface
