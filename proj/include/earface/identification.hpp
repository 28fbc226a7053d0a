#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "earface/metrics.hpp"

namespace earface {

struct SimilarityMatrix {
    Eigen::MatrixXd values;  // n_probe x n_gallery, cosine in [-1, 1]
    std::vector<std::string> probe_ids;
    std::vector<std::string> gallery_ids;
};

/// Cosine similarity of every probe/gallery feature pair. Throws when a
/// feature vector has zero norm, naming the offending item.
SimilarityMatrix similarity_matrix(const FeatureBatch& probe_feats,
                                   const FeatureBatch& gallery_feats,
                                   const std::vector<std::string>& probe_ids,
                                   const std::vector<std::string>& gallery_ids);

struct CmcCurve {
    std::vector<int> ranks;
    std::vector<double> accuracy_at_k;
    int n_valid_probes = 0;
    int excluded_probes = 0;  // probe identities absent from the gallery
};

/// Rank-k identification accuracy. A probe counts at rank k when any gallery
/// image of its identity lands in the top k under descending similarity with
/// ties broken by gallery index order. Probes whose identity is absent from
/// the gallery are excluded and counted.
CmcCurve cmc(const SimilarityMatrix& sim, std::vector<int> ks);

struct GalleryImage {
    Tensor face;  // [1, c, h, w] in [0, 1]
    std::string subject_id;
};

struct IdentifyResult {
    CmcCurve curve;
    SimilarityMatrix sim;
};

/// Reconstructs each probe face from its ear, embeds probes and gallery with
/// psi, and ranks.
IdentifyResult identify(const Reconstructor& reconstruct, nn::EmbeddingNetwork& psi,
                        const std::vector<PairedSample>& probe_pairs,
                        const std::vector<GalleryImage>& gallery, const std::vector<int>& ks);

std::string cmc_report_json(const IdentifyResult& result, const std::string& model_label,
                            const std::string& data_label, const std::string& split_name);
void write_similarity_csv(const SimilarityMatrix& sim, const std::filesystem::path& path);

}  // namespace earface
