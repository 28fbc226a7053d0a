#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "earface/image.hpp"

namespace earface {

struct ManifestEntry {
    std::string pair_id;
    std::string subject_id;
    std::string ear_path;   // relative to the manifest location
    std::string face_path;  // relative to the manifest location
};

struct DatasetManifest {
    std::string dataset_name;
    std::filesystem::path root;  // directory paths are resolved against
    std::vector<ManifestEntry> entries;

    /// Throws on empty subject ids, duplicate pair ids or duplicate
    /// (ear, face) path pairs.
    void validate() const;
};

/// CSV with header pair_id,subject_id,ear_path,face_path. Parse errors name
/// the offending row.
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

struct SplitSpec {
    int sid_subject_count = 10;
    int sd2_subject_count = 10;
    double train_fraction = 0.8;
    uint64_t seed = 0;
};

/// train / sd_test_1 / sid_test are pairwise disjoint; sd_test_2 is a subject
/// subsample of sd_test_1 (a reporting view, not a disjoint fourth set).
struct SplitAssignment {
    std::vector<std::string> train;
    std::vector<std::string> sd_test_1;
    std::vector<std::string> sd_test_2;
    std::vector<std::string> sid_test;
    SplitSpec spec;

    const std::vector<std::string>& split(const std::string& name) const;
    void validate(const DatasetManifest& manifest) const;
};

/// Deterministic Table-1-style protocol: subject-independent subjects are
/// drawn first from the seed; each remaining subject contributes
/// floor(train_fraction * n) pairs to train (at least one, so every
/// sd_test_1 subject also trains) and the rest to sd_test_1; single-pair
/// subjects go to train only.
SplitAssignment build_splits(const DatasetManifest& manifest, const SplitSpec& spec);

void save_splits(const SplitAssignment& splits, const std::filesystem::path& path);
SplitAssignment load_splits(const std::filesystem::path& path);

struct PairedSample {
    ImageTensor ear;
    ImageTensor face;
    std::string subject_id;
    std::string pair_id;
};

struct IngestConfig {
    int target_size = 64;
    ValueRange range = ValueRange::Unit;
};

PairedSample load_pair(const DatasetManifest& manifest, const ManifestEntry& entry,
                       const IngestConfig& cfg);

std::vector<PairedSample> load_split_pairs(const DatasetManifest& manifest,
                                           const SplitAssignment& splits,
                                           const std::string& split_name,
                                           const IngestConfig& cfg);

struct SynthConfig {
    std::string name = "synthetic";
    int n_subjects = 20;
    int pairs_per_subject = 5;
    int image_size = 64;
    uint64_t seed = 0;
    int family = 0;  // procedural rendering family (0 or 1)
};

/// Renders paired images of procedurally generated identities and writes them
/// plus a manifest under out_dir. Each subject is a latent vector; ear and
/// face images are two fixed renderings of that latent with small per-pair
/// translation/brightness jitter, so identity is recoverable from either
/// modality. Bit-identical output for equal configs.
DatasetManifest generate_synthetic(const SynthConfig& cfg, const std::filesystem::path& out_dir);

/// The two procedural renderings, exposed for tests.
Tensor render_synthetic_face(const std::vector<double>& latent, int family, int size,
                             double dx, double dy, double brightness);
Tensor render_synthetic_ear(const std::vector<double>& latent, int family, int size,
                            double dx, double dy, double brightness);

}  // namespace earface
