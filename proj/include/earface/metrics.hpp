#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "earface/dataset.hpp"
#include "earface/nn/embedder.hpp"

namespace earface {

/// Maps a paired sample to a reconstructed face in [0, 1]. Production code
/// wraps a generator; tests substitute stubs.
using Reconstructor = std::function<Tensor(const PairedSample&)>;

struct SsimConfig {
    int window_size = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double max_val = 1.0;
};

double mse(const Tensor& a, const Tensor& b);

/// 10*log10(max_val^2 / mse); +infinity when mse is zero.
double psnr_from_mse(double mse_value, double max_val);
double psnr(const Tensor& fake, const Tensor& real, double max_val);

/// Mean windowed structural similarity over the luma channel, Gaussian
/// weighting, fully contained windows only. Symmetric in its arguments.
double ssim(const Tensor& fake, const Tensor& real, const SsimConfig& cfg = {});

/// The five per-pair quality metrics; images are [0, 1].
double pixel_difference(const Tensor& fake, const Tensor& real);
double feature_difference(const Tensor& fake, const Tensor& real, nn::EmbeddingNetwork& psi);
double style_difference(const Tensor& fake, const Tensor& real, nn::EmbeddingNetwork& psi);

struct PairMetrics {
    std::string pair_id;
    double pixel_diff = 0;
    double feature_diff = 0;
    double style_diff = 0;
    double psnr_db = 0;
    double ssim_value = 0;
};

struct MetricsReport {
    int n_pairs = 0;
    double pixel_diff_mean = 0;
    double feature_diff_mean = 0;
    double style_diff_mean = 0;
    double psnr_db_mean = 0;  // over pairs with finite PSNR
    double ssim_mean = 0;
    int psnr_excluded = 0;  // identical pairs reported out of the mean
    std::vector<PairMetrics> per_pair;
};

/// Reconstructs every pair, computes all five metrics and aggregates with
/// compensated summation.
MetricsReport evaluate_set(const Reconstructor& reconstruct, nn::EmbeddingNetwork& psi,
                           const std::vector<PairedSample>& pairs, const SsimConfig& cfg = {});

/// Recomputes the aggregate means of a report from a per-pair subset.
MetricsReport filter_report(const MetricsReport& full, const std::vector<std::string>& pair_ids);

void write_metrics_csv(const MetricsReport& report, const std::filesystem::path& path);
std::string metrics_report_json(const MetricsReport& report, const std::string& model_label,
                                const std::string& data_label, const std::string& split_name);

}  // namespace earface
