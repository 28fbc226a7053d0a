#include "earface/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

#include "earface/losses.hpp"

namespace earface {

namespace {

/// Kahan compensated accumulator.
struct Kahan {
    double sum = 0, c = 0;
    void add(double v) {
        const double y = v - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<double> gaussian_kernel(int size, double sigma) {
    std::vector<double> k(size);
    const double half = (size - 1) / 2.0;
    double sum = 0;
    for (int i = 0; i < size; ++i) {
        const double d = i - half;
        k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

/// Horizontal then vertical 1-D convolution, valid region only.
Tensor filter_valid(const Tensor& img, const std::vector<double>& k) {
    const int ksz = static_cast<int>(k.size());
    const int oh = img.h() - ksz + 1, ow = img.w() - ksz + 1;
    Tensor horiz(1, 1, img.h(), ow);
    for (int y = 0; y < img.h(); ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0;
            for (int i = 0; i < ksz; ++i) s += k[i] * img.at(0, 0, y, x + i);
            horiz.at(0, 0, y, x) = s;
        }
    Tensor out(1, 1, oh, ow);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0;
            for (int i = 0; i < ksz; ++i) s += k[i] * horiz.at(0, 0, y + i, x);
            out.at(0, 0, y, x) = s;
        }
    return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
    Tensor out(a.n(), a.c(), a.h(), a.w());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

}  // namespace

double mse(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b))
        throw Error("mse: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    if (a.empty()) throw Error("mse: empty tensors");
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s / static_cast<double>(a.size());
}

double psnr_from_mse(double mse_value, double max_val) {
    if (max_val <= 0) throw Error("psnr: max_val must be positive");
    if (mse_value < 0) throw Error("psnr: negative mse");
    if (mse_value == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(max_val * max_val / mse_value);
}

double psnr(const Tensor& fake, const Tensor& real, double max_val) {
    return psnr_from_mse(mse(fake, real), max_val);
}

double ssim(const Tensor& fake, const Tensor& real, const SsimConfig& cfg) {
    if (!fake.same_shape(real))
        throw Error("ssim: shape mismatch " + fake.shape_str() + " vs " + real.shape_str());
    if (fake.n() != 1) throw Error("ssim: expected single-image tensors");
    if (fake.h() < cfg.window_size || fake.w() < cfg.window_size)
        throw Error("ssim: image " + fake.shape_str() + " smaller than window " +
                    std::to_string(cfg.window_size));

    const Tensor x = luma(fake);
    const Tensor y = luma(real);
    const auto k = gaussian_kernel(cfg.window_size, cfg.sigma);

    const Tensor mu_x = filter_valid(x, k);
    const Tensor mu_y = filter_valid(y, k);
    const Tensor xx = filter_valid(hadamard(x, x), k);
    const Tensor yy = filter_valid(hadamard(y, y), k);
    const Tensor xy = filter_valid(hadamard(x, y), k);

    const double c1 = (cfg.k1 * cfg.max_val) * (cfg.k1 * cfg.max_val);
    const double c2 = (cfg.k2 * cfg.max_val) * (cfg.k2 * cfg.max_val);
    double acc = 0;
    for (size_t i = 0; i < mu_x.size(); ++i) {
        const double mx = mu_x[i], my = mu_y[i];
        const double vx = xx[i] - mx * mx;
        const double vy = yy[i] - my * my;
        const double vxy = xy[i] - mx * my;
        acc += ((2 * mx * my + c1) * (2 * vxy + c2)) /
               ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    return acc / static_cast<double>(mu_x.size());
}

double pixel_difference(const Tensor& fake, const Tensor& real) { return pixel_loss(fake, real); }

double feature_difference(const Tensor& fake, const Tensor& real, nn::EmbeddingNetwork& psi) {
    const Tensor f = convert_range(fake, ValueRange::Unit, ValueRange::Symmetric);
    const Tensor r = convert_range(real, ValueRange::Unit, ValueRange::Symmetric);
    const FeatureBatch ff = psi.embed(f);
    const FeatureBatch fr = psi.embed(r);
    return feature_loss(ff, fr);
}

double style_difference(const Tensor& fake, const Tensor& real, nn::EmbeddingNetwork& psi) {
    const Tensor f = convert_range(fake, ValueRange::Unit, ValueRange::Symmetric);
    const Tensor r = convert_range(real, ValueRange::Unit, ValueRange::Symmetric);
    const FeatureBatch ff = psi.embed(f);
    const FeatureBatch fr = psi.embed(r);
    return style_loss(ff, fr);
}

MetricsReport evaluate_set(const Reconstructor& reconstruct, nn::EmbeddingNetwork& psi,
                           const std::vector<PairedSample>& pairs, const SsimConfig& cfg) {
    if (pairs.empty()) throw Error("evaluate_set: empty pair set");
    MetricsReport report;
    Kahan pix, feat, sty, ps, ss;
    for (const PairedSample& pair : pairs) {
        if (pair.face.range != ValueRange::Unit || pair.ear.range != ValueRange::Unit)
            throw Error("evaluate_set: pairs must be ingested in [0,1] range");
        const Tensor recon = reconstruct(pair);
        if (!recon.same_shape(pair.face.data))
            throw Error("evaluate_set: reconstruction shape " + recon.shape_str() +
                        " does not match target " + pair.face.data.shape_str());
        PairMetrics pm;
        pm.pair_id = pair.pair_id;
        pm.pixel_diff = pixel_difference(recon, pair.face.data);
        pm.feature_diff = feature_difference(recon, pair.face.data, psi);
        pm.style_diff = style_difference(recon, pair.face.data, psi);
        pm.psnr_db = psnr(recon, pair.face.data, 1.0);
        pm.ssim_value = ssim(recon, pair.face.data, cfg);
        report.per_pair.push_back(pm);

        pix.add(pm.pixel_diff);
        feat.add(pm.feature_diff);
        sty.add(pm.style_diff);
        ss.add(pm.ssim_value);
        if (std::isinf(pm.psnr_db))
            ++report.psnr_excluded;
        else
            ps.add(pm.psnr_db);
    }
    report.n_pairs = static_cast<int>(pairs.size());
    const double n = report.n_pairs;
    report.pixel_diff_mean = pix.sum / n;
    report.feature_diff_mean = feat.sum / n;
    report.style_diff_mean = sty.sum / n;
    report.ssim_mean = ss.sum / n;
    const int n_psnr = report.n_pairs - report.psnr_excluded;
    report.psnr_db_mean =
        n_psnr > 0 ? ps.sum / n_psnr : std::numeric_limits<double>::infinity();
    return report;
}

MetricsReport filter_report(const MetricsReport& full, const std::vector<std::string>& pair_ids) {
    std::set<std::string> wanted(pair_ids.begin(), pair_ids.end());
    MetricsReport out;
    Kahan pix, feat, sty, ps, ss;
    for (const PairMetrics& pm : full.per_pair) {
        if (!wanted.count(pm.pair_id)) continue;
        out.per_pair.push_back(pm);
        pix.add(pm.pixel_diff);
        feat.add(pm.feature_diff);
        sty.add(pm.style_diff);
        ss.add(pm.ssim_value);
        if (std::isinf(pm.psnr_db))
            ++out.psnr_excluded;
        else
            ps.add(pm.psnr_db);
    }
    if (out.per_pair.size() != wanted.size())
        throw Error("filter_report: some requested pair ids are missing from the source report");
    out.n_pairs = static_cast<int>(out.per_pair.size());
    if (out.n_pairs == 0) throw Error("filter_report: empty selection");
    const double n = out.n_pairs;
    out.pixel_diff_mean = pix.sum / n;
    out.feature_diff_mean = feat.sum / n;
    out.style_diff_mean = sty.sum / n;
    out.ssim_mean = ss.sum / n;
    const int n_psnr = out.n_pairs - out.psnr_excluded;
    out.psnr_db_mean = n_psnr > 0 ? ps.sum / n_psnr : std::numeric_limits<double>::infinity();
    return out;
}

void write_metrics_csv(const MetricsReport& report, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw Error("write_metrics_csv: cannot write '" + path.string() + "'");
    os << "pair_id,pixel_difference,feature_difference,style_difference,psnr_db,ssim\n";
    for (const PairMetrics& pm : report.per_pair) {
        os << pm.pair_id << ',' << fmt17(pm.pixel_diff) << ',' << fmt17(pm.feature_diff) << ','
           << fmt17(pm.style_diff) << ','
           << (std::isinf(pm.psnr_db) ? "inf" : fmt17(pm.psnr_db)) << ','
           << fmt17(pm.ssim_value) << '\n';
    }
}

std::string metrics_report_json(const MetricsReport& report, const std::string& model_label,
                                const std::string& data_label, const std::string& split_name) {
    nlohmann::ordered_json j;
    j["model"] = model_label;
    j["data"] = data_label;
    j["split"] = split_name;
    j["n_pairs"] = report.n_pairs;
    j["pixel_difference"] = report.pixel_diff_mean;
    j["feature_difference"] = report.feature_diff_mean;
    j["style_difference"] = report.style_diff_mean;
    if (std::isinf(report.psnr_db_mean))
        j["psnr_db"] = nullptr;  // every pair was exact; see psnr_excluded
    else
        j["psnr_db"] = report.psnr_db_mean;
    j["ssim"] = report.ssim_mean;
    j["psnr_excluded"] = report.psnr_excluded;
    return j.dump(2) + "\n";
}

}  // namespace earface
