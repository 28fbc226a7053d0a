#include "earface/losses.hpp"

#include <cmath>

namespace earface {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Numerically stable binary cross-entropy on a logit.
double bce_with_logit(double logit, double target) {
    return std::max(logit, 0.0) - target * logit + std::log1p(std::exp(-std::fabs(logit)));
}

double mean_bce(const Tensor& logits, double target, const char* what) {
    if (logits.empty()) throw Error(std::string(what) + ": empty logits");
    if (!logits.all_finite()) throw Error(std::string(what) + ": non-finite logits");
    double s = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) s += bce_with_logit(logits[i], target);
    return s / static_cast<double>(logits.size());
}

Tensor mean_bce_grad(const Tensor& logits, double target) {
    Tensor g(logits.n(), logits.c(), logits.h(), logits.w());
    const double inv_n = 1.0 / static_cast<double>(logits.size());
    for (size_t i = 0; i < logits.size(); ++i) g[i] = (sigmoid(logits[i]) - target) * inv_n;
    return g;
}

void check_feature_pair(const FeatureBatch& a, const FeatureBatch& b, const char* what) {
    if (a.dim() != b.dim())
        throw Error(std::string(what) + ": feature dimension mismatch " +
                    std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    if (a.count() != b.count())
        throw Error(std::string(what) + ": batch size mismatch");
    if (a.dim() < 1) throw Error(std::string(what) + ": empty feature vectors");
}

}  // namespace

void LossWeights::validate() const {
    if (lambda < 0 || beta < 0 || gamma < 0) throw Error("LossWeights: negative weight");
}

double adversarial_loss_d(const Tensor& real_logits, const Tensor& fake_logits) {
    return mean_bce(real_logits, 1.0, "adversarial_loss_d") +
           mean_bce(fake_logits, 0.0, "adversarial_loss_d");
}

std::pair<Tensor, Tensor> adversarial_loss_d_grads(const Tensor& real_logits,
                                                   const Tensor& fake_logits) {
    return {mean_bce_grad(real_logits, 1.0), mean_bce_grad(fake_logits, 0.0)};
}

double adversarial_loss_g(const Tensor& fake_logits) {
    return mean_bce(fake_logits, 1.0, "adversarial_loss_g");
}

Tensor adversarial_loss_g_grad(const Tensor& fake_logits) {
    return mean_bce_grad(fake_logits, 1.0);
}

double pixel_loss(const Tensor& fake, const Tensor& real) {
    if (!fake.same_shape(real))
        throw Error("pixel_loss: shape mismatch " + fake.shape_str() + " vs " + real.shape_str());
    if (fake.empty()) throw Error("pixel_loss: empty tensors");
    double s = 0.0;
    for (size_t i = 0; i < fake.size(); ++i) s += std::fabs(fake[i] - real[i]);
    return s / static_cast<double>(fake.size());
}

Tensor pixel_loss_grad(const Tensor& fake, const Tensor& real) {
    Tensor g(fake.n(), fake.c(), fake.h(), fake.w());
    const double inv_n = 1.0 / static_cast<double>(fake.size());
    for (size_t i = 0; i < fake.size(); ++i) {
        const double d = fake[i] - real[i];
        g[i] = d > 0 ? inv_n : (d < 0 ? -inv_n : 0.0);
    }
    return g;
}

double feature_loss(const FeatureBatch& fake, const FeatureBatch& real) {
    check_feature_pair(fake, real, "feature_loss");
    const double m = fake.normalizer();
    double batch_sum = 0.0;
    for (int b = 0; b < fake.count(); ++b) {
        const double *f = fake.row(b), *r = real.row(b);
        double s = 0.0;
        for (int i = 0; i < fake.dim(); ++i) {
            const double d = f[i] - r[i];
            s += d * d;
        }
        batch_sum += s / m;
    }
    return batch_sum / fake.count();
}

Tensor feature_loss_grad(const FeatureBatch& fake, const FeatureBatch& real) {
    check_feature_pair(fake, real, "feature_loss");
    const double scale = 2.0 / (fake.normalizer() * fake.count());
    Tensor g(fake.count(), fake.dim(), 1, 1);
    for (int b = 0; b < fake.count(); ++b) {
        const double *f = fake.row(b), *r = real.row(b);
        double* gp = g.sample(b);
        for (int i = 0; i < fake.dim(); ++i) gp[i] = scale * (f[i] - r[i]);
    }
    return g;
}

GramMatrix gram(const FeatureBatch& feat, int index) {
    if (index < 0 || index >= feat.count()) throw Error("gram: feature index out of range");
    const int d = feat.dim();
    const double m = feat.normalizer();
    const double* v = feat.row(index);
    GramMatrix g(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) g(a, b) = v[a] * v[b] / m;
    return g;
}

double style_loss(const FeatureBatch& fake, const FeatureBatch& real) {
    check_feature_pair(fake, real, "style_loss");
    double batch_sum = 0.0;
    for (int b = 0; b < fake.count(); ++b) {
        const GramMatrix diff = gram(fake, b) - gram(real, b);
        batch_sum += diff.array().square().sum();
    }
    return batch_sum / fake.count();
}

Tensor style_loss_grad(const FeatureBatch& fake, const FeatureBatch& real) {
    check_feature_pair(fake, real, "style_loss");
    const int d = fake.dim();
    const double m = fake.normalizer();
    Tensor g(fake.count(), d, 1, 1);
    for (int b = 0; b < fake.count(); ++b) {
        const GramMatrix diff = gram(fake, b) - gram(real, b);
        Eigen::Map<const Eigen::VectorXd> f(fake.row(b), d);
        Eigen::VectorXd gv = (4.0 / (m * fake.count())) * (diff * f);
        for (int i = 0; i < d; ++i) g.sample(b)[i] = gv(i);
    }
    return g;
}

LossBreakdown composite_generator_loss(double adversarial_g, double pixel, double feature,
                                       double style, const LossWeights& w) {
    w.validate();
    for (double v : {adversarial_g, pixel, feature, style})
        if (!std::isfinite(v)) throw Error("composite_generator_loss: non-finite component");
    LossBreakdown b;
    b.adversarial_g = adversarial_g;
    b.pixel = pixel;
    b.feature = feature;
    b.style = style;
    b.total_g = adversarial_g + w.lambda * pixel + w.beta * feature + w.gamma * style;
    return b;
}

}  // namespace earface
