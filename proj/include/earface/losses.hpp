#pragma once

#include <Eigen/Core>
#include <utility>

#include "earface/nn/features.hpp"
#include "earface/tensor.hpp"

namespace earface {

/// Weights of the composite generator objective:
/// total = adversarial + lambda * pixel + beta * feature + gamma * style.
struct LossWeights {
    double lambda = 10.0;
    double beta = 0.25;
    double gamma = 0.1;

    void validate() const;
};

struct LossBreakdown {
    double adversarial_g = 0.0;
    double adversarial_d = 0.0;
    double pixel = 0.0;
    double feature = 0.0;
    double style = 0.0;
    double total_g = 0.0;
};

using GramMatrix = Eigen::MatrixXd;

/// Discriminator objective: mean BCE of real-pair logits against label 1 plus
/// mean BCE of fake-pair logits against label 0; each mean runs over batch
/// and patch grid.
double adversarial_loss_d(const Tensor& real_logits, const Tensor& fake_logits);
std::pair<Tensor, Tensor> adversarial_loss_d_grads(const Tensor& real_logits,
                                                   const Tensor& fake_logits);

/// Non-saturating generator surrogate: mean BCE of fake logits against label 1.
double adversarial_loss_g(const Tensor& fake_logits);
Tensor adversarial_loss_g_grad(const Tensor& fake_logits);

/// Mean absolute difference over all elements.
double pixel_loss(const Tensor& fake, const Tensor& real);
Tensor pixel_loss_grad(const Tensor& fake, const Tensor& real);

/// Squared Euclidean distance between feature vectors divided by the source
/// map volume Cj*Hj*Wj; batch inputs are averaged.
double feature_loss(const FeatureBatch& fake, const FeatureBatch& real);
Tensor feature_loss_grad(const FeatureBatch& fake, const FeatureBatch& real);

/// Normalized outer product of one feature vector of the batch.
GramMatrix gram(const FeatureBatch& feat, int index = 0);

/// Squared Frobenius norm of the difference of Gram matrices; batch-averaged.
double style_loss(const FeatureBatch& fake, const FeatureBatch& real);
Tensor style_loss_grad(const FeatureBatch& fake, const FeatureBatch& real);

LossBreakdown composite_generator_loss(double adversarial_g, double pixel, double feature,
                                       double style, const LossWeights& w);

}  // namespace earface
