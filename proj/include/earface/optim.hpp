#pragma once

#include <vector>

#include "earface/nn/layers.hpp"

namespace earface {

/// Adaptive moment estimation over a fixed parameter list. Moment tensors are
/// owned here and serialized with the training state.
class Adam {
public:
    Adam(std::vector<nn::Param*> params, double lr, double beta1 = 0.5, double beta2 = 0.999,
         double eps = 1e-8);

    /// Applies one update from the accumulated gradients. Bias correction uses
    /// the internal step count, which increments on every call.
    void step();

    int64_t t() const { return t_; }

    std::vector<Tensor>& moments_m() { return m_; }
    std::vector<Tensor>& moments_v() { return v_; }
    void set_t(int64_t t) { t_ = t; }

private:
    std::vector<nn::Param*> params_;
    double lr_, beta1_, beta2_, eps_;
    int64_t t_ = 0;
    std::vector<Tensor> m_, v_;
};

}  // namespace earface
