#include "earface/optim.hpp"

#include <cmath>

namespace earface {

Adam::Adam(std::vector<nn::Param*> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    if (lr < 0) throw Error("Adam: negative learning rate");
    for (nn::Param* p : params_) {
        m_.emplace_back(p->value.n(), p->value.c(), p->value.h(), p->value.w());
        v_.emplace_back(p->value.n(), p->value.c(), p->value.h(), p->value.w());
    }
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        Tensor& theta = params_[i]->value;
        const Tensor& g = params_[i]->grad;
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        for (size_t k = 0; k < theta.size(); ++k) {
            m[k] = beta1_ * m[k] + (1.0 - beta1_) * g[k];
            v[k] = beta2_ * v[k] + (1.0 - beta2_) * g[k] * g[k];
            const double mhat = m[k] / bc1;
            const double vhat = v[k] / bc2;
            theta[k] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

}  // namespace earface
