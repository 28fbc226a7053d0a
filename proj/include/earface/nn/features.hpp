#pragma once

#include "earface/tensor.hpp"

namespace earface {

/// A batch of pooled feature vectors: values is [n, d, 1, 1]. The source map
/// dimensions (cj, hj, wj) define the normalizer used by the feature, Gram
/// and style computations; for globally pooled features cj = d, hj = wj = 1.
struct FeatureBatch {
    Tensor values;
    int cj = 0, hj = 1, wj = 1;

    int dim() const { return values.c(); }
    int count() const { return values.n(); }
    double normalizer() const { return static_cast<double>(cj) * hj * wj; }

    const double* row(int i) const { return values.sample(i); }
    double* row(int i) { return values.sample(i); }
};

}  // namespace earface
