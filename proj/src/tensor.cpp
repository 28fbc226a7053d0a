#include "earface/tensor.hpp"

#include <cmath>
#include <cstring>

namespace earface {

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Tensor Tensor::slice_samples(int begin, int end) const {
    if (begin < 0 || end > n_ || begin > end)
        throw Error("Tensor::slice_samples: bad range");
    Tensor out(end - begin, c_, h_, w_);
    std::memcpy(out.data(), sample(begin), out.size() * sizeof(double));
    return out;
}

Tensor Tensor::stack_samples(const Tensor& a, const Tensor& b) {
    if (a.c() != b.c() || a.h() != b.h() || a.w() != b.w())
        throw Error("Tensor::stack_samples: per-sample shapes differ: " + a.shape_str() +
                    " vs " + b.shape_str());
    Tensor out(a.n() + b.n(), a.c(), a.h(), a.w());
    std::memcpy(out.data(), a.data(), a.size() * sizeof(double));
    std::memcpy(out.data() + a.size(), b.data(), b.size() * sizeof(double));
    return out;
}

uint64_t hash_tensors(const std::vector<const Tensor*>& ts) {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const unsigned char* p, size_t n) {
        for (size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    for (const Tensor* t : ts)
        mix(reinterpret_cast<const unsigned char*>(t->data()), t->size() * sizeof(double));
    return h;
}

}  // namespace earface
