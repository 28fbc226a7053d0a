#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace earface {

/// Error type thrown by all library operations.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Dense NCHW tensor of doubles. Feature batches use h = w = 1.
class Tensor {
public:
    Tensor() = default;
    Tensor(int n, int c, int h, int w)
        : n_(n), c_(c), h_(h), w_(w), data_(static_cast<size_t>(n) * c * h * w, 0.0) {
        if (n < 0 || c < 0 || h < 0 || w < 0)
            throw Error("Tensor: negative dimension");
    }

    static Tensor zeros(int n, int c, int h, int w) { return Tensor(n, c, h, w); }
    static Tensor full(int n, int c, int h, int w, double v) {
        Tensor t(n, c, h, w);
        std::fill(t.data_.begin(), t.data_.end(), v);
        return t;
    }

    int n() const { return n_; }
    int c() const { return c_; }
    int h() const { return h_; }
    int w() const { return w_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](size_t i) { return data_[i]; }
    double operator[](size_t i) const { return data_[i]; }

    double& at(int n, int c, int y, int x) { return data_[index(n, c, y, x)]; }
    double at(int n, int c, int y, int x) const { return data_[index(n, c, y, x)]; }

    size_t index(int n, int c, int y, int x) const {
        return ((static_cast<size_t>(n) * c_ + c) * h_ + y) * w_ + x;
    }

    /// Elements per sample (c*h*w).
    size_t sample_size() const { return static_cast<size_t>(c_) * h_ * w_; }

    double* sample(int n) { return data_.data() + n * sample_size(); }
    const double* sample(int n) const { return data_.data() + n * sample_size(); }

    bool same_shape(const Tensor& o) const {
        return n_ == o.n_ && c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
    }

    std::string shape_str() const {
        return std::to_string(n_) + "x" + std::to_string(c_) + "x" +
               std::to_string(h_) + "x" + std::to_string(w_);
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool all_finite() const;

    /// Extracts sample range [begin, end) as a new tensor.
    Tensor slice_samples(int begin, int end) const;

    /// Stacks two batches along the sample axis; shapes must agree per sample.
    static Tensor stack_samples(const Tensor& a, const Tensor& b);

private:
    int n_ = 0, c_ = 0, h_ = 0, w_ = 0;
    std::vector<double> data_;
};

/// FNV-1a over the raw bytes of a tensor list; used for frozen-parameter checks.
uint64_t hash_tensors(const std::vector<const Tensor*>& ts);

}  // namespace earface
