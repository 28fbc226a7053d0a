#pragma once

#include <memory>
#include <string>
#include <vector>

#include "earface/rng.hpp"
#include "earface/tensor.hpp"

namespace earface::nn {

/// A learnable tensor with its gradient accumulator.
struct Param {
    std::string name;
    Tensor value;
    Tensor grad;

    Param() = default;
    Param(std::string n, Tensor v) : name(std::move(n)), value(v), grad(v.n(), v.c(), v.h(), v.w()) {}
};

/// Base layer. forward() caches whatever backward() needs; a backward() call
/// must follow the forward() it refers to. When trainable is false the layer
/// still propagates input gradients but never writes parameter gradients.
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x) = 0;
    virtual Tensor backward(const Tensor& dy) = 0;
    virtual void collect_params(std::vector<Param*>& out) {}

    bool trainable = true;
};

class Conv2d : public Layer {
public:
    Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad, const std::string& name);

    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;
    void collect_params(std::vector<Param*>& out) override;

    void init(Rng& rng, double weight_std, double bias_std = 0.0);

    static int out_size(int in, int kernel, int stride, int pad) {
        return (in + 2 * pad - kernel) / stride + 1;
    }

    Param weight;  // [out_ch, in_ch, k, k]
    Param bias;    // [out_ch]

private:
    int in_ch_, out_ch_, k_, stride_, pad_;
    Tensor x_;  // cached input
};

class ConvTranspose2d : public Layer {
public:
    ConvTranspose2d(int in_ch, int out_ch, int kernel, int stride, int pad, const std::string& name);

    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;
    void collect_params(std::vector<Param*>& out) override;

    void init(Rng& rng, double weight_std, double bias_std = 0.0);

    static int out_size(int in, int kernel, int stride, int pad) {
        return (in - 1) * stride - 2 * pad + kernel;
    }

    Param weight;  // [in_ch, out_ch, k, k]
    Param bias;    // [out_ch]

private:
    int in_ch_, out_ch_, k_, stride_, pad_;
    Tensor x_;
};

/// Per-sample, per-channel normalization with learnable affine.
class InstanceNorm2d : public Layer {
public:
    explicit InstanceNorm2d(int channels, const std::string& name, double eps = 1e-5);

    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;
    void collect_params(std::vector<Param*>& out) override;

    Param gamma, beta;

private:
    int channels_;
    double eps_;
    Tensor xhat_;
    std::vector<double> inv_std_;  // one per (n, c)
};

class LeakyReLU : public Layer {
public:
    explicit LeakyReLU(double slope) : slope_(slope) {}
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;

private:
    double slope_;
    Tensor x_;
};

class Tanh : public Layer {
public:
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;

private:
    Tensor y_;
};

/// Inverted dropout. Draws no random numbers when inactive or rate is zero.
class Dropout : public Layer {
public:
    explicit Dropout(double rate) : rate_(rate) {}

    void configure(Rng* rng, bool active) {
        rng_ = rng;
        active_ = active;
    }

    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;

private:
    double rate_;
    Rng* rng_ = nullptr;
    bool active_ = false;
    Tensor mask_;
    bool identity_ = true;
};

/// [n, c, h, w] -> [n, c, 1, 1] mean over the spatial extent.
class GlobalAvgPool : public Layer {
public:
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;

private:
    int h_ = 0, w_ = 0;
};

/// Zero-padded patch extraction: [c, ih, iw] -> (c*k*k) x (oh*ow), row-major.
void im2col(const double* img, int c, int ih, int iw, int k, int stride, int pad,
            int oh, int ow, double* col);

/// Transpose of im2col: scatter-adds columns back into the [c, ih, iw] image.
void col2im(const double* col, int c, int ih, int iw, int k, int stride, int pad,
            int oh, int ow, double* img);

}  // namespace earface::nn
