#include "earface/nn/layers.hpp"

#include <Eigen/Core>
#include <cmath>
#include <cstring>

namespace earface::nn {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatRM>;
using CMapRM = Eigen::Map<const MatRM>;

void im2col(const double* img, int c, int ih, int iw, int k, int stride, int pad,
            int oh, int ow, double* col) {
    const int cols = oh * ow;
    for (int ch = 0; ch < c; ++ch) {
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                double* row = col + (static_cast<size_t>(ch) * k * k + ky * k + kx) * cols;
                for (int oy = 0; oy < oh; ++oy) {
                    const int y = oy * stride - pad + ky;
                    if (y < 0 || y >= ih) {
                        std::memset(row + static_cast<size_t>(oy) * ow, 0, sizeof(double) * ow);
                        continue;
                    }
                    const double* src = img + (static_cast<size_t>(ch) * ih + y) * iw;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int x = ox * stride - pad + kx;
                        row[static_cast<size_t>(oy) * ow + ox] =
                            (x < 0 || x >= iw) ? 0.0 : src[x];
                    }
                }
            }
        }
    }
}

void col2im(const double* col, int c, int ih, int iw, int k, int stride, int pad,
            int oh, int ow, double* img) {
    const int cols = oh * ow;
    for (int ch = 0; ch < c; ++ch) {
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const double* row = col + (static_cast<size_t>(ch) * k * k + ky * k + kx) * cols;
                for (int oy = 0; oy < oh; ++oy) {
                    const int y = oy * stride - pad + ky;
                    if (y < 0 || y >= ih) continue;
                    double* dst = img + (static_cast<size_t>(ch) * ih + y) * iw;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int x = ox * stride - pad + kx;
                        if (x >= 0 && x < iw) dst[x] += row[static_cast<size_t>(oy) * ow + ox];
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad, const std::string& name)
    : weight(name + ".weight", Tensor(out_ch, in_ch, kernel, kernel)),
      bias(name + ".bias", Tensor(1, out_ch, 1, 1)),
      in_ch_(in_ch), out_ch_(out_ch), k_(kernel), stride_(stride), pad_(pad) {}

void Conv2d::init(Rng& rng, double weight_std, double bias_std) {
    for (size_t i = 0; i < weight.value.size(); ++i) weight.value[i] = weight_std * rng.normal();
    for (size_t i = 0; i < bias.value.size(); ++i)
        bias.value[i] = bias_std == 0.0 ? 0.0 : bias_std * rng.normal();
}

void Conv2d::collect_params(std::vector<Param*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
}

Tensor Conv2d::forward(const Tensor& x) {
    if (x.c() != in_ch_)
        throw Error("Conv2d: expected " + std::to_string(in_ch_) + " input channels, got " +
                    std::to_string(x.c()));
    x_ = x;
    const int oh = out_size(x.h(), k_, stride_, pad_);
    const int ow = out_size(x.w(), k_, stride_, pad_);
    if (oh <= 0 || ow <= 0) throw Error("Conv2d: input " + x.shape_str() + " too small");
    Tensor y(x.n(), out_ch_, oh, ow);

    const int ckk = in_ch_ * k_ * k_;
    std::vector<double> col(static_cast<size_t>(ckk) * oh * ow);
    CMapRM W(weight.value.data(), out_ch_, ckk);
    for (int nn = 0; nn < x.n(); ++nn) {
        im2col(x.sample(nn), in_ch_, x.h(), x.w(), k_, stride_, pad_, oh, ow, col.data());
        CMapRM C(col.data(), ckk, oh * ow);
        MapRM Y(y.sample(nn), out_ch_, oh * ow);
        Y.noalias() = W * C;
        for (int oc = 0; oc < out_ch_; ++oc) Y.row(oc).array() += bias.value[oc];
    }
    return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
    const int oh = dy.h(), ow = dy.w();
    const int ckk = in_ch_ * k_ * k_;
    Tensor dx(x_.n(), in_ch_, x_.h(), x_.w());
    std::vector<double> col(static_cast<size_t>(ckk) * oh * ow);
    std::vector<double> dcol(col.size());
    CMapRM W(weight.value.data(), out_ch_, ckk);
    MapRM dW(weight.grad.data(), out_ch_, ckk);
    for (int nn = 0; nn < dy.n(); ++nn) {
        CMapRM dY(dy.sample(nn), out_ch_, oh * ow);
        if (trainable) {
            im2col(x_.sample(nn), in_ch_, x_.h(), x_.w(), k_, stride_, pad_, oh, ow, col.data());
            CMapRM C(col.data(), ckk, oh * ow);
            dW.noalias() += dY * C.transpose();
            for (int oc = 0; oc < out_ch_; ++oc) bias.grad[oc] += dY.row(oc).sum();
        }
        MapRM dC(dcol.data(), ckk, oh * ow);
        dC.noalias() = W.transpose() * dY;
        col2im(dcol.data(), in_ch_, x_.h(), x_.w(), k_, stride_, pad_, oh, ow, dx.sample(nn));
    }
    return dx;
}

// ---------------------------------------------------------------------------
// ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(int in_ch, int out_ch, int kernel, int stride, int pad,
                                 const std::string& name)
    : weight(name + ".weight", Tensor(in_ch, out_ch, kernel, kernel)),
      bias(name + ".bias", Tensor(1, out_ch, 1, 1)),
      in_ch_(in_ch), out_ch_(out_ch), k_(kernel), stride_(stride), pad_(pad) {}

void ConvTranspose2d::init(Rng& rng, double weight_std, double bias_std) {
    for (size_t i = 0; i < weight.value.size(); ++i) weight.value[i] = weight_std * rng.normal();
    for (size_t i = 0; i < bias.value.size(); ++i)
        bias.value[i] = bias_std == 0.0 ? 0.0 : bias_std * rng.normal();
}

void ConvTranspose2d::collect_params(std::vector<Param*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
}

Tensor ConvTranspose2d::forward(const Tensor& x) {
    if (x.c() != in_ch_)
        throw Error("ConvTranspose2d: expected " + std::to_string(in_ch_) +
                    " input channels, got " + std::to_string(x.c()));
    x_ = x;
    const int oh = out_size(x.h(), k_, stride_, pad_);
    const int ow = out_size(x.w(), k_, stride_, pad_);
    if (oh <= 0 || ow <= 0) throw Error("ConvTranspose2d: input " + x.shape_str() + " too small");
    Tensor y(x.n(), out_ch_, oh, ow);

    const int okk = out_ch_ * k_ * k_;
    const int ihw = x.h() * x.w();
    std::vector<double> cols(static_cast<size_t>(okk) * ihw);
    CMapRM W(weight.value.data(), in_ch_, okk);
    for (int nn = 0; nn < x.n(); ++nn) {
        CMapRM X(x.sample(nn), in_ch_, ihw);
        MapRM C(cols.data(), okk, ihw);
        C.noalias() = W.transpose() * X;
        // Input positions play the role of conv output positions over y.
        col2im(cols.data(), out_ch_, oh, ow, k_, stride_, pad_, x.h(), x.w(), y.sample(nn));
        MapRM Y(y.sample(nn), out_ch_, oh * ow);
        for (int oc = 0; oc < out_ch_; ++oc) Y.row(oc).array() += bias.value[oc];
    }
    return y;
}

Tensor ConvTranspose2d::backward(const Tensor& dy) {
    const int oh = dy.h(), ow = dy.w();
    const int okk = out_ch_ * k_ * k_;
    const int ihw = x_.h() * x_.w();
    Tensor dx(x_.n(), in_ch_, x_.h(), x_.w());
    std::vector<double> dcol(static_cast<size_t>(okk) * ihw);
    CMapRM W(weight.value.data(), in_ch_, okk);
    MapRM dW(weight.grad.data(), in_ch_, okk);
    for (int nn = 0; nn < dy.n(); ++nn) {
        im2col(dy.sample(nn), out_ch_, oh, ow, k_, stride_, pad_, x_.h(), x_.w(), dcol.data());
        CMapRM dC(dcol.data(), okk, ihw);
        MapRM dX(dx.sample(nn), in_ch_, ihw);
        dX.noalias() = W * dC;
        if (trainable) {
            CMapRM X(x_.sample(nn), in_ch_, ihw);
            dW.noalias() += X * dC.transpose();
            CMapRM dY(dy.sample(nn), out_ch_, oh * ow);
            for (int oc = 0; oc < out_ch_; ++oc) bias.grad[oc] += dY.row(oc).sum();
        }
    }
    return dx;
}

// ---------------------------------------------------------------------------
// InstanceNorm2d

InstanceNorm2d::InstanceNorm2d(int channels, const std::string& name, double eps)
    : gamma(name + ".gamma", Tensor::full(1, channels, 1, 1, 1.0)),
      beta(name + ".beta", Tensor(1, channels, 1, 1)),
      channels_(channels), eps_(eps) {}

void InstanceNorm2d::collect_params(std::vector<Param*>& out) {
    out.push_back(&gamma);
    out.push_back(&beta);
}

Tensor InstanceNorm2d::forward(const Tensor& x) {
    if (x.c() != channels_) throw Error("InstanceNorm2d: channel mismatch");
    const int hw = x.h() * x.w();
    Tensor y(x.n(), x.c(), x.h(), x.w());
    xhat_ = Tensor(x.n(), x.c(), x.h(), x.w());
    inv_std_.assign(static_cast<size_t>(x.n()) * x.c(), 0.0);
    for (int nn = 0; nn < x.n(); ++nn) {
        for (int ch = 0; ch < x.c(); ++ch) {
            const double* p = x.data() + x.index(nn, ch, 0, 0);
            double mean = 0;
            for (int i = 0; i < hw; ++i) mean += p[i];
            mean /= hw;
            double var = 0;
            for (int i = 0; i < hw; ++i) var += (p[i] - mean) * (p[i] - mean);
            var /= hw;
            const double inv = 1.0 / std::sqrt(var + eps_);
            inv_std_[static_cast<size_t>(nn) * x.c() + ch] = inv;
            double* xh = xhat_.data() + xhat_.index(nn, ch, 0, 0);
            double* yp = y.data() + y.index(nn, ch, 0, 0);
            const double g = gamma.value[ch], b = beta.value[ch];
            for (int i = 0; i < hw; ++i) {
                xh[i] = (p[i] - mean) * inv;
                yp[i] = g * xh[i] + b;
            }
        }
    }
    return y;
}

Tensor InstanceNorm2d::backward(const Tensor& dy) {
    const int hw = dy.h() * dy.w();
    Tensor dx(dy.n(), dy.c(), dy.h(), dy.w());
    for (int nn = 0; nn < dy.n(); ++nn) {
        for (int ch = 0; ch < dy.c(); ++ch) {
            const double* dyp = dy.data() + dy.index(nn, ch, 0, 0);
            const double* xh = xhat_.data() + xhat_.index(nn, ch, 0, 0);
            double* dxp = dx.data() + dx.index(nn, ch, 0, 0);
            const double g = gamma.value[ch];
            const double inv = inv_std_[static_cast<size_t>(nn) * dy.c() + ch];
            double sum_dy = 0, sum_dy_xh = 0;
            for (int i = 0; i < hw; ++i) {
                sum_dy += dyp[i];
                sum_dy_xh += dyp[i] * xh[i];
            }
            if (trainable) {
                beta.grad[ch] += sum_dy;
                gamma.grad[ch] += sum_dy_xh;
            }
            const double m_dy = sum_dy / hw, m_dy_xh = sum_dy_xh / hw;
            for (int i = 0; i < hw; ++i)
                dxp[i] = g * inv * (dyp[i] - m_dy - xh[i] * m_dy_xh);
        }
    }
    return dx;
}

// ---------------------------------------------------------------------------
// Activations

Tensor LeakyReLU::forward(const Tensor& x) {
    x_ = x;
    Tensor y(x.n(), x.c(), x.h(), x.w());
    for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] >= 0 ? x[i] : slope_ * x[i];
    return y;
}

Tensor LeakyReLU::backward(const Tensor& dy) {
    Tensor dx(dy.n(), dy.c(), dy.h(), dy.w());
    for (size_t i = 0; i < dy.size(); ++i) dx[i] = x_[i] >= 0 ? dy[i] : slope_ * dy[i];
    return dx;
}

Tensor Tanh::forward(const Tensor& x) {
    y_ = Tensor(x.n(), x.c(), x.h(), x.w());
    for (size_t i = 0; i < x.size(); ++i) y_[i] = std::tanh(x[i]);
    return y_;
}

Tensor Tanh::backward(const Tensor& dy) {
    Tensor dx(dy.n(), dy.c(), dy.h(), dy.w());
    for (size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * (1.0 - y_[i] * y_[i]);
    return dx;
}

Tensor Dropout::forward(const Tensor& x) {
    identity_ = !active_ || rate_ <= 0.0;
    if (identity_) return x;
    if (!rng_) throw Error("Dropout: active but no RNG configured");
    const double keep = 1.0 - rate_;
    mask_ = Tensor(x.n(), x.c(), x.h(), x.w());
    Tensor y(x.n(), x.c(), x.h(), x.w());
    for (size_t i = 0; i < x.size(); ++i) {
        mask_[i] = rng_->uniform() < rate_ ? 0.0 : 1.0 / keep;
        y[i] = x[i] * mask_[i];
    }
    return y;
}

Tensor Dropout::backward(const Tensor& dy) {
    if (identity_) return dy;
    Tensor dx(dy.n(), dy.c(), dy.h(), dy.w());
    for (size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * mask_[i];
    return dx;
}

Tensor GlobalAvgPool::forward(const Tensor& x) {
    h_ = x.h();
    w_ = x.w();
    const int hw = h_ * w_;
    Tensor y(x.n(), x.c(), 1, 1);
    for (int nn = 0; nn < x.n(); ++nn) {
        for (int ch = 0; ch < x.c(); ++ch) {
            const double* p = x.data() + x.index(nn, ch, 0, 0);
            double s = 0;
            for (int i = 0; i < hw; ++i) s += p[i];
            y.at(nn, ch, 0, 0) = s / hw;
        }
    }
    return y;
}

Tensor GlobalAvgPool::backward(const Tensor& dy) {
    const int hw = h_ * w_;
    Tensor dx(dy.n(), dy.c(), h_, w_);
    for (int nn = 0; nn < dy.n(); ++nn) {
        for (int ch = 0; ch < dy.c(); ++ch) {
            const double g = dy.at(nn, ch, 0, 0) / hw;
            double* p = dx.data() + dx.index(nn, ch, 0, 0);
            for (int i = 0; i < hw; ++i) p[i] = g;
        }
    }
    return dx;
}

}  // namespace earface::nn
