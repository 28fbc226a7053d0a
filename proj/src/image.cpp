#include "earface/image.hpp"

#include <algorithm>
#include <cmath>

namespace earface {

std::string range_name(ValueRange r) { return r == ValueRange::Unit ? "[0,1]" : "[-1,1]"; }

Tensor convert_range(const Tensor& img, ValueRange from, ValueRange to) {
    if (from == to) return img;
    Tensor out(img.n(), img.c(), img.h(), img.w());
    if (from == ValueRange::Unit) {
        for (size_t i = 0; i < img.size(); ++i) out[i] = 2.0 * img[i] - 1.0;
    } else {
        for (size_t i = 0; i < img.size(); ++i) out[i] = 0.5 * (img[i] + 1.0);
    }
    return out;
}

Tensor resize_bilinear(const Tensor& img, int out_h, int out_w) {
    if (out_h <= 0 || out_w <= 0) throw Error("resize_bilinear: non-positive target size");
    if (img.h() == out_h && img.w() == out_w) return img;
    Tensor out(img.n(), img.c(), out_h, out_w);
    const double sy = static_cast<double>(img.h()) / out_h;
    const double sx = static_cast<double>(img.w()) / out_w;
    for (int n = 0; n < img.n(); ++n) {
        for (int c = 0; c < img.c(); ++c) {
            for (int y = 0; y < out_h; ++y) {
                double fy = (y + 0.5) * sy - 0.5;
                fy = std::clamp(fy, 0.0, static_cast<double>(img.h() - 1));
                const int y0 = static_cast<int>(fy);
                const int y1 = std::min(y0 + 1, img.h() - 1);
                const double wy = fy - y0;
                for (int x = 0; x < out_w; ++x) {
                    double fx = (x + 0.5) * sx - 0.5;
                    fx = std::clamp(fx, 0.0, static_cast<double>(img.w() - 1));
                    const int x0 = static_cast<int>(fx);
                    const int x1 = std::min(x0 + 1, img.w() - 1);
                    const double wx = fx - x0;
                    const double v00 = img.at(n, c, y0, x0), v01 = img.at(n, c, y0, x1);
                    const double v10 = img.at(n, c, y1, x0), v11 = img.at(n, c, y1, x1);
                    const double top = v00 + wx * (v01 - v00);
                    const double bot = v10 + wx * (v11 - v10);
                    out.at(n, c, y, x) = top + wy * (bot - top);
                }
            }
        }
    }
    return out;
}

Tensor luma(const Tensor& img) {
    Tensor out(img.n(), 1, img.h(), img.w());
    const int hw = img.h() * img.w();
    for (int n = 0; n < img.n(); ++n) {
        for (int c = 0; c < img.c(); ++c) {
            const double* p = img.data() + img.index(n, c, 0, 0);
            double* o = out.sample(n);
            for (int i = 0; i < hw; ++i) o[i] += p[i];
        }
        double* o = out.sample(n);
        for (int i = 0; i < hw; ++i) o[i] /= img.c();
    }
    return out;
}

void validate_image(const ImageTensor& img, const std::string& what) {
    const double lo = img.range == ValueRange::Unit ? 0.0 : -1.0;
    const double hi = 1.0;
    constexpr double tol = 1e-9;
    for (size_t i = 0; i < img.data.size(); ++i) {
        const double v = img.data[i];
        if (!std::isfinite(v)) throw Error(what + ": non-finite pixel value");
        if (v < lo - tol || v > hi + tol)
            throw Error(what + ": pixel value " + std::to_string(v) + " outside declared range " +
                        range_name(img.range));
    }
}

}  // namespace earface
