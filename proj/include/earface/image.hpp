#pragma once

#include <string>

#include "earface/tensor.hpp"

namespace earface {

/// Declared value interval of an image tensor: Unit = [0,1] (metrics, files),
/// Symmetric = [-1,1] (network I/O).
enum class ValueRange { Unit, Symmetric };

struct ImageTensor {
    Tensor data;  // [n, c, h, w]
    ValueRange range = ValueRange::Unit;
};

std::string range_name(ValueRange r);

/// Linear remap between the two declared ranges; exact no-op when equal.
Tensor convert_range(const Tensor& img, ValueRange from, ValueRange to);

/// Bilinear resample with half-pixel centers; passthrough when sizes match.
Tensor resize_bilinear(const Tensor& img, int out_h, int out_w);

/// Channel mean: [n, c, h, w] -> [n, 1, h, w].
Tensor luma(const Tensor& img);

/// Throws unless all values are finite and inside the declared range
/// (with a small tolerance for accumulated rounding).
void validate_image(const ImageTensor& img, const std::string& what);

}  // namespace earface
