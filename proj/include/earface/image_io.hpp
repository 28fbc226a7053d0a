#pragma once

#include <filesystem>

#include "earface/tensor.hpp"

namespace earface {

/// Decodes a PNG into a [1, 3, h, w] tensor in [0, 1]. Grayscale, palette and
/// alpha variants are expanded/stripped to 8-bit RGB.
Tensor read_png(const std::filesystem::path& path);

/// Writes a [1, c, h, w] tensor (c = 1 or 3) in [0, 1] as an 8-bit PNG.
/// Values are clamped and rounded; output bytes are deterministic.
void write_png(const Tensor& img, const std::filesystem::path& path);

}  // namespace earface
