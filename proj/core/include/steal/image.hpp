#pragma once

#include <filesystem>

#include "steal/tensor.hpp"

namespace steal {

// Grayscale image helpers. Pixels live in [-1,1] inside the pipeline
// (u8 value x maps to x/127.5 - 1); files are 8-bit images on disk.

// Decode to luminance, bilinear-resize to height x width, map to [-1,1].
Tensor decode_gray(const std::filesystem::path& file, int height, int width);

// Write an H x W tensor with values in [0,1] as an 8-bit PNG (rounded).
void write_gray01_png(const std::filesystem::path& file, const Tensor& img);

// Write raw 8-bit pixels (row-major, H x W) as PNG.
void write_gray_u8_png(const std::filesystem::path& file, int height, int width,
                       const unsigned char* pixels);

}  // namespace steal
