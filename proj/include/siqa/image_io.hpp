#pragma once

#include <filesystem>

#include "siqa/imaging.hpp"

namespace siqa {

/// Decodes an 8-bit PNG or JPEG file into planar RGB in [0, 255].
RgbImage read_rgb_image(const std::filesystem::path& path);

/// Writes an 8-bit grayscale PNG; values are clamped and rounded.
void write_gray_png(const std::filesystem::path& path, const GrayImage& img);

}  // namespace siqa
