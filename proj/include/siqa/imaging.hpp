#pragma once

#include <string>
#include <vector>

#include "siqa/common.hpp"

namespace siqa {

/// Grayscale luminance image, values in [0, 255], row-major.
struct GrayImage {
    int height = 0;
    int width = 0;
    std::vector<double> pixels;

    GrayImage() = default;
    GrayImage(int h, int w, double fill = 0.0)
        : height(h), width(w), pixels(static_cast<std::size_t>(h) * w, fill) {
        if (h < 1 || w < 1) throw DimensionError("GrayImage: dimensions must be positive");
    }

    double& at(int r, int c) { return pixels[static_cast<std::size_t>(r) * width + c]; }
    double at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * width + c]; }
};

/// Local-contrast-normalized image; dimensionless values, same shape as input.
struct NormalizedImage {
    int height = 0;
    int width = 0;
    std::vector<double> pixels;

    double& at(int r, int c) { return pixels[static_cast<std::size_t>(r) * width + c]; }
    double at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * width + c]; }
};

/// Planar RGB input, each channel in [0, 255].
struct RgbImage {
    int height = 0;
    int width = 0;
    std::vector<double> r, g, b;
};

/// Window half-widths and the stabilizing constant of the contrast
/// normalization. The window spans rows i-P..i+P and cols j-Q..j+Q.
struct LcnParams {
    int half_width_p = 3;
    int half_width_q = 3;
    double stabilizer_c = 1.0;

    int window_count() const { return (2 * half_width_p + 1) * (2 * half_width_q + 1); }
};

struct PatchParams {
    int size = 64;
    int stride = 160;
};

/// One normalized input window for the network, with its provenance.
struct Patch {
    int size = 64;
    std::vector<double> pixels;  // size x size, row-major
    std::string source_image_id;
    int origin_row = 0;
    int origin_col = 0;
};

/// BT.601 luma conversion: 0.299 R + 0.587 G + 0.114 B.
GrayImage to_grayscale(const RgbImage& rgb);

/// Mean of the window centered at (i, j), out-of-bounds pixels replicated
/// from the nearest edge.
double local_mean(const GrayImage& img, const LcnParams& params, int i, int j);

/// Population standard deviation over the same window.
double local_std(const GrayImage& img, const LcnParams& params, int i, int j);

/// Per-pixel (I - mu) / (sigma + C). A constant image maps to exact zeros,
/// and integer-valued images are offset-invariant bit-for-bit.
NormalizedImage normalize(const GrayImage& img, const LcnParams& params);

/// Patches anchored on the stride grid, row-major; windows that do not fit
/// are discarded. Throws if the image is smaller than the patch.
std::vector<Patch> extract_patches(const NormalizedImage& img, const std::string& image_id,
                                   const PatchParams& params = {});

/// Closed-form patch count per axis: floor((dim - size) / stride) + 1.
int patch_grid_count(int dim, int patch_size, int stride);

}  // namespace siqa
