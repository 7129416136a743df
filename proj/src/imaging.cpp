#include "siqa/imaging.hpp"

#include <algorithm>
#include <cmath>

namespace siqa {

GrayImage to_grayscale(const RgbImage& rgb) {
    const std::size_t n = static_cast<std::size_t>(rgb.height) * rgb.width;
    if (rgb.height < 1 || rgb.width < 1)
        throw DimensionError("to_grayscale: empty input");
    if (rgb.r.size() != n || rgb.g.size() != n || rgb.b.size() != n)
        throw DimensionError("to_grayscale: channel dimensions do not match");

    GrayImage out(rgb.height, rgb.width);
    for (std::size_t i = 0; i < n; ++i)
        out.pixels[i] = 0.299 * rgb.r[i] + 0.587 * rgb.g[i] + 0.114 * rgb.b[i];
    return out;
}

namespace {

inline int clamp_index(int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); }

// Window sums of deviations from the center pixel. Deviations make a
// constant image produce exact zeros and keep integer-valued images
// offset-invariant bitwise: (x + b) - (c + b) == x - c for integers.
struct WindowStats {
    double sum_dev = 0.0;   // sum of (pixel - center)
    double sum_dev2 = 0.0;  // sum of (pixel - center)^2
};

WindowStats window_deviations(const GrayImage& img, const LcnParams& p, int i, int j) {
    const double center = img.at(i, j);
    WindowStats s;
    for (int dr = -p.half_width_p; dr <= p.half_width_p; ++dr) {
        const int r = clamp_index(i + dr, img.height - 1);
        for (int dc = -p.half_width_q; dc <= p.half_width_q; ++dc) {
            const int c = clamp_index(j + dc, img.width - 1);
            const double d = img.at(r, c) - center;
            s.sum_dev += d;
            s.sum_dev2 += d * d;
        }
    }
    return s;
}

void check_coords(const GrayImage& img, int i, int j) {
    if (i < 0 || j < 0 || i >= img.height || j >= img.width)
        throw DimensionError("window center outside image");
}

}  // namespace

double local_mean(const GrayImage& img, const LcnParams& params, int i, int j) {
    check_coords(img, i, j);
    const WindowStats s = window_deviations(img, params, i, j);
    return img.at(i, j) + s.sum_dev / params.window_count();
}

double local_std(const GrayImage& img, const LcnParams& params, int i, int j) {
    check_coords(img, i, j);
    const WindowStats s = window_deviations(img, params, i, j);
    const double w = params.window_count();
    const double mean_dev = s.sum_dev / w;
    const double var = s.sum_dev2 / w - mean_dev * mean_dev;
    return std::sqrt(std::max(0.0, var));
}

NormalizedImage normalize(const GrayImage& img, const LcnParams& params) {
    if (img.height < 1 || img.width < 1 || img.pixels.size() != static_cast<std::size_t>(img.height) * img.width)
        throw DimensionError("normalize: malformed image");
    if (params.stabilizer_c <= 0.0)
        throw ValueError("normalize: stabilizer C must be positive");

    NormalizedImage out;
    out.height = img.height;
    out.width = img.width;
    out.pixels.resize(img.pixels.size());

    const double w = params.window_count();
    for (int i = 0; i < img.height; ++i) {
        for (int j = 0; j < img.width; ++j) {
            const WindowStats s = window_deviations(img, params, i, j);
            const double mean_dev = s.sum_dev / w;
            // I - mu == -(mean of deviations); zero exactly on constant input.
            const double numer = -mean_dev;
            const double var = s.sum_dev2 / w - mean_dev * mean_dev;
            const double sigma = std::sqrt(std::max(0.0, var));
            out.at(i, j) = numer / (sigma + params.stabilizer_c);
        }
    }
    return out;
}

int patch_grid_count(int dim, int patch_size, int stride) {
    if (dim < patch_size) return 0;
    return (dim - patch_size) / stride + 1;
}

std::vector<Patch> extract_patches(const NormalizedImage& img, const std::string& image_id,
                                   const PatchParams& params) {
    if (params.size < 1 || params.stride < 1)
        throw ValueError("extract_patches: patch size and stride must be positive");
    if (img.height < params.size || img.width < params.size)
        throw DimensionError("extract_patches: image " + image_id + " is " +
                             std::to_string(img.height) + "x" + std::to_string(img.width) +
                             ", smaller than the " + std::to_string(params.size) +
                             "-pixel patch; no patches can be produced");

    const int rows = patch_grid_count(img.height, params.size, params.stride);
    const int cols = patch_grid_count(img.width, params.size, params.stride);

    std::vector<Patch> patches;
    patches.reserve(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            Patch p;
            p.size = params.size;
            p.source_image_id = image_id;
            p.origin_row = r * params.stride;
            p.origin_col = c * params.stride;
            p.pixels.resize(static_cast<std::size_t>(params.size) * params.size);
            for (int y = 0; y < params.size; ++y) {
                const double* src = img.pixels.data() +
                                    static_cast<std::size_t>(p.origin_row + y) * img.width +
                                    p.origin_col;
                std::copy(src, src + params.size,
                          p.pixels.begin() + static_cast<std::size_t>(y) * params.size);
            }
            patches.push_back(std::move(p));
        }
    }
    return patches;
}

}  // namespace siqa
