#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "siqa/imaging.hpp"

namespace siqa {

inline constexpr int kSceneFeatureDim = 37;
inline constexpr int kSceneGridSide = 8;  // 8x8 = 64 sub-blocks
inline constexpr int kSceneSubBlocks = kSceneGridSide * kSceneGridSide;
inline constexpr int kHistogramBins = 16;
inline constexpr int kEdgeFilterCount = 5;
inline constexpr double kEdgeThreshold = 11.0;  // MPEG-7 edge-histogram convention

/// Per-image scene descriptor: 16-bin histogram of sub-block means,
/// 16-bin histogram of sub-block stds, and 5 edge-type ratios.
struct SceneFeatureVector {
    std::string image_id;
    std::array<double, kSceneFeatureDim> values{};

    double* mean_hist() { return values.data(); }
    const double* mean_hist() const { return values.data(); }
    double* std_hist() { return values.data() + kHistogramBins; }
    const double* std_hist() const { return values.data() + kHistogramBins; }
    double* edge_ratios() { return values.data() + 2 * kHistogramBins; }
    const double* edge_ratios() const { return values.data() + 2 * kHistogramBins; }
};

/// The five 2x2 edge kernels: vertical, horizontal, 45-degree, 135-degree,
/// non-directional. Every kernel sums to zero.
struct EdgeFilterBank {
    // kernel[k] = {top-left, top-right, bottom-left, bottom-right}
    std::array<std::array<double, 4>, kEdgeFilterCount> kernels;
    static EdgeFilterBank standard();
};

/// A rectangle of the 8x8 sub-block partition, rows [r0,r1) x cols [c0,c1).
struct BlockRect {
    int r0, r1, c0, c1;
    int rows() const { return r1 - r0; }
    int cols() const { return c1 - c0; }
};

/// Fitted clustering over standardized feature space.
struct SceneModel {
    int k = 4;
    std::vector<std::array<double, kSceneFeatureDim>> centroids;  // k entries
    std::array<double, kSceneFeatureDim> feature_mean{};
    std::array<double, kSceneFeatureDim> feature_std{};  // degenerate dims set to 1
    std::uint64_t seed = 0;
    double edge_threshold = kEdgeThreshold;
    std::vector<double> objective_history;  // within-cluster sum of squares per iteration
};

struct SceneLabel {
    std::string image_id;
    int scene_id = 0;  // in {0..k-1}
};

/// 8x8 partition with floor-rounded boundaries; the blocks tile the image.
std::array<BlockRect, kSceneSubBlocks> subblock_grid(const GrayImage& img);

/// Mean and population std of the raw gray values for each sub-block.
void block_statistics(const GrayImage& img, const std::array<BlockRect, kSceneSubBlocks>& blocks,
                      std::array<double, kSceneSubBlocks>& means,
                      std::array<double, kSceneSubBlocks>& stds);

/// Equal-width 16-bin histogram over [range_min, range_max], values clamped
/// into range, normalized by the number of values.
std::array<double, kHistogramBins> histogram16(const double* values, std::size_t count,
                                               double range_min, double range_max);

/// Per sub-block, classify non-overlapping 2x2 cells by the strongest filter
/// response above the threshold; returns the five per-filter cell ratios
/// averaged over the 64 sub-blocks.
std::array<double, kEdgeFilterCount> edge_ratios(const GrayImage& img, const EdgeFilterBank& filters,
                                                 double threshold);

/// Full 37-dimension descriptor; requires at least a 16x16 image.
SceneFeatureVector extract_features(const GrayImage& img, const std::string& image_id,
                                    double threshold = kEdgeThreshold);

/// K-means over z-scored features: k-means++ seeding, Lloyd iterations
/// (at most 300, stop when centroid movement < 1e-6), cluster ids relabeled
/// by ascending centroid norm.
SceneModel fit_scene_model(const std::vector<SceneFeatureVector>& features, int k, std::uint64_t seed);

/// Nearest standardized centroid; ties broken by lowest scene id.
SceneLabel assign_scene(const SceneModel& model, const SceneFeatureVector& feature);

// -- persistence -------------------------------------------------------------

void write_features_csv(const std::filesystem::path& path,
                        const std::vector<SceneFeatureVector>& features);
std::vector<SceneFeatureVector> read_features_csv(const std::filesystem::path& path);

void save_scene_model(const std::filesystem::path& path, const SceneModel& model);
SceneModel load_scene_model(const std::filesystem::path& path);

void write_scene_labels(const std::filesystem::path& path, const std::vector<SceneLabel>& labels);
std::map<std::string, int> read_scene_labels(const std::filesystem::path& path);

}  // namespace siqa
