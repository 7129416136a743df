#include "siqa/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

namespace siqa {

EdgeFilterBank EdgeFilterBank::standard() {
    const double s = std::sqrt(2.0);
    EdgeFilterBank bank;
    bank.kernels[0] = {1, -1, 1, -1};    // vertical
    bank.kernels[1] = {1, 1, -1, -1};    // horizontal
    bank.kernels[2] = {s, 0, 0, -s};     // 45 degrees
    bank.kernels[3] = {0, s, -s, 0};     // 135 degrees
    bank.kernels[4] = {2, -2, -2, 2};    // non-directional
    return bank;
}

std::array<BlockRect, kSceneSubBlocks> subblock_grid(const GrayImage& img) {
    if (img.height < kSceneGridSide || img.width < kSceneGridSide)
        throw DimensionError("subblock_grid: image must be at least 8x8");

    std::array<BlockRect, kSceneSubBlocks> blocks;
    for (int r = 0; r < kSceneGridSide; ++r) {
        const int r0 = r * img.height / kSceneGridSide;
        const int r1 = (r + 1) * img.height / kSceneGridSide;
        for (int c = 0; c < kSceneGridSide; ++c) {
            const int c0 = c * img.width / kSceneGridSide;
            const int c1 = (c + 1) * img.width / kSceneGridSide;
            blocks[r * kSceneGridSide + c] = BlockRect{r0, r1, c0, c1};
        }
    }
    return blocks;
}

void block_statistics(const GrayImage& img, const std::array<BlockRect, kSceneSubBlocks>& blocks,
                      std::array<double, kSceneSubBlocks>& means,
                      std::array<double, kSceneSubBlocks>& stds) {
    for (int b = 0; b < kSceneSubBlocks; ++b) {
        const BlockRect& rect = blocks[b];
        const double n = static_cast<double>(rect.rows()) * rect.cols();
        double sum = 0.0, sum2 = 0.0;
        for (int r = rect.r0; r < rect.r1; ++r)
            for (int c = rect.c0; c < rect.c1; ++c) {
                const double v = img.at(r, c);
                sum += v;
                sum2 += v * v;
            }
        const double mean = sum / n;
        means[b] = mean;
        stds[b] = std::sqrt(std::max(0.0, sum2 / n - mean * mean));
    }
}

std::array<double, kHistogramBins> histogram16(const double* values, std::size_t count,
                                               double range_min, double range_max) {
    if (!(range_max > range_min))
        throw ValueError("histogram16: range_max must exceed range_min");

    std::array<double, kHistogramBins> bins{};
    const double width = (range_max - range_min) / kHistogramBins;
    for (std::size_t i = 0; i < count; ++i) {
        double v = std::clamp(values[i], range_min, range_max);
        int b = static_cast<int>((v - range_min) / width);
        if (b >= kHistogramBins) b = kHistogramBins - 1;  // v == range_max
        bins[b] += 1.0;
    }
    for (double& b : bins) b /= static_cast<double>(count);
    return bins;
}

std::array<double, kEdgeFilterCount> edge_ratios(const GrayImage& img, const EdgeFilterBank& filters,
                                                 double threshold) {
    const auto blocks = subblock_grid(img);
    std::array<double, kEdgeFilterCount> accum{};

    for (const BlockRect& rect : blocks) {
        std::array<int, kEdgeFilterCount> counts{};
        int cells = 0;
        for (int r = rect.r0; r + 1 < rect.r1; r += 2) {
            for (int c = rect.c0; c + 1 < rect.c1; c += 2) {
                const double tl = img.at(r, c), tr = img.at(r, c + 1);
                const double bl = img.at(r + 1, c), br = img.at(r + 1, c + 1);
                int best = -1;
                double best_mag = threshold;
                for (int k = 0; k < kEdgeFilterCount; ++k) {
                    const auto& f = filters.kernels[k];
                    const double resp = f[0] * tl + f[1] * tr + f[2] * bl + f[3] * br;
                    const double mag = std::fabs(resp);
                    if (mag > best_mag) {
                        best_mag = mag;
                        best = k;
                    }
                }
                if (best >= 0) ++counts[best];
                ++cells;
            }
        }
        if (cells > 0)
            for (int k = 0; k < kEdgeFilterCount; ++k)
                accum[k] += static_cast<double>(counts[k]) / cells;
    }
    for (double& v : accum) v /= kSceneSubBlocks;
    return accum;
}

SceneFeatureVector extract_features(const GrayImage& img, const std::string& image_id,
                                    double threshold) {
    if (img.height < 16 || img.width < 16)
        throw DimensionError("extract_features: image must be at least 16x16");

    const auto blocks = subblock_grid(img);
    std::array<double, kSceneSubBlocks> means, stds;
    block_statistics(img, blocks, means, stds);

    // Fixed ranges keep the descriptor comparable across images: sub-block
    // means live in [0, 256), stds cannot exceed 127.5 for 8-bit data.
    const auto mean_hist = histogram16(means.data(), means.size(), 0.0, 256.0);
    const auto std_hist = histogram16(stds.data(), stds.size(), 0.0, 128.0);
    const auto edges = edge_ratios(img, EdgeFilterBank::standard(), threshold);

    SceneFeatureVector f;
    f.image_id = image_id;
    std::copy(mean_hist.begin(), mean_hist.end(), f.mean_hist());
    std::copy(std_hist.begin(), std_hist.end(), f.std_hist());
    std::copy(edges.begin(), edges.end(), f.edge_ratios());
    return f;
}

// -- k-means ------------------------------------------------------------------

namespace {

using Feature = std::array<double, kSceneFeatureDim>;

double sq_dist(const Feature& a, const Feature& b) {
    double s = 0.0;
    for (int i = 0; i < kSceneFeatureDim; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

int nearest_centroid(const std::vector<Feature>& centroids, const Feature& p) {
    int best = 0;
    double best_d = sq_dist(centroids[0], p);
    for (int k = 1; k < static_cast<int>(centroids.size()); ++k) {
        const double d = sq_dist(centroids[k], p);
        if (d < best_d) {  // strict: ties keep the lowest id
            best_d = d;
            best = k;
        }
    }
    return best;
}

std::vector<Feature> kmeanspp_init(const std::vector<Feature>& points, int k, std::mt19937_64& rng) {
    std::vector<Feature> centroids;
    centroids.reserve(k);
    centroids.push_back(points[uniform_below(rng, points.size())]);

    std::vector<double> d2(points.size());
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const Feature& c : centroids) best = std::min(best, sq_dist(c, points[i]));
            d2[i] = best;
            total += best;
        }
        if (total <= 0.0)
            throw DegenerateClusteringError("k-means++: fewer distinct points than clusters");
        const double r = uniform01(rng) * total;
        double cum = 0.0;
        std::size_t pick = points.size() - 1;
        for (std::size_t i = 0; i < points.size(); ++i) {
            cum += d2[i];
            if (cum > r) {
                pick = i;
                break;
            }
        }
        centroids.push_back(points[pick]);
    }
    return centroids;
}

}  // namespace

SceneModel fit_scene_model(const std::vector<SceneFeatureVector>& features, int k, std::uint64_t seed) {
    if (k < 1) throw ValueError("fit_scene_model: k must be positive");
    if (static_cast<int>(features.size()) < k)
        throw DegenerateClusteringError("fit_scene_model: need at least k feature vectors, got " +
                                        std::to_string(features.size()));

    SceneModel model;
    model.k = k;
    model.seed = seed;

    const std::size_t n = features.size();
    for (int d = 0; d < kSceneFeatureDim; ++d) {
        double sum = 0.0;
        for (const auto& f : features) sum += f.values[d];
        const double mean = sum / static_cast<double>(n);
        double var = 0.0;
        for (const auto& f : features) {
            const double dd = f.values[d] - mean;
            var += dd * dd;
        }
        const double sd = std::sqrt(var / static_cast<double>(n));
        model.feature_mean[d] = mean;
        model.feature_std[d] = sd > 0.0 ? sd : 1.0;
    }

    std::vector<Feature> points(n);
    for (std::size_t i = 0; i < n; ++i)
        for (int d = 0; d < kSceneFeatureDim; ++d)
            points[i][d] = (features[i].values[d] - model.feature_mean[d]) / model.feature_std[d];

    {
        std::set<Feature> distinct(points.begin(), points.end());
        if (static_cast<int>(distinct.size()) < k)
            throw DegenerateClusteringError("fit_scene_model: fewer than k distinct points");
    }

    std::mt19937_64 rng(sub_seed(seed, "kmeans++"));
    std::vector<Feature> centroids = kmeanspp_init(points, k, rng);

    std::vector<int> assignment(n, -1);
    constexpr int kMaxIter = 300;
    constexpr double kMoveTol = 1e-6;

    for (int iter = 0; iter < kMaxIter; ++iter) {
        double wcss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            assignment[i] = nearest_centroid(centroids, points[i]);
            wcss += sq_dist(centroids[assignment[i]], points[i]);
        }
        model.objective_history.push_back(wcss);

        std::vector<Feature> sums(k, Feature{});
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (int d = 0; d < kSceneFeatureDim; ++d) sums[assignment[i]][d] += points[i][d];
            ++counts[assignment[i]];
        }

        double max_move = 0.0;
        for (int c = 0; c < k; ++c) {
            Feature updated;
            if (counts[c] == 0) {
                // Re-seed an emptied cluster with the point farthest from
                // its current centroid.
                std::size_t far_idx = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = sq_dist(centroids[assignment[i]], points[i]);
                    if (d > far_d) {
                        far_d = d;
                        far_idx = i;
                    }
                }
                updated = points[far_idx];
            } else {
                for (int d = 0; d < kSceneFeatureDim; ++d)
                    updated[d] = sums[c][d] / static_cast<double>(counts[c]);
            }
            max_move = std::max(max_move, std::sqrt(sq_dist(updated, centroids[c])));
            centroids[c] = updated;
        }
        if (max_move < kMoveTol) break;
    }

    // Canonical ids: ascending centroid norm, stable for equal norms.
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return sq_dist(centroids[a], Feature{}) < sq_dist(centroids[b], Feature{});
    });
    model.centroids.resize(k);
    for (int c = 0; c < k; ++c) model.centroids[c] = centroids[order[c]];
    return model;
}

SceneLabel assign_scene(const SceneModel& model, const SceneFeatureVector& feature) {
    if (model.centroids.empty()) throw ValueError("assign_scene: model is not fitted");
    Feature p;
    for (int d = 0; d < kSceneFeatureDim; ++d)
        p[d] = (feature.values[d] - model.feature_mean[d]) / model.feature_std[d];
    return SceneLabel{feature.image_id, nearest_centroid(model.centroids, p)};
}

// -- persistence ---------------------------------------------------------------

namespace {

std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

void write_features_csv(const std::filesystem::path& path,
                        const std::vector<SceneFeatureVector>& features) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "image_id";
    for (int d = 0; d < kSceneFeatureDim; ++d) out << ",f" << d;
    out << "\n";
    for (const auto& f : features) {
        out << f.image_id;
        for (int d = 0; d < kSceneFeatureDim; ++d) out << "," << format_g9(f.values[d]);
        out << "\n";
    }
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<SceneFeatureVector> read_features_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty features CSV: " + path.string());

    std::vector<SceneFeatureVector> features;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        SceneFeatureVector f;
        if (!std::getline(ss, f.image_id, ',')) throw IoError("malformed feature row: " + line);
        for (int d = 0; d < kSceneFeatureDim; ++d) {
            if (!std::getline(ss, field, ','))
                throw IoError("feature row for " + f.image_id + " has fewer than 37 values");
            f.values[d] = std::stod(field);
        }
        features.push_back(std::move(f));
    }
    return features;
}

void save_scene_model(const std::filesystem::path& path, const SceneModel& model) {
    nlohmann::json j;
    j["k"] = model.k;
    j["seed"] = model.seed;
    j["edge_threshold"] = model.edge_threshold;
    j["feature_mean"] = model.feature_mean;
    j["feature_std"] = model.feature_std;
    j["centroids"] = model.centroids;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
}

SceneModel load_scene_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json j = nlohmann::json::parse(in);

    SceneModel model;
    model.k = j.at("k").get<int>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.edge_threshold = j.at("edge_threshold").get<double>();
    model.feature_mean = j.at("feature_mean").get<std::array<double, kSceneFeatureDim>>();
    model.feature_std = j.at("feature_std").get<std::array<double, kSceneFeatureDim>>();
    model.centroids = j.at("centroids").get<std::vector<std::array<double, kSceneFeatureDim>>>();
    if (static_cast<int>(model.centroids.size()) != model.k)
        throw IoError("scene model centroid count does not match k");
    return model;
}

void write_scene_labels(const std::filesystem::path& path, const std::vector<SceneLabel>& labels) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& l : labels) j[l.image_id] = l.scene_id;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
}

std::map<std::string, int> read_scene_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json j = nlohmann::json::parse(in);
    std::map<std::string, int> labels;
    for (auto it = j.begin(); it != j.end(); ++it) labels[it.key()] = it.value().get<int>();
    return labels;
}

}  // namespace siqa
