#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "siqa/dataset.hpp"
#include "siqa/network.hpp"

namespace siqa {

/// Image score = arithmetic mean of its patch predictions.
double aggregate_image_score(std::span<const double> patch_predictions);

/// Spearman rank correlation between predicted scores (higher = better) and
/// ground ranks (lower = better). Predictions are converted to descending
/// ranks with average-rank tie handling, then correlated with the given
/// ranks, so a perfect model scores +1. Throws on n < 2 or zero variance.
double srocc(std::span<const double> predicted, std::span<const int> ground_ranks);

/// Softmax with max-subtraction stabilization.
std::vector<double> softmax(std::span<const double> logits);

/// Fraction of the image's patches whose argmax scene logit matches the
/// image's cluster label (eval-mode forwards).
double scene_accuracy(const NetworkWeights& weights, const LabeledImage& image);

struct SceneEval {
    std::string scene_id;
    double srocc = 0.0;
    int n_images = 0;
};

struct ImageSceneAccuracy {
    std::string image_id;
    double accuracy = 0.0;
};

struct AspectEval {
    Aspect aspect = Aspect::texture;
    std::vector<SceneEval> per_scene;
    double mean_srocc = 0.0;
    std::vector<std::string> skipped_scenes;  // "<scene_id>: reason"
};

/// Per-scene SROCC of mean-aggregated image scores against ground ranks.
/// Scenes with fewer than two images (or degenerate predictions) are
/// skipped with a recorded warning.
AspectEval evaluate_aspect(const NetworkWeights& weights, const std::vector<LabeledScene>& scenes,
                           Aspect aspect);

struct EvalReport {
    AspectEval aspect_eval;
    std::vector<ImageSceneAccuracy> image_accuracies;
    std::string checkpoint_path;
    std::uint64_t split_seed = 0;
};

EvalReport evaluate(const NetworkWeights& weights, const std::vector<LabeledScene>& scenes,
                    Aspect aspect);

void write_eval_report_json(const std::filesystem::path& path, const EvalReport& report);
/// Two CSV tables: (scene_id, aspect, srocc) and (image_id, aspect, scene_accuracy).
void write_eval_report_csv(const std::filesystem::path& srocc_csv,
                           const std::filesystem::path& accuracy_csv, const EvalReport& report);

/// Renders the per-epoch validation SROCC / scene-accuracy trend from a
/// training report.jsonl to a PNG.
void render_training_plot(const std::filesystem::path& report_jsonl,
                          const std::filesystem::path& out_png);

}  // namespace siqa
