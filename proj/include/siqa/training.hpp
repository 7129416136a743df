#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "siqa/dataset.hpp"
#include "siqa/network.hpp"

namespace siqa {

struct LossConfig {
    double alpha = 1.0;  // weight of the scene-detection loss; 0 = single-task
};

struct TrainConfig {
    double learning_rate = 0.001;
    int batch_size = 128;
    int epochs = 50;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double split_fraction = 0.8;  // scene-level train share
    std::uint64_t seed = 0;
    Aspect aspect = Aspect::texture;
};

/// Mean absolute error over the batch.
double quality_loss(std::span<const double> predictions, std::span<const double> labels);

/// Mean softmax cross-entropy, stabilized by max subtraction.
double scene_loss(std::span<const std::vector<double>> logits, std::span<const int> labels);
double scene_loss_single(std::span<const double> logits, int label);

/// L = Lq + alpha * Ls.
double combined_loss(double lq, double ls, const LossConfig& config);

/// Maps a within-scene rank (1 = best) to a quality target in [0, 1]:
/// (n - rank) / (n - 1). Strictly decreasing in rank.
double make_labels(int rank, int n_devices = 15);

/// Scene-level split: round(fraction * n) training scenes after a seeded
/// shuffle, the rest validation. Every device image of a scene stays on one
/// side. At least one scene lands on each side.
std::pair<std::vector<std::string>, std::vector<std::string>> split_by_scene(
    std::vector<std::string> scene_ids, double fraction, std::uint64_t seed);

struct AdamState {
    std::vector<double> m, v;
    long step = 0;
};
void adam_step(std::vector<double>& params, const std::vector<double>& grad, AdamState& state,
               const TrainConfig& config);

struct BatchLoss {
    double quality = 0.0;
    double scene = 0.0;
    double combined(const LossConfig& c) const { return quality + c.alpha * scene; }
};

/// Mean losses over the indexed samples; forward only. The exact quantity
/// the gradient below differentiates.
BatchLoss batch_loss(const NetworkWeights& weights, const std::vector<Sample>& samples,
                     std::span<const std::size_t> indices, bool train_mode,
                     std::uint64_t dropout_seed);

/// Accumulates d(combined loss)/d(params) into grad and returns the losses.
BatchLoss batch_gradient(const NetworkWeights& weights, const std::vector<Sample>& samples,
                         std::span<const std::size_t> indices, const LossConfig& loss_config,
                         bool train_mode, std::uint64_t dropout_seed, std::vector<double>& grad);

struct EpochRecord {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_srocc = 0.0;
    double val_scene_accuracy = 0.0;
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;  // 1-based, argmax validation SROCC
    double best_val_srocc = 0.0;
    std::string best_checkpoint_path;
    std::string last_checkpoint_path;
    std::vector<std::string> train_scenes, val_scenes;
};

/// Full training run: scene-level 80/20 split, seeded shuffling, mini-batch
/// Adam on the combined loss, per-epoch validation SROCC / scene accuracy,
/// best-epoch checkpointing. Writes report.jsonl, summary.json,
/// ckpt_best.siqa and ckpt_last.siqa under out_dir. Throws DivergenceError
/// (after dumping diagnostics) if the loss stops being finite.
TrainReport train(const std::vector<LabeledScene>& dataset, const NetworkConfig& net_config,
                  const TrainConfig& train_config, const LossConfig& loss_config,
                  const std::filesystem::path& out_dir);

void write_train_summary(const std::filesystem::path& path, const TrainReport& report,
                         const TrainConfig& config, const LossConfig& loss_config);

}  // namespace siqa
