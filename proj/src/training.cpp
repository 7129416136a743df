#include "siqa/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "siqa/checkpoint.hpp"
#include "siqa/evaluation.hpp"

namespace siqa {

double quality_loss(std::span<const double> predictions, std::span<const double> labels) {
    if (predictions.size() != labels.size())
        throw DimensionError("quality_loss: size mismatch");
    if (predictions.empty()) throw ValueError("quality_loss: empty batch");
    double acc = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        acc += std::fabs(predictions[i] - labels[i]);
    return acc / static_cast<double>(predictions.size());
}

double scene_loss_single(std::span<const double> logits, int label) {
    if (label < 0 || label >= static_cast<int>(logits.size()))
        throw ValueError("scene_loss: label " + std::to_string(label) + " outside 0.." +
                         std::to_string(logits.size() - 1));
    const double m = *std::max_element(logits.begin(), logits.end());
    double lse = 0.0;
    for (double l : logits) lse += std::exp(l - m);
    return m + std::log(lse) - logits[label];
}

double scene_loss(std::span<const std::vector<double>> logits, std::span<const int> labels) {
    if (logits.size() != labels.size()) throw DimensionError("scene_loss: size mismatch");
    if (logits.empty()) throw ValueError("scene_loss: empty batch");
    double acc = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i)
        acc += scene_loss_single(logits[i], labels[i]);
    return acc / static_cast<double>(logits.size());
}

double combined_loss(double lq, double ls, const LossConfig& config) {
    if (config.alpha < 0.0) throw ValueError("combined_loss: alpha must be non-negative");
    return lq + config.alpha * ls;
}

double make_labels(int rank, int n_devices) {
    if (n_devices < 2) throw ValueError("make_labels: need at least two devices");
    if (rank < 1 || rank > n_devices)
        throw ValueError("make_labels: rank " + std::to_string(rank) + " outside 1.." +
                         std::to_string(n_devices));
    return static_cast<double>(n_devices - rank) / static_cast<double>(n_devices - 1);
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_by_scene(
    std::vector<std::string> scene_ids, double fraction, std::uint64_t seed) {
    if (scene_ids.size() < 2)
        throw ValueError("split_by_scene: need at least two scenes");
    if (fraction <= 0.0 || fraction >= 1.0)
        throw ValueError("split_by_scene: fraction must be in (0, 1)");

    std::mt19937_64 rng(seed);
    seeded_shuffle(scene_ids, rng);

    const auto n = scene_ids.size();
    std::size_t n_train = static_cast<std::size_t>(
        std::lround(fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

    std::vector<std::string> train(scene_ids.begin(), scene_ids.begin() + n_train);
    std::vector<std::string> val(scene_ids.begin() + n_train, scene_ids.end());
    return {std::move(train), std::move(val)};
}

void adam_step(std::vector<double>& params, const std::vector<double>& grad, AdamState& state,
               const TrainConfig& config) {
    if (state.m.size() != params.size()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
        state.step = 0;
    }
    ++state.step;
    const double b1 = config.adam_beta1, b2 = config.adam_beta2;
    const double bias1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * grad[i];
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * grad[i] * grad[i];
        const double mhat = state.m[i] / bias1;
        const double vhat = state.v[i] / bias2;
        params[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.adam_eps);
    }
}

BatchLoss batch_loss(const NetworkWeights& weights, const std::vector<Sample>& samples,
                     std::span<const std::size_t> indices, bool train_mode,
                     std::uint64_t dropout_seed) {
    if (indices.empty()) throw ValueError("batch_loss: empty batch");
    BatchLoss loss;
    ForwardTrace trace;
    for (std::size_t pos = 0; pos < indices.size(); ++pos) {
        const Sample& s = samples[indices[pos]];
        const ForwardOutput out =
            forward(weights, s.patch.pixels, train_mode, sub_seed(dropout_seed, pos), trace);
        loss.quality += std::fabs(out.quality - s.quality_label);
        loss.scene += scene_loss_single(out.scene_logits, s.scene_label);
    }
    const double n = static_cast<double>(indices.size());
    loss.quality /= n;
    loss.scene /= n;
    return loss;
}

BatchLoss batch_gradient(const NetworkWeights& weights, const std::vector<Sample>& samples,
                         std::span<const std::size_t> indices, const LossConfig& loss_config,
                         bool train_mode, std::uint64_t dropout_seed, std::vector<double>& grad) {
    if (indices.empty()) throw ValueError("batch_gradient: empty batch");
    if (grad.size() != weights.params.size())
        throw DimensionError("batch_gradient: gradient buffer size mismatch");

    const double n = static_cast<double>(indices.size());
    BatchLoss loss;
    ForwardTrace trace;
    std::vector<double> dlogits(weights.config.scene_classes);

    for (std::size_t pos = 0; pos < indices.size(); ++pos) {
        const Sample& s = samples[indices[pos]];
        const ForwardOutput out =
            forward(weights, s.patch.pixels, train_mode, sub_seed(dropout_seed, pos), trace);

        const double diff = out.quality - s.quality_label;
        loss.quality += std::fabs(diff);
        loss.scene += scene_loss_single(out.scene_logits, s.scene_label);

        const double dq = (diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0)) / n;
        const std::vector<double> p = softmax(out.scene_logits);
        for (int c = 0; c < weights.config.scene_classes; ++c)
            dlogits[c] = loss_config.alpha * (p[c] - (c == s.scene_label ? 1.0 : 0.0)) / n;

        backward(weights, trace, s.patch.pixels, dq, dlogits, grad);
    }
    loss.quality /= n;
    loss.scene /= n;
    return loss;
}

namespace {

nlohmann::json epoch_to_json(const EpochRecord& r) {
    return {{"epoch", r.epoch},
            {"train_loss", r.train_loss},
            {"val_srocc", r.val_srocc},
            {"val_scene_accuracy", r.val_scene_accuracy}};
}

double mean_scene_accuracy(const NetworkWeights& weights,
                           const std::vector<LabeledScene>& scenes) {
    double acc = 0.0;
    std::size_t count = 0;
    for (const auto& scene : scenes)
        for (const auto& img : scene.images) {
            acc += scene_accuracy(weights, img);
            ++count;
        }
    return count > 0 ? acc / static_cast<double>(count) : 0.0;
}

}  // namespace

TrainReport train(const std::vector<LabeledScene>& dataset, const NetworkConfig& net_config,
                  const TrainConfig& train_config, const LossConfig& loss_config,
                  const std::filesystem::path& out_dir) {
    net_config.validate();
    if (dataset.size() < 2) throw ValueError("train: need at least two scenes");
    std::filesystem::create_directories(out_dir);

    std::vector<std::string> scene_ids;
    for (const auto& s : dataset) scene_ids.push_back(s.scene_id);
    auto [train_ids, val_ids] = split_by_scene(scene_ids, train_config.split_fraction,
                                               sub_seed(train_config.seed, "split"));

    auto pick = [&](const std::vector<std::string>& ids) {
        std::vector<LabeledScene> out;
        for (const auto& s : dataset)
            if (std::find(ids.begin(), ids.end(), s.scene_id) != ids.end()) out.push_back(s);
        return out;
    };
    const std::vector<LabeledScene> train_scenes = pick(train_ids);
    const std::vector<LabeledScene> val_scenes = pick(val_ids);

    const std::vector<Sample> train_samples = build_samples(train_scenes, train_config.aspect);
    if (train_samples.empty()) throw ValueError("train: no training samples");

    NetworkWeights weights = init_weights(net_config, sub_seed(train_config.seed, "init"));
    AdamState adam;
    std::vector<double> grad(weights.params.size(), 0.0);

    TrainReport report;
    report.train_scenes = train_ids;
    report.val_scenes = val_ids;
    report.best_val_srocc = -2.0;

    const auto report_path = out_dir / "report.jsonl";
    std::ofstream report_out(report_path, std::ios::binary);
    if (!report_out) throw IoError("cannot open " + report_path.string() + " for writing");

    std::vector<std::size_t> order(train_samples.size());
    std::iota(order.begin(), order.end(), 0);
    const std::uint64_t shuffle_base = sub_seed(train_config.seed, "shuffle");
    const std::uint64_t dropout_base = sub_seed(train_config.seed, "dropout");
    std::uint64_t batch_counter = 0;
    nlohmann::json history = nlohmann::json::array();

    for (int epoch = 1; epoch <= train_config.epochs; ++epoch) {
        std::mt19937_64 shuffle_rng(sub_seed(shuffle_base, static_cast<std::uint64_t>(epoch)));
        seeded_shuffle(order, shuffle_rng);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(train_config.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(train_config.batch_size));
            const std::span<const std::size_t> batch(order.data() + start, end - start);

            std::fill(grad.begin(), grad.end(), 0.0);
            const BatchLoss loss = batch_gradient(weights, train_samples, batch, loss_config,
                                                  true, sub_seed(dropout_base, batch_counter),
                                                  grad);
            ++batch_counter;
            const double combined = loss.combined(loss_config);
            if (!std::isfinite(combined)) {
                double param_norm = 0.0, grad_norm = 0.0;
                for (double v : weights.params) param_norm += v * v;
                for (double v : grad) grad_norm += v * v;
                nlohmann::json dump = {{"epoch", epoch},
                                       {"batch", batch_counter},
                                       {"quality_loss", loss.quality},
                                       {"scene_loss", loss.scene},
                                       {"param_l2", std::sqrt(param_norm)},
                                       {"grad_l2", std::sqrt(grad_norm)}};
                std::ofstream dump_out(out_dir / "divergence.json", std::ios::binary);
                dump_out << dump.dump(2) << "\n";
                throw DivergenceError("training diverged at epoch " + std::to_string(epoch) +
                                      "; state dumped to " +
                                      (out_dir / "divergence.json").string());
            }
            loss_sum += combined * static_cast<double>(batch.size());
            adam_step(weights.params, grad, adam, train_config);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(order.size());
        rec.val_srocc = evaluate_aspect(weights, val_scenes, train_config.aspect).mean_srocc;
        rec.val_scene_accuracy = mean_scene_accuracy(weights, val_scenes);
        report.epochs.push_back(rec);
        history.push_back(epoch_to_json(rec));

        report_out << epoch_to_json(rec).dump() << "\n";
        report_out.flush();

        nlohmann::json meta = {{"epoch", epoch},
                               {"aspect", to_string(train_config.aspect)},
                               {"seed", train_config.seed},
                               {"alpha", loss_config.alpha},
                               {"val_srocc", rec.val_srocc},
                               {"val_scene_accuracy", rec.val_scene_accuracy},
                               {"metric_history", history}};
        const auto last_path = out_dir / "ckpt_last.siqa";
        save_checkpoint(last_path, weights, meta);
        report.last_checkpoint_path = last_path.string();

        if (rec.val_srocc > report.best_val_srocc) {
            report.best_val_srocc = rec.val_srocc;
            report.best_epoch = epoch;
            const auto best_path = out_dir / "ckpt_best.siqa";
            save_checkpoint(best_path, weights, meta);
            report.best_checkpoint_path = best_path.string();
        }
    }

    write_train_summary(out_dir / "summary.json", report, train_config, loss_config);
    return report;
}

void write_train_summary(const std::filesystem::path& path, const TrainReport& report,
                         const TrainConfig& config, const LossConfig& loss_config) {
    nlohmann::json j;
    j["best_epoch"] = report.best_epoch;
    j["best_val_srocc"] = report.best_val_srocc;
    j["best_checkpoint"] = report.best_checkpoint_path;
    j["last_checkpoint"] = report.last_checkpoint_path;
    j["epochs_run"] = report.epochs.size();
    j["aspect"] = to_string(config.aspect);
    j["alpha"] = loss_config.alpha;
    j["learning_rate"] = config.learning_rate;
    j["batch_size"] = config.batch_size;
    j["seed"] = config.seed;
    j["train_scenes"] = report.train_scenes;
    j["val_scenes"] = report.val_scenes;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
}

}  // namespace siqa
