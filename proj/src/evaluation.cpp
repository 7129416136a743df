#include "siqa/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace siqa {

double aggregate_image_score(std::span<const double> patch_predictions) {
    if (patch_predictions.empty())
        throw ValueError("aggregate_image_score: no patch predictions");
    double acc = 0.0;
    for (double v : patch_predictions) acc += v;
    return acc / static_cast<double>(patch_predictions.size());
}

namespace {

// Average (fractional) ranks, 1-based. `descending` ranks the largest value 1.
std::vector<double> average_ranks(std::span<const double> values, bool descending) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return descending ? values[a] > values[b] : values[a] < values[b];
    });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0)
        throw UndefinedCorrelationError("rank correlation undefined: zero variance");
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

double srocc(std::span<const double> predicted, std::span<const int> ground_ranks) {
    if (predicted.size() != ground_ranks.size())
        throw DimensionError("srocc: size mismatch");
    if (predicted.size() < 2)
        throw ValueError("srocc: need at least two items");

    // Higher predicted score must map to rank 1 (better), matching the
    // lower-is-better ground ranks, so a perfect model scores +1.
    const std::vector<double> pred_ranks = average_ranks(predicted, /*descending=*/true);
    std::vector<double> ground(ground_ranks.size());
    for (std::size_t i = 0; i < ground.size(); ++i) ground[i] = ground_ranks[i];
    return pearson(pred_ranks, ground);
}

std::vector<double> softmax(std::span<const double> logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

double scene_accuracy(const NetworkWeights& weights, const LabeledImage& image) {
    if (image.patches.empty())
        throw ValueError("scene_accuracy: image " + image.image_id + " has no patches");
    ForwardTrace trace;
    std::size_t correct = 0;
    for (const Patch& patch : image.patches) {
        const ForwardOutput out = forward(weights, patch.pixels, false, 0, trace);
        const auto best = std::max_element(out.scene_logits.begin(), out.scene_logits.end());
        if (static_cast<int>(best - out.scene_logits.begin()) == image.scene_label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(image.patches.size());
}

AspectEval evaluate_aspect(const NetworkWeights& weights, const std::vector<LabeledScene>& scenes,
                           Aspect aspect) {
    AspectEval eval;
    eval.aspect = aspect;
    ForwardTrace trace;

    for (const LabeledScene& scene : scenes) {
        if (scene.images.size() < 2) {
            eval.skipped_scenes.push_back(scene.scene_id + ": fewer than two images");
            continue;
        }
        std::vector<double> scores;
        std::vector<int> ranks;
        for (const LabeledImage& img : scene.images) {
            std::vector<double> patch_scores;
            patch_scores.reserve(img.patches.size());
            for (const Patch& p : img.patches)
                patch_scores.push_back(forward(weights, p.pixels, false, 0, trace).quality);
            scores.push_back(aggregate_image_score(patch_scores));
            ranks.push_back(img.rank);
        }
        try {
            eval.per_scene.push_back({scene.scene_id, srocc(scores, ranks),
                                      static_cast<int>(scene.images.size())});
        } catch (const UndefinedCorrelationError&) {
            eval.skipped_scenes.push_back(scene.scene_id + ": degenerate predictions");
        }
    }

    if (eval.per_scene.empty())
        throw ValueError("evaluate_aspect: no evaluable scenes");
    double sum = 0.0;
    for (const auto& s : eval.per_scene) sum += s.srocc;
    eval.mean_srocc = sum / static_cast<double>(eval.per_scene.size());
    return eval;
}

EvalReport evaluate(const NetworkWeights& weights, const std::vector<LabeledScene>& scenes,
                    Aspect aspect) {
    EvalReport report;
    report.aspect_eval = evaluate_aspect(weights, scenes, aspect);
    for (const LabeledScene& scene : scenes)
        for (const LabeledImage& img : scene.images)
            report.image_accuracies.push_back({img.image_id, scene_accuracy(weights, img)});
    return report;
}

void write_eval_report_json(const std::filesystem::path& path, const EvalReport& report) {
    nlohmann::json j;
    j["aspect"] = to_string(report.aspect_eval.aspect);
    j["mean_srocc"] = report.aspect_eval.mean_srocc;
    j["checkpoint"] = report.checkpoint_path;
    j["split_seed"] = report.split_seed;
    nlohmann::json scenes = nlohmann::json::array();
    for (const auto& s : report.aspect_eval.per_scene)
        scenes.push_back({{"scene_id", s.scene_id}, {"srocc", s.srocc}, {"n_images", s.n_images}});
    j["per_scene"] = scenes;
    j["skipped_scenes"] = report.aspect_eval.skipped_scenes;
    nlohmann::json accs = nlohmann::json::array();
    for (const auto& a : report.image_accuracies)
        accs.push_back({{"image_id", a.image_id}, {"scene_accuracy", a.accuracy}});
    j["image_scene_accuracy"] = accs;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
}

namespace {
std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}
}  // namespace

void write_eval_report_csv(const std::filesystem::path& srocc_csv,
                           const std::filesystem::path& accuracy_csv, const EvalReport& report) {
    {
        std::ofstream out(srocc_csv, std::ios::binary);
        if (!out) throw IoError("cannot open " + srocc_csv.string() + " for writing");
        out << "scene_id,aspect,srocc\n";
        for (const auto& s : report.aspect_eval.per_scene)
            out << s.scene_id << "," << to_string(report.aspect_eval.aspect) << ","
                << format_g9(s.srocc) << "\n";
    }
    {
        std::ofstream out(accuracy_csv, std::ios::binary);
        if (!out) throw IoError("cannot open " + accuracy_csv.string() + " for writing");
        out << "image_id,aspect,scene_accuracy\n";
        for (const auto& a : report.image_accuracies)
            out << a.image_id << "," << to_string(report.aspect_eval.aspect) << ","
                << format_g9(a.accuracy) << "\n";
    }
}

}  // namespace siqa
