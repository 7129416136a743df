// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Exit code is the number of failures.
// Run with no arguments for the full suite, or pass criterion numbers
// (e.g. "acceptance 2 8") to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>
#include <unistd.h>

#include <json.hpp>

#include "siqa/checkpoint.hpp"
#include "siqa/cli.hpp"
#include "siqa/dataset.hpp"
#include "siqa/evaluation.hpp"
#include "siqa/image_io.hpp"
#include "siqa/scene.hpp"
#include "siqa/training.hpp"

using namespace siqa;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::vector<std::string> notes;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            notes.push_back(what);
        }
    }
    void note(const std::string& what) { notes.push_back(what); }
};

fs::path work_dir() {
    static fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("siqa_acceptance_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli_args(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"siqa"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

GrayImage random_gray(int h, int w, std::mt19937_64& rng, bool integer_valued) {
    GrayImage img(h, w);
    for (double& v : img.pixels) {
        const double u = uniform01(rng) * 255.0;
        v = integer_valued ? std::floor(u) : u;
    }
    return img;
}

double oracle_window_mean(const GrayImage& img, int p, int q, int i, int j) {
    double sum = 0.0;
    int count = 0;
    for (int dr = -p; dr <= p; ++dr)
        for (int dc = -q; dc <= q; ++dc) {
            sum += img.at(std::clamp(i + dr, 0, img.height - 1),
                          std::clamp(j + dc, 0, img.width - 1));
            ++count;
        }
    return sum / count;
}

double oracle_window_std(const GrayImage& img, int p, int q, int i, int j) {
    const double mean = oracle_window_mean(img, p, q, i, j);
    double acc = 0.0;
    int count = 0;
    for (int dr = -p; dr <= p; ++dr)
        for (int dc = -q; dc <= q; ++dc) {
            const double d = img.at(std::clamp(i + dr, 0, img.height - 1),
                                    std::clamp(j + dc, 0, img.width - 1)) -
                             mean;
            acc += d * d;
            ++count;
        }
    return std::sqrt(acc / count);
}

// ---------------------------------------------------------------------------

// C1: paper-number reproduction needs SCPQD2020, which is not bundled.
bool c1_paper_scale(Check& check) {
    const char* root = std::getenv("SCPQD2020_ROOT");
    if (root == nullptr) {
        check.note("SKIP: SCPQD2020 and its professional ratings are not bundled; "
                   "paper-scale SROCC reproduction is a stretch goal.");
        check.note("With the dataset arranged in the documented layout, the pipeline is:");
        check.note("  siqa features --images $SCPQD2020_ROOT/scenes --out features.csv");
        check.note("  siqa cluster --features features.csv --labels-out "
                   "$SCPQD2020_ROOT/scene_labels.json");
        check.note("  siqa train --data $SCPQD2020_ROOT --net full --aspect <a> --epochs 50");
        check.note("The property-based criteria below are the binding suite.");
        return true;  // skip, not failure
    }
    check.note("SCPQD2020_ROOT is set; run the commands above for the stretch criterion.");
    return true;
}

// C2: normalization invariants at exact / 1e-9 tolerances, under 10 s.
bool c2_normalization(Check& check) {
    std::mt19937_64 rng(20240801);
    const LcnParams params;

    for (int i = 0; i < 100; ++i) {
        const int h = 8 + static_cast<int>(uniform_below(rng, 25));
        const int w = 8 + static_cast<int>(uniform_below(rng, 25));
        GrayImage img(h, w, uniform01(rng) * 255.0);
        const NormalizedImage out = normalize(img, params);
        for (double v : out.pixels)
            if (v != 0.0) {
                check.require(false, "constant image produced nonzero output");
                return check.ok;
            }
    }
    check.note("constant annihilation exact on 100 images");

    for (int i = 0; i < 100; ++i) {
        const int h = 8 + static_cast<int>(uniform_below(rng, 20));
        const int w = 8 + static_cast<int>(uniform_below(rng, 20));
        GrayImage img = random_gray(h, w, rng, true);
        for (double& v : img.pixels) v = std::min(v, 200.0);
        const double offset = 1.0 + static_cast<double>(uniform_below(rng, 55));
        GrayImage shifted = img;
        for (double& v : shifted.pixels) v += offset;
        const NormalizedImage a = normalize(img, params);
        const NormalizedImage b = normalize(shifted, params);
        for (std::size_t k = 0; k < a.pixels.size(); ++k)
            if (a.pixels[k] != b.pixels[k]) {
                check.require(false, "offset invariance violated");
                return check.ok;
            }
    }
    check.note("offset invariance exact on 100 images");

    double worst = 0.0;
    for (int i = 0; i < 40; ++i) {
        const GrayImage img = random_gray(16, 16, rng, false);
        for (int probe = 0; probe < 20; ++probe) {
            const int r = static_cast<int>(uniform_below(rng, 16));
            const int c = static_cast<int>(uniform_below(rng, 16));
            worst = std::max(worst, std::fabs(local_mean(img, params, r, c) -
                                              oracle_window_mean(img, 3, 3, r, c)));
            worst = std::max(worst, std::fabs(local_std(img, params, r, c) -
                                              oracle_window_std(img, 3, 3, r, c)));
        }
    }
    check.require(worst <= 1e-9, "window statistics deviate from the oracle by " +
                                     std::to_string(worst));
    check.note("local mean/std vs oracle worst abs error " + std::to_string(worst));
    return check.ok;
}

// C3: scene feature invariants, under 5 s.
bool c3_scene_features(Check& check) {
    std::mt19937_64 rng(3);

    for (int trial = 0; trial < 25; ++trial) {
        const GrayImage img = random_gray(16 + static_cast<int>(uniform_below(rng, 80)),
                                          16 + static_cast<int>(uniform_below(rng, 80)), rng,
                                          false);
        const SceneFeatureVector f = extract_features(img, "x");
        check.require(f.values.size() == 37, "feature dimension is not 37");
        double mean_sum = 0.0, std_sum = 0.0;
        for (int b = 0; b < 16; ++b) {
            mean_sum += f.mean_hist()[b];
            std_sum += f.std_hist()[b];
        }
        check.require(std::fabs(mean_sum - 1.0) <= 1e-9, "mean histogram does not sum to 1");
        check.require(std::fabs(std_sum - 1.0) <= 1e-9, "std histogram does not sum to 1");
    }

    const auto f_const = extract_features(GrayImage(32, 32, 70.0), "c");
    for (int k = 0; k < 5; ++k)
        check.require(f_const.edge_ratios()[k] == 0.0, "constant image has nonzero edge ratio");

    GrayImage stripes(32, 32);
    for (int r = 0; r < 32; ++r)
        for (int c = 0; c < 32; ++c) stripes.at(r, c) = (c % 2 == 0) ? 0.0 : 255.0;
    const auto ratios = edge_ratios(stripes, EdgeFilterBank::standard(), kEdgeThreshold);
    check.require(ratios[0] == 1.0, "vertical stripes do not give vertical ratio 1.0");
    for (int k = 1; k < 5; ++k)
        check.require(ratios[k] == 0.0, "vertical stripes excite another filter");
    return check.ok;
}

// C4: k-means behavior on 50 random datasets, under 30 s.
bool c4_kmeans(Check& check) {
    std::mt19937_64 rng(44);

    for (int ds = 0; ds < 50; ++ds) {
        std::vector<SceneFeatureVector> features(20 + uniform_below(rng, 40));
        for (std::size_t i = 0; i < features.size(); ++i) {
            features[i].image_id = std::to_string(i);
            for (auto& v : features[i].values) v = uniform01(rng);
        }
        const SceneModel model = fit_scene_model(features, 4, rng());
        for (std::size_t i = 1; i < model.objective_history.size(); ++i)
            check.require(model.objective_history[i] <=
                              model.objective_history[i - 1] + 1e-12,
                          "objective increased at iteration " + std::to_string(i));

        // Assignments equal brute-force nearest centroid search.
        for (const auto& f : features) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < 4; ++c) {
                double d2 = 0.0;
                for (int d = 0; d < kSceneFeatureDim; ++d) {
                    const double z =
                        (f.values[d] - model.feature_mean[d]) / model.feature_std[d];
                    const double diff = z - model.centroids[c][d];
                    d2 += diff * diff;
                }
                if (d2 < best_d) {
                    best_d = d2;
                    best = c;
                }
            }
            check.require(assign_scene(model, f).scene_id == best,
                          "assignment differs from brute force");
        }
        if (!check.ok) return false;
    }
    check.note("objective monotone and assignments brute-force-exact on 50 datasets");

    // Purity 1.0 on four separated blobs.
    std::vector<SceneFeatureVector> blobs;
    std::vector<int> truth;
    for (int b = 0; b < 4; ++b)
        for (int i = 0; i < 10; ++i) {
            SceneFeatureVector f;
            f.image_id = std::to_string(b * 10 + i);
            f.values.fill(0.0);
            f.values[b * 4] = 1.0;
            f.values[16 + b * 3] = 1.0;
            f.values[33 + ((b + i) % 3)] = 0.02 * uniform01(rng);
            blobs.push_back(f);
            truth.push_back(b);
        }
    const SceneModel blob_model = fit_scene_model(blobs, 4, 5);
    std::array<std::set<int>, 4> assigned;
    for (std::size_t i = 0; i < blobs.size(); ++i)
        assigned[truth[i]].insert(assign_scene(blob_model, blobs[i]).scene_id);
    std::set<int> used;
    for (const auto& s : assigned) {
        check.require(s.size() == 1, "blob split across clusters");
        used.insert(*s.begin());
    }
    check.require(used.size() == 4, "blobs do not map to four distinct clusters");
    check.note("blob purity 1.0");

    // Bit-identical reruns for a fixed seed.
    for (int trial = 0; trial < 3; ++trial) {
        std::vector<SceneFeatureVector> features(25);
        for (std::size_t i = 0; i < features.size(); ++i) {
            features[i].image_id = std::to_string(i);
            for (auto& v : features[i].values) v = uniform01(rng);
        }
        const SceneModel a = fit_scene_model(features, 4, 1234 + trial);
        const SceneModel b = fit_scene_model(features, 4, 1234 + trial);
        for (int c = 0; c < 4; ++c)
            for (int d = 0; d < kSceneFeatureDim; ++d)
                check.require(a.centroids[c][d] == b.centroids[c][d],
                              "rerun centroids differ bitwise");
    }
    check.note("reruns bit-identical");
    return check.ok;
}

// C5: architecture trace and the hand-derived parameter count.
bool c5_architecture(Check& check) {
    const auto shapes = shape_trace(NetworkConfig::full());
    const std::vector<std::tuple<std::string, int, int>> expected = {
        {"conv1", 32, 64}, {"conv2", 32, 64}, {"pool1", 32, 32}, {"conv3", 64, 32},
        {"conv4", 64, 32}, {"pool2", 64, 16}, {"conv5", 128, 16}, {"conv6", 128, 16},
        {"gap", 128, 1},   {"quality", 1, 1}, {"scene", 4, 1}};
    check.require(shapes.size() == expected.size(), "unexpected number of stages");
    for (std::size_t i = 0; i < expected.size() && i < shapes.size(); ++i) {
        check.require(shapes[i].name == std::get<0>(expected[i]) &&
                          shapes[i].channels == std::get<1>(expected[i]) &&
                          shapes[i].height == std::get<2>(expected[i]) &&
                          shapes[i].width == std::get<2>(expected[i]),
                      "stage " + std::to_string(i) + " (" + shapes[i].name +
                          ") does not match the published trace");
    }

    const std::size_t count = parameter_count(NetworkConfig::full());
    check.require(count == 485349,
                  "parameter count " + std::to_string(count) + " != pinned 485349");
    check.note("64->64->(pool)32->32->(pool)16->16 trace, 128-d pooled vector, "
               "scalar + 4 logits, 485349 parameters");

    // Probe input: output arities.
    const NetworkWeights w = init_weights(NetworkConfig::reduced(8), 1);
    std::mt19937_64 rng(2);
    std::vector<double> patch(64);
    for (double& v : patch) v = uniform01(rng);
    const ForwardOutput out = forward(w, patch, false, 0);
    check.require(std::isfinite(out.quality), "quality output not finite");
    check.require(out.scene_logits.size() == 4, "scene head does not emit 4 logits");
    return check.ok;
}

// C6: full finite-difference gradient check on the reduced network.
bool c6_gradient_check(Check& check) {
    NetworkConfig cfg = NetworkConfig::reduced(8);
    cfg.dropout_rate = 0.0;
    NetworkWeights w = init_weights(cfg, 2024);

    std::mt19937_64 rng(606);
    std::vector<Sample> samples(4);
    for (auto& s : samples) {
        s.patch.size = 8;
        s.patch.pixels.resize(64);
        for (double& v : s.patch.pixels) v = 2.0 * uniform01(rng) - 1.0;
        s.quality_label = uniform01(rng);
        s.scene_label = static_cast<int>(uniform_below(rng, 4));
    }
    std::vector<std::size_t> indices(samples.size());
    std::iota(indices.begin(), indices.end(), 0);
    const LossConfig loss_config{1.0};

    std::vector<double> grad(w.params.size(), 0.0);
    batch_gradient(w, samples, indices, loss_config, false, 0, grad);

    const double eps = 1e-6;
    double worst_rel = 0.0;
    std::size_t bad = 0;
    for (std::size_t i = 0; i < w.params.size(); ++i) {
        const double old = w.params[i];
        w.params[i] = old + eps;
        const double lp = batch_loss(w, samples, indices, false, 0).combined(loss_config);
        w.params[i] = old - eps;
        const double lm = batch_loss(w, samples, indices, false, 0).combined(loss_config);
        w.params[i] = old;

        const double fd = (lp - lm) / (2.0 * eps);
        const double denom = std::max(std::fabs(fd), std::fabs(grad[i]));
        const double err = std::fabs(fd - grad[i]);
        if (err > std::max(1e-5 * denom, 1e-9)) ++bad;
        if (denom > 1e-4) worst_rel = std::max(worst_rel, err / denom);
    }
    check.require(bad == 0, std::to_string(bad) + " of " + std::to_string(w.params.size()) +
                                " parameters fail the 1e-5 relative tolerance");
    check.note("all " + std::to_string(w.params.size()) +
               " parameters within 1e-5; worst relative error " + std::to_string(worst_rel));
    return check.ok;
}

// C7: loss identities and the alpha = 0 decoupling.
bool c7_loss_identities(Check& check) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const double lq = uniform01(rng) * 4.0;
        const double ls = uniform01(rng) * 4.0;
        check.require(combined_loss(lq, ls, LossConfig{0.0}) == lq,
                      "combined_loss(lq, ls, 0) != lq exactly");
    }

    const std::vector<double> uniform_logits{0.0, 0.0, 0.0, 0.0};
    for (int label = 0; label < 4; ++label)
        check.require(std::fabs(scene_loss_single(uniform_logits, label) - std::log(4.0)) <=
                          1e-9,
                      "uniform-logit scene loss is not ln 4");

    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> logits(4);
        for (auto& l : logits) l = 20.0 * (uniform01(rng) - 0.5);
        const int label = static_cast<int>(uniform_below(rng, 4));
        const double base = scene_loss_single(logits, label);
        const double shift = 200.0 * (uniform01(rng) - 0.5);
        std::vector<double> shifted = logits;
        for (auto& l : shifted) l += shift;
        check.require(std::fabs(scene_loss_single(shifted, label) - base) <= 1e-9,
                      "scene loss is not shift-invariant within 1e-9");
    }

    // alpha = 0 training leaves scene-head weights bit-unchanged.
    NetworkConfig cfg = NetworkConfig::reduced(8);
    cfg.dropout_rate = 0.0;
    NetworkWeights w = init_weights(cfg, 9);
    const std::vector<double> initial = w.params;

    std::vector<Sample> samples(6);
    for (auto& s : samples) {
        s.patch.size = 8;
        s.patch.pixels.resize(64);
        for (double& v : s.patch.pixels) v = 2.0 * uniform01(rng) - 1.0;
        s.quality_label = uniform01(rng);
        s.scene_label = static_cast<int>(uniform_below(rng, 4));
    }
    std::vector<std::size_t> indices(samples.size());
    std::iota(indices.begin(), indices.end(), 0);

    AdamState adam;
    TrainConfig tc;
    std::vector<double> grad(w.params.size());
    for (int step = 0; step < 25; ++step) {
        std::fill(grad.begin(), grad.end(), 0.0);
        batch_gradient(w, samples, indices, LossConfig{0.0}, true, step, grad);
        adam_step(w.params, grad, adam, tc);
    }
    bool scene_unchanged = true;
    bool backbone_moved = false;
    for (const auto& t : w.layout) {
        for (std::size_t i = 0; i < t.count; ++i) {
            const bool same = w.params[t.offset + i] == initial[t.offset + i];
            if (t.name.starts_with("scene."))
                scene_unchanged = scene_unchanged && same;
            else if (!same)
                backbone_moved = true;
        }
    }
    check.require(scene_unchanged, "alpha = 0 training moved scene-head weights");
    check.require(backbone_moved, "alpha = 0 training moved nothing (loop inert?)");
    check.note("combined-loss, ln4, shift-invariance, and alpha-0 decoupling all hold");
    return check.ok;
}

// C8: SROCC identities and exhaustive agreement with the counting oracle.
bool c8_srocc(Check& check) {
    const std::vector<int> ground{1, 2, 3, 4, 5, 6};
    const std::vector<double> aligned{0.9, 0.8, 0.6, 0.5, 0.3, 0.1};
    check.require(std::fabs(srocc(aligned, ground) - 1.0) <= 1e-12, "identity ordering != 1");
    std::vector<double> reversed(aligned.rbegin(), aligned.rend());
    check.require(std::fabs(srocc(reversed, ground) + 1.0) <= 1e-12, "reversal != -1");

    const std::vector<double> pred3{0.9, 0.5, 0.1};
    const std::vector<int> ground3{1, 3, 2};
    check.require(std::fabs(srocc(pred3, ground3) - 0.5) <= 1e-12,
                  "three-item worked example != 0.5");

    std::size_t cases = 0;
    for (int n = 2; n <= 6; ++n) {
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 1);
        std::vector<int> g(n);
        std::iota(g.begin(), g.end(), 1);
        do {
            std::vector<double> predicted(n);
            for (int i = 0; i < n; ++i) predicted[i] = static_cast<double>(n + 1 - perm[i]);
            double d2 = 0.0;
            for (int i = 0; i < n; ++i) {
                const double d = static_cast<double>(perm[i] - g[i]);
                d2 += d * d;
            }
            const double expected = 1.0 - 6.0 * d2 / (n * (static_cast<double>(n) * n - 1.0));
            if (std::fabs(srocc(predicted, g) - expected) > 1e-12) {
                check.require(false, "permutation disagreement at n=" + std::to_string(n));
                return check.ok;
            }
            ++cases;
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    check.note("all " + std::to_string(cases) + " permutations (n<=6) match within 1e-12");
    return check.ok;
}

// C9: end-to-end learning on a synthetic blur ladder + overfit sanity.
bool c9_synthetic_learning(Check& check) {
    const auto root = work_dir() / "c9_data";

    SynthSpec spec;
    spec.n_scenes = 20;
    spec.n_devices = 15;
    spec.image_height = 224;
    spec.image_width = 384;
    spec.degradation = Degradation::blur;
    spec.seed = 77;
    for (int i = 0; i < 15; ++i)
        spec.strength_ladder.push_back(0.4 * std::pow(14.6 / 0.4, i / 14.0));
    generate_synthetic(spec, root, true);

    const auto loaded = load_dataset(root);
    std::vector<SceneFeatureVector> features;
    for (const auto& scene : loaded.scenes)
        for (const auto& entry : scene.images)
            features.push_back(extract_features(to_grayscale(read_rgb_image(entry.path)),
                                                scene.scene_id + "/" + entry.device_id));
    const SceneModel model = fit_scene_model(features, 4, 5);
    std::map<std::string, int> labels;
    for (const auto& f : features) labels[f.image_id] = assign_scene(model, f).scene_id;

    const auto dataset = build_scene_samples(loaded.scenes, labels, Aspect::texture);

    NetworkConfig net = NetworkConfig::reduced(64);
    TrainConfig tc;
    tc.epochs = 10;
    tc.seed = 3;
    const TrainReport report = train(dataset, net, tc, LossConfig{1.0}, work_dir() / "c9_run");

    check.require(report.best_val_srocc >= 0.8,
                  "best validation SROCC " + std::to_string(report.best_val_srocc) + " < 0.8");
    check.note("mean validation SROCC " + std::to_string(report.best_val_srocc) + " at epoch " +
               std::to_string(report.best_epoch) + " (4 validation scenes, alpha = 1.0)");

    // Overfit sanity: 8 patches, quality loss below 0.01 within 500 steps.
    std::vector<Sample> flat = build_samples(dataset, Aspect::texture);
    check.require(flat.size() == 20u * 15u * 6u,
                  "unexpected sample count " + std::to_string(flat.size()));
    std::vector<Sample> eight;
    for (std::size_t i = 0; i < flat.size() && eight.size() < 8; i += flat.size() / 8)
        eight.push_back(flat[i]);

    NetworkConfig overfit_cfg = NetworkConfig::reduced(64);
    overfit_cfg.dropout_rate = 0.0;
    NetworkWeights w = init_weights(overfit_cfg, 12);
    AdamState adam;
    TrainConfig otc;
    std::vector<std::size_t> indices(eight.size());
    std::iota(indices.begin(), indices.end(), 0);
    std::vector<double> grad(w.params.size());
    double lq = 1.0;
    int reached = -1;
    for (int step = 1; step <= 500; ++step) {
        std::fill(grad.begin(), grad.end(), 0.0);
        lq = batch_gradient(w, eight, indices, LossConfig{1.0}, false, 0, grad).quality;
        if (lq < 0.01) {
            reached = step;
            break;
        }
        adam_step(w.params, grad, adam, otc);
    }
    check.require(reached > 0, "quality loss only reached " + std::to_string(lq) +
                                   " after 500 steps");
    if (reached > 0)
        check.note("overfit: Lq < 0.01 after " + std::to_string(reached) + " steps");
    return check.ok;
}

// C10: multi-task vs single-task comparison table on a mixed dataset.
bool c10_multitask_comparison(Check& check) {
    const auto root = work_dir() / "c10_data";

    SynthSpec spec;
    spec.n_scenes = 12;
    spec.n_devices = 8;
    spec.image_height = 160;
    spec.image_width = 288;
    spec.degradation = Degradation::mixed;
    spec.seed = 55;
    for (int i = 0; i < 8; ++i) spec.strength_ladder.push_back(0.5 + 0.5 * i);
    generate_synthetic(spec, root, true);

    const auto loaded = load_dataset(root);
    std::vector<SceneFeatureVector> features;
    for (const auto& scene : loaded.scenes)
        for (const auto& entry : scene.images)
            features.push_back(extract_features(to_grayscale(read_rgb_image(entry.path)),
                                                scene.scene_id + "/" + entry.device_id));
    const SceneModel model = fit_scene_model(features, 4, 9);
    std::map<std::string, int> labels;
    for (const auto& f : features) labels[f.image_id] = assign_scene(model, f).scene_id;

    std::map<double, std::map<std::string, double>> table;  // alpha -> aspect -> srocc
    for (const double alpha : {1.0, 0.0}) {
        for (const Aspect aspect : kAllAspects) {
            const auto dataset = build_scene_samples(loaded.scenes, labels, aspect);
            NetworkConfig net = NetworkConfig::reduced(64);
            TrainConfig tc;
            tc.epochs = 4;
            tc.seed = 21;
            tc.aspect = aspect;
            const auto out_dir = work_dir() / ("c10_run_a" + std::to_string(alpha) + "_" +
                                               to_string(aspect));
            const TrainReport report =
                train(dataset, net, tc, LossConfig{alpha}, out_dir);
            table[alpha][to_string(aspect)] = report.best_val_srocc;
        }
    }

    std::ostringstream rendered;
    rendered << "model,texture,color,noise,exposure\n";
    for (const double alpha : {1.0, 0.0}) {
        rendered << (alpha > 0.0 ? "multi-task (alpha=1.0)" : "single-task (alpha=0)");
        for (const Aspect aspect : kAllAspects) {
            const double v = table[alpha][to_string(aspect)];
            check.require(std::isfinite(v) && v >= -1.0 && v <= 1.0,
                          "SROCC cell out of range for alpha=" + std::to_string(alpha));
            rendered << "," << v;
        }
        rendered << "\n";
    }
    {
        std::ofstream out(work_dir() / "c10_comparison.csv", std::ios::binary);
        out << rendered.str();
    }
    check.note("comparison table (validation SROCC):");
    std::istringstream lines(rendered.str());
    std::string line;
    while (std::getline(lines, line)) check.note("  " + line);
    return check.ok;
}

// C11: byte-identical artifacts across two same-seed pipeline runs.
bool c11_determinism(Check& check) {
    const auto base = work_dir() / "c11";
    fs::create_directories(base);

    auto pipeline = [&](const fs::path& dir) {
        fs::create_directories(dir);
        const std::string data = (dir / "data").string();
        if (run_cli_args({"synth", "--out", data, "--scenes", "5", "--devices", "4",
                          "--height", "96", "--width", "160", "--degradation", "blur",
                          "--ladder", "0.6,1.2,2.4,4.8", "--seed", "31", "--overwrite"}) != 0)
            return false;
        if (run_cli_args({"features", "--images", data + "/scenes", "--out",
                          (dir / "features.csv").string()}) != 0)
            return false;
        if (run_cli_args({"cluster", "--features", (dir / "features.csv").string(), "--seed",
                          "7", "--model-out", (dir / "scene_model.json").string(),
                          "--labels-out", data + "/scene_labels.json"}) != 0)
            return false;
        if (run_cli_args({"train", "--data", data, "--aspect", "noise", "--out",
                          (dir / "run").string(), "--net", "reduced", "--epochs", "2",
                          "--batch", "16", "--seed", "13"}) != 0)
            return false;
        if (run_cli_args({"eval", "--checkpoint", (dir / "run" / "ckpt_best.siqa").string(),
                          "--data", data, "--aspect", "noise", "--out-prefix",
                          (dir / "eval").string(), "--seed", "13"}) != 0)
            return false;
        return true;
    };

    check.require(pipeline(base / "a"), "first pipeline run failed");
    check.require(pipeline(base / "b"), "second pipeline run failed");
    if (!check.ok) return false;

    const std::vector<std::string> artifacts = {
        "features.csv",          "scene_model.json",      "data/scene_labels.json",
        "run/ckpt_best.siqa",    "run/ckpt_last.siqa",    "run/report.jsonl",
        "run/summary.json",      "eval.json",             "eval_srocc.csv",
        "eval_scene_acc.csv"};
    for (const auto& rel : artifacts) {
        const auto pa = base / "a" / rel;
        const auto pb = base / "b" / rel;
        check.require(fs::exists(pa) && fs::exists(pb), rel + " missing");
        if (fs::exists(pa) && fs::exists(pb))
            check.require(slurp(pa) == slurp(pb), rel + " differs between runs");
    }
    check.note("all " + std::to_string(artifacts.size()) +
               " artifacts byte-identical across reruns");
    return check.ok;
}

struct Criterion {
    int id;
    std::string title;
    double time_limit_s;  // 0 = no limit
    std::function<bool(Check&)> run;
    bool skip = false;
};

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    std::vector<Criterion> criteria = {
        {1, "paper-scale SROCC reproduction (stretch; needs SCPQD2020)", 0, c1_paper_scale,
         std::getenv("SCPQD2020_ROOT") == nullptr},
        {2, "normalization invariants (exact + 1e-9 oracle)", 10, c2_normalization},
        {3, "scene features (37-d, unit histograms, edge ratios)", 5, c3_scene_features},
        {4, "k-means (monotone objective, brute-force assignments, purity, reruns)", 30,
         c4_kmeans},
        {5, "architecture trace and 485349-parameter count", 0, c5_architecture},
        {6, "gradient check vs central differences (every parameter, 1e-5)", 120,
         c6_gradient_check},
        {7, "loss identities and alpha-0 decoupling", 0, c7_loss_identities},
        {8, "SROCC identities and exhaustive n<=6 oracle", 0, c8_srocc},
        {9, "synthetic end-to-end learning (SROCC >= 0.8) + overfit sanity", 900,
         c9_synthetic_learning},
        {10, "multi-task vs single-task comparison table (mixed dataset)", 0,
         c10_multitask_comparison},
        {11, "byte-identical determinism across seeded reruns", 0, c11_determinism},
    };

    int failures = 0;
    for (auto& c : criteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;

        Check check;
        const auto start = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = c.run(check);
        } catch (const std::exception& e) {
            ok = false;
            check.notes.push_back(std::string("exception: ") + e.what());
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        if (c.time_limit_s > 0 && elapsed > c.time_limit_s) {
            ok = false;
            check.notes.push_back("exceeded time limit of " + std::to_string(c.time_limit_s) +
                                  " s");
        }

        const char* verdict = c.skip ? "SKIP" : (ok ? "PASS" : "FAIL");
        std::printf("[%s] C%-2d %s (%.1fs)\n", verdict, c.id, c.title.c_str(), elapsed);
        for (const auto& note : check.notes) std::printf("        %s\n", note.c_str());
        if (!ok && !c.skip) ++failures;
    }

    std::printf("%s: %d criterion failure(s)\n", failures == 0 ? "OK" : "FAILED", failures);
    if (failures == 0) fs::remove_all(work_dir());
    return failures;
}
