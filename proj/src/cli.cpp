#include "siqa/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "siqa/checkpoint.hpp"
#include "siqa/dataset.hpp"
#include "siqa/evaluation.hpp"
#include "siqa/image_io.hpp"
#include "siqa/scene.hpp"
#include "siqa/training.hpp"

namespace siqa {

namespace {

namespace fs = std::filesystem;

void log_kv(const std::string& key, const std::string& value) {
    std::cout << "  " << key << " = " << value << "\n";
}

void log_kv(const std::string& key, double value) {
    std::ostringstream ss;
    ss << value;
    log_kv(key, ss.str());
}

void log_kv(const std::string& key, std::uint64_t value) { log_kv(key, std::to_string(value)); }
void log_kv(const std::string& key, int value) { log_kv(key, std::to_string(value)); }

bool is_image_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

struct LcnFlags {
    int p = 3, q = 3;
    double c = 1.0;
    LcnParams params() const { return {p, q, c}; }
};

struct PatchFlags {
    int size = 64, stride = 160;
    PatchParams params() const { return {size, stride}; }
};

void add_lcn_flags(CLI::App* cmd, LcnFlags& f) {
    cmd->add_option("--lcn-p", f.p, "normalization window half-height P");
    cmd->add_option("--lcn-q", f.q, "normalization window half-width Q");
    cmd->add_option("--lcn-c", f.c, "normalization stabilizer C");
}

void add_patch_flags(CLI::App* cmd, PatchFlags& f) {
    cmd->add_option("--patch-size", f.size, "patch side in pixels");
    cmd->add_option("--patch-stride", f.stride, "patch grid stride in pixels");
}

// ---- features ---------------------------------------------------------------

struct FeaturesArgs {
    std::string images_dir;
    std::string out_csv = "features.csv";
    double threshold = kEdgeThreshold;
    int workers = 1;
};

int cmd_features(const FeaturesArgs& args) {
    std::cout << "features:\n";
    log_kv("images", args.images_dir);
    log_kv("out", args.out_csv);
    log_kv("edge_threshold", args.threshold);
    log_kv("workers", args.workers);

    std::vector<fs::path> paths;
    for (const auto& entry : fs::recursive_directory_iterator(args.images_dir))
        if (entry.is_regular_file() && is_image_file(entry.path())) paths.push_back(entry.path());
    if (paths.empty()) throw ValueError("no images found under " + args.images_dir);
    std::sort(paths.begin(), paths.end());

    std::vector<SceneFeatureVector> features(paths.size());
    parallel_for(paths.size(), args.workers, [&](std::size_t i) {
        const GrayImage gray = to_grayscale(read_rgb_image(paths[i]));
        fs::path rel = fs::relative(paths[i], args.images_dir);
        rel.replace_extension();
        features[i] = extract_features(gray, rel.generic_string(), args.threshold);
    });
    std::sort(features.begin(), features.end(),
              [](const auto& a, const auto& b) { return a.image_id < b.image_id; });

    write_features_csv(args.out_csv, features);
    std::cout << "wrote " << features.size() << " feature rows to " << args.out_csv << "\n";
    return 0;
}

// ---- cluster ----------------------------------------------------------------

struct ClusterArgs {
    std::string features_csv;
    int k = 4;
    std::uint64_t seed = 0;
    std::string model_out = "scene_model.json";
    std::string labels_out = "scene_labels.json";
};

int cmd_cluster(const ClusterArgs& args) {
    std::cout << "cluster:\n";
    log_kv("features", args.features_csv);
    log_kv("k", args.k);
    log_kv("seed", args.seed);
    log_kv("kmeans_sub_seed", sub_seed(args.seed, "kmeans++"));
    log_kv("model_out", args.model_out);
    log_kv("labels_out", args.labels_out);

    const auto features = read_features_csv(args.features_csv);
    const SceneModel model = fit_scene_model(features, args.k, args.seed);

    std::vector<SceneLabel> labels;
    labels.reserve(features.size());
    for (const auto& f : features) labels.push_back(assign_scene(model, f));

    save_scene_model(args.model_out, model);
    write_scene_labels(args.labels_out, labels);
    std::cout << "clustered " << features.size() << " images into " << args.k << " scene types ("
              << model.objective_history.size() << " iterations)\n";
    return 0;
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
    std::string out_root;
    int scenes = 4;
    int devices = 5;
    int height = 192;
    int width = 256;
    std::string degradation = "blur";
    std::string ladder;  // comma-separated; geometric default when empty
    std::uint64_t seed = 0;
    bool overwrite = false;
};

std::vector<double> parse_ladder(const std::string& text, int devices) {
    std::vector<double> ladder;
    if (text.empty()) {
        // Geometric ladder from 0.5 to 4.0.
        const double lo = 0.5, hi = 4.0;
        for (int i = 0; i < devices; ++i)
            ladder.push_back(devices == 1 ? lo
                                          : lo * std::pow(hi / lo, static_cast<double>(i) /
                                                                       (devices - 1)));
        return ladder;
    }
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) ladder.push_back(std::stod(field));
    return ladder;
}

int cmd_synth(const SynthArgs& args) {
    SynthSpec spec;
    spec.n_scenes = args.scenes;
    spec.n_devices = args.devices;
    spec.image_height = args.height;
    spec.image_width = args.width;
    spec.degradation = degradation_from_string(args.degradation);
    spec.strength_ladder = parse_ladder(args.ladder, args.devices);
    spec.seed = args.seed;

    std::cout << "synth:\n";
    log_kv("out", args.out_root);
    log_kv("scenes", spec.n_scenes);
    log_kv("devices", spec.n_devices);
    log_kv("image", std::to_string(spec.image_height) + "x" + std::to_string(spec.image_width));
    log_kv("degradation", to_string(spec.degradation));
    {
        std::ostringstream ss;
        for (std::size_t i = 0; i < spec.strength_ladder.size(); ++i)
            ss << (i ? "," : "") << spec.strength_ladder[i];
        log_kv("ladder", ss.str());
    }
    log_kv("seed", spec.seed);

    generate_synthetic(spec, args.out_root, args.overwrite);
    std::cout << "wrote " << spec.n_scenes * spec.n_devices << " images under " << args.out_root
              << "\n";
    return 0;
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
    std::string config_file;
    std::string data_root;
    std::string aspect = "texture";
    std::string out_dir = "train_out";
    std::string net = "full";
    double lr = 0.001;
    int batch = 128;
    int epochs = 50;
    double alpha = 1.0;
    double dropout = 0.5;
    double split_fraction = 0.8;
    std::uint64_t seed = 0;
    int workers = 1;
    LcnFlags lcn;
    PatchFlags patch;
};

// Flat "key = value" config file; '#' starts a comment. Command-line flags
// take precedence over file values, file values over built-in defaults.
std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::map<std::string, std::string> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValueError(path + ":" + std::to_string(line_no) +
                             ": expected 'key = value'");
        entries[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return entries;
}

void apply_train_config(const CLI::App* cmd, TrainArgs& args) {
    if (args.config_file.empty()) return;
    const auto entries = read_config_file(args.config_file);
    auto absent = [&](const char* flag) { return cmd->count(flag) == 0; };

    for (const auto& [key, value] : entries) {
        try {
            if (key == "data") {
                if (absent("--data") && args.data_root.empty()) args.data_root = value;
            } else if (key == "aspect") {
                if (absent("--aspect")) args.aspect = value;
            } else if (key == "out") {
                if (absent("--out")) args.out_dir = value;
            } else if (key == "net") {
                if (absent("--net")) args.net = value;
            } else if (key == "learning_rate") {
                if (absent("--lr")) args.lr = std::stod(value);
            } else if (key == "batch_size") {
                if (absent("--batch")) args.batch = std::stoi(value);
            } else if (key == "epochs") {
                if (absent("--epochs")) args.epochs = std::stoi(value);
            } else if (key == "alpha") {
                if (absent("--alpha")) args.alpha = std::stod(value);
            } else if (key == "dropout") {
                if (absent("--dropout")) args.dropout = std::stod(value);
            } else if (key == "split_fraction") {
                if (absent("--split-fraction")) args.split_fraction = std::stod(value);
            } else if (key == "seed") {
                if (absent("--seed")) args.seed = std::stoull(value);
            } else if (key == "workers") {
                if (absent("--workers")) args.workers = std::stoi(value);
            } else if (key == "lcn_p") {
                if (absent("--lcn-p")) args.lcn.p = std::stoi(value);
            } else if (key == "lcn_q") {
                if (absent("--lcn-q")) args.lcn.q = std::stoi(value);
            } else if (key == "lcn_c") {
                if (absent("--lcn-c")) args.lcn.c = std::stod(value);
            } else if (key == "patch_size") {
                if (absent("--patch-size")) args.patch.size = std::stoi(value);
            } else if (key == "patch_stride") {
                if (absent("--patch-stride")) args.patch.stride = std::stoi(value);
            } else {
                throw ValueError("unknown config key '" + key + "' in " + args.config_file);
            }
        } catch (const std::invalid_argument&) {
            throw ValueError("config key '" + key + "' has a malformed value '" + value + "'");
        }
    }
}

NetworkConfig network_for(const std::string& net, int input_size, double dropout) {
    NetworkConfig config;
    if (net == "full") config = NetworkConfig::full();
    else if (net == "reduced") config = NetworkConfig::reduced();
    else throw ValueError("unknown --net '" + net + "' (expected full|reduced)");
    config.input_size = input_size;
    config.dropout_rate = dropout;
    config.validate();
    return config;
}

std::vector<LabeledScene> load_labeled(const std::string& data_root, Aspect aspect,
                                       const LcnFlags& lcn, const PatchFlags& patch,
                                       int workers) {
    const auto loaded = load_dataset(data_root);
    for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
    const auto labels_path = fs::path(data_root) / "scene_labels.json";
    if (!fs::exists(labels_path))
        throw ValueError("missing " + labels_path.string() +
                         "; run `siqa features` and `siqa cluster` first");
    const auto labels = read_scene_labels(labels_path);
    return build_scene_samples(loaded.scenes, labels, aspect, lcn.params(), patch.params(),
                               workers);
}

int cmd_train(const TrainArgs& args) {
    if (args.data_root.empty())
        throw ValueError("--data is required (flag, config key 'data', or IQA_DATA_ROOT)");
    const Aspect aspect = aspect_from_string(args.aspect);
    const NetworkConfig net_config = network_for(args.net, args.patch.size, args.dropout);

    TrainConfig train_config;
    train_config.learning_rate = args.lr;
    train_config.batch_size = args.batch;
    train_config.epochs = args.epochs;
    train_config.split_fraction = args.split_fraction;
    train_config.seed = args.seed;
    train_config.aspect = aspect;
    LossConfig loss_config{args.alpha};

    std::cout << "train:\n";
    log_kv("data", args.data_root);
    log_kv("aspect", args.aspect);
    log_kv("out", args.out_dir);
    log_kv("net", args.net);
    log_kv("learning_rate", args.lr);
    log_kv("batch_size", args.batch);
    log_kv("epochs", args.epochs);
    log_kv("alpha", args.alpha);
    log_kv("dropout", args.dropout);
    log_kv("split_fraction", args.split_fraction);
    log_kv("seed", args.seed);
    log_kv("split_sub_seed", sub_seed(args.seed, "split"));
    log_kv("init_sub_seed", sub_seed(args.seed, "init"));
    log_kv("shuffle_sub_seed", sub_seed(args.seed, "shuffle"));
    log_kv("dropout_sub_seed", sub_seed(args.seed, "dropout"));
    log_kv("lcn", "P=" + std::to_string(args.lcn.p) + " Q=" + std::to_string(args.lcn.q) +
                      " C=" + std::to_string(args.lcn.c));
    log_kv("patch", std::to_string(args.patch.size) + " stride " +
                        std::to_string(args.patch.stride));
    log_kv("workers", args.workers);

    const auto dataset = load_labeled(args.data_root, aspect, args.lcn, args.patch, args.workers);
    const TrainReport report = train(dataset, net_config, train_config, loss_config,
                                     args.out_dir);
    std::cout << "best epoch " << report.best_epoch << " with validation SROCC "
              << report.best_val_srocc << "\n";
    std::cout << "best checkpoint: " << report.best_checkpoint_path << "\n";
    return 0;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
    std::string checkpoint;
    std::string data_root;
    std::string aspect = "texture";
    std::string out_prefix = "eval";
    std::string subset = "all";  // all|train|val
    double split_fraction = 0.8;
    std::uint64_t seed = 0;
    int workers = 1;
    LcnFlags lcn;
    PatchFlags patch;
};

int cmd_eval(const EvalArgs& args) {
    const Aspect aspect = aspect_from_string(args.aspect);
    const Checkpoint ckpt = load_checkpoint(args.checkpoint);
    if (ckpt.weights.config.input_size != args.patch.size)
        throw ValueError("checkpoint expects " + std::to_string(ckpt.weights.config.input_size) +
                         "-pixel patches but --patch-size is " + std::to_string(args.patch.size));

    std::cout << "eval:\n";
    log_kv("checkpoint", args.checkpoint);
    log_kv("data", args.data_root);
    log_kv("aspect", args.aspect);
    log_kv("subset", args.subset);
    log_kv("out_prefix", args.out_prefix);
    log_kv("seed", args.seed);
    log_kv("workers", args.workers);

    auto scenes = load_labeled(args.data_root, aspect, args.lcn, args.patch, args.workers);
    if (args.subset != "all") {
        std::vector<std::string> ids;
        for (const auto& s : scenes) ids.push_back(s.scene_id);
        auto [train_ids, val_ids] =
            split_by_scene(ids, args.split_fraction, sub_seed(args.seed, "split"));
        const auto& keep = args.subset == "train" ? train_ids : val_ids;
        if (args.subset != "train" && args.subset != "val")
            throw ValueError("unknown --subset '" + args.subset + "' (expected all|train|val)");
        std::erase_if(scenes, [&](const LabeledScene& s) {
            return std::find(keep.begin(), keep.end(), s.scene_id) == keep.end();
        });
    }

    EvalReport report = evaluate(ckpt.weights, scenes, aspect);
    report.checkpoint_path = args.checkpoint;
    report.split_seed = args.seed;

    write_eval_report_json(args.out_prefix + ".json", report);
    write_eval_report_csv(args.out_prefix + "_srocc.csv", args.out_prefix + "_scene_acc.csv",
                          report);
    std::cout << "mean SROCC over " << report.aspect_eval.per_scene.size() << " scenes: "
              << report.aspect_eval.mean_srocc << "\n";
    for (const auto& s : report.aspect_eval.skipped_scenes)
        std::cerr << "warning: skipped scene " << s << "\n";
    std::cout << "wrote " << args.out_prefix << ".json, " << args.out_prefix << "_srocc.csv, "
              << args.out_prefix << "_scene_acc.csv\n";
    return 0;
}

// ---- predict ----------------------------------------------------------------

struct PredictArgs {
    std::string checkpoint;
    std::string image;
    int stride = 160;
    LcnFlags lcn;
};

int cmd_predict(const PredictArgs& args) {
    const Checkpoint ckpt = load_checkpoint(args.checkpoint);

    std::cout << "predict:\n";
    log_kv("checkpoint", args.checkpoint);
    log_kv("image", args.image);
    log_kv("patch", std::to_string(ckpt.weights.config.input_size) + " stride " +
                        std::to_string(args.stride));

    const GrayImage gray = to_grayscale(read_rgb_image(args.image));
    const NormalizedImage normalized = normalize(gray, args.lcn.params());
    const auto patches = extract_patches(normalized, args.image,
                                         {ckpt.weights.config.input_size, args.stride});

    ForwardTrace trace;
    std::vector<double> scores;
    std::vector<double> dist(ckpt.weights.config.scene_classes, 0.0);
    for (const Patch& p : patches) {
        const ForwardOutput out = forward(ckpt.weights, p.pixels, false, 0, trace);
        scores.push_back(out.quality);
        const auto probs = softmax(out.scene_logits);
        for (std::size_t c = 0; c < dist.size(); ++c) dist[c] += probs[c];
    }
    for (double& v : dist) v /= static_cast<double>(patches.size());

    std::printf("patches: %zu\n", patches.size());
    std::printf("quality score: %.6f\n", aggregate_image_score(scores));
    std::printf("scene type distribution:");
    for (double v : dist) std::printf(" %.4f", v);
    std::printf("\n");
    return 0;
}

// ---- plot -------------------------------------------------------------------

struct PlotArgs {
    std::string report;
    std::string out = "training_trend.png";
};

int cmd_plot(const PlotArgs& args) {
    std::cout << "plot:\n";
    log_kv("report", args.report);
    log_kv("out", args.out);
    render_training_plot(args.report, args.out);
    std::cout << "wrote " << args.out << "\n";
    return 0;
}

// ---- dump-patches -----------------------------------------------------------

struct DumpArgs {
    std::string image;
    std::string out_prefix = "patches";
    LcnFlags lcn;
    PatchFlags patch;
};

int cmd_dump_patches(const DumpArgs& args) {
    std::cout << "dump-patches:\n";
    log_kv("image", args.image);
    log_kv("out_prefix", args.out_prefix);

    const GrayImage gray = to_grayscale(read_rgb_image(args.image));
    const NormalizedImage normalized = normalize(gray, args.lcn.params());
    const auto patches = extract_patches(normalized, args.image, args.patch.params());

    const std::string raw_path = args.out_prefix + ".f32";
    std::ofstream raw(raw_path, std::ios::binary);
    if (!raw) throw IoError("cannot open " + raw_path + " for writing");
    nlohmann::json origins = nlohmann::json::array();
    for (const Patch& p : patches) {
        std::vector<float> buf(p.pixels.size());
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(p.pixels[i]);
        raw.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size() * sizeof(float)));
        origins.push_back({p.origin_row, p.origin_col});
    }

    nlohmann::json sidecar;
    sidecar["dtype"] = "float32";
    sidecar["byte_order"] = "little-endian";
    sidecar["shape"] = {patches.size(), static_cast<std::size_t>(args.patch.size),
                        static_cast<std::size_t>(args.patch.size)};
    sidecar["layout"] = "row-major";
    sidecar["source"] = args.image;
    sidecar["origins"] = origins;
    std::ofstream side(args.out_prefix + ".json", std::ios::binary);
    side << sidecar.dump(2) << "\n";

    std::cout << "wrote " << patches.size() << " patches to " << raw_path << " (+ sidecar)\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"no-reference smartphone photo quality assessment toolkit"};
    app.require_subcommand(1);

    FeaturesArgs features_args;
    auto* features = app.add_subcommand("features", "extract 37-dim scene descriptors to CSV");
    features->add_option("--images", features_args.images_dir, "directory of input images")
        ->required();
    features->add_option("--out", features_args.out_csv, "output CSV path");
    features->add_option("--threshold", features_args.threshold, "edge decision threshold");
    features->add_option("--workers", features_args.workers, "data-parallel width")
        ->check(CLI::PositiveNumber);

    ClusterArgs cluster_args;
    auto* cluster = app.add_subcommand("cluster", "k-means scene types from a feature CSV");
    cluster->add_option("--features", cluster_args.features_csv, "feature CSV")->required();
    cluster->add_option("--k", cluster_args.k, "number of scene types");
    cluster->add_option("--seed", cluster_args.seed, "clustering seed");
    cluster->add_option("--model-out", cluster_args.model_out, "scene model JSON path");
    cluster->add_option("--labels-out", cluster_args.labels_out, "scene labels JSON path");

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate a synthetic ranked dataset");
    synth->add_option("--out", synth_args.out_root, "output dataset root")->required();
    synth->add_option("--scenes", synth_args.scenes, "number of scenes");
    synth->add_option("--devices", synth_args.devices, "devices per scene");
    synth->add_option("--height", synth_args.height, "image height");
    synth->add_option("--width", synth_args.width, "image width");
    synth->add_option("--degradation", synth_args.degradation, "blur|noise|exposure|mixed");
    synth->add_option("--ladder", synth_args.ladder,
                      "comma-separated strictly increasing strengths, one per device");
    synth->add_option("--seed", synth_args.seed, "generator seed");
    synth->add_flag("--overwrite", synth_args.overwrite, "replace an existing dataset");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train one quality aspect");
    train_cmd->add_option("--config", train_args.config_file,
                          "config file (key = value; flags take precedence)");
    train_cmd->add_option("--data", train_args.data_root, "dataset root")
        ->envname("IQA_DATA_ROOT");
    train_cmd->add_option("--aspect", train_args.aspect, "texture|color|noise|exposure");
    train_cmd->add_option("--out", train_args.out_dir, "output directory");
    train_cmd->add_option("--net", train_args.net, "full|reduced");
    train_cmd->add_option("--lr", train_args.lr, "learning rate");
    train_cmd->add_option("--batch", train_args.batch, "batch size")->check(CLI::PositiveNumber);
    train_cmd->add_option("--epochs", train_args.epochs, "epochs")->check(CLI::PositiveNumber);
    train_cmd->add_option("--alpha", train_args.alpha, "scene loss weight (0 = single-task)");
    train_cmd->add_option("--dropout", train_args.dropout, "head dropout rate");
    train_cmd->add_option("--split-fraction", train_args.split_fraction,
                          "scene-level training share");
    train_cmd->add_option("--seed", train_args.seed, "master seed");
    train_cmd->add_option("--workers", train_args.workers, "data-parallel width")
        ->check(CLI::PositiveNumber);
    add_lcn_flags(train_cmd, train_args.lcn);
    add_patch_flags(train_cmd, train_args.patch);

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "checkpoint path")->required();
    eval_cmd->add_option("--data", eval_args.data_root, "dataset root")
        ->envname("IQA_DATA_ROOT")
        ->required();
    eval_cmd->add_option("--aspect", eval_args.aspect, "texture|color|noise|exposure");
    eval_cmd->add_option("--out-prefix", eval_args.out_prefix, "output file prefix");
    eval_cmd->add_option("--subset", eval_args.subset, "all|train|val (split by --seed)");
    eval_cmd->add_option("--split-fraction", eval_args.split_fraction, "scene-level split share");
    eval_cmd->add_option("--seed", eval_args.seed, "split seed (must match training)");
    eval_cmd->add_option("--workers", eval_args.workers, "data-parallel width")
        ->check(CLI::PositiveNumber);
    add_lcn_flags(eval_cmd, eval_args.lcn);
    add_patch_flags(eval_cmd, eval_args.patch);

    PredictArgs predict_args;
    auto* predict = app.add_subcommand("predict", "score one image with a checkpoint");
    predict->add_option("--checkpoint", predict_args.checkpoint, "checkpoint path")->required();
    predict->add_option("--image", predict_args.image, "input image")->required();
    predict->add_option("--patch-stride", predict_args.stride, "patch grid stride");
    add_lcn_flags(predict, predict_args.lcn);

    PlotArgs plot_args;
    auto* plot = app.add_subcommand("plot", "render the per-epoch SROCC/accuracy trend");
    plot->add_option("--report", plot_args.report, "training report.jsonl")->required();
    plot->add_option("--out", plot_args.out, "output PNG");

    DumpArgs dump_args;
    auto* dump = app.add_subcommand("dump-patches", "debug-dump normalized patches to raw f32");
    dump->add_option("--image", dump_args.image, "input image")->required();
    dump->add_option("--out-prefix", dump_args.out_prefix, "output prefix (.f32 + .json)");
    add_lcn_flags(dump, dump_args.lcn);
    add_patch_flags(dump, dump_args.patch);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (features->parsed()) return cmd_features(features_args);
        if (cluster->parsed()) return cmd_cluster(cluster_args);
        if (synth->parsed()) return cmd_synth(synth_args);
        if (train_cmd->parsed()) {
            apply_train_config(train_cmd, train_args);
            return cmd_train(train_args);
        }
        if (eval_cmd->parsed()) return cmd_eval(eval_args);
        if (predict->parsed()) return cmd_predict(predict_args);
        if (plot->parsed()) return cmd_plot(plot_args);
        if (dump->parsed()) return cmd_dump_patches(dump_args);
    } catch (const ValueError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DegenerateClusteringError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace siqa
