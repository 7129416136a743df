#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "siqa/imaging.hpp"

namespace siqa {

/// The four rated quality dimensions; each gets its own trained model.
enum class Aspect { texture = 0, color = 1, noise = 2, exposure = 3 };
inline constexpr std::array<Aspect, 4> kAllAspects{Aspect::texture, Aspect::color, Aspect::noise,
                                                   Aspect::exposure};
std::string to_string(Aspect aspect);
Aspect aspect_from_string(const std::string& name);

/// One photographed scene: the same subject captured by N devices, with a
/// within-scene quality rank per aspect (1 = best).
struct SceneGroup {
    std::string scene_id;
    struct Entry {
        std::string device_id;
        std::filesystem::path path;
    };
    std::vector<Entry> images;
    // ranks[aspect][device_id] is a permutation of 1..N over the scene's devices
    std::array<std::map<std::string, int>, 4> ranks;

    int device_count() const { return static_cast<int>(ranks[0].size()); }
};

struct DatasetLoadResult {
    std::vector<SceneGroup> scenes;
    std::vector<std::string> warnings;
};

/// Reads the on-disk layout:
///   <root>/scenes/<scene_id>/<device_id>.png
///   <root>/ranks.csv            header: scene_id,device_id,texture,color,noise,exposure
///   <root>/scene_labels.json    optional, written by the cluster stage
/// Ranks must be a permutation of 1..N per scene and aspect (fatal otherwise);
/// unreadable images are excluded with a per-scene warning.
DatasetLoadResult load_dataset(const std::filesystem::path& root);

enum class Degradation { blur, noise, exposure, mixed };
std::string to_string(Degradation d);
Degradation degradation_from_string(const std::string& name);

/// Synthetic dataset description. The strength ladder is strictly
/// increasing, one entry per device, so ground-truth rank = ladder index + 1.
struct SynthSpec {
    int n_scenes = 1;
    int n_devices = 3;
    int image_height = 192;
    int image_width = 256;
    Degradation degradation = Degradation::blur;
    std::vector<double> strength_ladder;
    std::uint64_t seed = 0;
};

/// Renders seeded base scenes (mixed gradients, texture fields, shapes) and
/// writes one degraded copy per device plus ranks.csv. Refuses to overwrite
/// an existing dataset unless `overwrite` is set.
void generate_synthetic(const SynthSpec& spec, const std::filesystem::path& out_root,
                        bool overwrite = false);

/// One training unit: a normalized patch with the labels it inherits from
/// its source image.
struct Sample {
    Patch patch;
    double quality_label = 0.0;       // in [0, 1], higher = better
    int scene_label = 0;              // cluster id in {0..3}
    std::string scene_id_of_origin;   // dataset scene, not the cluster
    Aspect aspect = Aspect::texture;
};

struct LabeledImage {
    std::string image_id;  // "<scene_id>/<device_id>"
    std::string device_id;
    int rank = 0;
    double quality_label = 0.0;
    int scene_label = 0;
    std::vector<Patch> patches;
};

struct LabeledScene {
    std::string scene_id;
    std::vector<LabeledImage> images;
};

/// Full preprocessing pipeline per image: grayscale, contrast-normalize,
/// crop patches, attach the aspect's quality label and the image's cluster
/// label to every patch.
std::vector<LabeledScene> build_scene_samples(const std::vector<SceneGroup>& groups,
                                              const std::map<std::string, int>& scene_labels,
                                              Aspect aspect, const LcnParams& lcn = {},
                                              const PatchParams& patch_params = {},
                                              int workers = 1);

/// Flattened per-patch view of build_scene_samples.
std::vector<Sample> build_samples(const std::vector<LabeledScene>& scenes, Aspect aspect);

// -- independent physical oracles used to verify degradations ----------------
double mean_abs_laplacian(const GrayImage& img);
double mean_luminance(const GrayImage& img);

}  // namespace siqa
