#include "siqa/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "siqa/image_io.hpp"
#include "siqa/training.hpp"

namespace siqa {

std::string to_string(Aspect aspect) {
    switch (aspect) {
        case Aspect::texture: return "texture";
        case Aspect::color: return "color";
        case Aspect::noise: return "noise";
        case Aspect::exposure: return "exposure";
    }
    throw ValueError("unknown aspect");
}

Aspect aspect_from_string(const std::string& name) {
    for (Aspect a : kAllAspects)
        if (to_string(a) == name) return a;
    throw ValueError("unknown aspect '" + name + "' (expected texture|color|noise|exposure)");
}

std::string to_string(Degradation d) {
    switch (d) {
        case Degradation::blur: return "blur";
        case Degradation::noise: return "noise";
        case Degradation::exposure: return "exposure";
        case Degradation::mixed: return "mixed";
    }
    throw ValueError("unknown degradation");
}

Degradation degradation_from_string(const std::string& name) {
    for (Degradation d : {Degradation::blur, Degradation::noise, Degradation::exposure,
                          Degradation::mixed})
        if (to_string(d) == name) return d;
    throw ValueError("unknown degradation '" + name + "' (expected blur|noise|exposure|mixed)");
}

// -- loading ------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

}  // namespace

DatasetLoadResult load_dataset(const std::filesystem::path& root) {
    const auto ranks_path = root / "ranks.csv";
    std::ifstream in(ranks_path);
    if (!in) throw IoError("missing ranks file: " + ranks_path.string());

    std::string line;
    if (!std::getline(in, line)) throw IoError("empty ranks file: " + ranks_path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "scene_id,device_id,texture,color,noise,exposure")
        throw IoError("unexpected ranks.csv header: " + line);

    std::map<std::string, SceneGroup> by_scene;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 6)
            throw IoError("ranks.csv line " + std::to_string(line_no) + ": expected 6 fields");
        SceneGroup& g = by_scene[fields[0]];
        g.scene_id = fields[0];
        for (int a = 0; a < 4; ++a) {
            int r;
            try {
                r = std::stoi(fields[2 + a]);
            } catch (const std::exception&) {
                throw ValueError("ranks.csv line " + std::to_string(line_no) +
                                 ": rank is not an integer");
            }
            if (!g.ranks[a].emplace(fields[1], r).second)
                throw ValueError("scene " + g.scene_id + ": duplicate device " + fields[1]);
        }
    }

    DatasetLoadResult result;
    for (auto& [scene_id, group] : by_scene) {
        const int n = group.device_count();
        for (int a = 0; a < 4; ++a) {
            std::set<int> seen;
            for (const auto& [dev, r] : group.ranks[a]) seen.insert(r);
            bool ok = static_cast<int>(seen.size()) == n && *seen.begin() == 1 &&
                      *seen.rbegin() == n;
            if (!ok)
                throw ValueError("scene " + scene_id + ", aspect " +
                                 to_string(static_cast<Aspect>(a)) +
                                 ": ranks are not a permutation of 1.." + std::to_string(n));
        }
        for (const auto& [dev, r] : group.ranks[0]) {
            std::filesystem::path img;
            for (const char* ext : {".png", ".jpg", ".jpeg"}) {
                auto candidate = root / "scenes" / scene_id / (dev + ext);
                if (std::filesystem::exists(candidate)) {
                    img = candidate;
                    break;
                }
            }
            if (img.empty()) {
                result.warnings.push_back("scene " + scene_id + ": missing image for device " +
                                          dev + "; image excluded");
                continue;
            }
            try {
                read_rgb_image(img);
            } catch (const IoError&) {
                result.warnings.push_back("scene " + scene_id + ": unreadable image " +
                                          img.string() + "; image excluded");
                continue;
            }
            group.images.push_back({dev, img});
        }
        result.scenes.push_back(std::move(group));
    }
    return result;
}

// -- synthetic generation ------------------------------------------------------

namespace {

struct Archetype {
    double brightness;
    double contrast;
    double texture_gain;
};

// Four base-scene styles so the statistical descriptor has real cluster
// structure: dark low-contrast, bright textured, balanced mixed, flat dim.
Archetype archetype_for(int scene_index) {
    switch (scene_index % 4) {
        case 0: return {45.0, 0.55, 0.7};
        case 1: return {150.0, 1.0, 1.5};
        case 2: return {120.0, 0.85, 1.0};
        default: return {75.0, 0.45, 0.5};
    }
}

GrayImage render_base_scene(int h, int w, int scene_index, std::mt19937_64& rng) {
    const Archetype at = archetype_for(scene_index);
    GrayImage img(h, w, at.brightness);

    // Global gradient.
    {
        const double theta = uniform01(rng) * 2.0 * std::numbers::pi;
        const double amp = (20.0 + 30.0 * uniform01(rng)) * at.contrast;
        const double cx = std::cos(theta), sy = std::sin(theta);
        const double diag = std::sqrt(static_cast<double>(h) * h + static_cast<double>(w) * w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                img.at(y, x) += amp * ((x * cx + y * sy) / diag);
    }

    // Low-frequency waves plus mid-frequency texture.
    const int n_waves = 3 + static_cast<int>(uniform_below(rng, 3));
    for (int k = 0; k < n_waves; ++k) {
        const double theta = uniform01(rng) * 2.0 * std::numbers::pi;
        const double freq = (0.01 + 0.03 * uniform01(rng)) * 2.0 * std::numbers::pi;
        const double phase = uniform01(rng) * 2.0 * std::numbers::pi;
        const double amp = (8.0 + 18.0 * uniform01(rng)) * at.contrast;
        const double fx = freq * std::cos(theta), fy = freq * std::sin(theta);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                img.at(y, x) += amp * std::sin(fx * x + fy * y + phase);
    }
    const int n_texture = 4 + static_cast<int>(uniform_below(rng, 4));
    for (int k = 0; k < n_texture; ++k) {
        const double theta = uniform01(rng) * 2.0 * std::numbers::pi;
        const double freq = (0.25 + 1.15 * uniform01(rng));
        const double phase = uniform01(rng) * 2.0 * std::numbers::pi;
        const double amp = (4.0 + 9.0 * uniform01(rng)) * at.texture_gain;
        const double fx = freq * std::cos(theta), fy = freq * std::sin(theta);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                img.at(y, x) += amp * std::sin(fx * x + fy * y + phase);
    }

    // Broadband fine grain, lightly smoothed.
    {
        const double grain = 6.0 * at.texture_gain;
        GrayImage noise(h, w);
        for (double& v : noise.pixels) v = grain * standard_normal(rng);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                int cnt = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int yy = y + dy, xx = x + dx;
                        if (yy >= 0 && yy < h && xx >= 0 && xx < w) {
                            acc += noise.at(yy, xx);
                            ++cnt;
                        }
                    }
                img.at(y, x) += acc / cnt;
            }
    }

    // Hard-edged shapes.
    const int n_shapes = 6 + static_cast<int>(uniform_below(rng, 6));
    for (int k = 0; k < n_shapes; ++k) {
        const bool circle = uniform01(rng) < 0.5;
        const double offset = (uniform01(rng) < 0.5 ? -1.0 : 1.0) *
                              (20.0 + 40.0 * uniform01(rng)) * at.contrast;
        const int cy = static_cast<int>(uniform_below(rng, h));
        const int cx = static_cast<int>(uniform_below(rng, w));
        const int ry = 4 + static_cast<int>(uniform_below(rng, h / 4 + 1));
        const int rx = 4 + static_cast<int>(uniform_below(rng, w / 4 + 1));
        for (int y = std::max(0, cy - ry); y < std::min(h, cy + ry); ++y)
            for (int x = std::max(0, cx - rx); x < std::min(w, cx + rx); ++x) {
                if (circle) {
                    const double dy = (y - cy) / static_cast<double>(ry);
                    const double dx = (x - cx) / static_cast<double>(rx);
                    if (dy * dy + dx * dx > 1.0) continue;
                }
                img.at(y, x) += offset;
            }
    }

    for (double& v : img.pixels) v = std::clamp(v, 0.0, 255.0);
    return img;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    if (sigma <= 0.0) return img;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += kernel[i + radius];
    }
    for (double& k : kernel) k /= sum;

    const int h = img.height, w = img.width;
    GrayImage tmp(h, w), out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * img.at(y, std::clamp(x + i, 0, w - 1));
            tmp.at(y, x) = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * tmp.at(std::clamp(y + i, 0, h - 1), x);
            out.at(y, x) = acc;
        }
    return out;
}

void add_gaussian_noise(GrayImage& img, double stddev, std::mt19937_64& rng) {
    if (stddev <= 0.0) return;
    for (double& v : img.pixels) v = std::clamp(v + stddev * standard_normal(rng), 0.0, 255.0);
}

void gamma_shift(GrayImage& img, double delta) {
    if (delta == 0.0) return;
    const double g = 1.0 + delta;
    for (double& v : img.pixels) v = 255.0 * std::pow(std::clamp(v, 0.0, 255.0) / 255.0, g);
}

void contrast_scale(GrayImage& img, double factor) {
    for (double& v : img.pixels) v = std::clamp(127.5 + (v - 127.5) * factor, 0.0, 255.0);
}

std::string scene_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%03d", i);
    return buf;
}

std::string device_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "d%02d", i + 1);
    return buf;
}

std::vector<int> seeded_permutation(int n, std::uint64_t seed) {
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::mt19937_64 rng(seed);
    seeded_shuffle(perm, rng);
    return perm;
}

}  // namespace

void generate_synthetic(const SynthSpec& spec, const std::filesystem::path& out_root,
                        bool overwrite) {
    if (spec.n_scenes < 1 || spec.n_devices < 1)
        throw ValueError("generate_synthetic: need at least one scene and device");
    if (static_cast<int>(spec.strength_ladder.size()) != spec.n_devices)
        throw ValueError("generate_synthetic: strength ladder must have one entry per device");
    for (std::size_t i = 0; i < spec.strength_ladder.size(); ++i) {
        if (spec.strength_ladder[i] <= 0.0)
            throw ValueError("generate_synthetic: ladder strengths must be positive");
        if (i > 0 && spec.strength_ladder[i] <= spec.strength_ladder[i - 1])
            throw ValueError("generate_synthetic: ladder must be strictly increasing");
    }
    if (spec.image_height < 64 || spec.image_width < 64)
        throw ValueError("generate_synthetic: images must be at least 64x64");

    const auto ranks_path = out_root / "ranks.csv";
    if (std::filesystem::exists(ranks_path) && !overwrite)
        throw IoError("refusing to overwrite existing dataset at " + out_root.string() +
                      " (pass overwrite)");

    std::filesystem::create_directories(out_root / "scenes");

    // In mixed mode each aspect gets its own per-scene device ordering; the
    // shared ladder provides the normalized strength scale.
    const double lad_min = spec.strength_ladder.front();
    const double lad_max = spec.strength_ladder.back();
    auto ladder_pos = [&](int k) {
        return lad_max > lad_min
                   ? (spec.strength_ladder[k] - lad_min) / (lad_max - lad_min)
                   : 0.0;
    };

    std::ostringstream ranks;
    ranks << "scene_id,device_id,texture,color,noise,exposure\n";

    for (int s = 0; s < spec.n_scenes; ++s) {
        const std::string sid = scene_name(s);
        std::filesystem::create_directories(out_root / "scenes" / sid);

        std::mt19937_64 base_rng(sub_seed(spec.seed, "scene-" + sid));
        const GrayImage base =
            render_base_scene(spec.image_height, spec.image_width, s, base_rng);

        std::array<std::vector<int>, 4> aspect_order;  // aspect -> device -> ladder slot
        for (int a = 0; a < 4; ++a) {
            if (spec.degradation == Degradation::mixed)
                aspect_order[a] = seeded_permutation(
                    spec.n_devices, sub_seed(spec.seed, "perm-" + sid + "-" + std::to_string(a)));
            else {
                aspect_order[a].resize(spec.n_devices);
                for (int d = 0; d < spec.n_devices; ++d) aspect_order[a][d] = d;
            }
        }

        for (int d = 0; d < spec.n_devices; ++d) {
            const std::string did = device_name(d);
            GrayImage img = base;
            std::mt19937_64 noise_rng(sub_seed(spec.seed, "noise-" + sid + "-" + did));

            switch (spec.degradation) {
                case Degradation::blur:
                    img = gaussian_blur(img, spec.strength_ladder[d]);
                    break;
                case Degradation::noise:
                    add_gaussian_noise(img, spec.strength_ladder[d], noise_rng);
                    break;
                case Degradation::exposure:
                    gamma_shift(img, spec.strength_ladder[d]);
                    break;
                case Degradation::mixed: {
                    const double u_blur = ladder_pos(aspect_order[0][d]);
                    const double u_contrast = ladder_pos(aspect_order[1][d]);
                    const double u_noise = ladder_pos(aspect_order[2][d]);
                    const double u_gamma = ladder_pos(aspect_order[3][d]);
                    img = gaussian_blur(img, 0.3 + 3.0 * u_blur);
                    contrast_scale(img, 1.0 / (1.0 + 1.5 * u_contrast));
                    gamma_shift(img, 0.8 * u_gamma);
                    add_gaussian_noise(img, 1.0 + 20.0 * u_noise, noise_rng);
                    break;
                }
            }
            write_gray_png(out_root / "scenes" / sid / (did + ".png"), img);

            ranks << sid << "," << did;
            for (int a = 0; a < 4; ++a) ranks << "," << (aspect_order[a][d] + 1);
            ranks << "\n";
        }
    }

    std::ofstream out(ranks_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + ranks_path.string());
    out << ranks.str();
}

// -- sample building -----------------------------------------------------------

std::vector<LabeledScene> build_scene_samples(const std::vector<SceneGroup>& groups,
                                              const std::map<std::string, int>& scene_labels,
                                              Aspect aspect, const LcnParams& lcn,
                                              const PatchParams& patch_params, int workers) {
    std::vector<const SceneGroup*> sorted;
    sorted.reserve(groups.size());
    for (const auto& g : groups) sorted.push_back(&g);
    std::sort(sorted.begin(), sorted.end(),
              [](const SceneGroup* a, const SceneGroup* b) { return a->scene_id < b->scene_id; });

    const int a = static_cast<int>(aspect);
    std::vector<LabeledScene> scenes(sorted.size());

    // Resolve labels and ranks up front, then fill the per-image slots in
    // parallel; each image writes only its own slot.
    struct Job {
        const SceneGroup::Entry* entry;
        LabeledImage* slot;
    };
    std::vector<Job> jobs;
    std::vector<std::vector<SceneGroup::Entry>> entry_storage(sorted.size());

    for (std::size_t si = 0; si < sorted.size(); ++si) {
        const SceneGroup* g = sorted[si];
        LabeledScene& scene = scenes[si];
        scene.scene_id = g->scene_id;
        const int n_devices = g->device_count();

        entry_storage[si] = g->images;
        auto& entries = entry_storage[si];
        std::sort(entries.begin(), entries.end(),
                  [](const auto& x, const auto& y) { return x.device_id < y.device_id; });

        scene.images.resize(entries.size());
        for (std::size_t ei = 0; ei < entries.size(); ++ei) {
            const auto& entry = entries[ei];
            const std::string image_id = g->scene_id + "/" + entry.device_id;
            const auto rank_it = g->ranks[a].find(entry.device_id);
            if (rank_it == g->ranks[a].end())
                throw ValueError("no " + to_string(aspect) + " rank for " + image_id);
            const auto label_it = scene_labels.find(image_id);
            if (label_it == scene_labels.end())
                throw ValueError("image " + image_id +
                                 " has no scene label; run the cluster stage first");

            LabeledImage& img = scene.images[ei];
            img.image_id = image_id;
            img.device_id = entry.device_id;
            img.rank = rank_it->second;
            img.quality_label = make_labels(img.rank, n_devices);
            img.scene_label = label_it->second;
            jobs.push_back({&entry, &img});
        }
    }

    parallel_for(jobs.size(), workers, [&](std::size_t j) {
        const GrayImage gray = to_grayscale(read_rgb_image(jobs[j].entry->path));
        const NormalizedImage normalized = normalize(gray, lcn);
        jobs[j].slot->patches = extract_patches(normalized, jobs[j].slot->image_id, patch_params);
    });
    return scenes;
}

std::vector<Sample> build_samples(const std::vector<LabeledScene>& scenes, Aspect aspect) {
    std::vector<Sample> samples;
    for (const auto& scene : scenes)
        for (const auto& img : scene.images)
            for (const auto& patch : img.patches) {
                Sample s;
                s.patch = patch;
                s.quality_label = img.quality_label;
                s.scene_label = img.scene_label;
                s.scene_id_of_origin = scene.scene_id;
                s.aspect = aspect;
                samples.push_back(std::move(s));
            }
    return samples;
}

double mean_abs_laplacian(const GrayImage& img) {
    if (img.height < 3 || img.width < 3)
        throw DimensionError("mean_abs_laplacian: image too small");
    double acc = 0.0;
    std::size_t count = 0;
    for (int y = 1; y + 1 < img.height; ++y)
        for (int x = 1; x + 1 < img.width; ++x) {
            acc += std::fabs(4.0 * img.at(y, x) - img.at(y - 1, x) - img.at(y + 1, x) -
                             img.at(y, x - 1) - img.at(y, x + 1));
            ++count;
        }
    return acc / static_cast<double>(count);
}

double mean_luminance(const GrayImage& img) {
    double acc = 0.0;
    for (double v : img.pixels) acc += v;
    return acc / static_cast<double>(img.pixels.size());
}

}  // namespace siqa
