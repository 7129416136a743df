#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "siqa/common.hpp"
#include "siqa/imaging.hpp"

namespace siqa {

/// Backbone and head geometry. The convolution stack is fixed at six 3x3
/// layers (stride 1, padding 1) with 2x2 max pooling after layers 2 and 4,
/// followed by global average pooling; channel widths and head sizes are
/// configurable so desk-scale tests can run a reduced variant.
struct NetworkConfig {
    int input_size = 64;
    std::array<int, 6> conv_channels{32, 32, 64, 64, 128, 128};
    std::array<int, 2> head_hidden{256, 256};
    double dropout_rate = 0.5;
    int scene_classes = 4;

    int backbone_out_dim() const { return conv_channels[5]; }
    int final_spatial() const { return input_size / 4; }
    void validate() const;

    static NetworkConfig full() { return NetworkConfig{}; }
    /// All widths divided by 8; input size selectable (8 for gradient
    /// checks, 64 for desk-scale training).
    static NetworkConfig reduced(int input = 64) {
        NetworkConfig c;
        c.input_size = input;
        c.conv_channels = {4, 4, 8, 8, 16, 16};
        c.head_hidden = {32, 32};
        return c;
    }

    bool operator==(const NetworkConfig&) const = default;
};

/// One named tensor inside the flat parameter vector.
struct TensorSpec {
    std::string name;
    std::vector<int> shape;
    std::size_t offset = 0;
    std::size_t count = 0;
};

/// All learnable parameters in one flat vector. The backbone tensors are
/// shared by both heads; the heads' own tensors are disjoint. Tensor order
/// (also the checkpoint serialization order):
///   conv1..conv6 {.weight [oc,ic,3,3], .bias [oc]},
///   quality.fc1/.fc2/.out {.weight [out,in], .bias [out]},
///   scene.fc1/.fc2/.out   {.weight [out,in], .bias [out]}.
struct NetworkWeights {
    NetworkConfig config;
    std::vector<TensorSpec> layout;
    std::vector<double> params;

    std::span<double> tensor(std::string_view name);
    std::span<const double> tensor(std::string_view name) const;
    std::size_t parameter_count() const { return params.size(); }
};

/// Builds the tensor layout implied by a config.
std::vector<TensorSpec> make_layout(const NetworkConfig& config);
std::size_t parameter_count(const NetworkConfig& config);

/// Fan-in-scaled normal initialization for rectified-linear layers
/// (std = sqrt(2 / fan_in)); biases zero. Deterministic per seed.
NetworkWeights init_weights(const NetworkConfig& config, std::uint64_t seed);

struct ForwardOutput {
    double quality = 0.0;
    std::vector<double> scene_logits;
};

/// Intermediate activations kept for backpropagation. Reused across calls
/// to avoid reallocation in training loops.
struct ForwardTrace {
    std::array<std::vector<double>, 6> z;   // conv pre-activations
    std::array<std::vector<double>, 6> a;   // conv post-relu activations
    std::array<std::vector<double>, 2> pooled;    // after each 2x2 max pool
    std::array<std::vector<int>, 2> pool_argmax;  // flat index into pre-pool tensor
    std::vector<double> gap;                // global average pooled backbone output

    struct Head {
        std::vector<double> z1, a1, z2, a2;  // a1/a2 include dropout scaling
        std::vector<double> mask1, mask2;    // 0 or 1/(1-p); empty in eval mode
        std::vector<double> out;
    } quality, scene;

    void resize(const NetworkConfig& config);
};

/// Layer-by-layer output shapes, for architecture assertions.
struct LayerShape {
    std::string name;
    int channels;
    int height;
    int width;
};
std::vector<LayerShape> shape_trace(const NetworkConfig& config);

/// Evaluates the network on one normalized patch (row-major,
/// input_size x input_size values). In train mode, dropout masks are drawn
/// from dropout_seed; eval mode is deterministic and applies no scaling.
ForwardOutput forward(const NetworkWeights& weights, std::span<const double> patch,
                      bool train_mode, std::uint64_t dropout_seed, ForwardTrace& trace);
ForwardOutput forward(const NetworkWeights& weights, std::span<const double> patch,
                      bool train_mode, std::uint64_t dropout_seed);

/// Per-patch forwards in order; per-sample dropout seeds are fanned out
/// from dropout_seed by batch index.
std::vector<ForwardOutput> forward_batch(const NetworkWeights& weights,
                                         const std::vector<Patch>& patches, bool train_mode,
                                         std::uint64_t dropout_seed);

/// Accumulates d(loss)/d(params) into grad given the upstream output
/// gradients d(loss)/d(quality) and d(loss)/d(scene_logits). The trace must
/// come from a forward over the same patch and weights.
void backward(const NetworkWeights& weights, const ForwardTrace& trace,
              std::span<const double> patch, double d_quality,
              std::span<const double> d_scene_logits, std::vector<double>& grad);

}  // namespace siqa
