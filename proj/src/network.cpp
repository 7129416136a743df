#include "siqa/network.hpp"

#include <algorithm>
#include <cmath>

namespace siqa {

void NetworkConfig::validate() const {
    if (input_size < 4 || input_size % 4 != 0)
        throw DimensionError("NetworkConfig: input_size must be a positive multiple of 4");
    for (int c : conv_channels)
        if (c < 1) throw DimensionError("NetworkConfig: conv channels must be positive");
    for (int h : head_hidden)
        if (h < 1) throw DimensionError("NetworkConfig: head widths must be positive");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw ValueError("NetworkConfig: dropout rate must be in [0, 1)");
    if (scene_classes < 2) throw ValueError("NetworkConfig: need at least two scene classes");
}

namespace {

// Input channel count per conv layer; layer 0 consumes the grayscale patch.
std::array<int, 6> conv_inputs(const NetworkConfig& c) {
    return {1, c.conv_channels[0], c.conv_channels[1], c.conv_channels[2], c.conv_channels[3],
            c.conv_channels[4]};
}

// Spatial side per conv layer: pooling halves it after layers 2 and 4.
std::array<int, 6> conv_spatial(const NetworkConfig& c) {
    const int s = c.input_size;
    return {s, s, s / 2, s / 2, s / 4, s / 4};
}

void push_dense(std::vector<TensorSpec>& layout, std::size_t& offset, const std::string& name,
                int out_dim, int in_dim) {
    layout.push_back({name + ".weight",
                      {out_dim, in_dim},
                      offset,
                      static_cast<std::size_t>(out_dim) * in_dim});
    offset += layout.back().count;
    layout.push_back({name + ".bias", {out_dim}, offset, static_cast<std::size_t>(out_dim)});
    offset += layout.back().count;
}

}  // namespace

std::vector<TensorSpec> make_layout(const NetworkConfig& config) {
    config.validate();
    std::vector<TensorSpec> layout;
    std::size_t offset = 0;
    const auto in_ch = conv_inputs(config);
    for (int l = 0; l < 6; ++l) {
        const int oc = config.conv_channels[l];
        const std::string name = "conv" + std::to_string(l + 1);
        layout.push_back({name + ".weight",
                          {oc, in_ch[l], 3, 3},
                          offset,
                          static_cast<std::size_t>(oc) * in_ch[l] * 9});
        offset += layout.back().count;
        layout.push_back({name + ".bias", {oc}, offset, static_cast<std::size_t>(oc)});
        offset += layout.back().count;
    }
    for (const char* head : {"quality", "scene"}) {
        const int out_dim = std::string(head) == "quality" ? 1 : config.scene_classes;
        push_dense(layout, offset, std::string(head) + ".fc1", config.head_hidden[0],
                   config.backbone_out_dim());
        push_dense(layout, offset, std::string(head) + ".fc2", config.head_hidden[1],
                   config.head_hidden[0]);
        push_dense(layout, offset, std::string(head) + ".out", out_dim, config.head_hidden[1]);
    }
    return layout;
}

std::size_t parameter_count(const NetworkConfig& config) {
    const auto layout = make_layout(config);
    return layout.back().offset + layout.back().count;
}

std::span<double> NetworkWeights::tensor(std::string_view name) {
    for (const auto& t : layout)
        if (t.name == name) return {params.data() + t.offset, t.count};
    throw ValueError("unknown tensor: " + std::string(name));
}

std::span<const double> NetworkWeights::tensor(std::string_view name) const {
    for (const auto& t : layout)
        if (t.name == name) return {params.data() + t.offset, t.count};
    throw ValueError("unknown tensor: " + std::string(name));
}

NetworkWeights init_weights(const NetworkConfig& config, std::uint64_t seed) {
    NetworkWeights w;
    w.config = config;
    w.layout = make_layout(config);
    w.params.assign(w.layout.back().offset + w.layout.back().count, 0.0);

    std::mt19937_64 rng(sub_seed(seed, "init"));
    for (const auto& t : w.layout) {
        if (t.name.ends_with(".bias")) continue;
        std::size_t fan_in = 1;
        for (std::size_t d = 1; d < t.shape.size(); ++d) fan_in *= t.shape[d];
        const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (std::size_t i = 0; i < t.count; ++i)
            w.params[t.offset + i] = stddev * standard_normal(rng);
    }
    return w;
}

std::vector<LayerShape> shape_trace(const NetworkConfig& config) {
    config.validate();
    std::vector<LayerShape> shapes;
    const auto sp = conv_spatial(config);
    for (int l = 0; l < 6; ++l) {
        shapes.push_back({"conv" + std::to_string(l + 1), config.conv_channels[l], sp[l], sp[l]});
        if (l == 1 || l == 3)
            shapes.push_back({"pool" + std::to_string(l == 1 ? 1 : 2), config.conv_channels[l],
                              sp[l] / 2, sp[l] / 2});
    }
    shapes.push_back({"gap", config.backbone_out_dim(), 1, 1});
    shapes.push_back({"quality", 1, 1, 1});
    shapes.push_back({"scene", config.scene_classes, 1, 1});
    return shapes;
}

void ForwardTrace::resize(const NetworkConfig& config) {
    const auto sp = conv_spatial(config);
    for (int l = 0; l < 6; ++l) {
        const std::size_t n =
            static_cast<std::size_t>(config.conv_channels[l]) * sp[l] * sp[l];
        z[l].resize(n);
        a[l].resize(n);
    }
    for (int p = 0; p < 2; ++p) {
        const int l = p == 0 ? 1 : 3;
        const std::size_t n =
            static_cast<std::size_t>(config.conv_channels[l]) * (sp[l] / 2) * (sp[l] / 2);
        pooled[p].resize(n);
        pool_argmax[p].resize(n);
    }
    gap.resize(config.backbone_out_dim());
    for (Head* h : {&quality, &scene}) {
        h->z1.resize(config.head_hidden[0]);
        h->a1.resize(config.head_hidden[0]);
        h->z2.resize(config.head_hidden[1]);
        h->a2.resize(config.head_hidden[1]);
    }
    quality.out.resize(1);
    scene.out.resize(config.scene_classes);
}

namespace {

// z[o] = bias[o] + sum_i w[o][i] (*) in[i], 3x3 cross-correlation, zero pad 1.
void conv3x3_forward(const double* in, int ic, int s, const double* w, const double* b, int oc,
                     double* z) {
    const std::size_t plane = static_cast<std::size_t>(s) * s;
    for (int o = 0; o < oc; ++o) {
        double* zp = z + o * plane;
        std::fill(zp, zp + plane, b[o]);
        for (int i = 0; i < ic; ++i) {
            const double* inp = in + i * plane;
            const double* wk = w + (static_cast<std::size_t>(o) * ic + i) * 9;
            for (int kh = 0; kh < 3; ++kh) {
                const int dy = kh - 1;
                const int y0 = std::max(0, -dy), y1 = std::min(s, s - dy);
                for (int kw = 0; kw < 3; ++kw) {
                    const int dx = kw - 1;
                    const int x0 = std::max(0, -dx), x1 = std::min(s, s - dx);
                    const double wv = wk[kh * 3 + kw];
                    for (int y = y0; y < y1; ++y) {
                        double* zrow = zp + static_cast<std::size_t>(y) * s;
                        const double* irow = inp + static_cast<std::size_t>(y + dy) * s + dx;
                        for (int x = x0; x < x1; ++x) zrow[x] += wv * irow[x];
                    }
                }
            }
        }
    }
}

void relu(const std::vector<double>& z, std::vector<double>& a) {
    for (std::size_t i = 0; i < z.size(); ++i) a[i] = z[i] > 0.0 ? z[i] : 0.0;
}

void maxpool2(const double* in, int c, int s, double* out, int* argmax) {
    const int os = s / 2;
    const std::size_t in_plane = static_cast<std::size_t>(s) * s;
    const std::size_t out_plane = static_cast<std::size_t>(os) * os;
    for (int ch = 0; ch < c; ++ch) {
        const double* ip = in + ch * in_plane;
        for (int y = 0; y < os; ++y) {
            for (int x = 0; x < os; ++x) {
                const int base = (2 * y) * s + 2 * x;
                int best = base;
                double bv = ip[base];
                for (int d : {1, s, s + 1}) {
                    if (ip[base + d] > bv) {
                        bv = ip[base + d];
                        best = base + d;
                    }
                }
                out[ch * out_plane + y * os + x] = bv;
                argmax[ch * out_plane + y * os + x] = static_cast<int>(ch * in_plane) + best;
            }
        }
    }
}

void dense_forward(const double* x, int in_dim, const double* w, const double* b, int out_dim,
                   double* z) {
    for (int r = 0; r < out_dim; ++r) {
        const double* wr = w + static_cast<std::size_t>(r) * in_dim;
        double acc = b[r];
        for (int c = 0; c < in_dim; ++c) acc += wr[c] * x[c];
        z[r] = acc;
    }
}

void apply_dropout(std::vector<double>& a, std::vector<double>& mask, double rate,
                   std::mt19937_64& rng) {
    const double scale = 1.0 / (1.0 - rate);
    mask.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        mask[i] = uniform01(rng) >= rate ? scale : 0.0;
        a[i] *= mask[i];
    }
}

struct HeadParams {
    std::span<const double> w1, b1, w2, b2, wo, bo;
};

HeadParams head_params(const NetworkWeights& w, const char* head) {
    const std::string h(head);
    return {w.tensor(h + ".fc1.weight"), w.tensor(h + ".fc1.bias"), w.tensor(h + ".fc2.weight"),
            w.tensor(h + ".fc2.bias"),   w.tensor(h + ".out.weight"), w.tensor(h + ".out.bias")};
}

void head_forward(const NetworkWeights& w, const char* head, const std::vector<double>& gap,
                  ForwardTrace::Head& t, bool train_mode, std::mt19937_64* dropout_rng) {
    const auto p = head_params(w, head);
    const int h1 = w.config.head_hidden[0], h2 = w.config.head_hidden[1];
    const int out_dim = static_cast<int>(t.out.size());

    dense_forward(gap.data(), w.config.backbone_out_dim(), p.w1.data(), p.b1.data(), h1,
                  t.z1.data());
    relu(t.z1, t.a1);
    const bool drop = train_mode && w.config.dropout_rate > 0.0;
    if (drop) apply_dropout(t.a1, t.mask1, w.config.dropout_rate, *dropout_rng);
    else t.mask1.clear();

    dense_forward(t.a1.data(), h1, p.w2.data(), p.b2.data(), h2, t.z2.data());
    relu(t.z2, t.a2);
    if (drop) apply_dropout(t.a2, t.mask2, w.config.dropout_rate, *dropout_rng);
    else t.mask2.clear();

    dense_forward(t.a2.data(), h2, p.wo.data(), p.bo.data(), out_dim, t.out.data());
}

}  // namespace

ForwardOutput forward(const NetworkWeights& weights, std::span<const double> patch,
                      bool train_mode, std::uint64_t dropout_seed, ForwardTrace& trace) {
    const NetworkConfig& cfg = weights.config;
    const std::size_t expected = static_cast<std::size_t>(cfg.input_size) * cfg.input_size;
    if (patch.size() != expected)
        throw DimensionError("forward: patch has " + std::to_string(patch.size()) +
                             " values, expected " + std::to_string(expected));

    trace.resize(cfg);
    const auto in_ch = conv_inputs(cfg);
    const auto sp = conv_spatial(cfg);

    const double* cur = patch.data();
    int cur_c = 1;
    for (int l = 0; l < 6; ++l) {
        conv3x3_forward(cur, in_ch[l], sp[l],
                        weights.tensor("conv" + std::to_string(l + 1) + ".weight").data(),
                        weights.tensor("conv" + std::to_string(l + 1) + ".bias").data(),
                        cfg.conv_channels[l], trace.z[l].data());
        relu(trace.z[l], trace.a[l]);
        cur = trace.a[l].data();
        cur_c = cfg.conv_channels[l];
        if (l == 1 || l == 3) {
            const int p = l == 1 ? 0 : 1;
            maxpool2(cur, cur_c, sp[l], trace.pooled[p].data(), trace.pool_argmax[p].data());
            cur = trace.pooled[p].data();
        }
    }

    const int fs = cfg.final_spatial();
    const std::size_t plane = static_cast<std::size_t>(fs) * fs;
    for (int c = 0; c < cfg.backbone_out_dim(); ++c) {
        double acc = 0.0;
        const double* pl = trace.a[5].data() + c * plane;
        for (std::size_t i = 0; i < plane; ++i) acc += pl[i];
        trace.gap[c] = acc / static_cast<double>(plane);
    }

    std::mt19937_64 dropout_rng(sub_seed(dropout_seed, "dropout"));
    head_forward(weights, "quality", trace.gap, trace.quality, train_mode, &dropout_rng);
    head_forward(weights, "scene", trace.gap, trace.scene, train_mode, &dropout_rng);

    ForwardOutput out;
    out.quality = trace.quality.out[0];
    out.scene_logits.assign(trace.scene.out.begin(), trace.scene.out.end());
    return out;
}

ForwardOutput forward(const NetworkWeights& weights, std::span<const double> patch,
                      bool train_mode, std::uint64_t dropout_seed) {
    ForwardTrace trace;
    return forward(weights, patch, train_mode, dropout_seed, trace);
}

std::vector<ForwardOutput> forward_batch(const NetworkWeights& weights,
                                         const std::vector<Patch>& patches, bool train_mode,
                                         std::uint64_t dropout_seed) {
    std::vector<ForwardOutput> outputs;
    outputs.reserve(patches.size());
    ForwardTrace trace;
    for (std::size_t i = 0; i < patches.size(); ++i)
        outputs.push_back(
            forward(weights, patches[i].pixels, train_mode, sub_seed(dropout_seed, i), trace));
    return outputs;
}

namespace {

// dW[o][i][.] += dz[o] (*) in[i]; db[o] += sum dz[o]; din[i] += w^T (*) dz.
void conv3x3_backward(const double* in, int ic, int s, const double* w, int oc, const double* dz,
                      double* dw, double* db, double* din) {
    const std::size_t plane = static_cast<std::size_t>(s) * s;
    if (din) std::fill(din, din + static_cast<std::size_t>(ic) * plane, 0.0);
    for (int o = 0; o < oc; ++o) {
        const double* dzp = dz + o * plane;
        double acc_b = 0.0;
        for (std::size_t i = 0; i < plane; ++i) acc_b += dzp[i];
        db[o] += acc_b;
        for (int i = 0; i < ic; ++i) {
            const double* inp = in + i * plane;
            double* dinp = din ? din + i * plane : nullptr;
            const std::size_t wbase = (static_cast<std::size_t>(o) * ic + i) * 9;
            for (int kh = 0; kh < 3; ++kh) {
                const int dy = kh - 1;
                const int y0 = std::max(0, -dy), y1 = std::min(s, s - dy);
                for (int kw = 0; kw < 3; ++kw) {
                    const int dx = kw - 1;
                    const int x0 = std::max(0, -dx), x1 = std::min(s, s - dx);
                    double acc_w = 0.0;
                    const double wv = w[wbase + kh * 3 + kw];
                    for (int y = y0; y < y1; ++y) {
                        const double* dzrow = dzp + static_cast<std::size_t>(y) * s;
                        const double* irow = inp + static_cast<std::size_t>(y + dy) * s + dx;
                        double* drow = dinp ? dinp + static_cast<std::size_t>(y + dy) * s + dx
                                            : nullptr;
                        for (int x = x0; x < x1; ++x) {
                            acc_w += dzrow[x] * irow[x];
                            if (drow) drow[x] += wv * dzrow[x];
                        }
                    }
                    dw[wbase + kh * 3 + kw] += acc_w;
                }
            }
        }
    }
}

void dense_backward(const double* x, int in_dim, const double* w, int out_dim, const double* dz,
                    double* dw, double* db, double* dx) {
    if (dx) std::fill(dx, dx + in_dim, 0.0);
    for (int r = 0; r < out_dim; ++r) {
        const double g = dz[r];
        db[r] += g;
        const double* wr = w + static_cast<std::size_t>(r) * in_dim;
        double* dwr = dw + static_cast<std::size_t>(r) * in_dim;
        for (int c = 0; c < in_dim; ++c) {
            dwr[c] += g * x[c];
            if (dx) dx[c] += wr[c] * g;
        }
    }
}

struct HeadGrads {
    double* w1;
    double* b1;
    double* w2;
    double* b2;
    double* wo;
    double* bo;
};

HeadGrads head_grads(const NetworkWeights& w, const char* head, std::vector<double>& grad) {
    const std::string h(head);
    auto at = [&](const std::string& name) -> double* {
        for (const auto& t : w.layout)
            if (t.name == name) return grad.data() + t.offset;
        throw ValueError("unknown tensor: " + name);
    };
    return {at(h + ".fc1.weight"), at(h + ".fc1.bias"), at(h + ".fc2.weight"),
            at(h + ".fc2.bias"),   at(h + ".out.weight"), at(h + ".out.bias")};
}

// Backpropagates one head; accumulates the head's contribution to d(gap).
void head_backward(const NetworkWeights& w, const char* head, const ForwardTrace::Head& t,
                   const std::vector<double>& gap, std::span<const double> dout,
                   std::vector<double>& grad, std::vector<double>& dgap) {
    const auto p = head_params(w, head);
    const auto g = head_grads(w, head, grad);
    const int h1 = w.config.head_hidden[0], h2 = w.config.head_hidden[1];
    const int bo_dim = static_cast<int>(t.out.size());

    std::vector<double> da2(h2);
    dense_backward(t.a2.data(), h2, p.wo.data(), bo_dim, dout.data(), g.wo, g.bo, da2.data());
    std::vector<double> dz2(h2);
    for (int i = 0; i < h2; ++i) {
        double d = da2[i];
        if (!t.mask2.empty()) d *= t.mask2[i];
        dz2[i] = t.z2[i] > 0.0 ? d : 0.0;
    }

    std::vector<double> da1(h1);
    dense_backward(t.a1.data(), h1, p.w2.data(), h2, dz2.data(), g.w2, g.b2, da1.data());
    std::vector<double> dz1(h1);
    for (int i = 0; i < h1; ++i) {
        double d = da1[i];
        if (!t.mask1.empty()) d *= t.mask1[i];
        dz1[i] = t.z1[i] > 0.0 ? d : 0.0;
    }

    std::vector<double> dg(w.config.backbone_out_dim());
    dense_backward(gap.data(), w.config.backbone_out_dim(), p.w1.data(), h1, dz1.data(), g.w1,
                   g.b1, dg.data());
    for (std::size_t i = 0; i < dgap.size(); ++i) dgap[i] += dg[i];
}

}  // namespace

void backward(const NetworkWeights& weights, const ForwardTrace& trace,
              std::span<const double> patch, double d_quality,
              std::span<const double> d_scene_logits, std::vector<double>& grad) {
    const NetworkConfig& cfg = weights.config;
    if (grad.size() != weights.params.size())
        throw DimensionError("backward: gradient buffer size mismatch");
    if (static_cast<int>(d_scene_logits.size()) != cfg.scene_classes)
        throw DimensionError("backward: scene logit gradient size mismatch");

    std::vector<double> dgap(cfg.backbone_out_dim(), 0.0);
    const double dq[1] = {d_quality};
    head_backward(weights, "quality", trace.quality, trace.gap, std::span<const double>(dq, 1),
                  grad, dgap);
    head_backward(weights, "scene", trace.scene, trace.gap, d_scene_logits, grad, dgap);

    const auto in_ch = conv_inputs(cfg);
    const auto sp = conv_spatial(cfg);
    const int fs = cfg.final_spatial();
    const std::size_t final_plane = static_cast<std::size_t>(fs) * fs;

    // d(gap) -> d(a6): every spatial position receives dgap[c] / (fs*fs).
    std::vector<double> da(trace.a[5].size());
    for (int c = 0; c < cfg.backbone_out_dim(); ++c) {
        const double v = dgap[c] / static_cast<double>(final_plane);
        std::fill(da.begin() + c * final_plane, da.begin() + (c + 1) * final_plane, v);
    }

    std::vector<double> dz, din;
    for (int l = 5; l >= 0; --l) {
        dz.resize(trace.z[l].size());
        for (std::size_t i = 0; i < dz.size(); ++i)
            dz[i] = trace.z[l][i] > 0.0 ? da[i] : 0.0;

        // Input of conv l: patch for l=0, pooled output after pools, else
        // the previous layer's activation.
        const double* in = nullptr;
        if (l == 0) in = patch.data();
        else if (l == 2) in = trace.pooled[0].data();
        else if (l == 4) in = trace.pooled[1].data();
        else in = trace.a[l - 1].data();

        double* dw = nullptr;
        double* db = nullptr;
        for (const auto& t : weights.layout) {
            if (t.name == "conv" + std::to_string(l + 1) + ".weight") dw = grad.data() + t.offset;
            if (t.name == "conv" + std::to_string(l + 1) + ".bias") db = grad.data() + t.offset;
        }

        const bool need_din = l > 0;
        din.resize(need_din ? static_cast<std::size_t>(in_ch[l]) * sp[l] * sp[l] : 0);
        conv3x3_backward(in, in_ch[l], sp[l], weights.tensor("conv" + std::to_string(l + 1) +
                         ".weight").data(), cfg.conv_channels[l], dz.data(), dw, db,
                         need_din ? din.data() : nullptr);
        if (!need_din) break;

        if (l == 2 || l == 4) {
            // din is the gradient at a pool output; route it to the argmax
            // positions of the pre-pool activation.
            const int p = l == 2 ? 0 : 1;
            const int pl = p == 0 ? 1 : 3;
            da.assign(trace.a[pl].size(), 0.0);
            for (std::size_t i = 0; i < din.size(); ++i)
                da[trace.pool_argmax[p][i]] += din[i];
        } else {
            da.assign(din.begin(), din.end());
        }
    }
}

}  // namespace siqa
