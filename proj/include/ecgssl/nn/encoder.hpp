#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "ecgssl/nn/layers.hpp"

namespace ecgssl::nn {

/// Shape of the residual 1-D encoder. The declared rep_dim values are
/// {64,128,256}; other positive values work but get a stderr warning.
struct EncoderConfig {
    int stages = 4;
    int base_width = 16;
    int blocks_per_stage = 2;
    int kernel = 7;
    int rep_dim = 128;
    int input_len = 3000;
    // Extra downsampling in the stem conv. 1 = the reference architecture;
    // desk-scale runs use 4 to trade time resolution for speed.
    int stem_stride = 1;

    void validate() const {
        if (stages <= 0 || base_width <= 0 || blocks_per_stage <= 0 || kernel <= 0 || rep_dim <= 0 ||
            input_len <= 0 || stem_stride <= 0)
            throw UsageError("EncoderConfig: all fields must be positive");
        if (kernel % 2 == 0) throw UsageError("EncoderConfig: kernel must be odd");
        if (rep_dim != 64 && rep_dim != 128 && rep_dim != 256)
            std::fprintf(stderr, "warning: rep_dim %d outside the declared set {64,128,256}\n", rep_dim);
    }

    bool operator==(const EncoderConfig&) const = default;
};

/// conv-ReLU-conv plus shortcut. The first block of a stage halves time and
/// doubles channels, so its shortcut is a strided 1x1 projection; later
/// blocks use the identity.
template <typename T>
struct ResBlock {
    Conv1dLayer<T> conv1, conv2;
    std::optional<Conv1dLayer<T>> proj;

    void init(const std::string& name, int cin, int cout, int kernel, int stride, Rng& rng) {
        conv1.init(name + ".conv1", cin, cout, kernel, stride, rng);
        conv2.init(name + ".conv2", cout, cout, kernel, 1, rng);
        if (stride != 1 || cin != cout) {
            proj.emplace();
            proj->init(name + ".proj", cin, cout, 1, stride, rng);
        }
    }

    int forward(Graph<T>& g, int x) {
        const int main = conv2.forward(g, g.relu(conv1.forward(g, x)));
        const int shortcut = proj ? proj->forward(g, x) : x;
        return g.add(main, shortcut);
    }

    void collect(std::vector<Param<T>*>& out) {
        conv1.collect(out);
        conv2.collect(out);
        if (proj) proj->collect(out);
    }
};

/// Stem conv, `stages` residual stages with a learnable scalar gain each,
/// global average pooling and a linear projection to rep_dim.
/// Maps [B, input_len] -> [B, rep_dim].
template <typename T>
struct Encoder {
    EncoderConfig cfg;
    Conv1dLayer<T> stem;
    std::vector<std::vector<ResBlock<T>>> stages;
    std::vector<Param<T>> gains;
    LinearLayer<T> proj;
    int final_channels = 0;

    void init(const EncoderConfig& config, std::uint64_t seed) {
        cfg = config;
        cfg.validate();
        Rng rng(seed);
        stem.init("stem", 1, cfg.base_width, cfg.kernel, cfg.stem_stride, rng);
        stages.clear();
        gains.clear();
        gains.reserve(static_cast<std::size_t>(cfg.stages));
        int cin = cfg.base_width;
        for (int s = 0; s < cfg.stages; ++s) {
            const int cout = cfg.base_width << (s + 1);
            std::vector<ResBlock<T>> blocks(static_cast<std::size_t>(cfg.blocks_per_stage));
            for (int bidx = 0; bidx < cfg.blocks_per_stage; ++bidx) {
                const std::string name = "stage" + std::to_string(s) + ".block" + std::to_string(bidx);
                blocks[static_cast<std::size_t>(bidx)].init(name, bidx == 0 ? cin : cout, cout, cfg.kernel,
                                                            bidx == 0 ? 2 : 1, rng);
            }
            stages.push_back(std::move(blocks));
            Param<T> gain;
            gain.name = "stage" + std::to_string(s) + ".gain";
            gain.init_shape({1});
            gain.value.v[0] = T(1);
            gains.push_back(std::move(gain));
            cin = cout;
        }
        final_channels = cin;
        proj.init("proj", final_channels, cfg.rep_dim, rng);
    }

    /// batch [B, input_len] -> representations [B, rep_dim]
    int forward(Graph<T>& g, int batch) {
        const Tensor<T>& bv = g.value(batch);
        if (bv.rank() != 2 || bv.dim(1) != cfg.input_len)
            throw UsageError("Encoder: expected batch of shape [B," + std::to_string(cfg.input_len) + "], got " + shape_str(bv));
        int x = g.reshape(batch, {bv.dim(0), 1, cfg.input_len});
        x = g.relu(stem.forward(g, x));
        for (std::size_t s = 0; s < stages.size(); ++s) {
            for (auto& block : stages[s]) x = block.forward(g, x);
            x = g.scale(x, g.param(gains[s]));
        }
        x = g.gap(x);
        return proj.forward(g, x);
    }

    void collect(std::vector<Param<T>*>& out) {
        stem.collect(out);
        for (auto& stage : stages)
            for (auto& block : stage) block.collect(out);
        for (auto& gain : gains) out.push_back(&gain);
        proj.collect(out);
    }

    void set_trainable(bool trainable) {
        std::vector<Param<T>*> ps;
        collect(ps);
        for (auto* p : ps) p->trainable = trainable;
    }

    /// Per-stage time lengths after downsampling (needed by the mirrored
    /// decoder): index 0 is the stem output length.
    std::vector<int> stage_lengths() const {
        const int pad2 = 2 * (cfg.kernel / 2);
        int t = (cfg.input_len + pad2 - cfg.kernel) / cfg.stem_stride + 1;
        std::vector<int> lens{t};
        for (int s = 0; s < cfg.stages; ++s) {
            // stride-2 same-padded conv
            t = (t + pad2 - cfg.kernel) / 2 + 1;
            lens.push_back(t);
        }
        return lens;
    }
};

/// Mirror decoder for the reconstruction baseline: linear from rep_dim to
/// the deepest feature map, transposed-conv stages back up, final 1x1 conv
/// to a single channel.
template <typename T>
struct Decoder {
    EncoderConfig cfg;
    LinearLayer<T> expand;
    std::vector<ConvTranspose1dLayer<T>> ups;
    std::optional<ConvTranspose1dLayer<T>> stem_up;  // undoes a strided stem
    Conv1dLayer<T> head;
    std::vector<int> lengths;  // encoder stage lengths, lengths[0] = stem output
    int deep_channels = 0;

    void init(const EncoderConfig& config, const std::vector<int>& stage_lengths, std::uint64_t seed) {
        cfg = config;
        lengths = stage_lengths;
        Rng rng(seed);
        deep_channels = cfg.base_width << cfg.stages;
        expand.init("dec.expand", cfg.rep_dim, deep_channels * lengths.back(), rng);
        ups.clear();
        int cin = deep_channels;
        for (int s = cfg.stages - 1; s >= 0; --s) {
            const int cout = s == 0 ? cfg.base_width : (cfg.base_width << s);
            ConvTranspose1dLayer<T> up;
            // kernel 4 / stride 2 / pad 1 doubles the length; slice_time trims
            // the odd-length mismatch against the encoder's floor division.
            up.init("dec.up" + std::to_string(s), cin, cout, 4, 2, 1, rng);
            ups.push_back(std::move(up));
            cin = cout;
        }
        if (cfg.stem_stride > 1) {
            stem_up.emplace();
            stem_up->init("dec.stem_up", cfg.base_width, cfg.base_width, 2 * cfg.stem_stride,
                          cfg.stem_stride, cfg.stem_stride / 2, rng);
        }
        head.init("dec.head", cfg.base_width, 1, 1, 1, rng);
    }

    /// reps [B, rep_dim] -> reconstruction [B, input_len]
    int forward(Graph<T>& g, int reps) {
        const int B = g.value(reps).dim(0);
        int x = expand.forward(g, reps);
        x = g.reshape(x, {B, deep_channels, lengths.back()});
        x = g.relu(x);
        for (std::size_t i = 0; i < ups.size(); ++i) {
            const int target = lengths[lengths.size() - 2 - i];
            x = ups[i].forward(g, x);
            if (g.value(x).dim(2) != target) x = g.slice_time(x, target);
            if (i + 1 < ups.size()) x = g.relu(x);
        }
        if (stem_up) {
            x = stem_up->forward(g, g.relu(x));
            if (g.value(x).dim(2) < cfg.input_len)
                throw UsageError("Decoder: stem upsample fell short of the input length");
            if (g.value(x).dim(2) != cfg.input_len) x = g.slice_time(x, cfg.input_len);
        }
        x = head.forward(g, x);
        return g.reshape(x, {B, cfg.input_len});
    }

    void collect(std::vector<Param<T>*>& out) {
        expand.collect(out);
        for (auto& up : ups) up.collect(out);
        if (stem_up) stem_up->collect(out);
        head.collect(out);
    }
};

} // namespace ecgssl::nn
