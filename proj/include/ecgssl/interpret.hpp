#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ecgssl/pipelines.hpp"

namespace ecgssl {

enum class LrpRule { Epsilon, Zero };

/// Per-input-sample relevance of one downstream decision. conservation_gap
/// reports output_logit minus the relevance sum (bias absorption plus
/// epsilon leakage); it is a statistic, not an assertion.
struct RelevanceMap {
    std::string segment_id;
    std::vector<double> scores;  // one R per input sample
    double output_logit = 0;
    LrpRule rule = LrpRule::Epsilon;
    double epsilon = 1e-6;
    double conservation_gap = 0;
};

namespace lrp_detail {

using Vec = std::vector<double>;

/// [C, T] activation plane in double precision.
struct Plane {
    int c = 0, t = 0;
    Vec v;
    Plane() = default;
    Plane(int c_, int t_) : c(c_), t(t_), v(static_cast<std::size_t>(c_) * t_, 0.0) {}
    double& at(int i, int j) { return v[static_cast<std::size_t>(i) * t + j]; }
    double at(int i, int j) const { return v[static_cast<std::size_t>(i) * t + j]; }
};

inline double stabilize(double z, LrpRule rule, double eps) {
    if (rule == LrpRule::Zero) return z;
    return z + (z >= 0 ? eps : -eps);
}

/// Forward one conv layer on a plane (single segment, double precision).
inline Plane conv_forward(const nn::Conv1dLayer<float>& conv, const Plane& x) {
    const auto& w = conv.w.value;
    const int cout = w.dim(0), cin = w.dim(1), K = w.dim(2);
    const int pad = conv.pad, stride = conv.stride;
    const int tout = (x.t + 2 * pad - K) / stride + 1;
    Plane y(cout, tout);
    for (int co = 0; co < cout; ++co)
        for (int t = 0; t < tout; ++t) {
            double acc = conv.b.value.v[static_cast<std::size_t>(co)];
            for (int ci = 0; ci < cin; ++ci)
                for (int k = 0; k < K; ++k) {
                    const int idx = t * stride + k - pad;
                    if (idx >= 0 && idx < x.t)
                        acc += static_cast<double>(w.at3(co, ci, k)) * x.at(ci, idx);
                }
            y.at(co, t) = acc;
        }
    return y;
}

/// Epsilon-rule relevance through a conv layer: each output unit k
/// redistributes R_k over its inputs j proportionally to a_j * w_jk, with
/// the full pre-activation (bias included) as the denominator, so the bias
/// absorbs its share.
inline Plane conv_relevance(const nn::Conv1dLayer<float>& conv, const Plane& x,
                            const Plane& pre, const Plane& r_out, LrpRule rule, double eps) {
    const auto& w = conv.w.value;
    const int cout = w.dim(0), cin = w.dim(1), K = w.dim(2);
    const int pad = conv.pad, stride = conv.stride;
    Plane r_in(x.c, x.t);
    for (int co = 0; co < cout; ++co)
        for (int t = 0; t < pre.t; ++t) {
            const double r = r_out.at(co, t);
            if (r == 0.0) continue;
            const double denom = stabilize(pre.at(co, t), rule, eps);
            if (denom == 0.0) continue;  // Zero rule: no contributions to share
            const double f = r / denom;
            for (int ci = 0; ci < cin; ++ci)
                for (int k = 0; k < K; ++k) {
                    const int idx = t * stride + k - pad;
                    if (idx >= 0 && idx < x.t)
                        r_in.at(ci, idx) += x.at(ci, idx) * static_cast<double>(w.at3(co, ci, k)) * f;
                }
        }
    return r_in;
}

inline Plane relu(const Plane& x) {
    Plane y = x;
    for (double& v : y.v)
        if (v < 0) v = 0;
    return y;
}

/// z-proportional split of residual relevance. A summed activation of
/// exactly zero falls back to |contribution|-proportional shares (any split
/// conserves; the z-ratio is undefined there).
inline void add_relevance(const Plane& a, const Plane& b, const Plane& r_out, LrpRule rule,
                          double eps, Plane& r_a, Plane& r_b) {
    r_a = Plane(a.c, a.t);
    r_b = Plane(b.c, b.t);
    for (std::size_t i = 0; i < a.v.size(); ++i) {
        const double r = r_out.v[i];
        if (r == 0.0) continue;
        const double z = a.v[i] + b.v[i];
        const double denom = stabilize(z, rule, eps);
        if (denom != 0.0) {
            r_a.v[i] = r * a.v[i] / denom;
            r_b.v[i] = r * b.v[i] / denom;
        } else {
            const double mag = std::abs(a.v[i]) + std::abs(b.v[i]);
            if (mag > 0.0) {
                r_a.v[i] = r * std::abs(a.v[i]) / mag;
                r_b.v[i] = r * std::abs(b.v[i]) / mag;
            } else {
                r_a.v[i] = 0.5 * r;
                r_b.v[i] = 0.5 * r;
            }
        }
    }
}

/// One residual block's activation trace.
struct BlockTrace {
    Plane input;
    Plane pre1;   // conv1 output
    Plane act1;   // relu(pre1)
    Plane pre2;   // conv2 output (main branch)
    Plane short_pre;  // projection output when present, else = input
    Plane output;
};

} // namespace lrp_detail

/// Backprojects the downstream logit onto the 3000 input samples.
/// Supported layers: conv, linear, ReLU, global average pooling, residual
/// add and the scalar stage gain; anything else in the model is a
/// structural impossibility here by construction.
inline RelevanceMap lrp(const DownstreamModel& model, const Segment& segment,
                        LrpRule rule = LrpRule::Epsilon, double epsilon = 1e-6) {
    if (model.rep.kind != RepModel::Kind::Encoder)
        throw UsageError("lrp: representation kind '" + model.rep.task +
                         "' has no layer structure to propagate through (encoder required)");
    const auto& enc = model.rep.encoder;
    if (static_cast<int>(segment.samples.size()) != enc.cfg.input_len)
        throw UsageError("lrp: segment length does not match the encoder input length");

    using namespace lrp_detail;

    // ---- forward pass with full activation trace ----
    Plane x(1, enc.cfg.input_len);
    for (int t = 0; t < enc.cfg.input_len; ++t) x.at(0, t) = segment.samples[static_cast<std::size_t>(t)];

    const Plane stem_pre = conv_forward(enc.stem, x);
    Plane cur = relu(stem_pre);

    std::vector<std::vector<BlockTrace>> trace(enc.stages.size());
    std::vector<Plane> stage_out(enc.stages.size());
    for (std::size_t s = 0; s < enc.stages.size(); ++s) {
        for (const auto& block : enc.stages[s]) {
            BlockTrace bt;
            bt.input = cur;
            bt.pre1 = conv_forward(block.conv1, bt.input);
            bt.act1 = relu(bt.pre1);
            bt.pre2 = conv_forward(block.conv2, bt.act1);
            bt.short_pre = block.proj ? conv_forward(*block.proj, bt.input) : bt.input;
            bt.output = bt.pre2;
            for (std::size_t i = 0; i < bt.output.v.size(); ++i) bt.output.v[i] += bt.short_pre.v[i];
            cur = bt.output;
            trace[s].push_back(std::move(bt));
        }
        // scalar gain: relevance passes through unchanged (single linear branch)
        const double gain = enc.gains[s].value.v[0];
        for (double& v : cur.v) v *= gain;
        stage_out[s] = cur;
    }

    // GAP -> pooled [C]
    const int C = cur.c, T = cur.t;
    Vec pooled(static_cast<std::size_t>(C), 0.0);
    for (int c = 0; c < C; ++c) {
        double acc = 0;
        for (int t = 0; t < T; ++t) acc += cur.at(c, t);
        pooled[static_cast<std::size_t>(c)] = acc / T;
    }

    // projection to rep_dim, then the downstream head to one logit
    const int d = enc.cfg.rep_dim;
    Vec rep(static_cast<std::size_t>(d), 0.0);
    for (int j = 0; j < d; ++j) {
        double acc = enc.proj.b.value.v[static_cast<std::size_t>(j)];
        for (int c = 0; c < C; ++c) acc += static_cast<double>(enc.proj.w.value.at2(j, c)) * pooled[static_cast<std::size_t>(c)];
        rep[static_cast<std::size_t>(j)] = acc;
    }
    double logit = model.head.b.value.v[0];
    for (int j = 0; j < d; ++j) logit += static_cast<double>(model.head.w.value.at2(0, j)) * rep[static_cast<std::size_t>(j)];

    // ---- relevance walk, starting from the pre-sigmoid logit ----
    // head: single output unit
    Vec r_rep(static_cast<std::size_t>(d), 0.0);
    {
        const double denom = stabilize(logit, rule, epsilon);
        if (denom != 0.0) {
            const double f = logit / denom;  // = R_out / denom with R_out = logit
            for (int j = 0; j < d; ++j)
                r_rep[static_cast<std::size_t>(j)] =
                    rep[static_cast<std::size_t>(j)] * static_cast<double>(model.head.w.value.at2(0, j)) * f;
        }
    }
    // projection linear layer
    Vec r_pooled(static_cast<std::size_t>(C), 0.0);
    for (int j = 0; j < d; ++j) {
        const double r = r_rep[static_cast<std::size_t>(j)];
        if (r == 0.0) continue;
        const double denom = stabilize(rep[static_cast<std::size_t>(j)], rule, epsilon);
        if (denom == 0.0) continue;
        const double f = r / denom;
        for (int c = 0; c < C; ++c)
            r_pooled[static_cast<std::size_t>(c)] += pooled[static_cast<std::size_t>(c)] *
                                                     static_cast<double>(enc.proj.w.value.at2(j, c)) * f;
    }
    // GAP: relevance distributes equally over pooled positions
    Plane r_cur(C, T);
    for (int c = 0; c < C; ++c)
        for (int t = 0; t < T; ++t) r_cur.at(c, t) = r_pooled[static_cast<std::size_t>(c)] / T;

    // stages in reverse; the scalar gain is a one-branch linear map, so
    // relevance passes through unchanged
    for (std::size_t s = enc.stages.size(); s-- > 0;) {
        for (std::size_t b = enc.stages[s].size(); b-- > 0;) {
            const BlockTrace& bt = trace[s][b];
            const auto& block = enc.stages[s][b];
            Plane r_main, r_short;
            add_relevance(bt.pre2, bt.short_pre, r_cur, rule, epsilon, r_main, r_short);
            // main branch: conv2 <- relu (pass-through) <- conv1
            Plane r_act1 = conv_relevance(block.conv2, bt.act1, bt.pre2, r_main, rule, epsilon);
            Plane r_in_main = conv_relevance(block.conv1, bt.input, bt.pre1, r_act1, rule, epsilon);
            // shortcut branch
            Plane r_in_short;
            if (block.proj) {
                r_in_short = conv_relevance(*block.proj, bt.input, bt.short_pre, r_short, rule, epsilon);
            } else {
                r_in_short = r_short;
            }
            r_cur = Plane(bt.input.c, bt.input.t);
            for (std::size_t i = 0; i < r_cur.v.size(); ++i)
                r_cur.v[i] = r_in_main.v[i] + r_in_short.v[i];
        }
    }

    // stem conv (ReLU above it passes relevance through)
    const Plane r_input = conv_relevance(enc.stem, x, stem_pre, r_cur, rule, epsilon);

    RelevanceMap map;
    map.segment_id = segment.source_id + ":" + std::to_string(segment.offset);
    map.rule = rule;
    map.epsilon = epsilon;
    map.output_logit = logit;
    map.scores.resize(static_cast<std::size_t>(enc.cfg.input_len));
    double sum = 0;
    for (int t = 0; t < enc.cfg.input_len; ++t) {
        map.scores[static_cast<std::size_t>(t)] = r_input.at(0, t);
        sum += r_input.at(0, t);
    }
    map.conservation_gap = logit - sum;
    return map;
}

/// Mean |R| within +-window_s of the given R-peak times versus mean |R|
/// elsewhere. Peak times are absolute record seconds; `offset` places the
/// segment in the record. Reported as a statistic, never asserted.
struct PeakFocus {
    double mean_abs_r_near_peaks = 0;
    double mean_abs_r_elsewhere = 0;
    int peak_samples = 0;
};

inline PeakFocus r_peak_focus(const RelevanceMap& map, const std::vector<double>& r_peaks_s,
                              std::size_t offset, int fs, double window_s = 0.05) {
    const int n = static_cast<int>(map.scores.size());
    std::vector<bool> near(static_cast<std::size_t>(n), false);
    const int w = static_cast<int>(std::lround(window_s * fs));
    for (double tp : r_peaks_s) {
        const int center = static_cast<int>(std::lround(tp * fs)) - static_cast<int>(offset);
        for (int i = std::max(0, center - w); i <= std::min(n - 1, center + w); ++i)
            near[static_cast<std::size_t>(i)] = true;
    }
    PeakFocus f;
    double sum_near = 0, sum_far = 0;
    int n_near = 0, n_far = 0;
    for (int i = 0; i < n; ++i) {
        if (near[static_cast<std::size_t>(i)]) {
            sum_near += std::abs(map.scores[static_cast<std::size_t>(i)]);
            ++n_near;
        } else {
            sum_far += std::abs(map.scores[static_cast<std::size_t>(i)]);
            ++n_far;
        }
    }
    f.peak_samples = n_near;
    if (n_near) f.mean_abs_r_near_peaks = sum_near / n_near;
    if (n_far) f.mean_abs_r_elsewhere = sum_far / n_far;
    return f;
}

/// CSV export `index,sample_value,R` plus an optional SVG rendering of the
/// signal colored by normalized |R|.
inline void heatmap_export(const RelevanceMap& map, const Segment& segment,
                           const std::filesystem::path& csv_path, bool svg = false) {
    if (map.scores.size() != segment.samples.size())
        throw UsageError("heatmap_export: map and segment lengths differ");
    std::ofstream out(csv_path);
    if (!out) throw DataError("cannot write heatmap " + csv_path.string());
    out << "index,sample_value,R\n";
    out.precision(9);
    for (std::size_t i = 0; i < map.scores.size(); ++i)
        out << i << ',' << segment.samples[i] << ',' << map.scores[i] << "\n";
    if (!out) throw DataError("write failure on " + csv_path.string());

    if (!svg) return;
    std::filesystem::path svg_path = csv_path;
    svg_path.replace_extension(".svg");
    std::ofstream sv(svg_path);
    if (!sv) throw DataError("cannot write heatmap " + svg_path.string());
    const int width = 1200, height = 300;
    double max_abs = 0;
    for (double r : map.scores) max_abs = std::max(max_abs, std::abs(r));
    const std::size_t n = map.scores.size();
    sv << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
       << "' style='background:#111'>\n";
    sv.precision(4);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double x1 = static_cast<double>(i) / (n - 1) * width;
        const double x2 = static_cast<double>(i + 1) / (n - 1) * width;
        const double y1 = height - 20 - segment.samples[i] * (height - 40);
        const double y2 = height - 20 - segment.samples[i + 1] * (height - 40);
        const double heat = max_abs > 0 ? std::abs(map.scores[i]) / max_abs : 0.0;
        const int rr = static_cast<int>(40 + 215 * heat);
        const int gg = static_cast<int>(40 + 160 * heat);
        sv << "<line x1='" << x1 << "' y1='" << y1 << "' x2='" << x2 << "' y2='" << y2
           << "' stroke='rgb(" << rr << ',' << gg << ",40)' stroke-width='1.2'/>\n";
    }
    sv << "</svg>\n";
}

} // namespace ecgssl
