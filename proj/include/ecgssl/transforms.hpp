#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "ecgssl/rng.hpp"
#include "ecgssl/signal.hpp"

namespace ecgssl {

/// Pretext target for the reverse-detection task, encoded [spatial, temporal]:
/// original = [0,0], temporal reverse = [0,1], spatial reverse = [1,0],
/// temporal-spatial reverse = [1,1].
struct ReverseLabel {
    std::uint8_t spatial = 0;
    std::uint8_t temporal = 0;

    bool operator==(const ReverseLabel&) const = default;
    /// Index in {0..3} for the 4-way softmax variant: spatial*2 + temporal.
    int class_index() const { return spatial * 2 + temporal; }
};

enum class PretextMode { TS, TemporalOnly, SpatialOnly };

/// Horizontal flip: output[i] = input[L-1-i]. Values unchanged as a multiset.
inline Segment temporal_reverse(const Segment& seg) {
    Segment out = seg;
    std::reverse(out.samples.begin(), out.samples.end());
    return out;
}

/// Vertical flip with re-normalization: output = (max - x) / (max - min).
/// For a normalized non-degenerate segment this is exactly 1 - x.
inline Segment spatial_reverse(const Segment& seg) {
    Segment out = seg;
    if (seg.degenerate) return out;  // all zeros stay all zeros
    Real lo = seg.samples[0], hi = seg.samples[0];
    for (Real v : seg.samples) {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
    }
    if (hi == lo) {
        std::fill(out.samples.begin(), out.samples.end(), Real(0));
        out.degenerate = true;
        return out;
    }
    const Real span = hi - lo;
    for (std::size_t i = 0; i < seg.samples.size(); ++i)
        out.samples[i] = (hi - seg.samples[i]) / span;
    return out;
}

/// Both flips. Composition order does not matter.
inline Segment ts_reverse(const Segment& seg) {
    return temporal_reverse(spatial_reverse(seg));
}

/// One pretext training example: a (possibly reversed) segment plus its code.
struct PretextExample {
    Segment segment;
    ReverseLabel target;
};

/// Expands segments into labeled pretext examples. TS yields all four
/// classes per input; TemporalOnly / SpatialOnly yield the original (bit 0)
/// and the corresponding single reverse (bit 1).
inline std::vector<PretextExample> make_pretext_set(const std::vector<Segment>& segments,
                                                    PretextMode mode) {
    std::vector<PretextExample> out;
    out.reserve(segments.size() * (mode == PretextMode::TS ? 4 : 2));
    for (const Segment& s : segments) {
        if (s.degenerate) throw DataError("make_pretext_set: degenerate segment rejected");
        switch (mode) {
            case PretextMode::TS:
                out.push_back({s, {0, 0}});
                out.push_back({temporal_reverse(s), {0, 1}});
                out.push_back({spatial_reverse(s), {1, 0}});
                out.push_back({ts_reverse(s), {1, 1}});
                break;
            case PretextMode::TemporalOnly:
                out.push_back({s, {0, 0}});
                out.push_back({temporal_reverse(s), {0, 1}});
                break;
            case PretextMode::SpatialOnly:
                out.push_back({s, {0, 0}});
                out.push_back({spatial_reverse(s), {1, 0}});
                break;
        }
    }
    return out;
}

/// Contrastive-view augmentation parameters.
struct AugmentSpec {
    enum class Kind { Permutation, GaussianNoise };
    Kind kind = Kind::Permutation;
    int pieces = 4;        // Permutation only; must be >= 2 and divide the segment length
    double sigma = 0.01;   // GaussianNoise only; must be > 0
    std::uint64_t seed = 0;
};

/// Applies one augmentation. Permutation splits the segment into equal
/// contiguous chunks and shuffles their order; GaussianNoise adds i.i.d.
/// noise and clips back to [0,1]. Same spec (incl. seed) => bit-identical
/// output.
inline Segment augment(const Segment& seg, const AugmentSpec& spec) {
    Segment out = seg;
    Rng rng(spec.seed);
    const std::size_t n = seg.samples.size();
    if (spec.kind == AugmentSpec::Kind::Permutation) {
        if (spec.pieces < 2 || n % static_cast<std::size_t>(spec.pieces) != 0)
            throw UsageError("augment: pieces must be >= 2 and divide the segment length");
        const std::size_t chunk = n / spec.pieces;
        std::vector<int> order(spec.pieces);
        for (int i = 0; i < spec.pieces; ++i) order[i] = i;
        rng.shuffle(order);
        for (int i = 0; i < spec.pieces; ++i)
            std::copy(seg.samples.begin() + order[i] * chunk,
                      seg.samples.begin() + (order[i] + 1) * chunk,
                      out.samples.begin() + i * chunk);
    } else {
        if (spec.sigma <= 0) throw UsageError("augment: sigma must be positive");
        for (std::size_t i = 0; i < n; ++i) {
            const double v = static_cast<double>(seg.samples[i]) + rng.normal(0.0, spec.sigma);
            out.samples[i] = static_cast<Real>(std::clamp(v, 0.0, 1.0));
        }
    }
    return out;
}

} // namespace ecgssl
