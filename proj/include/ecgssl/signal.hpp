#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecgssl/errors.hpp"

namespace ecgssl {

using Real = float;

/// Canonical segment length: 10 s at 300 Hz.
inline constexpr int kSegmentLength = 3000;
inline constexpr int kSegmentStride = 1500;
inline constexpr int kDefaultFs = 300;

enum class Label { Normal, AF, Unlabeled };

inline const char* label_name(Label l) {
    switch (l) {
        case Label::Normal: return "Normal";
        case Label::AF: return "AF";
        default: return "Unlabeled";
    }
}

inline Label label_from_name(const std::string& s) {
    if (s == "Normal") return Label::Normal;
    if (s == "AF") return Label::AF;
    if (s == "Unlabeled") return Label::Unlabeled;
    throw DataError("unknown label: " + s);
}

/// A raw single-lead recording. Amplitudes are in arbitrary device units;
/// annotations (when present) are ground-truth R-peak times in seconds.
struct EcgRecord {
    std::string id;
    int fs = kDefaultFs;
    std::vector<Real> samples;
    Label label = Label::Unlabeled;
    std::vector<double> annotations;

    double duration_s() const { return static_cast<double>(samples.size()) / fs; }
};

/// A raw (pre-normalization) window cut out of a record.
struct RawWindow {
    std::vector<Real> samples;
    std::string source_id;
    std::size_t offset = 0;
};

/// A fixed-length normalized window, the unit of all learning.
/// Values lie in [0,1] with min 0 / max 1 unless `degenerate` is set
/// (constant source window), in which case all values are 0.
struct Segment {
    std::vector<Real> samples;
    std::string source_id;
    std::size_t offset = 0;
    bool degenerate = false;
};

/// Cuts sliding windows of `window` samples every `stride` samples.
/// Windows extending past the end of the record are discarded, so a record
/// shorter than one window yields an empty list.
inline std::vector<RawWindow> segment(const EcgRecord& record, int window = kSegmentLength,
                                      int stride = kSegmentStride) {
    if (window <= 0 || stride <= 0) throw UsageError("segment: window and stride must be positive");
    std::vector<RawWindow> out;
    const std::size_t n = record.samples.size();
    if (n < static_cast<std::size_t>(window)) return out;
    const std::size_t count = (n - window) / stride + 1;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t off = i * stride;
        RawWindow w;
        w.samples.assign(record.samples.begin() + off, record.samples.begin() + off + window);
        w.source_id = record.id;
        w.offset = off;
        out.push_back(std::move(w));
    }
    return out;
}

/// Min-max normalization to [0,1]. A constant window has no span to
/// normalize, so it maps to all zeros with the degenerate flag set;
/// degenerate segments are excluded from training sets downstream.
inline Segment normalize(const RawWindow& window) {
    Segment seg;
    seg.source_id = window.source_id;
    seg.offset = window.offset;
    if (window.samples.empty()) throw UsageError("normalize: empty window");
    Real lo = window.samples[0];
    Real hi = window.samples[0];
    for (Real v : window.samples) {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
    }
    seg.samples.resize(window.samples.size());
    if (hi == lo) {
        seg.degenerate = true;
        return seg;  // all zeros
    }
    const Real span = hi - lo;
    for (std::size_t i = 0; i < window.samples.size(); ++i)
        seg.samples[i] = (window.samples[i] - lo) / span;
    return seg;
}

/// Convenience: segment then normalize, optionally dropping degenerates.
inline std::vector<Segment> segment_normalized(const EcgRecord& record, bool drop_degenerate = true,
                                               int window = kSegmentLength, int stride = kSegmentStride) {
    std::vector<Segment> out;
    for (const RawWindow& w : segment(record, window, stride)) {
        Segment s = normalize(w);
        if (drop_degenerate && s.degenerate) continue;
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace ecgssl
