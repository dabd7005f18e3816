#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "ecgssl/rng.hpp"
#include "ecgssl/signal.hpp"

namespace ecgssl {

/// One Gaussian bump of the per-beat complex: offset/width in seconds
/// relative to the R peak, amplitude relative to R = 1.
struct BeatBump {
    double offset_s;
    double width_s;
    double amp;
};

/// Parameters of the parametric generator. Class-dependent defaults
/// (rr_cv, p_amp, fwave_amp) are applied by synth_record when the caller
/// leaves them negative.
struct SynthParams {
    int fs = kDefaultFs;
    double duration_s = 30.0;
    double mean_hr_bpm = 70.0;
    double rr_cv = -1.0;      // Normal default 0.03, AF default 0.25
    double p_amp = -1.0;      // Normal default 0.15, AF default 0
    double fwave_amp = -1.0;  // Normal default 0, AF default 0.05
    double fwave_hz = 6.0;
    double noise_amp = 0.01;
    std::uint64_t seed = 0;

    // QRS-T morphology; P amplitude comes from p_amp.
    double q_amp = -0.12, q_offset = -0.026, q_width = 0.010;
    double r_width = 0.012;
    double s_amp = -0.25, s_offset = 0.026, s_width = 0.010;
    double t_amp = 0.35, t_offset = 0.30, t_width = 0.07;
    double p_offset = -0.16, p_width = 0.025;
    double ar_coeff = 0.8;  // AR(1) smoothing of Normal RR jitter

    // Inter-record diversity. variability scales a log-normal jitter on the
    // bump amplitudes/widths/offsets and the heart rate, drawn once per
    // record; wander_amp adds a slow breathing-like baseline oscillation.
    // Both default to 0: records then share one fixed morphology.
    double variability = 0.0;
    double wander_amp = 0.0;
    double wander_hz = 0.25;
};

namespace detail {

inline SynthParams resolve_params(Label kind, SynthParams p) {
    const bool af = (kind == Label::AF);
    if (p.rr_cv < 0) p.rr_cv = af ? 0.25 : 0.03;
    if (p.p_amp < 0) p.p_amp = af ? 0.0 : 0.15;
    if (p.fwave_amp < 0) p.fwave_amp = af ? 0.05 : 0.0;
    if (af) {
        // AF morphology: no P waves, irregular rhythm, fibrillatory waves.
        p.p_amp = 0.0;
        if (p.rr_cv < 0.15) p.rr_cv = 0.15;
        if (p.fwave_amp <= 0.0) p.fwave_amp = 0.05;
    }
    return p;
}

inline void add_bump(std::vector<Real>& samples, int fs, double center_s, const BeatBump& b) {
    if (b.amp == 0.0) return;
    const double cutoff = 5.0 * b.width_s;
    const int lo = std::max(0, static_cast<int>(std::ceil((center_s + b.offset_s - cutoff) * fs)));
    const int hi = std::min(static_cast<int>(samples.size()) - 1,
                            static_cast<int>(std::floor((center_s + b.offset_s + cutoff) * fs)));
    const double inv2w2 = 1.0 / (2.0 * b.width_s * b.width_s);
    for (int i = lo; i <= hi; ++i) {
        const double dt = static_cast<double>(i) / fs - center_s - b.offset_s;
        samples[i] += static_cast<Real>(b.amp * std::exp(-dt * dt * inv2w2));
    }
}

} // namespace detail

/// Generates one synthetic record: Gaussian-bump PQRST complexes at
/// RR-jittered beat times, plus sinusoidal f-waves and baseline noise.
/// R-peak times land in `annotations`. Deterministic given (kind, params).
inline EcgRecord synth_record(Label kind, const SynthParams& raw_params) {
    if (kind == Label::Unlabeled) throw UsageError("synth_record: kind must be Normal or AF");
    const SynthParams p = detail::resolve_params(kind, raw_params);
    if (p.fs <= 0 || p.duration_s <= 0 || p.mean_hr_bpm <= 0)
        throw UsageError("synth_record: fs, duration and heart rate must be positive");
    if (p.rr_cv < 0 || p.noise_amp < 0)
        throw UsageError("synth_record: rr_cv and noise_amp must be non-negative");

    Rng rng(p.seed);

    // Per-record morphology: log-normal jitter scaled by `variability`.
    // Amplitude signs are preserved; rhythm statistics (rr_cv) stay as
    // configured, only the mean rate moves.
    SynthParams m = p;
    {
        auto jitter = [&](double value, double sigma) {
            return value * std::exp(p.variability * sigma * rng.normal());
        };
        m.mean_hr_bpm = jitter(p.mean_hr_bpm, 0.10);
        m.p_amp = jitter(p.p_amp, 0.25);
        m.q_amp = jitter(p.q_amp, 0.30);
        m.s_amp = jitter(p.s_amp, 0.30);
        m.t_amp = jitter(p.t_amp, 0.30);
        m.p_width = jitter(p.p_width, 0.20);
        m.r_width = jitter(p.r_width, 0.20);
        m.t_width = jitter(p.t_width, 0.20);
        m.p_offset = jitter(p.p_offset, 0.10);
        m.t_offset = jitter(p.t_offset, 0.15);
        m.fwave_hz = jitter(p.fwave_hz, 0.15);
    }

    const double mean_rr = 60.0 / m.mean_hr_bpm;

    // Log-normal multiplicative RR jitter with the configured CV. Normal
    // rhythm drifts smoothly (AR(1) on the latent gaussian); AF draws every
    // interval independently.
    const double sigma_ln = std::sqrt(std::log1p(p.rr_cv * p.rr_cv));
    const double mu_ln = -0.5 * sigma_ln * sigma_ln;
    const bool smooth = (kind == Label::Normal);

    const double lead_in = 0.35;           // room for the first P wave
    const double tail = 2.0 * m.t_width;   // keep the last T inside the record
    std::vector<double> beat_times;
    double t = lead_in;
    double z = 0.0;
    bool first = true;
    while (t < p.duration_s - tail) {
        beat_times.push_back(t);
        const double w = rng.normal();
        if (smooth) {
            z = first ? w : p.ar_coeff * z + std::sqrt(1.0 - p.ar_coeff * p.ar_coeff) * w;
            first = false;
        } else {
            z = w;
        }
        t += mean_rr * std::exp(mu_ln + sigma_ln * z);
    }
    if (beat_times.empty())
        throw DataError("synth_record: duration too short for one beat");

    EcgRecord rec;
    rec.fs = p.fs;
    rec.label = kind;
    rec.samples.assign(static_cast<std::size_t>(std::llround(p.duration_s * p.fs)), Real(0));
    rec.annotations = beat_times;

    const BeatBump bumps[] = {
        {m.p_offset, m.p_width, m.p_amp},
        {m.q_offset, m.q_width, m.q_amp},
        {0.0, m.r_width, 1.0},
        {m.s_offset, m.s_width, m.s_amp},
        {m.t_offset, m.t_width, m.t_amp},
    };
    for (double bt : beat_times)
        for (const BeatBump& b : bumps) detail::add_bump(rec.samples, p.fs, bt, b);

    if (p.fwave_amp > 0.0) {
        const double phase = rng.uniform() * 6.283185307179586477;
        const double w = 6.283185307179586477 * m.fwave_hz / p.fs;
        for (std::size_t i = 0; i < rec.samples.size(); ++i)
            rec.samples[i] += static_cast<Real>(p.fwave_amp * std::sin(w * static_cast<double>(i) + phase));
    }
    if (p.wander_amp > 0.0) {
        const double phase = rng.uniform() * 6.283185307179586477;
        const double hz = p.wander_hz * std::exp(p.variability * 0.2 * rng.normal());
        const double w = 6.283185307179586477 * hz / p.fs;
        for (std::size_t i = 0; i < rec.samples.size(); ++i)
            rec.samples[i] += static_cast<Real>(p.wander_amp * std::sin(w * static_cast<double>(i) + phase));
    }
    if (p.noise_amp > 0.0) {
        for (Real& v : rec.samples) v += static_cast<Real>(rng.normal(0.0, p.noise_amp));
    }
    return rec;
}

/// n_normal + n_af records with per-record derived seeds and ids N####/A####.
inline std::vector<EcgRecord> synth_corpus(int n_normal, int n_af, const SynthParams& params,
                                           std::uint64_t seed) {
    if (n_normal < 0 || n_af < 0) throw UsageError("synth_corpus: counts must be non-negative");
    std::vector<EcgRecord> out;
    out.reserve(static_cast<std::size_t>(n_normal + n_af));
    char buf[16];
    for (int i = 0; i < n_normal; ++i) {
        SynthParams p = params;
        p.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
        EcgRecord r = synth_record(Label::Normal, p);
        std::snprintf(buf, sizeof buf, "N%04d", i);
        r.id = buf;
        out.push_back(std::move(r));
    }
    for (int i = 0; i < n_af; ++i) {
        SynthParams p = params;
        p.seed = derive_seed(seed, static_cast<std::uint64_t>(n_normal + i));
        EcgRecord r = synth_record(Label::AF, p);
        std::snprintf(buf, sizeof buf, "A%04d", i);
        r.id = buf;
        out.push_back(std::move(r));
    }
    return out;
}

/// Coefficient of variation of the annotated RR intervals.
inline double annotation_rr_cv(const EcgRecord& rec) {
    if (rec.annotations.size() < 3) throw DataError("annotation_rr_cv: need at least 3 beats");
    std::vector<double> rr;
    for (std::size_t i = 1; i < rec.annotations.size(); ++i)
        rr.push_back(rec.annotations[i] - rec.annotations[i - 1]);
    double mean = 0;
    for (double v : rr) mean += v;
    mean /= static_cast<double>(rr.size());
    double var = 0;
    for (double v : rr) var += (v - mean) * (v - mean);
    var /= static_cast<double>(rr.size() - 1);
    return std::sqrt(var) / mean;
}

/// P-bump prominence measured on the beat-locked average template: the
/// window [-0.25 s, 0] before every annotated R peak is averaged across
/// beats (f-waves are not beat-synchronized and cancel), then the peak of
/// the 120-220 ms pre-R region is compared against the 260-320 ms pre-R
/// baseline. Normal records score ~p_amp, AF records near zero.
inline double p_bump_score(const EcgRecord& rec) {
    const int win = static_cast<int>(std::lround(0.32 * rec.fs));
    std::vector<double> tmpl(static_cast<std::size_t>(win) + 1, 0.0);
    int beats = 0;
    for (double bt : rec.annotations) {
        const int r_idx = static_cast<int>(std::lround(bt * rec.fs));
        if (r_idx - win < 0 || r_idx >= static_cast<int>(rec.samples.size())) continue;
        for (int k = 0; k <= win; ++k) tmpl[static_cast<std::size_t>(k)] += rec.samples[static_cast<std::size_t>(r_idx - win + k)];
        ++beats;
    }
    if (beats == 0) throw DataError("p_bump_score: no usable beats");
    for (double& v : tmpl) v /= beats;

    // template index k corresponds to (win - k) samples before the R peak
    auto idx_for = [&](double seconds_before_r) {
        return win - static_cast<int>(std::lround(seconds_before_r * rec.fs));
    };
    double baseline = 0;
    int nb = 0;
    for (int k = idx_for(0.32); k <= idx_for(0.26); ++k, ++nb) baseline += tmpl[static_cast<std::size_t>(k)];
    baseline /= nb;
    double peak = -1e300;
    for (int k = idx_for(0.22); k <= idx_for(0.12); ++k)
        peak = std::max(peak, tmpl[static_cast<std::size_t>(k)]);
    return peak - baseline;
}

} // namespace ecgssl
