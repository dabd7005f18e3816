#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecgssl/errors.hpp"
#include "ecgssl/linalg.hpp"

namespace ecgssl {

/// Downstream evaluation result plus the configuration that produced it.
/// Serialized as one flat JSON object.
struct MetricsReport {
    double auc = 0;
    double sensitivity = 0;
    double specificity = 0;
    double accuracy = 0;
    double threshold = 0;
    long TP = 0, TN = 0, FP = 0, FN = 0;
    // config echo
    std::string task;
    int d = 0;
    long n_train = 0;
    std::uint64_t seed = 0;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["auc"] = auc;
        j["sensitivity"] = sensitivity;
        j["specificity"] = specificity;
        j["accuracy"] = accuracy;
        j["threshold"] = threshold;
        j["TP"] = TP;
        j["TN"] = TN;
        j["FP"] = FP;
        j["FN"] = FN;
        j["task"] = task;
        j["d"] = d;
        j["n_train"] = n_train;
        j["seed"] = seed;
        return j;
    }
};

namespace detail {

inline void require_both_classes(const std::vector<int>& labels) {
    bool pos = false, neg = false;
    for (int l : labels) (l ? pos : neg) = true;
    if (!pos || !neg) throw DataError("both classes must be present");
}

} // namespace detail

/// ROC area as the Mann-Whitney rank statistic: ties between a positive and
/// a negative score count one half. O(n log n) via average ranks.
inline double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty()) throw UsageError("auc: size mismatch");
    detail::require_both_classes(labels);
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0;
    std::size_t n_pos = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        // average 1-based rank of the tie block [i, j)
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]]) {
                rank_sum_pos += avg_rank;
                ++n_pos;
            }
        i = j;
    }
    const std::size_t n_neg = n - n_pos;
    const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

struct GmeanResult {
    double threshold = 0;
    double sensitivity = 0;
    double specificity = 0;
    double gmean = 0;
};

/// Operating threshold maximizing sqrt(sensitivity * specificity).
/// Candidates are the midpoints between consecutive distinct sorted scores
/// plus one below the minimum and one above the maximum; the decision rule
/// is `positive iff score > threshold`; ties prefer the larger threshold.
inline GmeanResult gmean_threshold(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw UsageError("gmean_threshold: size mismatch");
    detail::require_both_classes(labels);

    std::vector<double> distinct = scores;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<double> candidates;
    candidates.push_back(distinct.front() - 1.0);
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
        candidates.push_back(0.5 * (distinct[i] + distinct[i + 1]));
    candidates.push_back(distinct.back() + 1.0);

    long n_pos = 0, n_neg = 0;
    for (int l : labels) (l ? n_pos : n_neg)++;

    GmeanResult best;
    bool have = false;
    for (const double thr : candidates) {
        long tp = 0, tn = 0;
        for (std::size_t k = 0; k < scores.size(); ++k) {
            if (scores[k] > thr) {
                if (labels[k]) ++tp;
            } else {
                if (!labels[k]) ++tn;
            }
        }
        const double sens = static_cast<double>(tp) / static_cast<double>(n_pos);
        const double spec = static_cast<double>(tn) / static_cast<double>(n_neg);
        const double g = std::sqrt(sens * spec);
        if (!have || g > best.gmean || (g == best.gmean && thr > best.threshold)) {
            best = {thr, sens, spec, g};
            have = true;
        }
    }
    return best;
}

/// Confusion counts and ratio metrics at a fixed threshold
/// (positive iff score > threshold).
inline MetricsReport confusion_metrics(const std::vector<double>& scores,
                                       const std::vector<int>& labels, double threshold) {
    if (scores.size() != labels.size()) throw UsageError("confusion_metrics: size mismatch");
    MetricsReport r;
    r.threshold = threshold;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] > threshold;
        if (labels[i]) {
            (pred ? r.TP : r.FN)++;
        } else {
            (pred ? r.FP : r.TN)++;
        }
    }
    const long total = r.TP + r.TN + r.FP + r.FN;
    r.accuracy = total ? static_cast<double>(r.TP + r.TN) / static_cast<double>(total) : 0.0;
    r.sensitivity = (r.TP + r.FN) ? static_cast<double>(r.TP) / static_cast<double>(r.TP + r.FN) : 0.0;
    r.specificity = (r.TN + r.FP) ? static_cast<double>(r.TN) / static_cast<double>(r.TN + r.FP) : 0.0;
    return r;
}

/// For each sample, the mean label of its k nearest neighbors (Euclidean,
/// self excluded, distance ties broken by smaller index).
inline std::vector<double> knn_label_means(const std::vector<std::vector<double>>& reps,
                                           const std::vector<int>& labels, int k = 3) {
    const std::size_t n = reps.size();
    if (n != labels.size()) throw UsageError("knn_label_means: size mismatch");
    if (static_cast<std::size_t>(k) >= n || k <= 0)
        throw DataError("knn_label_means: need more samples than neighbors");
    std::vector<double> means(n, 0.0);
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        dist.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double d2 = 0;
            for (std::size_t c = 0; c < reps[i].size(); ++c) {
                const double d = reps[i][c] - reps[j][c];
                d2 += d * d;
            }
            dist.emplace_back(d2, j);
        }
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        double sum = 0;
        for (int c = 0; c < k; ++c) sum += labels[dist[static_cast<std::size_t>(c)].second];
        means[i] = sum / k;
    }
    return means;
}

namespace detail {

/// Regularized incomplete beta I_x(a,b) by Lentz's continued fraction.
inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16, kFpMin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

inline double reg_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

/// P(|T| > |t|) for Student's t with nu degrees of freedom.
inline double student_two_sided(double t, double nu) {
    return reg_incomplete_beta(0.5 * nu, 0.5, nu / (nu + t * t));
}

} // namespace detail

enum class Alternative { Greater, TwoSided };

struct TTestResult {
    double t = 0;
    double df = 0;
    double p = 1;
};

/// Welch's unequal-variance t test of mean(a) vs mean(b) with
/// Welch-Satterthwaite degrees of freedom. Greater tests mean(a) > mean(b).
inline TTestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b,
                                Alternative alternative = Alternative::Greater) {
    if (a.size() < 2 || b.size() < 2) throw DataError("welch_t_test: each sample needs >= 2 values");
    auto mean_var = [](const std::vector<double>& s) {
        double m = 0;
        for (double v : s) m += v;
        m /= static_cast<double>(s.size());
        double var = 0;
        for (double v : s) var += (v - m) * (v - m);
        var /= static_cast<double>(s.size() - 1);
        return std::pair<double, double>{m, var};
    };
    const auto [ma, va] = mean_var(a);
    const auto [mb, vb] = mean_var(b);
    const double sa = va / static_cast<double>(a.size());
    const double sb = vb / static_cast<double>(b.size());
    if (sa + sb <= 0.0) throw NumericError("welch_t_test: degenerate variance");

    TTestResult r;
    r.t = (ma - mb) / std::sqrt(sa + sb);
    r.df = (sa + sb) * (sa + sb) /
           (sa * sa / static_cast<double>(a.size() - 1) + sb * sb / static_cast<double>(b.size() - 1));
    const double two = detail::student_two_sided(r.t, r.df);
    if (alternative == Alternative::TwoSided) {
        r.p = two;
    } else {
        r.p = r.t >= 0 ? 0.5 * two : 1.0 - 0.5 * two;
    }
    return r;
}

/// 2-D PCA projection of a representation matrix for plotting, with the
/// deterministic sign convention of linalg::top_right_singular.
inline std::vector<std::array<double, 2>> project_2d(const std::vector<std::vector<double>>& reps) {
    const std::size_t n = reps.size();
    if (n < 2) throw DataError("project_2d: need at least 2 points");
    const std::size_t dim = reps[0].size();
    std::vector<double> mean(dim, 0.0);
    for (const auto& r : reps)
        for (std::size_t c = 0; c < dim; ++c) mean[c] += r[c];
    for (double& m : mean) m /= static_cast<double>(n);

    linalg::Mat X(static_cast<int>(n), static_cast<int>(dim));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < dim; ++c) X.at(static_cast<int>(i), static_cast<int>(c)) = reps[i][c] - mean[c];

    const int d = dim >= 2 ? 2 : 1;
    const auto svd = linalg::top_right_singular(X, d, /*seed=*/12345);
    std::vector<std::array<double, 2>> out(n, {0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) {
            double acc = 0;
            for (std::size_t c = 0; c < dim; ++c)
                acc += X.at(static_cast<int>(i), static_cast<int>(c)) * svd.components.at(j, static_cast<int>(c));
            out[i][static_cast<std::size_t>(j)] = acc;
        }
    return out;
}

} // namespace ecgssl
