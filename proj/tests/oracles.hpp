#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ecgssl/eval.hpp"
#include "ecgssl/rng.hpp"

// Independent brute-force oracles for the eval module. These deliberately
// avoid the implementation's algorithms (sorting-based ranks, sweeps) and
// pay the quadratic price instead.
namespace testutil {

/// AUC by direct enumeration of all (positive, negative) pairs.
inline double auc_bruteforce(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0;
    long pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

/// G-mean threshold by exhaustive evaluation of every midpoint candidate.
inline ecgssl::GmeanResult gmean_bruteforce(const std::vector<double>& scores,
                                            const std::vector<int>& labels) {
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<double> cands;
    cands.push_back(sorted.front() - 1.0);
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
        cands.push_back(0.5 * (sorted[i] + sorted[i + 1]));
    cands.push_back(sorted.back() + 1.0);

    long n_pos = 0, n_neg = 0;
    for (int l : labels) (l ? n_pos : n_neg)++;

    ecgssl::GmeanResult best;
    bool have = false;
    for (double thr : cands) {
        long tp = 0, tn = 0;
        for (std::size_t k = 0; k < scores.size(); ++k) {
            if (scores[k] > thr && labels[k]) ++tp;
            if (scores[k] <= thr && !labels[k]) ++tn;
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

/// k-NN label means by full O(n^2) distance table and stable selection.
inline std::vector<double> knn_bruteforce(const std::vector<std::vector<double>>& reps,
                                          const std::vector<int>& labels, int k) {
    const std::size_t n = reps.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> all;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double d2 = 0;
            for (std::size_t c = 0; c < reps[i].size(); ++c)
                d2 += (reps[i][c] - reps[j][c]) * (reps[i][c] - reps[j][c]);
            all.emplace_back(d2, j);
        }
        std::sort(all.begin(), all.end());
        double s = 0;
        for (int c = 0; c < k; ++c) s += labels[all[static_cast<std::size_t>(c)].second];
        out[i] = s / k;
    }
    return out;
}

/// One-sided permutation test of mean(a) > mean(b); the Welch p-value must
/// order consistently with this on well-separated data.
inline double permutation_pvalue(const std::vector<double>& a, const std::vector<double>& b,
                                 int iters, std::uint64_t seed) {
    double observed = 0;
    for (double v : a) observed += v;
    observed /= static_cast<double>(a.size());
    double mb = 0;
    for (double v : b) mb += v;
    mb /= static_cast<double>(b.size());
    observed -= mb;

    std::vector<double> pool = a;
    pool.insert(pool.end(), b.begin(), b.end());
    ecgssl::Rng rng(seed);
    int geq = 0;
    for (int it = 0; it < iters; ++it) {
        rng.shuffle(pool);
        double m1 = 0;
        for (std::size_t i = 0; i < a.size(); ++i) m1 += pool[i];
        m1 /= static_cast<double>(a.size());
        double m2 = 0;
        for (std::size_t i = a.size(); i < pool.size(); ++i) m2 += pool[i];
        m2 /= static_cast<double>(b.size());
        if (m1 - m2 >= observed) ++geq;
    }
    return (geq + 1.0) / (iters + 1.0);
}

} // namespace testutil
