#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ecgssl/errors.hpp"
#include "ecgssl/rng.hpp"

namespace ecgssl::linalg {

/// Row-major double matrix, just enough for the PCA path.
struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};

/// Modified Gram-Schmidt on the columns of V, in place. Returns false if a
/// column collapses to numerical zero (rank deficiency).
inline bool orthonormalize_columns(Mat& V) {
    for (int j = 0; j < V.cols; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (int k = 0; k < j; ++k) {
                double dot = 0;
                for (int i = 0; i < V.rows; ++i) dot += V.at(i, k) * V.at(i, j);
                for (int i = 0; i < V.rows; ++i) V.at(i, j) -= dot * V.at(i, k);
            }
        }
        double norm = 0;
        for (int i = 0; i < V.rows; ++i) norm += V.at(i, j) * V.at(i, j);
        norm = std::sqrt(norm);
        if (norm < 1e-300) return false;
        for (int i = 0; i < V.rows; ++i) V.at(i, j) /= norm;
    }
    return true;
}

/// Cyclic Jacobi eigendecomposition of a small symmetric matrix.
/// Eigenvalues come out in descending order with matching eigenvector
/// columns in `vecs`.
inline void jacobi_eigh(Mat S, Mat& vecs, std::vector<double>& vals) {
    const int n = S.rows;
    vecs = Mat(n, n);
    for (int i = 0; i < n; ++i) vecs.at(i, i) = 1.0;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += S.at(p, q) * S.at(p, q);
        if (off < 1e-24) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const double apq = S.at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (S.at(q, q) - S.at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double sip = S.at(i, p), siq = S.at(i, q);
                    S.at(i, p) = c * sip - s * siq;
                    S.at(i, q) = s * sip + c * siq;
                }
                for (int i = 0; i < n; ++i) {
                    const double spi = S.at(p, i), sqi = S.at(q, i);
                    S.at(p, i) = c * spi - s * sqi;
                    S.at(q, i) = s * spi + c * sqi;
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = vecs.at(i, p), viq = vecs.at(i, q);
                    vecs.at(i, p) = c * vip - s * viq;
                    vecs.at(i, q) = s * vip + c * viq;
                }
            }
    }
    vals.resize(static_cast<std::size_t>(n));
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::vector<double> diag(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) diag[static_cast<std::size_t>(i)] = S.at(i, i);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return diag[static_cast<std::size_t>(x)] > diag[static_cast<std::size_t>(y)]; });
    Mat sorted(n, n);
    for (int j = 0; j < n; ++j) {
        vals[static_cast<std::size_t>(j)] = diag[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])];
        for (int i = 0; i < n; ++i) sorted.at(i, j) = vecs.at(i, order[static_cast<std::size_t>(j)]);
    }
    vecs = std::move(sorted);
}

struct TruncatedSvd {
    Mat components;                       // d x m, rows are right singular vectors
    std::vector<double> singular_values;  // descending
};

/// Top-d right singular vectors of X (n x m) by blocked subspace iteration
/// on X^T X applied implicitly (X is never squared), finished with a
/// Rayleigh-Ritz rotation. Deterministic for a fixed seed; the sign of each
/// component is fixed by making its largest-magnitude entry positive.
inline TruncatedSvd top_right_singular(const Mat& X, int d, std::uint64_t seed,
                                       int max_iter = 200, double tol = 1e-12) {
    const int n = X.rows, m = X.cols;
    if (d <= 0 || d > m) throw UsageError("top_right_singular: bad component count");
    Mat V(m, d);
    Rng rng(seed);
    for (auto& v : V.a) v = rng.normal();
    if (!orthonormalize_columns(V)) throw NumericError("top_right_singular: degenerate start");

    Mat W(n, d);
    std::vector<double> prev(static_cast<std::size_t>(d), 0.0);
    for (int iter = 0; iter < max_iter; ++iter) {
        // W = X V
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) {
                double acc = 0;
                for (int k = 0; k < m; ++k) acc += X.at(i, k) * V.at(k, j);
                W.at(i, j) = acc;
            }
        // V = X^T W
        for (int k = 0; k < m; ++k)
            for (int j = 0; j < d; ++j) V.at(k, j) = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) {
                const double w = W.at(i, j);
                for (int k = 0; k < m; ++k) V.at(k, j) += X.at(i, k) * w;
            }
        if (!orthonormalize_columns(V)) break;  // rank < d, settled below

        // convergence on the Rayleigh quotients
        std::vector<double> cur(static_cast<std::size_t>(d), 0.0);
        for (int j = 0; j < d; ++j) {
            double acc = 0;
            for (int i = 0; i < n; ++i) {
                double xv = 0;
                for (int k = 0; k < m; ++k) xv += X.at(i, k) * V.at(k, j);
                acc += xv * xv;
            }
            cur[static_cast<std::size_t>(j)] = acc;
        }
        double delta = 0, scale = 1e-300;
        for (int j = 0; j < d; ++j) {
            delta = std::max(delta, std::abs(cur[static_cast<std::size_t>(j)] - prev[static_cast<std::size_t>(j)]));
            scale = std::max(scale, std::abs(cur[static_cast<std::size_t>(j)]));
        }
        prev = cur;
        if (delta <= tol * scale && iter >= 4) break;
    }

    // Rayleigh-Ritz: diagonalize B^T B with B = X V, rotate V accordingly.
    Mat B(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) {
            double acc = 0;
            for (int k = 0; k < m; ++k) acc += X.at(i, k) * V.at(k, j);
            B.at(i, j) = acc;
        }
    Mat M(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
            double acc = 0;
            for (int i = 0; i < n; ++i) acc += B.at(i, a) * B.at(i, b);
            M.at(a, b) = acc;
            M.at(b, a) = acc;
        }
    Mat U;
    std::vector<double> lam;
    jacobi_eigh(M, U, lam);

    TruncatedSvd out;
    out.components = Mat(d, m);
    out.singular_values.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        out.singular_values[static_cast<std::size_t>(j)] = std::sqrt(std::max(0.0, lam[static_cast<std::size_t>(j)]));
        for (int k = 0; k < m; ++k) {
            double acc = 0;
            for (int c = 0; c < d; ++c) acc += V.at(k, c) * U.at(c, j);
            out.components.at(j, k) = acc;
        }
        // deterministic sign: largest-magnitude loading positive
        int arg = 0;
        double best = -1;
        for (int k = 0; k < m; ++k) {
            const double v = std::abs(out.components.at(j, k));
            if (v > best) {
                best = v;
                arg = k;
            }
        }
        if (out.components.at(j, arg) < 0)
            for (int k = 0; k < m; ++k) out.components.at(j, k) = -out.components.at(j, k);
    }
    return out;
}

} // namespace ecgssl::linalg
