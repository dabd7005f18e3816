#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "ecgssl/nn/tensor.hpp"

namespace testutil {

/// Central-difference gradient oracle, independent of the backward pass.
/// `run(true)` must zero nothing itself: it builds a fresh graph from the
/// current parameter values, runs backward, and returns the loss value;
/// `run(false)` is forward-only. Returns the max relative error between
/// analytic and finite-difference gradients over every parameter entry.
inline double max_grad_rel_error(const std::vector<ecgssl::nn::Param<double>*>& params,
                                 const std::function<double(bool)>& run, double h = 1e-3) {
    for (auto* p : params) p->zero_grad();
    run(true);
    std::vector<std::vector<double>> analytic;
    for (auto* p : params) analytic.push_back(p->grad.v);

    double worst = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto* p = params[pi];
        for (std::size_t i = 0; i < p->value.v.size(); ++i) {
            const double save = p->value.v[i];
            p->value.v[i] = save + h;
            const double lp = run(false);
            p->value.v[i] = save - h;
            const double lm = run(false);
            p->value.v[i] = save;
            const double fd = (lp - lm) / (2.0 * h);
            const double g = analytic[pi][i];
            const double scale = std::max(std::abs(fd), std::abs(g));
            if (scale < 1e-10) continue;  // both effectively zero
            worst = std::max(worst, std::abs(fd - g) / scale);
        }
    }
    return worst;
}

} // namespace testutil
