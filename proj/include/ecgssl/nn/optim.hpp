#pragma once

#include <cmath>
#include <vector>

#include "ecgssl/nn/tensor.hpp"

namespace ecgssl::nn {

enum class OptimKind { Adam, SGD };

/// Optimizer over a fixed parameter group. Adam keeps first/second moment
/// state inside each Param; the step counter lives here.
template <typename T>
struct Optimizer {
    OptimKind kind = OptimKind::Adam;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step_count = 0;
    std::vector<Param<T>*> params;

    void zero_grad() {
        for (auto* p : params) p->zero_grad();
    }

    /// One bias-corrected Adam (or plain SGD) update on all trainable params.
    void step() {
        ++step_count;
        if (kind == OptimKind::SGD) {
            for (auto* p : params) {
                if (!p->trainable) continue;
                for (std::size_t i = 0; i < p->value.v.size(); ++i)
                    p->value.v[i] -= static_cast<T>(lr * static_cast<double>(p->grad.v[i]));
            }
            return;
        }
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
        for (auto* p : params) {
            if (!p->trainable) continue;
            for (std::size_t i = 0; i < p->value.v.size(); ++i) {
                const double g = p->grad.v[i];
                const double m = beta1 * static_cast<double>(p->adam_m.v[i]) + (1.0 - beta1) * g;
                const double v = beta2 * static_cast<double>(p->adam_v.v[i]) + (1.0 - beta2) * g * g;
                p->adam_m.v[i] = static_cast<T>(m);
                p->adam_v.v[i] = static_cast<T>(v);
                const double mhat = m / bc1;
                const double vhat = v / bc2;
                p->value.v[i] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + eps));
            }
        }
    }
};

} // namespace ecgssl::nn
