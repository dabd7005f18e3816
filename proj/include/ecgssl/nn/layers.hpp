#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ecgssl/nn/graph.hpp"
#include "ecgssl/rng.hpp"

namespace ecgssl::nn {

template <typename T>
struct Conv1dLayer {
    Param<T> w, b;
    int stride = 1, pad = 0;

    void init(const std::string& name, int cin, int cout, int k, int stride_, Rng& rng) {
        stride = stride_;
        pad = k / 2;
        w.name = name + ".w";
        b.name = name + ".b";
        w.init_shape({cout, cin, k});
        b.init_shape({cout});
        // He initialization for ReLU nets
        const double std = std::sqrt(2.0 / (static_cast<double>(cin) * k));
        for (T& v : w.value.v) v = static_cast<T>(rng.normal(0.0, std));
    }

    int forward(Graph<T>& g, int x) {
        return g.conv1d(x, g.param(w), g.param(b), stride, pad);
    }

    void collect(std::vector<Param<T>*>& out) {
        out.push_back(&w);
        out.push_back(&b);
    }
};

template <typename T>
struct ConvTranspose1dLayer {
    Param<T> w, b;
    int stride = 2, pad = 1;

    void init(const std::string& name, int cin, int cout, int k, int stride_, int pad_, Rng& rng) {
        stride = stride_;
        pad = pad_;
        w.name = name + ".w";
        b.name = name + ".b";
        w.init_shape({cin, cout, k});
        b.init_shape({cout});
        const double std = std::sqrt(2.0 / (static_cast<double>(cin) * k));
        for (T& v : w.value.v) v = static_cast<T>(rng.normal(0.0, std));
    }

    int forward(Graph<T>& g, int x) {
        return g.conv1d_transpose(x, g.param(w), g.param(b), stride, pad);
    }

    void collect(std::vector<Param<T>*>& out) {
        out.push_back(&w);
        out.push_back(&b);
    }
};

template <typename T>
struct LinearLayer {
    Param<T> w, b;

    void init(const std::string& name, int in_dim, int out_dim, Rng& rng) {
        w.name = name + ".w";
        b.name = name + ".b";
        w.init_shape({out_dim, in_dim});
        b.init_shape({out_dim});
        const double std = std::sqrt(1.0 / in_dim);
        for (T& v : w.value.v) v = static_cast<T>(rng.normal(0.0, std));
    }

    int forward(Graph<T>& g, int x) { return g.linear(x, g.param(w), g.param(b)); }

    void collect(std::vector<Param<T>*>& out) {
        out.push_back(&w);
        out.push_back(&b);
    }
};

} // namespace ecgssl::nn
