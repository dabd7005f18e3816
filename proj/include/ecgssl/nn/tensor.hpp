#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "ecgssl/errors.hpp"

namespace ecgssl::nn {

/// Dense row-major tensor. The scalar type is a template parameter so the
/// same graph code runs in float for training and double for finite
/// difference oracles.
template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> v;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        v.assign(static_cast<std::size_t>(numel_of(shape)), T(0));
    }
    Tensor(std::vector<int> s, std::vector<T> data) : shape(std::move(s)), v(std::move(data)) {
        if (static_cast<std::int64_t>(v.size()) != numel_of(shape))
            throw UsageError("Tensor: data size does not match shape");
    }

    static std::int64_t numel_of(const std::vector<int>& s) {
        std::int64_t n = 1;
        for (int d : s) {
            if (d < 0) throw UsageError("Tensor: negative dimension");
            n *= d;
        }
        return n;
    }

    std::int64_t numel() const { return static_cast<std::int64_t>(v.size()); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
    int rank() const { return static_cast<int>(shape.size()); }

    T* data() { return v.data(); }
    const T* data() const { return v.data(); }

    // flat accessors for the common layouts
    T& at2(int i, int j) { return v[static_cast<std::size_t>(i) * dim(1) + j]; }
    T at2(int i, int j) const { return v[static_cast<std::size_t>(i) * dim(1) + j]; }
    T& at3(int b, int c, int t) {
        return v[(static_cast<std::size_t>(b) * dim(1) + c) * dim(2) + t];
    }
    T at3(int b, int c, int t) const {
        return v[(static_cast<std::size_t>(b) * dim(1) + c) * dim(2) + t];
    }

    void fill(T x) { std::fill(v.begin(), v.end(), x); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out;
        out.shape = shape;
        out.v.resize(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out.v[i] = static_cast<U>(v[i]);
        return out;
    }
};

template <typename T>
std::string shape_str(const Tensor<T>& t) {
    std::string s = "[";
    for (std::size_t i = 0; i < t.shape.size(); ++i)
        s += (i ? "," : "") + std::to_string(t.shape[i]);
    return s + "]";
}

/// A trainable tensor: value, accumulated gradient and Adam state.
template <typename T>
struct Param {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
    Tensor<T> adam_m, adam_v;
    bool trainable = true;

    void init_shape(std::vector<int> s) {
        value = Tensor<T>(s);
        grad = Tensor<T>(s);
        adam_m = Tensor<T>(s);
        adam_v = Tensor<T>(std::move(s));
    }
    void zero_grad() { grad.fill(T(0)); }
};

} // namespace ecgssl::nn
