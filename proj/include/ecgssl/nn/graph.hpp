#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "ecgssl/nn/tensor.hpp"

namespace ecgssl::nn {

/// Reverse-mode autodiff tape over dense tensors. Ops append nodes in
/// topological order; backward() sweeps the tape in reverse. One graph is
/// built per training step and discarded.
///
/// Gradients of inputs flagged needs_grad=false are never computed, which
/// is both the frozen-parameter contract and the fast path for linear
/// probing.
template <typename T>
class Graph {
public:
    struct Node {
        Tensor<T> value;
        Tensor<T> grad;
        std::function<void(Graph&, int)> backprop;  // nullable for leaves
        Param<T>* bound = nullptr;
        bool needs_grad = false;
    };

    int leaf(Tensor<T> v, bool needs_grad = false) {
        Node n;
        n.value = std::move(v);
        if (needs_grad) n.grad = Tensor<T>(n.value.shape);
        n.needs_grad = needs_grad;
        nodes_.push_back(std::move(n));
        return static_cast<int>(nodes_.size()) - 1;
    }

    /// Inference mode: parameters register as constants, so no gradient
    /// buffers are allocated and backward() through them is a no-op.
    void set_inference(bool v) { inference_ = v; }

    /// Registers a parameter as a leaf; its gradient accumulates into
    /// p.grad during backward().
    int param(Param<T>& p) {
        const int id = leaf(p.value, p.trainable && !inference_);
        if (p.trainable && !inference_) {
            nodes_[static_cast<std::size_t>(id)].bound = &p;
            nodes_[static_cast<std::size_t>(id)].backprop = [](Graph& g, int self) {
                Node& n = g.nodes_[static_cast<std::size_t>(self)];
                for (std::size_t i = 0; i < n.grad.v.size(); ++i)
                    n.bound->grad.v[i] += n.grad.v[i];
            };
        }
        return id;
    }

    const Tensor<T>& value(int id) const { return nodes_.at(static_cast<std::size_t>(id)).value; }
    const Tensor<T>& grad(int id) const { return nodes_.at(static_cast<std::size_t>(id)).grad; }
    std::size_t size() const { return nodes_.size(); }

    /// Seeds d(loss)/d(loss) = 1 and sweeps the tape. The loss must be a
    /// scalar node of this graph.
    void backward(int loss_id) {
        if (loss_id < 0 || loss_id >= static_cast<int>(nodes_.size()))
            throw UsageError("backward: no recorded forward graph for this node");
        Node& loss = nodes_[static_cast<std::size_t>(loss_id)];
        if (loss.value.numel() != 1) throw UsageError("backward: loss must be scalar");
        if (!loss.needs_grad) return;  // nothing trainable upstream
        loss.grad.v[0] = T(1);
        for (int i = loss_id; i >= 0; --i) {
            Node& n = nodes_[static_cast<std::size_t>(i)];
            if (n.needs_grad && n.backprop) n.backprop(*this, i);
        }
    }

    // ---- shape-preserving ops -------------------------------------------

    int relu(int x) {
        const Tensor<T>& xv = value(x);
        Tensor<T> out = xv;
        for (T& v : out.v)
            if (v < T(0)) v = T(0);
        return unary(x, std::move(out), [x](Graph& g, int self) {
            const Tensor<T>& dy = g.grad(self);
            const Tensor<T>& xv = g.value(x);
            Tensor<T>& dx = g.mut_grad(x);
            for (std::size_t i = 0; i < dx.v.size(); ++i)
                if (xv.v[i] > T(0)) dx.v[i] += dy.v[i];
        });
    }

    int add(int a, int b) {
        const Tensor<T>& av = value(a);
        const Tensor<T>& bv = value(b);
        if (!av.same_shape(bv)) throw UsageError("add: shape mismatch");
        Tensor<T> out = av;
        for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += bv.v[i];
        const bool ng = needs(a) || needs(b);
        return record(std::move(out), ng, [a, b](Graph& g, int self) {
            const Tensor<T>& dy = g.grad(self);
            if (g.needs(a)) {
                Tensor<T>& da = g.mut_grad(a);
                for (std::size_t i = 0; i < dy.v.size(); ++i) da.v[i] += dy.v[i];
            }
            if (g.needs(b)) {
                Tensor<T>& db = g.mut_grad(b);
                for (std::size_t i = 0; i < dy.v.size(); ++i) db.v[i] += dy.v[i];
            }
        });
    }

    /// y = g * x with g a single-element parameter tensor (the batch-norm
    /// substitute).
    int scale(int x, int g_id) {
        const Tensor<T>& xv = value(x);
        const Tensor<T>& gv = value(g_id);
        if (gv.numel() != 1) throw UsageError("scale: gain must be a single element");
        Tensor<T> out = xv;
        const T g = gv.v[0];
        for (T& v : out.v) v *= g;
        const bool ng = needs(x) || needs(g_id);
        return record(std::move(out), ng, [x, g_id](Graph& gr, int self) {
            const Tensor<T>& dy = gr.grad(self);
            const Tensor<T>& xv = gr.value(x);
            const T g = gr.value(g_id).v[0];
            if (gr.needs(x)) {
                Tensor<T>& dx = gr.mut_grad(x);
                for (std::size_t i = 0; i < dy.v.size(); ++i) dx.v[i] += g * dy.v[i];
            }
            if (gr.needs(g_id)) {
                double acc = 0;
                for (std::size_t i = 0; i < dy.v.size(); ++i)
                    acc += static_cast<double>(dy.v[i]) * static_cast<double>(xv.v[i]);
                gr.mut_grad(g_id).v[0] += static_cast<T>(acc);
            }
        });
    }

    int reshape(int x, std::vector<int> shape) {
        const Tensor<T>& xv = value(x);
        if (Tensor<T>::numel_of(shape) != xv.numel()) throw UsageError("reshape: element count mismatch");
        Tensor<T> out(std::move(shape), xv.v);
        return unary(x, std::move(out), [x](Graph& g, int self) {
            const Tensor<T>& dy = g.grad(self);
            Tensor<T>& dx = g.mut_grad(x);
            for (std::size_t i = 0; i < dx.v.size(); ++i) dx.v[i] += dy.v[i];
        });
    }

    /// [B,C,T] -> [B,C,new_t], keeping the leading time steps.
    int slice_time(int x, int new_t) {
        const Tensor<T>& xv = value(x);
        if (xv.rank() != 3 || new_t > xv.dim(2)) throw UsageError("slice_time: bad target length");
        const int B = xv.dim(0), C = xv.dim(1), Tin = xv.dim(2);
        Tensor<T> out({B, C, new_t});
        for (int b = 0; b < B; ++b)
            for (int c = 0; c < C; ++c)
                for (int t = 0; t < new_t; ++t) out.at3(b, c, t) = xv.at3(b, c, t);
        return unary(x, std::move(out), [x, B, C, Tin, new_t](Graph& g, int self) {
            const Tensor<T>& dy = g.grad(self);
            Tensor<T>& dx = g.mut_grad(x);
            (void)Tin;
            for (int b = 0; b < B; ++b)
                for (int c = 0; c < C; ++c)
                    for (int t = 0; t < new_t; ++t) dx.at3(b, c, t) += dy.at3(b, c, t);
        });
    }

    // ---- structural ops --------------------------------------------------

    /// 1-D convolution: x [B,Cin,T] * w [Cout,Cin,K] + b [Cout] -> [B,Cout,T'];
    /// T' = (T + 2*pad - K)/stride + 1.
    int conv1d(int x, int w, int b, int stride, int pad) {
        const Tensor<T>& xv = value(x);
        const Tensor<T>& wv = value(w);
        const Tensor<T>& bv = value(b);
        if (xv.rank() != 3 || wv.rank() != 3 || bv.rank() != 1) throw UsageError("conv1d: rank mismatch");
        const int B = xv.dim(0), Cin = xv.dim(1), Tin = xv.dim(2);
        const int Cout = wv.dim(0), K = wv.dim(2);
        if (wv.dim(1) != Cin || bv.dim(0) != Cout) throw UsageError("conv1d: shape mismatch");
        const int Tout = (Tin + 2 * pad - K) / stride + 1;
        if (Tout <= 0) throw UsageError("conv1d: output would be empty");

        Tensor<T> out({B, Cout, Tout});
        for (int bb = 0; bb < B; ++bb)
            for (int co = 0; co < Cout; ++co) {
                T* yrow = &out.v[(static_cast<std::size_t>(bb) * Cout + co) * Tout];
                const T bias = bv.v[static_cast<std::size_t>(co)];
                for (int t = 0; t < Tout; ++t) yrow[t] = bias;
                for (int ci = 0; ci < Cin; ++ci) {
                    const T* xrow = &xv.v[(static_cast<std::size_t>(bb) * Cin + ci) * Tin];
                    const T* wrow = &wv.v[(static_cast<std::size_t>(co) * Cin + ci) * K];
                    for (int k = 0; k < K; ++k) {
                        const T wk = wrow[k];
                        const int off = k - pad;
                        // valid t: 0 <= t*stride + off < Tin
                        int lo = off < 0 ? (-off + stride - 1) / stride : 0;
                        int hi = Tin - 1 - off < 0 ? -1 : (Tin - 1 - off) / stride;
                        if (hi > Tout - 1) hi = Tout - 1;
                        if (stride == 1) {
                            const T* xp = xrow + lo + off;
                            T* yp = yrow + lo;
                            for (int t = lo; t <= hi; ++t) *yp++ += wk * *xp++;
                        } else {
                            for (int t = lo; t <= hi; ++t) yrow[t] += wk * xrow[t * stride + off];
                        }
                    }
                }
            }
        const bool ng = needs(x) || needs(w) || needs(b);
        return record(std::move(out), ng,
                      [x, w, b, stride, pad, B, Cin, Tin, Cout, K, Tout](Graph& g, int self) {
            const Tensor<T>& dy = g.grad(self);
            const Tensor<T>& xv = g.value(x);
            const Tensor<T>& wv = g.value(w);
            const bool nx = g.needs(x), nw = g.needs(w), nb = g.needs(b);
            for (int bb = 0; bb < B; ++bb)
                for (int co = 0; co < Cout; ++co) {
                    const T* dyrow = &dy.v[(static_cast<std::size_t>(bb) * Cout + co) * Tout];
                    if (nb) {
                        double acc = 0;
                        for (int t = 0; t < Tout; ++t) acc += static_cast<double>(dyrow[t]);
                        g.mut_grad(b).v[static_cast<std::size_t>(co)] += static_cast<T>(acc);
                    }
                    for (int ci = 0; ci < Cin; ++ci) {
                        const T* xrow = &xv.v[(static_cast<std::size_t>(bb) * Cin + ci) * Tin];
                        const T* wrow = &wv.v[(static_cast<std::size_t>(co) * Cin + ci) * K];
                        T* dxrow = nx ? &g.mut_grad(x).v[(static_cast<std::size_t>(bb) * Cin + ci) * Tin] : nullptr;
                        T* dwrow = nw ? &g.mut_grad(w).v[(static_cast<std::size_t>(co) * Cin + ci) * K] : nullptr;
                        for (int k = 0; k < K; ++k) {
                            const int off = k - pad;
                            int lo = off < 0 ? (-off + stride - 1) / stride : 0;
                            int hi = Tin - 1 - off < 0 ? -1 : (Tin - 1 - off) / stride;
                            if (hi > Tout - 1) hi = Tout - 1;
                            if (nx) {
                                const T wk = wrow[k];
                                if (stride == 1) {
                                    T* dxp = dxrow + lo + off;
                                    const T* dyp = dyrow + lo;
                                    for (int t = lo; t <= hi; ++t) *dxp++ += wk * *dyp++;
                                } else {
                                    for (int t = lo; t <= hi; ++t) dxrow[t * stride + off] += wk * dyrow[t];
                                }
                            }
                            if (nw) {
                                double acc = 0;
                                if (stride == 1) {
                                    const T* xp = xrow + lo + off;
                                    const T* dyp = dyrow + lo;
                                    for (int t = lo; t <= hi; ++t) acc += static_cast<double>(*xp++) * static_cast<double>(*dyp++);
                                } else {
                                    for (int t = lo; t <= hi; ++t)
                                        acc += static_cast<double>(xrow[t * stride + off]) * static_cast<double>(dyrow[t]);
                                }
                                dwrow[k] += static_cast<T>(acc);
                            }
                        }
                    }
                }
        });
    }

    /// Transposed 1-D convolution (decoder upsampling):
    /// x [B,Cin,T] * w [Cin,Cout,K] + b [Cout] -> [B,Cout,(T-1)*stride+K-2*pad].
    int conv1d_transpose(int x, int w, int b, int stride, int pad) {
        const Tensor<T>& xv = value(x);
        const Tensor<T>& wv = value(w);
        const Tensor<T>& bv = value(b);
        if (xv.rank() != 3 || wv.rank() != 3 || bv.rank() != 1)
            throw UsageError("conv1d_transpose: rank mismatch");
        const int B = xv.dim(0), Cin = xv.dim(1), Tin = xv.dim(2);
        const int Cout = wv.dim(1), K = wv.dim(2);
        if (wv.dim(0) != Cin || bv.dim(0) != Cout) throw UsageError("conv1d_transpose: shape mismatch");
        const int Tout = (Tin - 1) * stride + K - 2 * pad;
        if (Tout <= 0) throw UsageError("conv1d_transpose: output would be empty");

        Tensor<T> out({B, Cout, Tout});
        for (int bb = 0; bb < B; ++bb)
            for (int co = 0; co < Cout; ++co) {
                T* yrow = &out.v[(static_cast<std::size_t>(bb) * Cout + co) * Tout];
                const T bias = bv.v[static_cast<std::size_t>(co)];
                for (int t = 0; t < Tout; ++t) yrow[t] = bias;
                for (int ci = 0; ci < Cin; ++ci) {
                    const T* xrow = &xv.v[(static_cast<std::size_t>(bb) * Cin + ci) * Tin];
                    const T* wrow = &wv.v[(static_cast<std::size_t>(ci) * Cout + co) * K];
                    for (int k = 0; k < K; ++k) {
                        const T wk = wrow[k];
                        const int off = k - pad;
                        // y[t*stride + off] += wk * x[t]
                        int lo = off < 0 ? (-off + stride - 1) / stride : 0;
                        int hi = Tout - 1 - off < 0 ? -1 : (Tout - 1 - off) / stride;
                        if (hi > Tin - 1) hi = Tin - 1;
                        for (int t = lo; t <= hi; ++t) yrow[t * stride + off] += wk * xrow[t];
                    }
                }
            }
        const bool ng = needs(x) || needs(w) || needs(b);
        return record(std::move(out), ng,
                      [x, w, b, stride, pad, B, Cin, Tin, Cout, K, Tout](Graph& g, int self) {
            const Tensor<T>& dy = g.grad(self);
            const Tensor<T>& xv = g.value(x);
            const Tensor<T>& wv = g.value(w);
            const bool nx = g.needs(x), nw = g.needs(w), nb = g.needs(b);
            for (int bb = 0; bb < B; ++bb)
                for (int co = 0; co < Cout; ++co) {
                    const T* dyrow = &dy.v[(static_cast<std::size_t>(bb) * Cout + co) * Tout];
                    if (nb) {
                        double acc = 0;
                        for (int t = 0; t < Tout; ++t) acc += static_cast<double>(dyrow[t]);
                        g.mut_grad(b).v[static_cast<std::size_t>(co)] += static_cast<T>(acc);
                    }
                    for (int ci = 0; ci < Cin; ++ci) {
                        const T* xrow = &xv.v[(static_cast<std::size_t>(bb) * Cin + ci) * Tin];
                        const T* wrow = &wv.v[(static_cast<std::size_t>(ci) * Cout + co) * K];
                        T* dxrow = nx ? &g.mut_grad(x).v[(static_cast<std::size_t>(bb) * Cin + ci) * Tin] : nullptr;
                        T* dwrow = nw ? &g.mut_grad(w).v[(static_cast<std::size_t>(ci) * Cout + co) * K] : nullptr;
                        for (int k = 0; k < K; ++k) {
                            const int off = k - pad;
                            int lo = off < 0 ? (-off + stride - 1) / stride : 0;
                            int hi = Tout - 1 - off < 0 ? -1 : (Tout - 1 - off) / stride;
                            if (hi > Tin - 1) hi = Tin - 1;
                            if (nx) {
                                const T wk = wrow[k];
                                for (int t = lo; t <= hi; ++t) dxrow[t] += wk * dyrow[t * stride + off];
                            }
                            if (nw) {
                                double acc = 0;
                                for (int t = lo; t <= hi; ++t)
                                    acc += static_cast<double>(xrow[t]) * static_cast<double>(dyrow[t * stride + off]);
                                dwrow[k] += static_cast<T>(acc);
                            }
                        }
                    }
                }
        });
    }

    /// x [B,D] * w [K,D]^T + b [K] -> [B,K]
    int linear(int x, int w, int b) {
        const Tensor<T>& xv = value(x);
        const Tensor<T>& wv = value(w);
        const Tensor<T>& bv = value(b);
        if (xv.rank() != 2 || wv.rank() != 2 || bv.rank() != 1) throw UsageError("linear: rank mismatch");
        const int B = xv.dim(0), D = xv.dim(1), K = wv.dim(0);
        if (wv.dim(1) != D || bv.dim(0) != K) throw UsageError("linear: shape mismatch");
        Tensor<T> out({B, K});
        for (int bb = 0; bb < B; ++bb)
            for (int k = 0; k < K; ++k) {
                const T* xrow = &xv.v[static_cast<std::size_t>(bb) * D];
                const T* wrow = &wv.v[static_cast<std::size_t>(k) * D];
                double acc = static_cast<double>(bv.v[static_cast<std::size_t>(k)]);
                for (int d = 0; d < D; ++d) acc += static_cast<double>(xrow[d]) * static_cast<double>(wrow[d]);
                out.at2(bb, k) = static_cast<T>(acc);
            }
        const bool ng = needs(x) || needs(w) || needs(b);
        return record(std::move(out), ng, [x, w, b, B, D, K](Graph& g, int self) {
            const Tensor<T>& dy = g.grad(self);
            const Tensor<T>& xv = g.value(x);
            const Tensor<T>& wv = g.value(w);
            const bool nx = g.needs(x), nw = g.needs(w), nb = g.needs(b);
            for (int bb = 0; bb < B; ++bb) {
                const T* xrow = &xv.v[static_cast<std::size_t>(bb) * D];
                for (int k = 0; k < K; ++k) {
                    const T dyk = dy.at2(bb, k);
                    if (dyk == T(0)) continue;
                    if (nb) g.mut_grad(b).v[static_cast<std::size_t>(k)] += dyk;
                    const T* wrow = &wv.v[static_cast<std::size_t>(k) * D];
                    if (nx) {
                        T* dxrow = &g.mut_grad(x).v[static_cast<std::size_t>(bb) * D];
                        for (int d = 0; d < D; ++d) dxrow[d] += dyk * wrow[d];
                    }
                    if (nw) {
                        T* dwrow = &g.mut_grad(w).v[static_cast<std::size_t>(k) * D];
                        for (int d = 0; d < D; ++d) dwrow[d] += dyk * xrow[d];
                    }
                }
            }
        });
    }

    /// Global average pooling over time: [B,C,T] -> [B,C], 64-bit accumulation.
    int gap(int x) {
        const Tensor<T>& xv = value(x);
        if (xv.rank() != 3) throw UsageError("gap: rank mismatch");
        const int B = xv.dim(0), C = xv.dim(1), Tt = xv.dim(2);
        Tensor<T> out({B, C});
        for (int bb = 0; bb < B; ++bb)
            for (int c = 0; c < C; ++c) {
                double acc = 0;
                for (int t = 0; t < Tt; ++t) acc += static_cast<double>(xv.at3(bb, c, t));
                out.at2(bb, c) = static_cast<T>(acc / Tt);
            }
        return unary(x, std::move(out), [x, B, C, Tt](Graph& g, int self) {
            const Tensor<T>& dy = g.grad(self);
            Tensor<T>& dx = g.mut_grad(x);
            const T inv = T(1) / static_cast<T>(Tt);
            for (int bb = 0; bb < B; ++bb)
                for (int c = 0; c < C; ++c) {
                    const T d = dy.at2(bb, c) * inv;
                    for (int t = 0; t < Tt; ++t) dx.at3(bb, c, t) += d;
                }
        });
    }

    /// Rows scaled to unit Euclidean norm: [N,D] -> [N,D].
    int row_normalize(int x) {
        const Tensor<T>& xv = value(x);
        if (xv.rank() != 2) throw UsageError("row_normalize: rank mismatch");
        const int N = xv.dim(0), D = xv.dim(1);
        Tensor<T> out({N, D});
        std::vector<double> norms(static_cast<std::size_t>(N));
        for (int i = 0; i < N; ++i) {
            double s = 0;
            for (int d = 0; d < D; ++d) {
                const double v = xv.at2(i, d);
                s += v * v;
            }
            const double r = std::sqrt(s);
            if (r == 0.0) throw NumericError("row_normalize: zero-norm representation row");
            norms[static_cast<std::size_t>(i)] = r;
            for (int d = 0; d < D; ++d) out.at2(i, d) = static_cast<T>(xv.at2(i, d) / r);
        }
        return unary(x, std::move(out), [x, N, D, norms](Graph& g, int self) {
            const Tensor<T>& dy = g.grad(self);
            const Tensor<T>& yv = g.value(self);
            Tensor<T>& dx = g.mut_grad(x);
            for (int i = 0; i < N; ++i) {
                double dot = 0;
                for (int d = 0; d < D; ++d) dot += static_cast<double>(dy.at2(i, d)) * static_cast<double>(yv.at2(i, d));
                const double inv_r = 1.0 / norms[static_cast<std::size_t>(i)];
                for (int d = 0; d < D; ++d)
                    dx.at2(i, d) += static_cast<T>((static_cast<double>(dy.at2(i, d)) - dot * static_cast<double>(yv.at2(i, d))) * inv_r);
            }
        });
    }

    /// C [N,M] = A [N,D] * B [M,D]^T
    int matmul_nt(int a, int b) {
        const Tensor<T>& av = value(a);
        const Tensor<T>& bv = value(b);
        if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(1))
            throw UsageError("matmul_nt: shape mismatch");
        const int N = av.dim(0), D = av.dim(1), M = bv.dim(0);
        Tensor<T> out({N, M});
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < M; ++j) {
                double acc = 0;
                for (int d = 0; d < D; ++d) acc += static_cast<double>(av.at2(i, d)) * static_cast<double>(bv.at2(j, d));
                out.at2(i, j) = static_cast<T>(acc);
            }
        const bool ng = needs(a) || needs(b);
        return record(std::move(out), ng, [a, b, N, D, M](Graph& g, int self) {
            const Tensor<T>& dc = g.grad(self);
            const Tensor<T>& av = g.value(a);
            const Tensor<T>& bv = g.value(b);
            if (g.needs(a)) {
                Tensor<T>& da = g.mut_grad(a);
                for (int i = 0; i < N; ++i)
                    for (int j = 0; j < M; ++j) {
                        const T d = dc.at2(i, j);
                        for (int k = 0; k < D; ++k) da.at2(i, k) += d * bv.at2(j, k);
                    }
            }
            if (g.needs(b)) {
                Tensor<T>& db = g.mut_grad(b);
                for (int i = 0; i < N; ++i)
                    for (int j = 0; j < M; ++j) {
                        const T d = dc.at2(i, j);
                        for (int k = 0; k < D; ++k) db.at2(j, k) += d * av.at2(i, k);
                    }
            }
        });
    }

    /// Sum of all elements -> scalar.
    int sum(int x) {
        const Tensor<T>& xv = value(x);
        double acc = 0;
        for (T v : xv.v) acc += static_cast<double>(v);
        Tensor<T> out({1});
        out.v[0] = static_cast<T>(acc);
        return unary(x, std::move(out), [x](Graph& g, int self) {
            const T d = g.grad(self).v[0];
            Tensor<T>& dx = g.mut_grad(x);
            for (T& v : dx.v) v += d;
        });
    }

    // ---- losses (scalar outputs) ----------------------------------------

    /// Mean multi-label binary cross-entropy over batch and bits, in the
    /// numerically stable log-sum-exp form. Targets must be exactly 0 or 1.
    int bce_multilabel(int logits, const Tensor<T>& targets) {
        const Tensor<T>& lv = value(logits);
        if (!lv.same_shape(targets)) throw UsageError("bce_multilabel: target shape mismatch");
        for (T t : targets.v)
            if (t != T(0) && t != T(1)) throw UsageError("bce_multilabel: target not in {0,1}");
        double acc = 0;
        for (std::size_t i = 0; i < lv.v.size(); ++i) {
            const double l = lv.v[i];
            const double t = targets.v[i];
            acc += std::max(l, 0.0) - l * t + std::log1p(std::exp(-std::abs(l)));
        }
        const double inv_n = 1.0 / static_cast<double>(lv.numel());
        Tensor<T> out({1});
        out.v[0] = static_cast<T>(acc * inv_n);
        Tensor<T> tcopy = targets;
        return unary(logits, std::move(out), [logits, tcopy, inv_n](Graph& g, int self) {
            const T seed = g.grad(self).v[0];
            const Tensor<T>& lv = g.value(logits);
            Tensor<T>& dl = g.mut_grad(logits);
            for (std::size_t i = 0; i < lv.v.size(); ++i) {
                const double s = 1.0 / (1.0 + std::exp(-static_cast<double>(lv.v[i])));
                dl.v[i] += static_cast<T>((s - static_cast<double>(tcopy.v[i])) * inv_n * static_cast<double>(seed));
            }
        });
    }

    /// Mean softmax cross-entropy with integer class targets.
    int softmax_ce(int logits, const std::vector<int>& labels) {
        const Tensor<T>& lv = value(logits);
        if (lv.rank() != 2 || static_cast<std::size_t>(lv.dim(0)) != labels.size())
            throw UsageError("softmax_ce: label count mismatch");
        const int B = lv.dim(0), K = lv.dim(1);
        double acc = 0;
        for (int b = 0; b < B; ++b) {
            if (labels[static_cast<std::size_t>(b)] < 0 || labels[static_cast<std::size_t>(b)] >= K)
                throw UsageError("softmax_ce: label out of range");
            double mx = lv.at2(b, 0);
            for (int k = 1; k < K; ++k) mx = std::max(mx, static_cast<double>(lv.at2(b, k)));
            double se = 0;
            for (int k = 0; k < K; ++k) se += std::exp(static_cast<double>(lv.at2(b, k)) - mx);
            acc += mx + std::log(se) - static_cast<double>(lv.at2(b, labels[static_cast<std::size_t>(b)]));
        }
        Tensor<T> out({1});
        out.v[0] = static_cast<T>(acc / B);
        return unary(logits, std::move(out), [logits, labels, B, K](Graph& g, int self) {
            const T seed = g.grad(self).v[0];
            const Tensor<T>& lv = g.value(logits);
            Tensor<T>& dl = g.mut_grad(logits);
            const double inv_b = 1.0 / B;
            for (int b = 0; b < B; ++b) {
                double mx = lv.at2(b, 0);
                for (int k = 1; k < K; ++k) mx = std::max(mx, static_cast<double>(lv.at2(b, k)));
                double se = 0;
                for (int k = 0; k < K; ++k) se += std::exp(static_cast<double>(lv.at2(b, k)) - mx);
                for (int k = 0; k < K; ++k) {
                    double p = std::exp(static_cast<double>(lv.at2(b, k)) - mx) / se;
                    if (k == labels[static_cast<std::size_t>(b)]) p -= 1.0;
                    dl.at2(b, k) += static_cast<T>(p * inv_b * static_cast<double>(seed));
                }
            }
        });
    }

    /// Mean squared error against a constant target.
    int mse(int pred, const Tensor<T>& target) {
        const Tensor<T>& pv = value(pred);
        if (!pv.same_shape(target)) throw UsageError("mse: target shape mismatch");
        double acc = 0;
        for (std::size_t i = 0; i < pv.v.size(); ++i) {
            const double d = static_cast<double>(pv.v[i]) - static_cast<double>(target.v[i]);
            acc += d * d;
        }
        const double inv_n = 1.0 / static_cast<double>(pv.numel());
        Tensor<T> out({1});
        out.v[0] = static_cast<T>(acc * inv_n);
        Tensor<T> tcopy = target;
        return unary(pred, std::move(out), [pred, tcopy, inv_n](Graph& g, int self) {
            const T seed = g.grad(self).v[0];
            const Tensor<T>& pv = g.value(pred);
            Tensor<T>& dp = g.mut_grad(pred);
            for (std::size_t i = 0; i < pv.v.size(); ++i)
                dp.v[i] += static_cast<T>(2.0 * (static_cast<double>(pv.v[i]) - static_cast<double>(tcopy.v[i])) * inv_n * static_cast<double>(seed));
        });
    }

    /// NT-Xent over a cosine-similarity matrix [M,M]: per anchor i the
    /// cross-entropy of its positive pairing[i] against all M-1 candidates
    /// k != i, averaged over anchors.
    int ntxent_from_sims(int sims, const std::vector<int>& pairing, T tau) {
        const Tensor<T>& sv = value(sims);
        if (sv.rank() != 2 || sv.dim(0) != sv.dim(1)) throw UsageError("ntxent: sims must be square");
        const int M = sv.dim(0);
        if (static_cast<int>(pairing.size()) != M) throw UsageError("ntxent: pairing size mismatch");
        if (tau <= T(0)) throw UsageError("ntxent: tau must be positive");
        for (int i = 0; i < M; ++i) {
            const int p = pairing[static_cast<std::size_t>(i)];
            if (p < 0 || p >= M || p == i || pairing[static_cast<std::size_t>(p)] != i)
                throw UsageError("ntxent: pairing must be a fixed-point-free involution");
        }
        const double inv_tau = 1.0 / static_cast<double>(tau);
        double acc = 0;
        for (int i = 0; i < M; ++i) {
            double mx = -1e300;
            for (int k = 0; k < M; ++k)
                if (k != i) mx = std::max(mx, static_cast<double>(sv.at2(i, k)) * inv_tau);
            double se = 0;
            for (int k = 0; k < M; ++k)
                if (k != i) se += std::exp(static_cast<double>(sv.at2(i, k)) * inv_tau - mx);
            acc += mx + std::log(se) - static_cast<double>(sv.at2(i, pairing[static_cast<std::size_t>(i)])) * inv_tau;
        }
        Tensor<T> out({1});
        out.v[0] = static_cast<T>(acc / M);
        return unary(sims, std::move(out), [sims, pairing, M, inv_tau](Graph& g, int self) {
            const T seed = g.grad(self).v[0];
            const Tensor<T>& sv = g.value(sims);
            Tensor<T>& ds = g.mut_grad(sims);
            const double scale = inv_tau / M * static_cast<double>(seed);
            for (int i = 0; i < M; ++i) {
                double mx = -1e300;
                for (int k = 0; k < M; ++k)
                    if (k != i) mx = std::max(mx, static_cast<double>(sv.at2(i, k)) * inv_tau);
                double se = 0;
                for (int k = 0; k < M; ++k)
                    if (k != i) se += std::exp(static_cast<double>(sv.at2(i, k)) * inv_tau - mx);
                for (int k = 0; k < M; ++k) {
                    if (k == i) continue;
                    double p = std::exp(static_cast<double>(sv.at2(i, k)) * inv_tau - mx) / se;
                    if (k == pairing[static_cast<std::size_t>(i)]) p -= 1.0;
                    ds.at2(i, k) += static_cast<T>(p * scale);
                }
            }
        });
    }

    bool needs(int id) const { return nodes_.at(static_cast<std::size_t>(id)).needs_grad; }

    Tensor<T>& mut_grad(int id) { return nodes_.at(static_cast<std::size_t>(id)).grad; }

private:
    int record(Tensor<T> out, bool needs_grad, std::function<void(Graph&, int)> bp) {
        Node n;
        n.value = std::move(out);
        n.needs_grad = needs_grad;
        if (needs_grad) {
            n.grad = Tensor<T>(n.value.shape);
            n.backprop = std::move(bp);
        }
        nodes_.push_back(std::move(n));
        return static_cast<int>(nodes_.size()) - 1;
    }

    int unary(int x, Tensor<T> out, std::function<void(Graph&, int)> bp) {
        return record(std::move(out), needs(x), std::move(bp));
    }

    std::vector<Node> nodes_;
    bool inference_ = false;
};

/// NT-Xent on raw representations: cosine similarity (row-normalize +
/// inner products) then the softmax cross-entropy over candidates.
template <typename T>
int ntxent_loss(Graph<T>& g, int reps, const std::vector<int>& pairing, T tau) {
    const int z = g.row_normalize(reps);
    const int sims = g.matmul_nt(z, z);
    return g.ntxent_from_sims(sims, pairing, tau);
}

} // namespace ecgssl::nn
