#include "mrfe/ops.hpp"

#include "mrfe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

namespace mrfe::inline MRFE_PRECISION {

using detail::make_result;
using detail::NodePtr;
using detail::TensorNode;

namespace {

// Grad buffer of a parent, or nullptr when the parent takes no gradient.
Scalar* grad_ptr(const NodePtr& node) {
    return node->requires_grad ? node->grad_buffer().data() : nullptr;
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
    if (t.rank() != rank) {
        throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                             shape_str(t.shape()));
    }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
    }
}

double sigmoid_d(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Scalar sigmoid_s(Scalar x) {
    if (x >= 0) return Scalar(1) / (Scalar(1) + std::exp(-x));
    const Scalar e = std::exp(x);
    return e / (Scalar(1) + e);
}

} // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
        throw DimensionError("matmul: cannot multiply " + shape_str(a.shape()) + " by " +
                             shape_str(b.shape()));
    }
    const std::size_t m = a.dim(0), k = a.dim(1), p = b.dim(1);
    const Scalar* A = a.data().data();
    const Scalar* B = b.data().data();
    std::vector<Scalar> out(m * p);
    std::vector<double> acc(p);
    for (std::size_t i = 0; i < m; ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double aik = A[i * k + kk];
            const Scalar* brow = B + kk * p;
            for (std::size_t j = 0; j < p; ++j) acc[j] += aik * brow[j];
        }
        for (std::size_t j = 0; j < p; ++j) out[i * p + j] = static_cast<Scalar>(acc[j]);
    }
    NodePtr an = a.node(), bn = b.node();
    return make_result({m, p}, std::move(out), {a, b}, [an, bn, m, k, p](const TensorNode& o) {
        const Scalar* G = o.grad.data();
        const Scalar* A = an->data.data();
        const Scalar* B = bn->data.data();
        if (Scalar* dA = grad_ptr(an)) {
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t kk = 0; kk < k; ++kk) {
                    double s = 0;
                    for (std::size_t j = 0; j < p; ++j) s += double(G[i * p + j]) * B[kk * p + j];
                    dA[i * k + kk] += static_cast<Scalar>(s);
                }
            }
        }
        if (Scalar* dB = grad_ptr(bn)) {
            for (std::size_t kk = 0; kk < k; ++kk) {
                for (std::size_t j = 0; j < p; ++j) {
                    double s = 0;
                    for (std::size_t i = 0; i < m; ++i) s += double(A[i * k + kk]) * G[i * p + j];
                    dB[kk * p + j] += static_cast<Scalar>(s);
                }
            }
        }
    });
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias) {
    require_rank(w, 2, "linear");
    const bool vec = x.rank() == 1;
    if (!vec) require_rank(x, 2, "linear");
    const std::size_t n = vec ? 1 : x.dim(0);
    const std::size_t in = vec ? x.dim(0) : x.dim(1);
    const std::size_t outw = w.dim(0);
    if (w.dim(1) != in) {
        throw DimensionError("linear: input " + shape_str(x.shape()) + " incompatible with weight " +
                             shape_str(w.shape()));
    }
    const bool has_bias = bias.defined();
    if (has_bias && bias.shape() != Shape{outw}) {
        throw DimensionError("linear: bias " + shape_str(bias.shape()) + " does not match weight " +
                             shape_str(w.shape()));
    }
    const Scalar* X = x.data().data();
    const Scalar* W = w.data().data();
    const Scalar* Bv = has_bias ? bias.data().data() : nullptr;
    std::vector<Scalar> out(n * outw);
    for (std::size_t t = 0; t < n; ++t) {
        const Scalar* xr = X + t * in;
        for (std::size_t o = 0; o < outw; ++o) {
            const Scalar* wr = W + o * in;
            double s = has_bias ? double(Bv[o]) : 0.0;
            for (std::size_t i = 0; i < in; ++i) s += double(xr[i]) * wr[i];
            out[t * outw + o] = static_cast<Scalar>(s);
        }
    }
    Shape shape = vec ? Shape{outw} : Shape{n, outw};
    NodePtr xn = x.node(), wn = w.node(), bn = has_bias ? bias.node() : nullptr;
    std::vector<Tensor> inputs{x, w};
    if (has_bias) inputs.push_back(bias);
    return make_result(std::move(shape), std::move(out), std::move(inputs),
                       [xn, wn, bn, n, in, outw](const TensorNode& o) {
                           const Scalar* G = o.grad.data();
                           const Scalar* X = xn->data.data();
                           const Scalar* W = wn->data.data();
                           if (Scalar* dX = grad_ptr(xn)) {
                               std::vector<double> acc(in);
                               for (std::size_t t = 0; t < n; ++t) {
                                   std::fill(acc.begin(), acc.end(), 0.0);
                                   for (std::size_t q = 0; q < outw; ++q) {
                                       const double g = G[t * outw + q];
                                       if (g == 0) continue;
                                       const Scalar* wr = W + q * in;
                                       for (std::size_t i = 0; i < in; ++i) acc[i] += g * wr[i];
                                   }
                                   for (std::size_t i = 0; i < in; ++i) dX[t * in + i] += static_cast<Scalar>(acc[i]);
                               }
                           }
                           if (Scalar* dW = grad_ptr(wn)) {
                               for (std::size_t q = 0; q < outw; ++q) {
                                   Scalar* dwr = dW + q * in;
                                   for (std::size_t t = 0; t < n; ++t) {
                                       const Scalar g = G[t * outw + q];
                                       if (g == 0) continue;
                                       const Scalar* xr = X + t * in;
                                       for (std::size_t i = 0; i < in; ++i) dwr[i] += g * xr[i];
                                   }
                               }
                           }
                           if (bn) {
                               if (Scalar* dB = grad_ptr(bn)) {
                                   for (std::size_t t = 0; t < n; ++t)
                                       for (std::size_t q = 0; q < outw; ++q) dB[q] += G[t * outw + q];
                               }
                           }
                       });
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<Scalar> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
    NodePtr an = a.node(), bn = b.node();
    return make_result(a.shape(), std::move(out), {a, b}, [an, bn](const TensorNode& o) {
        for (const auto& p : {an, bn}) {
            if (Scalar* d = grad_ptr(p))
                for (std::size_t i = 0; i < o.grad.size(); ++i) d[i] += o.grad[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    std::vector<Scalar> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
    NodePtr an = a.node(), bn = b.node();
    return make_result(a.shape(), std::move(out), {a, b}, [an, bn](const TensorNode& o) {
        if (Scalar* d = grad_ptr(an))
            for (std::size_t i = 0; i < o.grad.size(); ++i) d[i] += o.grad[i] * bn->data[i];
        if (Scalar* d = grad_ptr(bn))
            for (std::size_t i = 0; i < o.grad.size(); ++i) d[i] += o.grad[i] * an->data[i];
    });
}

Tensor scale(const Tensor& a, Scalar factor) {
    std::vector<Scalar> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * factor;
    NodePtr an = a.node();
    return make_result(a.shape(), std::move(out), {a}, [an, factor](const TensorNode& o) {
        if (Scalar* d = grad_ptr(an))
            for (std::size_t i = 0; i < o.grad.size(); ++i) d[i] += o.grad[i] * factor;
    });
}

Tensor sum(const Tensor& x) {
    double s = 0;
    for (auto v : x.data()) s += v;
    NodePtr xn = x.node();
    return make_result({}, {static_cast<Scalar>(s)}, {x}, [xn](const TensorNode& o) {
        if (Scalar* d = grad_ptr(xn))
            for (std::size_t i = 0; i < xn->data.size(); ++i) d[i] += o.grad[0];
    });
}

Tensor mean_of(std::span<const Tensor> items) {
    if (items.empty()) throw DimensionError("mean_of: no inputs");
    for (const auto& t : items) require_same_shape(items.front(), t, "mean_of");
    const std::size_t count = items.size();
    std::vector<Scalar> out(items.front().numel());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = 0;
        for (const auto& t : items) s += t.data()[i];
        out[i] = static_cast<Scalar>(s / static_cast<double>(count));
    }
    std::vector<NodePtr> nodes;
    for (const auto& t : items) nodes.push_back(t.node());
    return make_result(items.front().shape(), std::move(out), {items.begin(), items.end()},
                       [nodes, count](const TensorNode& o) {
                           const double inv = 1.0 / static_cast<double>(count);
                           for (const auto& p : nodes) {
                               if (Scalar* d = grad_ptr(p))
                                   for (std::size_t i = 0; i < o.grad.size(); ++i)
                                       d[i] += static_cast<Scalar>(o.grad[i] * inv);
                           }
                       });
}

Tensor add_column_broadcast(const Tensor& x, const Tensor& s) {
    require_rank(x, 2, "add_column_broadcast");
    const std::size_t n = x.dim(0), m = x.dim(1);
    if (s.numel() != n) {
        throw DimensionError("add_column_broadcast: " + shape_str(x.shape()) + " with " + shape_str(s.shape()));
    }
    std::vector<Scalar> out(n * m);
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t j = 0; j < m; ++j) out[t * m + j] = x.data()[t * m + j] + s.data()[t];
    NodePtr xn = x.node(), sn = s.node();
    return make_result(x.shape(), std::move(out), {x, s}, [xn, sn, n, m](const TensorNode& o) {
        if (Scalar* d = grad_ptr(xn))
            for (std::size_t i = 0; i < n * m; ++i) d[i] += o.grad[i];
        if (Scalar* d = grad_ptr(sn)) {
            for (std::size_t t = 0; t < n; ++t) {
                double acc = 0;
                for (std::size_t j = 0; j < m; ++j) acc += o.grad[t * m + j];
                d[t] += static_cast<Scalar>(acc);
            }
        }
    });
}

Tensor scale_rows(const Tensor& x, std::span<const Scalar> factors) {
    require_rank(x, 2, "scale_rows");
    const std::size_t n = x.dim(0), m = x.dim(1);
    if (factors.size() != n) {
        throw DimensionError("scale_rows: " + std::to_string(factors.size()) + " factors for " +
                             shape_str(x.shape()));
    }
    std::vector<Scalar> f(factors.begin(), factors.end());
    std::vector<Scalar> out(n * m);
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t j = 0; j < m; ++j) out[t * m + j] = f[t] * x.data()[t * m + j];
    NodePtr xn = x.node();
    return make_result(x.shape(), std::move(out), {x}, [xn, f = std::move(f), m](const TensorNode& o) {
        if (Scalar* d = grad_ptr(xn))
            for (std::size_t i = 0; i < o.grad.size(); ++i) d[i] += f[i / m] * o.grad[i];
    });
}

Tensor activation(const Tensor& x, Activation kind) {
    std::vector<Scalar> out(x.numel());
    const auto in = x.data();
    switch (kind) {
    case Activation::relu:
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[i] > 0 ? in[i] : Scalar(0);
        break;
    case Activation::tanh:
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<Scalar>(std::tanh(double(in[i])));
        break;
    case Activation::sigmoid:
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<Scalar>(sigmoid_d(in[i]));
        break;
    }
    NodePtr xn = x.node();
    return make_result(x.shape(), std::move(out), {x}, [xn, kind](const TensorNode& o) {
        Scalar* d = grad_ptr(xn);
        if (!d) return;
        for (std::size_t i = 0; i < o.grad.size(); ++i) {
            const double g = o.grad[i];
            double local = 0;
            switch (kind) {
            case Activation::relu: local = xn->data[i] > 0 ? 1.0 : 0.0; break;
            case Activation::tanh: {
                const double y = std::tanh(double(xn->data[i]));
                local = 1.0 - y * y;
                break;
            }
            case Activation::sigmoid: {
                const double y = sigmoid_d(xn->data[i]);
                local = y * (1.0 - y);
                break;
            }
            }
            d[i] += static_cast<Scalar>(g * local);
        }
    });
}

Tensor softmax_rows(const Tensor& x) {
    if (x.rank() != 1 && x.rank() != 2) {
        throw DimensionError("softmax_rows: expected rank 1 or 2, got " + shape_str(x.shape()));
    }
    const std::size_t rows = x.rank() == 1 ? 1 : x.dim(0);
    const std::size_t cols = x.rank() == 1 ? x.dim(0) : x.dim(1);
    std::vector<Scalar> out(rows * cols);
    std::vector<double> e(cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const Scalar* row = x.data().data() + r * cols;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < cols; ++c) mx = std::max(mx, double(row[c]));
        double z = 0;
        for (std::size_t c = 0; c < cols; ++c) z += (e[c] = std::exp(double(row[c]) - mx));
        for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = static_cast<Scalar>(e[c] / z);
    }
    NodePtr xn = x.node();
    return make_result(x.shape(), std::move(out), {x}, [xn, rows, cols](const TensorNode& o) {
        Scalar* d = grad_ptr(xn);
        if (!d) return;
        for (std::size_t r = 0; r < rows; ++r) {
            const Scalar* y = o.data.data() + r * cols;
            const Scalar* g = o.grad.data() + r * cols;
            double dot = 0;
            for (std::size_t c = 0; c < cols; ++c) dot += double(g[c]) * y[c];
            for (std::size_t c = 0; c < cols; ++c)
                d[r * cols + c] += static_cast<Scalar>(double(y[c]) * (double(g[c]) - dot));
        }
    });
}

Tensor conv1d_depthwise(const Tensor& e, const Tensor& weights, const Tensor& bias, std::size_t k) {
    if (k % 2 == 0) throw ConfigError("conv1d_depthwise: kernel size must be odd, got " + std::to_string(k));
    require_rank(e, 2, "conv1d_depthwise");
    const std::size_t n = e.dim(0), d = e.dim(1);
    if (weights.shape() != Shape{d, k} || bias.shape() != Shape{d}) {
        throw DimensionError("conv1d_depthwise: input " + shape_str(e.shape()) + " with weights " +
                             shape_str(weights.shape()) + " and bias " + shape_str(bias.shape()));
    }
    const long pad = static_cast<long>(k - 1) / 2;
    const long nl = static_cast<long>(n);
    const Scalar* E = e.data().data();
    const Scalar* B = bias.data().data();
    // Tap-major copy of the weights: wt[r·d + j] = w[j, r].
    std::vector<Scalar> wt(k * d);
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t r = 0; r < k; ++r) wt[r * d + j] = weights.data()[j * k + r];
    std::vector<Scalar> out(n * d);
    for (long t = 0; t < nl; ++t) {
        Scalar* o = out.data() + t * d;
        std::copy_n(B, d, o);
        for (std::size_t r = 0; r < k; ++r) {
            const long src = t + static_cast<long>(r) - pad;
            if (src < 0 || src >= nl) continue;
            const Scalar* er = E + src * d;
            const Scalar* w = wt.data() + r * d;
            for (std::size_t j = 0; j < d; ++j) o[j] += w[j] * er[j];
        }
    }
    NodePtr en = e.node(), wn = weights.node(), bn = bias.node();
    return make_result({n, d}, std::move(out), {e, weights, bias},
                       [en, wn, bn, nl, d, k, pad, wt = std::move(wt)](const TensorNode& o) {
                           const Scalar* G = o.grad.data();
                           const Scalar* E = en->data.data();
                           Scalar* dE = grad_ptr(en);
                           Scalar* dW = grad_ptr(wn);
                           Scalar* dB = grad_ptr(bn);
                           std::vector<Scalar> dwt(dW ? k * d : 0, Scalar(0));
                           for (long t = 0; t < nl; ++t) {
                               const Scalar* g = G + t * d;
                               if (dB)
                                   for (std::size_t j = 0; j < d; ++j) dB[j] += g[j];
                               for (std::size_t r = 0; r < k; ++r) {
                                   const long src = t + static_cast<long>(r) - pad;
                                   if (src < 0 || src >= nl) continue;
                                   if (dE) {
                                       Scalar* de = dE + src * d;
                                       const Scalar* w = wt.data() + r * d;
                                       for (std::size_t j = 0; j < d; ++j) de[j] += g[j] * w[j];
                                   }
                                   if (dW) {
                                       Scalar* dw = dwt.data() + r * d;
                                       const Scalar* er = E + src * d;
                                       for (std::size_t j = 0; j < d; ++j) dw[j] += g[j] * er[j];
                                   }
                               }
                           }
                           if (dW)
                               for (std::size_t j = 0; j < d; ++j)
                                   for (std::size_t r = 0; r < k; ++r) dW[j * k + r] += dwt[r * d + j];
                       });
}

Tensor conv1d_pointwise(const Tensor& v, const Tensor& weights, const Tensor& bias) {
    if (v.rank() != 2 || weights.rank() != 2 || v.dim(1) != weights.dim(0) || bias.shape() != Shape{weights.dim(1)}) {
        throw DimensionError("conv1d_pointwise: input " + shape_str(v.shape()) + " with weights " +
                             shape_str(weights.shape()) + " and bias " + shape_str(bias.shape()));
    }
    const std::size_t n = v.dim(0), d = v.dim(1), c = weights.dim(1);
    const Scalar* V = v.data().data();
    const Scalar* W = weights.data().data();
    const Scalar* B = bias.data().data();
    std::vector<Scalar> out(n * c);
    std::vector<double> acc(c);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t o = 0; o < c; ++o) acc[o] = B[o];
        for (std::size_t j = 0; j < d; ++j) {
            const double x = V[t * d + j];
            const Scalar* wr = W + j * c;
            for (std::size_t o = 0; o < c; ++o) acc[o] += x * wr[o];
        }
        for (std::size_t o = 0; o < c; ++o) out[t * c + o] = static_cast<Scalar>(acc[o]);
    }
    NodePtr vn = v.node(), wn = weights.node(), bn = bias.node();
    return make_result({n, c}, std::move(out), {v, weights, bias}, [vn, wn, bn, n, d, c](const TensorNode& o) {
        const Scalar* G = o.grad.data();
        const Scalar* V = vn->data.data();
        const Scalar* W = wn->data.data();
        if (Scalar* dV = grad_ptr(vn)) {
            for (std::size_t t = 0; t < n; ++t)
                for (std::size_t j = 0; j < d; ++j) {
                    double s = 0;
                    for (std::size_t q = 0; q < c; ++q) s += double(G[t * c + q]) * W[j * c + q];
                    dV[t * d + j] += static_cast<Scalar>(s);
                }
        }
        if (Scalar* dW = grad_ptr(wn)) {
            for (std::size_t t = 0; t < n; ++t)
                for (std::size_t j = 0; j < d; ++j) {
                    const Scalar x = V[t * d + j];
                    for (std::size_t q = 0; q < c; ++q) dW[j * c + q] += x * G[t * c + q];
                }
        }
        if (Scalar* dB = grad_ptr(bn)) {
            for (std::size_t t = 0; t < n; ++t)
                for (std::size_t q = 0; q < c; ++q) dB[q] += G[t * c + q];
        }
    });
}

Tensor conv1d_full(const Tensor& e, const Tensor& weights, const Tensor& bias) {
    require_rank(e, 2, "conv1d_full");
    require_rank(weights, 3, "conv1d_full");
    const std::size_t n = e.dim(0), d = e.dim(1), c = weights.dim(0), k = weights.dim(2);
    if (weights.dim(1) != d || bias.shape() != Shape{c}) {
        throw DimensionError("conv1d_full: input " + shape_str(e.shape()) + " with weights " +
                             shape_str(weights.shape()) + " and bias " + shape_str(bias.shape()));
    }
    if (k % 2 == 0) throw ConfigError("conv1d_full: kernel size must be odd, got " + std::to_string(k));
    const long pad = static_cast<long>(k - 1) / 2;
    const long nl = static_cast<long>(n);
    const Scalar* E = e.data().data();
    const Scalar* W = weights.data().data();
    // wt[(r·d + j)·c + o] = W[o][j][r]
    auto wt = std::make_shared<std::vector<Scalar>>(k * d * c);
    for (std::size_t o = 0; o < c; ++o)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t r = 0; r < k; ++r) (*wt)[(r * d + j) * c + o] = W[(o * d + j) * k + r];
    std::vector<Scalar> out(n * c);
    for (long t = 0; t < nl; ++t) {
        Scalar* row = out.data() + t * c;
        std::copy(bias.data().begin(), bias.data().end(), row);
        for (std::size_t r = 0; r < k; ++r) {
            const long src = t + static_cast<long>(r) - pad;
            if (src < 0 || src >= nl) continue;
            for (std::size_t j = 0; j < d; ++j) {
                const Scalar x = E[src * d + j];
                const Scalar* w = wt->data() + (r * d + j) * c;
                for (std::size_t o = 0; o < c; ++o) row[o] += x * w[o];
            }
        }
    }
    NodePtr en = e.node(), wn = weights.node(), bn = bias.node();
    return make_result({n, c}, std::move(out), {e, weights, bias},
                       [en, wn, bn, wt, nl, d, c, k, pad](const TensorNode& o) {
                           const Scalar* G = o.grad.data();
                           const Scalar* E = en->data.data();
                           Scalar* dE = grad_ptr(en);
                           Scalar* dW = grad_ptr(wn);
                           Scalar* dB = grad_ptr(bn);
                           std::vector<Scalar> dwt(dW ? k * d * c : 0, Scalar{0});
                           for (long t = 0; t < nl; ++t) {
                               const Scalar* g = G + t * c;
                               if (dB)
                                   for (std::size_t q = 0; q < c; ++q) dB[q] += g[q];
                               for (std::size_t r = 0; r < k; ++r) {
                                   const long src = t + static_cast<long>(r) - pad;
                                   if (src < 0 || src >= nl) continue;
                                   for (std::size_t j = 0; j < d; ++j) {
                                       const Scalar* w = wt->data() + (r * d + j) * c;
                                       if (dE) {
                                           Scalar acc = 0;
                                           for (std::size_t q = 0; q < c; ++q) acc += g[q] * w[q];
                                           dE[src * d + j] += acc;
                                       }
                                       if (dW) {
                                           const Scalar x = E[src * d + j];
                                           Scalar* dw = dwt.data() + (r * d + j) * c;
                                           for (std::size_t q = 0; q < c; ++q) dw[q] += g[q] * x;
                                       }
                                   }
                               }
                           }
                           if (dW)
                               for (std::size_t q = 0; q < c; ++q)
                                   for (std::size_t j = 0; j < d; ++j)
                                       for (std::size_t r = 0; r < k; ++r)
                                           dW[(q * d + j) * k + r] += dwt[(r * d + j) * c + q];
                       });
}

Tensor max_over_time(const Tensor& h) {
    require_rank(h, 2, "max_over_time");
    const std::size_t n = h.dim(0), c = h.dim(1);
    if (n == 0) throw InputError("max_over_time: empty sequence");
    std::vector<Scalar> out(c);
    std::vector<std::size_t> arg(c, 0);
    const Scalar* H = h.data().data();
    for (std::size_t j = 0; j < c; ++j) {
        out[j] = H[j];
        for (std::size_t t = 1; t < n; ++t) {
            if (H[t * c + j] > out[j]) {
                out[j] = H[t * c + j];
                arg[j] = t;
            }
        }
    }
    NodePtr hn = h.node();
    return make_result({c}, std::move(out), {h}, [hn, arg = std::move(arg), c](const TensorNode& o) {
        if (Scalar* d = grad_ptr(hn))
            for (std::size_t j = 0; j < c; ++j) d[arg[j] * c + j] += o.grad[j];
    });
}

Tensor cross_entropy(const Tensor& probs, const Tensor& onehot) {
    if (probs.numel() != onehot.numel()) {
        throw DimensionError("cross_entropy: " + shape_str(probs.shape()) + " vs " + shape_str(onehot.shape()));
    }
    std::size_t ones = 0;
    for (auto v : onehot.data()) {
        if (v == Scalar(1)) ++ones;
        else if (v != Scalar(0)) throw LabelError("cross_entropy: target is not one-hot");
    }
    if (ones != 1) throw LabelError("cross_entropy: target is not one-hot");
    double loss = 0;
    for (std::size_t i = 0; i < probs.numel(); ++i) {
        if (onehot.data()[i] != 0) loss -= std::log(double(probs.data()[i]) + kLogEpsilon);
    }
    NodePtr pn = probs.node(), yn = onehot.node();
    return make_result({}, {static_cast<Scalar>(loss)}, {probs}, [pn, yn](const TensorNode& o) {
        if (Scalar* d = grad_ptr(pn))
            for (std::size_t i = 0; i < pn->data.size(); ++i)
                if (yn->data[i] != 0)
                    d[i] += static_cast<Scalar>(-double(o.grad[0]) / (double(pn->data[i]) + kLogEpsilon));
    });
}

Tensor softmax_cross_entropy(const Tensor& logits, std::size_t label) {
    const std::size_t classes = logits.numel();
    if (label >= classes) {
        throw LabelError("softmax_cross_entropy: label " + std::to_string(label) + " outside " +
                         std::to_string(classes) + " classes");
    }
    const auto z = logits.data();
    double mx = -std::numeric_limits<double>::infinity();
    for (auto v : z) mx = std::max(mx, double(v));
    double total = 0;
    for (auto v : z) total += std::exp(double(v) - mx);
    const double lse = mx + std::log(total);
    std::vector<Scalar> probs(classes);
    for (std::size_t c = 0; c < classes; ++c) probs[c] = static_cast<Scalar>(std::exp(double(z[c]) - lse));
    const double loss = lse - double(z[label]);
    NodePtr zn = logits.node();
    return make_result({}, {static_cast<Scalar>(loss)}, {logits},
                       [zn, probs = std::move(probs), label](const TensorNode& o) {
                           if (Scalar* d = grad_ptr(zn)) {
                               for (std::size_t c = 0; c < probs.size(); ++c) {
                                   const Scalar target = c == label ? Scalar(1) : Scalar(0);
                                   d[c] += o.grad[0] * (probs[c] - target);
                               }
                           }
                       });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.rank() == 1 && b.rank() == 1) {
        const std::size_t na = a.numel(), nb = b.numel();
        std::vector<Scalar> out(a.data().begin(), a.data().end());
        out.insert(out.end(), b.data().begin(), b.data().end());
        NodePtr an = a.node(), bn = b.node();
        return make_result({na + nb}, std::move(out), {a, b}, [an, bn, na, nb](const TensorNode& o) {
            if (Scalar* d = grad_ptr(an))
                for (std::size_t i = 0; i < na; ++i) d[i] += o.grad[i];
            if (Scalar* d = grad_ptr(bn))
                for (std::size_t i = 0; i < nb; ++i) d[i] += o.grad[na + i];
        });
    }
    if (a.rank() != 2 || b.rank() != 2 || a.dim(0) != b.dim(0)) {
        throw DimensionError("concat_cols: " + shape_str(a.shape()) + " with " + shape_str(b.shape()));
    }
    const std::size_t n = a.dim(0), ca = a.dim(1), cb = b.dim(1), w = ca + cb;
    std::vector<Scalar> out(n * w);
    for (std::size_t t = 0; t < n; ++t) {
        std::copy_n(a.data().data() + t * ca, ca, out.data() + t * w);
        std::copy_n(b.data().data() + t * cb, cb, out.data() + t * w + ca);
    }
    NodePtr an = a.node(), bn = b.node();
    return make_result({n, w}, std::move(out), {a, b}, [an, bn, n, ca, cb, w](const TensorNode& o) {
        Scalar* da = grad_ptr(an);
        Scalar* db = grad_ptr(bn);
        for (std::size_t t = 0; t < n; ++t) {
            if (da)
                for (std::size_t j = 0; j < ca; ++j) da[t * ca + j] += o.grad[t * w + j];
            if (db)
                for (std::size_t j = 0; j < cb; ++j) db[t * cb + j] += o.grad[t * w + ca + j];
        }
    });
}

Tensor stack_rows(std::span<const Tensor> rows) {
    if (rows.empty()) throw DimensionError("stack_rows: no inputs");
    const std::size_t f = rows.front().numel();
    std::vector<Scalar> out;
    out.reserve(rows.size() * f);
    std::vector<NodePtr> nodes;
    for (const auto& r : rows) {
        if (r.rank() != 1 || r.numel() != f) {
            throw DimensionError("stack_rows: row " + shape_str(r.shape()) + " vs width " + std::to_string(f));
        }
        out.insert(out.end(), r.data().begin(), r.data().end());
        nodes.push_back(r.node());
    }
    return make_result({rows.size(), f}, std::move(out), {rows.begin(), rows.end()},
                       [nodes, f](const TensorNode& o) {
                           for (std::size_t i = 0; i < nodes.size(); ++i) {
                               if (Scalar* d = grad_ptr(nodes[i]))
                                   for (std::size_t j = 0; j < f; ++j) d[j] += o.grad[i * f + j];
                           }
                       });
}

Tensor reshape(const Tensor& x, Shape shape) {
    if (shape_numel(shape) != x.numel()) {
        throw DimensionError("reshape: " + shape_str(x.shape()) + " to " + shape_str(shape));
    }
    NodePtr xn = x.node();
    return make_result(std::move(shape), x.to_vector(), {x}, [xn](const TensorNode& o) {
        if (Scalar* d = grad_ptr(xn))
            for (std::size_t i = 0; i < o.grad.size(); ++i) d[i] += o.grad[i];
    });
}

Tensor gather_rows(const Tensor& table, std::span<const std::size_t> ids) {
    require_rank(table, 2, "gather_rows");
    const std::size_t rows = table.dim(0), w = table.dim(1);
    std::vector<Scalar> out(ids.size() * w);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] >= rows) {
            throw VocabError("id " + std::to_string(ids[i]) + " out of range for table with " +
                             std::to_string(rows) + " rows");
        }
        std::copy_n(table.data().data() + ids[i] * w, w, out.data() + i * w);
    }
    NodePtr tn = table.node();
    std::vector<std::size_t> idv(ids.begin(), ids.end());
    return make_result({ids.size(), w}, std::move(out), {table}, [tn, idv = std::move(idv), w](const TensorNode& o) {
        if (Scalar* d = grad_ptr(tn))
            for (std::size_t i = 0; i < idv.size(); ++i)
                for (std::size_t j = 0; j < w; ++j) d[idv[i] * w + j] += o.grad[i * w + j];
    });
}

Tensor cosine_rows(const Tensor& a, const Tensor& p) {
    require_rank(a, 2, "cosine_rows");
    require_rank(p, 2, "cosine_rows");
    if (a.dim(1) != p.dim(1)) {
        throw DimensionError("cosine_rows: " + shape_str(a.shape()) + " vs " + shape_str(p.shape()));
    }
    const std::size_t n = a.dim(0), m = p.dim(0), d = a.dim(1);
    const Scalar* A = a.data().data();
    const Scalar* P = p.data().data();
    std::vector<double> na(n), np(m);
    for (std::size_t t = 0; t < n; ++t) {
        double s = 0;
        for (std::size_t j = 0; j < d; ++j) s += double(A[t * d + j]) * A[t * d + j];
        na[t] = std::sqrt(s);
    }
    for (std::size_t e = 0; e < m; ++e) {
        double s = 0;
        for (std::size_t j = 0; j < d; ++j) s += double(P[e * d + j]) * P[e * d + j];
        np[e] = std::sqrt(s);
    }
    std::vector<Scalar> out(n * m, Scalar(0));
    std::vector<double> cosv(n * m, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t e = 0; e < m; ++e) {
            if (na[t] == 0 || np[e] == 0) continue;
            double dot = 0;
            for (std::size_t j = 0; j < d; ++j) dot += double(A[t * d + j]) * P[e * d + j];
            double c = dot / (na[t] * np[e]);
            c = std::clamp(c, -1.0, 1.0);
            cosv[t * m + e] = c;
            out[t * m + e] = static_cast<Scalar>(c);
        }
    }
    NodePtr an = a.node(), pn = p.node();
    return make_result({n, m}, std::move(out), {a, p},
                       [an, pn, na = std::move(na), np = std::move(np), cosv = std::move(cosv), n, m,
                        d](const TensorNode& o) {
                           const Scalar* A = an->data.data();
                           const Scalar* P = pn->data.data();
                           Scalar* dA = grad_ptr(an);
                           Scalar* dP = grad_ptr(pn);
                           for (std::size_t t = 0; t < n; ++t) {
                               for (std::size_t e = 0; e < m; ++e) {
                                   if (na[t] == 0 || np[e] == 0) continue;
                                   const double g = o.grad[t * m + e];
                                   if (g == 0) continue;
                                   const double c = cosv[t * m + e];
                                   const double inv = 1.0 / (na[t] * np[e]);
                                   for (std::size_t j = 0; j < d; ++j) {
                                       const double aj = A[t * d + j], pj = P[e * d + j];
                                       if (dA) dA[t * d + j] += static_cast<Scalar>(g * (pj * inv - c * aj / (na[t] * na[t])));
                                       if (dP) dP[e * d + j] += static_cast<Scalar>(g * (aj * inv - c * pj / (np[e] * np[e])));
                                   }
                               }
                           }
                       });
}

Tensor dropout(const Tensor& x, double rate, std::mt19937_64& rng) {
    if (rate < 0 || rate >= 1) throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
    if (rate == 0) return x;
    const Scalar keep_scale = static_cast<Scalar>(1.0 / (1.0 - rate));
    std::vector<Scalar> mask(x.numel());
    for (auto& v : mask) v = uniform01(rng) >= rate ? keep_scale : Scalar(0);
    std::vector<Scalar> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * mask[i];
    NodePtr xn = x.node();
    return make_result(x.shape(), std::move(out), {x}, [xn, mask = std::move(mask)](const TensorNode& o) {
        if (Scalar* d = grad_ptr(xn))
            for (std::size_t i = 0; i < mask.size(); ++i) d[i] += o.grad[i] * mask[i];
    });
}

Tensor lstm_direction(const Tensor& x, const Tensor& w_ih, const Tensor& w_hh, const Tensor& bias,
                      bool reverse) {
    require_rank(x, 2, "lstm_direction");
    const std::size_t n = x.dim(0), in = x.dim(1);
    if (n == 0) throw InputError("lstm_direction: empty sequence");
    if (w_hh.rank() != 2 || w_hh.dim(0) != 4 * w_hh.dim(1)) {
        throw DimensionError("lstm_direction: recurrent weight must be [4h×h], got " + shape_str(w_hh.shape()));
    }
    const std::size_t h = w_hh.dim(1);
    if (w_ih.shape() != Shape{4 * h, in} || bias.shape() != Shape{4 * h}) {
        throw DimensionError("lstm_direction: input " + shape_str(x.shape()) + " with input weight " +
                             shape_str(w_ih.shape()) + " and bias " + shape_str(bias.shape()));
    }
    const Scalar* X = x.data().data();
    const Scalar* B = bias.data().data();
    const std::size_t g4 = 4 * h;
    // Transposed weights so every inner loop is a contiguous multiply-add.
    std::vector<Scalar> wi_t(in * g4), wh_t(h * g4);
    for (std::size_t r = 0; r < g4; ++r) {
        for (std::size_t i = 0; i < in; ++i) wi_t[i * g4 + r] = w_ih.data()[r * in + i];
        for (std::size_t i = 0; i < h; ++i) wh_t[i * g4 + r] = w_hh.data()[r * h + i];
    }

    // Per-step caches in processing order.
    std::vector<Scalar> gates(n * g4);   // activated i, f, g, o
    std::vector<Scalar> cells(n * h);
    std::vector<Scalar> hidden(n * h);
    std::vector<Scalar> out(n * h);
    std::vector<Scalar> z(g4);
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t t = reverse ? n - 1 - s : s;
        const Scalar* xt = X + t * in;
        const Scalar* hp = s > 0 ? hidden.data() + (s - 1) * h : nullptr;
        const Scalar* cp = s > 0 ? cells.data() + (s - 1) * h : nullptr;
        std::copy_n(B, g4, z.data());
        for (std::size_t i = 0; i < in; ++i) {
            const Scalar xi = xt[i];
            const Scalar* w = wi_t.data() + i * g4;
            for (std::size_t r = 0; r < g4; ++r) z[r] += w[r] * xi;
        }
        if (hp) {
            for (std::size_t i = 0; i < h; ++i) {
                const Scalar hi = hp[i];
                const Scalar* w = wh_t.data() + i * g4;
                for (std::size_t r = 0; r < g4; ++r) z[r] += w[r] * hi;
            }
        }
        Scalar* gs = gates.data() + s * g4;
        for (std::size_t j = 0; j < h; ++j) {
            const Scalar ig = sigmoid_s(z[j]);
            const Scalar fg = sigmoid_s(z[h + j]);
            const Scalar gg = std::tanh(z[2 * h + j]);
            const Scalar og = sigmoid_s(z[3 * h + j]);
            gs[j] = ig;
            gs[h + j] = fg;
            gs[2 * h + j] = gg;
            gs[3 * h + j] = og;
            const Scalar c = fg * (cp ? cp[j] : Scalar(0)) + ig * gg;
            const Scalar hv = og * std::tanh(c);
            cells[s * h + j] = c;
            hidden[s * h + j] = hv;
            out[t * h + j] = hv;
        }
    }

    NodePtr xn = x.node(), win = w_ih.node(), whn = w_hh.node(), bn = bias.node();
    return make_result(
        {n, h}, std::move(out), {x, w_ih, w_hh, bias},
        [xn, win, whn, bn, n, in, h, reverse, gates = std::move(gates), cells = std::move(cells),
         hidden = std::move(hidden)](const TensorNode& o) {
            const std::size_t g4 = 4 * h;
            const Scalar* X = xn->data.data();
            const Scalar* Wi = win->data.data();
            const Scalar* Wh = whn->data.data();
            Scalar* dX = grad_ptr(xn);
            Scalar* dWi = grad_ptr(win);
            Scalar* dWh = grad_ptr(whn);
            Scalar* dB = grad_ptr(bn);
            std::vector<Scalar> dh_next(h, 0), dc_next(h, 0), dz(g4);
            for (std::size_t s = n; s-- > 0;) {
                const std::size_t t = reverse ? n - 1 - s : s;
                const Scalar* gs = gates.data() + s * g4;
                for (std::size_t j = 0; j < h; ++j) {
                    const Scalar ig = gs[j], fg = gs[h + j], gg = gs[2 * h + j], og = gs[3 * h + j];
                    const Scalar c = cells[s * h + j];
                    const Scalar c_prev = s > 0 ? cells[(s - 1) * h + j] : Scalar(0);
                    const Scalar tc = std::tanh(c);
                    const Scalar dh = o.grad[t * h + j] + dh_next[j];
                    const Scalar dc = dh * og * (1 - tc * tc) + dc_next[j];
                    dz[j] = dc * gg * ig * (1 - ig);
                    dz[h + j] = dc * c_prev * fg * (1 - fg);
                    dz[2 * h + j] = dc * ig * (1 - gg * gg);
                    dz[3 * h + j] = dh * tc * og * (1 - og);
                    dc_next[j] = dc * fg;
                }
                const Scalar* xt = X + t * in;
                const Scalar* hp = s > 0 ? hidden.data() + (s - 1) * h : nullptr;
                std::fill(dh_next.begin(), dh_next.end(), Scalar(0));
                for (std::size_t r = 0; r < g4; ++r) {
                    const Scalar g = dz[r];
                    if (dB) dB[r] += g;
                    if (dWi) {
                        Scalar* dw = dWi + r * in;
                        for (std::size_t i = 0; i < in; ++i) dw[i] += g * xt[i];
                    }
                    if (dX) {
                        Scalar* dx = dX + t * in;
                        const Scalar* w = Wi + r * in;
                        for (std::size_t i = 0; i < in; ++i) dx[i] += g * w[i];
                    }
                    if (hp) {
                        if (dWh) {
                            Scalar* dw = dWh + r * h;
                            for (std::size_t i = 0; i < h; ++i) dw[i] += g * hp[i];
                        }
                        const Scalar* w = Wh + r * h;
                        for (std::size_t i = 0; i < h; ++i) dh_next[i] += g * w[i];
                    }
                }
            }
        });
}

} // namespace mrfe
