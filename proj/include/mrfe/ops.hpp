#pragma once

#include "mrfe/precision.hpp"

#include "mrfe/random.hpp"
#include "mrfe/tensor.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace mrfe::inline MRFE_PRECISION {

enum class Activation { relu, tanh, sigmoid };

// [m×k]·[k×p] → [m×p].
Tensor matmul(const Tensor& a, const Tensor& b);

// x·wᵀ + bias. x is [n×in] or [in]; w is [out×in]; bias is [out] or undefined.
// Rank-1 input gives rank-1 output.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias = {});

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, Scalar factor);
Tensor sum(const Tensor& x);

// Elementwise mean of same-shape tensors, reduced in the given order.
Tensor mean_of(std::span<const Tensor> items);

// x[n×m] + s[n] broadcast along each row.
Tensor add_column_broadcast(const Tensor& x, const Tensor& s);

// Multiplies row t of x by factors[t]; the factors are constants.
Tensor scale_rows(const Tensor& x, std::span<const Scalar> factors);

Tensor activation(const Tensor& x, Activation kind);
inline Tensor relu(const Tensor& x) { return activation(x, Activation::relu); }
inline Tensor tanh(const Tensor& x) { return activation(x, Activation::tanh); }
inline Tensor sigmoid(const Tensor& x) { return activation(x, Activation::sigmoid); }

// Row-wise softmax with max subtraction; rank-1 input is a single row.
Tensor softmax_rows(const Tensor& x);

// Channel-wise ("groups = d") convolution with same-length zero padding.
// e: [n×d], weights: [d×k], bias: [d]; k must be odd.
Tensor conv1d_depthwise(const Tensor& e, const Tensor& weights, const Tensor& bias, std::size_t k);

// k = 1 convolution across channels: v[n×d]·weights[d×c] + bias[c].
Tensor conv1d_pointwise(const Tensor& v, const Tensor& weights, const Tensor& bias);

// Dense (non-grouped) convolution, same padding. weights: [c×d×k], bias: [c].
Tensor conv1d_full(const Tensor& e, const Tensor& weights, const Tensor& bias);

// Per-column maximum over rows; ties route the gradient to the first row.
Tensor max_over_time(const Tensor& h);

inline constexpr double kLogEpsilon = 1e-12;

// −Σ y_c log(p_c + 1e-12). onehot must contain a single 1 and zeros elsewhere.
Tensor cross_entropy(const Tensor& probs, const Tensor& onehot);

// Fused softmax + cross-entropy on raw logits; gradient is (softmax − onehot).
Tensor softmax_cross_entropy(const Tensor& logits, std::size_t label);

// Concatenates along the last axis; both rank-1 or both rank-2 with equal rows.
Tensor concat_cols(const Tensor& a, const Tensor& b);

// Stacks equal-length rank-1 tensors into [m×f].
Tensor stack_rows(std::span<const Tensor> rows);

Tensor reshape(const Tensor& x, Shape shape);

// Row lookup: out[i] = table[ids[i]].
Tensor gather_rows(const Tensor& table, std::span<const std::size_t> ids);

// Cosine similarity of every row of a[n×d] with every row of p[m×d] → [n×m].
// A zero-norm row on either side yields 0 with zero gradient.
Tensor cosine_rows(const Tensor& a, const Tensor& p);

// Inverted dropout. rate == 0 returns x unchanged.
Tensor dropout(const Tensor& x, double rate, std::mt19937_64& rng);

// One LSTM direction over x[n×in] with zero initial state. Gate order i, f, g, o.
// w_ih: [4h×in], w_hh: [4h×h], bias: [4h]. Output row t is the hidden state at t;
// reverse = true runs t = n−1 … 0.
Tensor lstm_direction(const Tensor& x, const Tensor& w_ih, const Tensor& w_hh, const Tensor& bias,
                      bool reverse);

} // namespace mrfe
