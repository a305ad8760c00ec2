#pragma once

#include "mrfe/precision.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mrfe::inline MRFE_PRECISION {

#ifdef MRFE_FP64
using Scalar = double;
#else
using Scalar = float;
#endif

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

namespace detail {

struct TensorNode;
using NodePtr = std::shared_ptr<TensorNode>;

// Reads the output node's grad and accumulates into its parents' grads.
using BackwardFn = std::function<void(const TensorNode& out)>;

struct TensorNode {
    Shape shape;
    std::vector<Scalar> data;
    std::vector<Scalar> grad;
    bool requires_grad = false;
    std::vector<NodePtr> parents;
    BackwardFn backward;

    bool is_leaf() const noexcept { return parents.empty(); }
    // Returns the grad buffer, allocating zeros on first use.
    std::vector<Scalar>& grad_buffer();
};

} // namespace detail

/// Dense row-major tensor of rank <= 3 with an optional gradient buffer.
///
/// Tensor is a shared handle: copies alias the same storage and graph node.
/// Operations in ops.hpp record a backward closure whenever grad mode is on
/// and at least one operand requires grad.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, Scalar value, bool requires_grad = false);
    static Tensor from(Shape shape, std::vector<Scalar> values, bool requires_grad = false);
    static Tensor scalar(Scalar value, bool requires_grad = false);
    static Tensor vector(std::vector<Scalar> values, bool requires_grad = false);
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<Scalar> values,
                         bool requires_grad = false);

    bool defined() const noexcept { return node_ != nullptr; }

    const Shape& shape() const;
    std::size_t rank() const { return shape().size(); }
    std::size_t numel() const;
    std::size_t dim(std::size_t axis) const;

    std::span<const Scalar> data() const;
    // Mutable access is meant for leaves (optimizer updates, initialisation).
    std::span<Scalar> mutable_data();
    Scalar item() const;
    Scalar at(std::size_t i) const;
    Scalar at(std::size_t i, std::size_t j) const;
    std::vector<Scalar> to_vector() const;

    bool requires_grad() const;
    void set_requires_grad(bool on);
    bool has_grad() const;
    std::span<const Scalar> grad() const;
    std::span<Scalar> mutable_grad();
    void zero_grad();

    /// Reverse-mode sweep from this scalar. Leaf grads accumulate across
    /// calls; interior grads are reset at the start of every sweep.
    void backward() const;

    /// Same storage values, detached from the graph.
    Tensor detach() const;
    Tensor clone() const;

    const detail::NodePtr& node() const noexcept { return node_; }
    explicit Tensor(detail::NodePtr node) : node_(std::move(node)) {}

private:
    detail::NodePtr node_;
};

bool grad_enabled() noexcept;

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

namespace detail {

// Builds an op result. The backward closure is kept only when the result
// participates in a recorded graph.
Tensor make_result(Shape shape, std::vector<Scalar> data, std::vector<Tensor> inputs,
                   BackwardFn backward);

} // namespace detail

} // namespace mrfe
