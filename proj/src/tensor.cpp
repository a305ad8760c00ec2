#include "mrfe/tensor.hpp"

#include "mrfe/errors.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace mrfe::inline MRFE_PRECISION {

namespace {
thread_local bool g_grad_enabled = true;

void check_shape(const Shape& shape) {
    if (shape.size() > 3) {
        throw DimensionError("tensor rank " + std::to_string(shape.size()) + " exceeds 3");
    }
}
} // namespace

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    return n;
}

std::vector<Scalar>& detail::TensorNode::grad_buffer() {
    if (grad.size() != data.size()) grad.assign(data.size(), Scalar(0));
    return grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0, requires_grad); }

Tensor Tensor::full(Shape shape, Scalar value, bool requires_grad) {
    const auto n = shape_numel(shape);
    return from(std::move(shape), std::vector<Scalar>(n, value), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<Scalar> values, bool requires_grad) {
    check_shape(shape);
    if (shape_numel(shape) != values.size()) {
        throw DimensionError("shape " + shape_str(shape) + " holds " +
                             std::to_string(shape_numel(shape)) + " values, got " +
                             std::to_string(values.size()));
    }
    auto node = std::make_shared<detail::TensorNode>();
    node->shape = std::move(shape);
    node->data = std::move(values);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::scalar(Scalar value, bool requires_grad) { return from({}, {value}, requires_grad); }

Tensor Tensor::vector(std::vector<Scalar> values, bool requires_grad) {
    const auto n = values.size();
    return from({n}, std::move(values), requires_grad);
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<Scalar> values, bool requires_grad) {
    return from({rows, cols}, std::move(values), requires_grad);
}

const Shape& Tensor::shape() const { return node_->shape; }
std::size_t Tensor::numel() const { return node_->data.size(); }

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= rank()) {
        throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_str(shape()));
    }
    return shape()[axis];
}

std::span<const Scalar> Tensor::data() const { return node_->data; }
std::span<Scalar> Tensor::mutable_data() { return node_->data; }

Scalar Tensor::item() const {
    if (numel() != 1) throw DimensionError("item() on tensor of shape " + shape_str(shape()));
    return node_->data[0];
}

Scalar Tensor::at(std::size_t i) const { return node_->data.at(i); }

Scalar Tensor::at(std::size_t i, std::size_t j) const {
    if (rank() != 2) throw DimensionError("at(i, j) on tensor of shape " + shape_str(shape()));
    return node_->data.at(i * shape()[1] + j);
}

std::vector<Scalar> Tensor::to_vector() const { return node_->data; }

bool Tensor::requires_grad() const { return node_->requires_grad; }
void Tensor::set_requires_grad(bool on) { node_->requires_grad = on; }
bool Tensor::has_grad() const { return node_->grad.size() == node_->data.size(); }

std::span<const Scalar> Tensor::grad() const {
    return node_->grad_buffer();
}

std::span<Scalar> Tensor::mutable_grad() { return node_->grad_buffer(); }

void Tensor::zero_grad() {
    if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), Scalar(0));
}

void Tensor::backward() const {
    if (numel() != 1) {
        throw DimensionError("backward() requires a scalar loss, got shape " + shape_str(shape()));
    }
    if (!node_->requires_grad) return;

    // Iterative post-order DFS; topo holds parents before children.
    std::vector<detail::TensorNode*> topo;
    std::unordered_set<const detail::TensorNode*> seen;
    std::vector<std::pair<detail::TensorNode*, std::size_t>> stack;
    stack.emplace_back(node_.get(), 0);
    seen.insert(node_.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            auto* parent = node->parents[next++].get();
            if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
        } else {
            topo.push_back(node);
            stack.pop_back();
        }
    }

    for (auto* n : topo) {
        if (!n->is_leaf()) n->grad.assign(n->data.size(), Scalar(0));
    }
    node_->grad_buffer()[0] += Scalar(1);
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        if ((*it)->backward) (*it)->backward(**it);
    }
}

Tensor Tensor::detach() const {
    auto node = std::make_shared<detail::TensorNode>();
    node->shape = node_->shape;
    node->data = node_->data;
    return Tensor(std::move(node));
}

Tensor Tensor::clone() const {
    auto t = detach();
    t.node_->requires_grad = node_->requires_grad;
    return t;
}

bool grad_enabled() noexcept { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Tensor detail::make_result(Shape shape, std::vector<Scalar> data, std::vector<Tensor> inputs,
                           BackwardFn backward) {
    check_shape(shape);
    auto node = std::make_shared<TensorNode>();
    node->shape = std::move(shape);
    node->data = std::move(data);
    if (g_grad_enabled) {
        const bool any = std::any_of(inputs.begin(), inputs.end(),
                                     [](const Tensor& t) { return t.defined() && t.requires_grad(); });
        if (any) {
            node->requires_grad = true;
            node->parents.reserve(inputs.size());
            for (auto& t : inputs) {
                if (t.defined()) node->parents.push_back(t.node());
            }
            node->backward = std::move(backward);
        }
    }
    return Tensor(std::move(node));
}

} // namespace mrfe
