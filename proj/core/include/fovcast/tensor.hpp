#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "fovcast/common.hpp"

namespace fovcast::nn {

namespace detail {
struct TensorNode;
}

/**
 * Dense float64 tensor with reverse-mode automatic differentiation.
 *
 * Tensors are handles onto graph nodes: operations allocate fresh nodes that
 * remember their parents and a backward closure. Calling backward() on a
 * scalar result accumulates gradients into every reachable leaf created with
 * requires_grad. Graphs are rebuilt per forward pass; leaves (the trainable
 * parameters) live across passes and are updated in place through
 * mutable_values().
 *
 * Every operation validates shapes and checks its result for NaN/Inf,
 * throwing NumericError so a diverging run fails loudly at the op that broke.
 */
class Tensor {
public:
    Tensor() = default;

    /** Fresh constant tensor (no gradient tracking). */
    static Tensor constant(std::vector<int> shape, double fill = 0.0);
    static Tensor from(std::vector<int> shape, std::vector<double> values,
                       bool requires_grad = false);
    static Tensor scalar(double v);

    bool defined() const { return node_ != nullptr; }
    const std::vector<int>& shape() const;
    int size() const;
    std::span<const double> values() const;
    double value_at(int i) const;
    /** In-place access for optimizers and weight loading (leaves only). */
    std::vector<double>& mutable_values();

    bool requires_grad() const;
    /** Gradient accumulated by the last backward(); empty if none reached this node. */
    std::span<const double> grad() const;
    void zero_grad();

    /** Reverse-mode sweep from a scalar (size-1) tensor. */
    void backward();

private:
    explicit Tensor(std::shared_ptr<detail::TensorNode> n) : node_(std::move(n)) {}
    std::shared_ptr<detail::TensorNode> node_;

    friend detail::TensorNode& unwrap(const Tensor& t);
    friend std::shared_ptr<detail::TensorNode> share(const Tensor& t);
    friend Tensor wrap(std::shared_ptr<detail::TensorNode> n);
};

// ====================== elementwise and reductions ======================

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
/** Multiply a tensor by a single-element tensor (differentiable in both). */
Tensor scale_by(const Tensor& a, const Tensor& s);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/** Mean squared difference over all elements (scalar). */
Tensor mse(const Tensor& a, const Tensor& b);

// ====================== activations ======================

Tensor sigmoid(const Tensor& a);
Tensor tanh_act(const Tensor& a);
/** log(1 + e^x), computed stably for large |x|. */
Tensor softplus(const Tensor& a);
Tensor relu(const Tensor& a);
/** Softmax over a 1-D tensor. */
Tensor softmax(const Tensor& a);

// ====================== linear algebra ======================

/** {r, c} matrix times {c} vector -> {r}. */
Tensor matvec(const Tensor& m, const Tensor& v);
/** Inner product of two same-shaped tensors -> scalar. */
Tensor dot(const Tensor& a, const Tensor& b);
/** Rescale a 3-vector to unit length; throws NumericError near zero. */
Tensor normalize3(const Tensor& a);

// ====================== structure ======================

/** Concatenate along axis 0 (all trailing dimensions must match). */
Tensor concat(std::span<const Tensor> parts);
/** Contiguous [start, start+len) along axis 0. */
Tensor slice(const Tensor& a, int start, int len);

/**
 * 2-D convolution over {Cin, H, W} with an {Cout, Cin, kh, kw} kernel and
 * {Cout} bias, stride 1, "same" output size. Width (longitude) pads
 * circularly, height (latitude) pads with zeros. kh and kw must be odd.
 */
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias);

}  // namespace fovcast::nn
