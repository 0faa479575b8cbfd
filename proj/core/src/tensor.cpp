#include "fovcast/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace fovcast::nn {

namespace detail {

struct TensorNode {
    std::vector<int> shape;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;
    bool is_leaf = false;
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::function<void(TensorNode&)> backward;
};

}  // namespace detail

using detail::TensorNode;

detail::TensorNode& unwrap(const Tensor& t) {
    if (!t.node_) throw std::invalid_argument("operation on an undefined tensor");
    return *t.node_;
}

std::shared_ptr<TensorNode> share(const Tensor& t) {
    if (!t.node_) throw std::invalid_argument("operation on an undefined tensor");
    return t.node_;
}

Tensor wrap(std::shared_ptr<TensorNode> n) { return Tensor(std::move(n)); }

namespace {

int numel(const std::vector<int>& shape) {
    int n = 1;
    for (int d : shape) {
        if (d <= 0) throw std::invalid_argument("tensor dimensions must be positive");
        n *= d;
    }
    return n;
}

std::vector<double>& grad_buf(TensorNode& n) {
    if (n.grad.empty()) n.grad.assign(n.values.size(), 0.0);
    return n.grad;
}

/** Allocate the result node of an op over `parents`; keeps the graph only when a parent needs gradients. */
std::shared_ptr<TensorNode> make_result(std::vector<int> shape,
                                        std::initializer_list<const Tensor*> parents) {
    auto node = std::make_shared<TensorNode>();
    node->shape = std::move(shape);
    node->values.resize(static_cast<std::size_t>(numel(node->shape)));
    for (const Tensor* p : parents) {
        if (unwrap(*p).requires_grad) node->requires_grad = true;
    }
    if (node->requires_grad) {
        for (const Tensor* p : parents) node->parents.push_back(share(*p));
    }
    return node;
}

void check_finite(const TensorNode& n, const char* op) {
    for (double v : n.values)
        if (!std::isfinite(v))
            throw NumericError(std::string("non-finite value produced by ") + op);
}

void check_same_shape(const TensorNode& a, const TensorNode& b, const char* op) {
    if (a.shape != b.shape)
        throw std::invalid_argument(std::string(op) + ": operand shapes differ");
}

}  // namespace

// ====================== Tensor basics ======================

Tensor Tensor::constant(std::vector<int> shape, double fill) {
    if (!std::isfinite(fill)) throw NumericError("non-finite fill in tensor construction");
    auto node = std::make_shared<TensorNode>();
    node->values.assign(static_cast<std::size_t>(numel(shape)), fill);
    node->shape = std::move(shape);
    node->is_leaf = true;
    return Tensor(std::move(node));
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> values, bool requires_grad) {
    if (static_cast<std::size_t>(numel(shape)) != values.size())
        throw std::invalid_argument("value count does not match tensor shape");
    auto node = std::make_shared<TensorNode>();
    node->shape = std::move(shape);
    node->values = std::move(values);
    node->requires_grad = requires_grad;
    node->is_leaf = true;
    check_finite(*node, "tensor construction");
    return Tensor(std::move(node));
}

Tensor Tensor::scalar(double v) { return from({1}, {v}); }

const std::vector<int>& Tensor::shape() const { return unwrap(*this).shape; }
int Tensor::size() const { return static_cast<int>(unwrap(*this).values.size()); }
std::span<const double> Tensor::values() const { return unwrap(*this).values; }

double Tensor::value_at(int i) const {
    const auto& v = unwrap(*this).values;
    if (i < 0 || static_cast<std::size_t>(i) >= v.size())
        throw std::out_of_range("tensor element index out of range");
    return v[static_cast<std::size_t>(i)];
}

std::vector<double>& Tensor::mutable_values() {
    TensorNode& n = unwrap(*this);
    if (!n.is_leaf)
        throw std::logic_error("only leaf tensors may be mutated in place");
    return n.values;
}

bool Tensor::requires_grad() const { return unwrap(*this).requires_grad; }
std::span<const double> Tensor::grad() const { return unwrap(*this).grad; }
void Tensor::zero_grad() { unwrap(*this).grad.clear(); }

void Tensor::backward() {
    TensorNode& root = unwrap(*this);
    if (root.values.size() != 1)
        throw std::invalid_argument("backward() starts from a scalar tensor");
    if (!root.requires_grad)
        throw std::invalid_argument("backward() on a graph with no trainable leaves");

    // Iterative depth-first topological order over the grad-requiring subgraph.
    std::vector<TensorNode*> order;
    std::unordered_set<TensorNode*> seen;
    struct Frame {
        TensorNode* node;
        std::size_t next_parent;
    };
    std::vector<Frame> stack{{&root, 0}};
    seen.insert(&root);
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.node->parents.size()) {
            TensorNode* p = f.node->parents[f.next_parent++].get();
            if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }

    // Interior gradients are scratch space for this sweep; only leaves keep
    // accumulating across calls (so mini-batch losses can be summed).
    for (TensorNode* n : order)
        if (!n->is_leaf) n->grad.clear();

    grad_buf(root)[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        TensorNode* n = *it;
        if (n->backward) n->backward(*n);
    }
}

// ====================== elementwise ======================

namespace {

template <class Fwd, class Bwd>
Tensor binary_elementwise(const Tensor& a, const Tensor& b, const char* op, Fwd fwd, Bwd bwd) {
    TensorNode& na = unwrap(a);
    TensorNode& nb = unwrap(b);
    check_same_shape(na, nb, op);
    auto node = make_result(na.shape, {&a, &b});
    for (std::size_t i = 0; i < node->values.size(); ++i)
        node->values[i] = fwd(na.values[i], nb.values[i]);
    check_finite(*node, op);
    if (node->requires_grad) {
        node->backward = [bwd](TensorNode& self) {
            TensorNode& pa = *self.parents[0];
            TensorNode& pb = *self.parents[1];
            for (std::size_t i = 0; i < self.values.size(); ++i)
                bwd(self.grad[i], pa, pb, i);
        };
    }
    return wrap(node);
}

template <class Fwd, class Deriv>
Tensor unary_elementwise(const Tensor& a, const char* op, Fwd fwd, Deriv deriv) {
    TensorNode& na = unwrap(a);
    auto node = make_result(na.shape, {&a});
    for (std::size_t i = 0; i < node->values.size(); ++i) node->values[i] = fwd(na.values[i]);
    check_finite(*node, op);
    if (node->requires_grad) {
        node->backward = [deriv](TensorNode& self) {
            TensorNode& p = *self.parents[0];
            auto& g = grad_buf(p);
            for (std::size_t i = 0; i < self.values.size(); ++i)
                g[i] += self.grad[i] * deriv(p.values[i], self.values[i]);
        };
    }
    return wrap(node);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return binary_elementwise(
        a, b, "add", [](double x, double y) { return x + y; },
        [](double g, TensorNode& pa, TensorNode& pb, std::size_t i) {
            if (pa.requires_grad) grad_buf(pa)[i] += g;
            if (pb.requires_grad) grad_buf(pb)[i] += g;
        });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary_elementwise(
        a, b, "sub", [](double x, double y) { return x - y; },
        [](double g, TensorNode& pa, TensorNode& pb, std::size_t i) {
            if (pa.requires_grad) grad_buf(pa)[i] += g;
            if (pb.requires_grad) grad_buf(pb)[i] -= g;
        });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary_elementwise(
        a, b, "mul", [](double x, double y) { return x * y; },
        [](double g, TensorNode& pa, TensorNode& pb, std::size_t i) {
            if (pa.requires_grad) grad_buf(pa)[i] += g * pb.values[i];
            if (pb.requires_grad) grad_buf(pb)[i] += g * pa.values[i];
        });
}

Tensor scale(const Tensor& a, double c) {
    return unary_elementwise(
        a, "scale", [c](double x) { return c * x; },
        [c](double, double) { return c; });
}

Tensor scale_by(const Tensor& a, const Tensor& s) {
    TensorNode& na = unwrap(a);
    TensorNode& ns = unwrap(s);
    if (ns.values.size() != 1) throw std::invalid_argument("scale_by expects a single-element scale");
    auto node = make_result(na.shape, {&a, &s});
    const double sv = ns.values[0];
    for (std::size_t i = 0; i < node->values.size(); ++i) node->values[i] = sv * na.values[i];
    check_finite(*node, "scale_by");
    if (node->requires_grad) {
        node->backward = [](TensorNode& self) {
            TensorNode& pa = *self.parents[0];
            TensorNode& ps = *self.parents[1];
            const double sv = ps.values[0];
            if (pa.requires_grad) {
                auto& g = grad_buf(pa);
                for (std::size_t i = 0; i < self.values.size(); ++i) g[i] += self.grad[i] * sv;
            }
            if (ps.requires_grad) {
                double acc = 0.0;
                for (std::size_t i = 0; i < self.values.size(); ++i)
                    acc += self.grad[i] * pa.values[i];
                grad_buf(ps)[0] += acc;
            }
        };
    }
    return wrap(node);
}

Tensor sum(const Tensor& a) {
    TensorNode& na = unwrap(a);
    auto node = make_result({1}, {&a});
    double acc = 0.0;
    for (double v : na.values) acc += v;
    node->values[0] = acc;
    check_finite(*node, "sum");
    if (node->requires_grad) {
        node->backward = [](TensorNode& self) {
            TensorNode& p = *self.parents[0];
            auto& g = grad_buf(p);
            for (double& gi : g) gi += self.grad[0];
        };
    }
    return wrap(node);
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / unwrap(a).values.size()); }

Tensor mse(const Tensor& a, const Tensor& b) {
    TensorNode& na = unwrap(a);
    TensorNode& nb = unwrap(b);
    check_same_shape(na, nb, "mse");
    auto node = make_result({1}, {&a, &b});
    const double inv_n = 1.0 / static_cast<double>(na.values.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < na.values.size(); ++i) {
        const double d = na.values[i] - nb.values[i];
        acc += d * d;
    }
    node->values[0] = acc * inv_n;
    check_finite(*node, "mse");
    if (node->requires_grad) {
        node->backward = [inv_n](TensorNode& self) {
            TensorNode& pa = *self.parents[0];
            TensorNode& pb = *self.parents[1];
            const double g = self.grad[0];
            for (std::size_t i = 0; i < pa.values.size(); ++i) {
                const double d = 2.0 * inv_n * (pa.values[i] - pb.values[i]) * g;
                if (pa.requires_grad) grad_buf(pa)[i] += d;
                if (pb.requires_grad) grad_buf(pb)[i] -= d;
            }
        };
    }
    return wrap(node);
}

// ====================== activations ======================

Tensor sigmoid(const Tensor& a) {
    return unary_elementwise(
        a, "sigmoid",
        [](double x) {
            if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
            const double e = std::exp(x);
            return e / (1.0 + e);
        },
        [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh_act(const Tensor& a) {
    return unary_elementwise(
        a, "tanh", [](double x) { return std::tanh(x); },
        [](double, double y) { return 1.0 - y * y; });
}

Tensor softplus(const Tensor& a) {
    return unary_elementwise(
        a, "softplus",
        [](double x) {
            if (x > 30.0) return x;
            if (x < -30.0) return std::exp(x);
            return std::log1p(std::exp(x));
        },
        [](double x, double) {
            if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
            const double e = std::exp(x);
            return e / (1.0 + e);
        });
}

Tensor relu(const Tensor& a) {
    return unary_elementwise(
        a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor softmax(const Tensor& a) {
    TensorNode& na = unwrap(a);
    if (na.shape.size() != 1) throw std::invalid_argument("softmax expects a 1-D tensor");
    auto node = make_result(na.shape, {&a});
    const double m = *std::max_element(na.values.begin(), na.values.end());
    double denom = 0.0;
    for (std::size_t i = 0; i < na.values.size(); ++i) {
        node->values[i] = std::exp(na.values[i] - m);
        denom += node->values[i];
    }
    for (double& v : node->values) v /= denom;
    check_finite(*node, "softmax");
    if (node->requires_grad) {
        node->backward = [](TensorNode& self) {
            TensorNode& p = *self.parents[0];
            double gy = 0.0;
            for (std::size_t i = 0; i < self.values.size(); ++i)
                gy += self.grad[i] * self.values[i];
            auto& g = grad_buf(p);
            for (std::size_t i = 0; i < self.values.size(); ++i)
                g[i] += self.values[i] * (self.grad[i] - gy);
        };
    }
    return wrap(node);
}

// ====================== linear algebra ======================

Tensor matvec(const Tensor& m, const Tensor& v) {
    TensorNode& nm = unwrap(m);
    TensorNode& nv = unwrap(v);
    if (nm.shape.size() != 2 || nv.shape.size() != 1 || nm.shape[1] != nv.shape[0])
        throw std::invalid_argument("matvec expects {r, c} x {c}");
    const int rows = nm.shape[0], cols = nm.shape[1];
    auto node = make_result({rows}, {&m, &v});
    for (int i = 0; i < rows; ++i) {
        double acc = 0.0;
        const double* row = nm.values.data() + static_cast<std::size_t>(i) * cols;
        for (int j = 0; j < cols; ++j) acc += row[j] * nv.values[j];
        node->values[i] = acc;
    }
    check_finite(*node, "matvec");
    if (node->requires_grad) {
        node->backward = [rows, cols](TensorNode& self) {
            TensorNode& pm = *self.parents[0];
            TensorNode& pv = *self.parents[1];
            if (pm.requires_grad) {
                auto& gm = grad_buf(pm);
                for (int i = 0; i < rows; ++i) {
                    const double g = self.grad[i];
                    if (g == 0.0) continue;
                    double* row = gm.data() + static_cast<std::size_t>(i) * cols;
                    for (int j = 0; j < cols; ++j) row[j] += g * pv.values[j];
                }
            }
            if (pv.requires_grad) {
                auto& gv = grad_buf(pv);
                for (int i = 0; i < rows; ++i) {
                    const double g = self.grad[i];
                    if (g == 0.0) continue;
                    const double* row = pm.values.data() + static_cast<std::size_t>(i) * cols;
                    for (int j = 0; j < cols; ++j) gv[j] += g * row[j];
                }
            }
        };
    }
    return wrap(node);
}

Tensor dot(const Tensor& a, const Tensor& b) {
    TensorNode& na = unwrap(a);
    TensorNode& nb = unwrap(b);
    check_same_shape(na, nb, "dot");
    auto node = make_result({1}, {&a, &b});
    double acc = 0.0;
    for (std::size_t i = 0; i < na.values.size(); ++i) acc += na.values[i] * nb.values[i];
    node->values[0] = acc;
    check_finite(*node, "dot");
    if (node->requires_grad) {
        node->backward = [](TensorNode& self) {
            TensorNode& pa = *self.parents[0];
            TensorNode& pb = *self.parents[1];
            const double g = self.grad[0];
            for (std::size_t i = 0; i < pa.values.size(); ++i) {
                if (pa.requires_grad) grad_buf(pa)[i] += g * pb.values[i];
                if (pb.requires_grad) grad_buf(pb)[i] += g * pa.values[i];
            }
        };
    }
    return wrap(node);
}

Tensor normalize3(const Tensor& a) {
    TensorNode& na = unwrap(a);
    if (na.values.size() != 3) throw std::invalid_argument("normalize3 expects a 3-vector");
    const double r = std::sqrt(na.values[0] * na.values[0] + na.values[1] * na.values[1] +
                               na.values[2] * na.values[2]);
    if (r < 1e-12) throw NumericError("normalize3: vector length vanished");
    auto node = make_result(na.shape, {&a});
    for (int i = 0; i < 3; ++i) node->values[i] = na.values[i] / r;
    check_finite(*node, "normalize3");
    if (node->requires_grad) {
        node->backward = [r](TensorNode& self) {
            TensorNode& p = *self.parents[0];
            double y_dot_g = 0.0;
            for (int i = 0; i < 3; ++i) y_dot_g += self.values[i] * self.grad[i];
            auto& g = grad_buf(p);
            for (int i = 0; i < 3; ++i)
                g[i] += (self.grad[i] - self.values[i] * y_dot_g) / r;
        };
    }
    return wrap(node);
}

// ====================== structure ======================

Tensor concat(std::span<const Tensor> parts) {
    if (parts.empty()) throw std::invalid_argument("concat of zero tensors");
    std::vector<int> shape = unwrap(parts[0]).shape;
    int axis0 = 0;
    for (const Tensor& p : parts) {
        const auto& s = unwrap(p).shape;
        if (s.size() != shape.size() ||
            !std::equal(s.begin() + 1, s.end(), shape.begin() + 1))
            throw std::invalid_argument("concat: trailing dimensions differ");
        axis0 += s[0];
    }
    shape[0] = axis0;

    auto node = std::make_shared<TensorNode>();
    node->shape = std::move(shape);
    node->values.reserve(static_cast<std::size_t>(numel(node->shape)));
    for (const Tensor& p : parts) {
        const auto& v = unwrap(p).values;
        node->values.insert(node->values.end(), v.begin(), v.end());
        if (unwrap(p).requires_grad) node->requires_grad = true;
    }
    if (node->requires_grad) {
        for (const Tensor& p : parts) node->parents.push_back(share(p));
        std::vector<std::size_t> sizes;
        sizes.reserve(parts.size());
        for (const Tensor& p : parts) sizes.push_back(unwrap(p).values.size());
        node->backward = [sizes = std::move(sizes)](TensorNode& self) {
            std::size_t offset = 0;
            for (std::size_t k = 0; k < sizes.size(); ++k) {
                TensorNode& p = *self.parents[k];
                if (p.requires_grad) {
                    auto& g = grad_buf(p);
                    for (std::size_t i = 0; i < sizes[k]; ++i) g[i] += self.grad[offset + i];
                }
                offset += sizes[k];
            }
        };
    }
    return wrap(node);
}

Tensor slice(const Tensor& a, int start, int len) {
    TensorNode& na = unwrap(a);
    if (na.shape.empty()) throw std::invalid_argument("slice expects a shaped tensor");
    if (start < 0 || len <= 0 || start + len > na.shape[0])
        throw std::invalid_argument("slice range out of bounds");
    std::vector<int> shape = na.shape;
    shape[0] = len;
    const std::size_t stride = na.values.size() / static_cast<std::size_t>(na.shape[0]);
    auto node = make_result(std::move(shape), {&a});
    std::copy_n(na.values.begin() + start * stride, len * stride, node->values.begin());
    if (node->requires_grad) {
        node->backward = [start, stride](TensorNode& self) {
            TensorNode& p = *self.parents[0];
            auto& g = grad_buf(p);
            for (std::size_t i = 0; i < self.values.size(); ++i)
                g[start * stride + i] += self.grad[i];
        };
    }
    return wrap(node);
}

// ====================== convolution ======================

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias) {
    TensorNode& ni = unwrap(input);
    TensorNode& nk = unwrap(kernel);
    TensorNode& nb = unwrap(bias);
    if (ni.shape.size() != 3 || nk.shape.size() != 4 || nb.shape.size() != 1)
        throw std::invalid_argument("conv2d expects input {C,H,W}, kernel {Co,Ci,kh,kw}, bias {Co}");
    const int ci = ni.shape[0], h = ni.shape[1], w = ni.shape[2];
    const int co = nk.shape[0], kh = nk.shape[2], kw = nk.shape[3];
    if (nk.shape[1] != ci || nb.shape[0] != co)
        throw std::invalid_argument("conv2d: channel counts disagree");
    if (kh % 2 == 0 || kw % 2 == 0) throw std::invalid_argument("conv2d kernels must be odd-sized");

    auto node = make_result({co, h, w}, {&input, &kernel, &bias});
    const int ph = kh / 2, pw = kw / 2;
    const auto in_at = [&](int c, int y, int x) {
        return ni.values[(static_cast<std::size_t>(c) * h + y) * w + x];
    };
    for (int oc = 0; oc < co; ++oc) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = nb.values[oc];
                for (int c = 0; c < ci; ++c) {
                    for (int ky = 0; ky < kh; ++ky) {
                        const int iy = y + ky - ph;
                        if (iy < 0 || iy >= h) continue;  // latitude: zero padding
                        const std::size_t kbase =
                            ((static_cast<std::size_t>(oc) * ci + c) * kh + ky) * kw;
                        for (int kx = 0; kx < kw; ++kx) {
                            const int ix = (x + kx - pw + w) % w;  // longitude: circular
                            acc += nk.values[kbase + kx] * in_at(c, iy, ix);
                        }
                    }
                }
                node->values[(static_cast<std::size_t>(oc) * h + y) * w + x] = acc;
            }
        }
    }
    check_finite(*node, "conv2d");
    if (node->requires_grad) {
        node->backward = [ci, h, w, co, kh, kw, ph, pw](TensorNode& self) {
            TensorNode& pi = *self.parents[0];
            TensorNode& pk = *self.parents[1];
            TensorNode& pb = *self.parents[2];
            auto* gi = pi.requires_grad ? grad_buf(pi).data() : nullptr;
            auto* gk = pk.requires_grad ? grad_buf(pk).data() : nullptr;
            auto* gb = pb.requires_grad ? grad_buf(pb).data() : nullptr;
            for (int oc = 0; oc < co; ++oc) {
                for (int y = 0; y < h; ++y) {
                    for (int x = 0; x < w; ++x) {
                        const double g =
                            self.grad[(static_cast<std::size_t>(oc) * h + y) * w + x];
                        if (g == 0.0) continue;
                        if (gb) gb[oc] += g;
                        for (int c = 0; c < ci; ++c) {
                            for (int ky = 0; ky < kh; ++ky) {
                                const int iy = y + ky - ph;
                                if (iy < 0 || iy >= h) continue;
                                const std::size_t kbase =
                                    ((static_cast<std::size_t>(oc) * ci + c) * kh + ky) * kw;
                                const std::size_t ibase = (static_cast<std::size_t>(c) * h + iy) * w;
                                for (int kx = 0; kx < kw; ++kx) {
                                    const int ix = (x + kx - pw + w) % w;
                                    if (gk) gk[kbase + kx] += g * pi.values[ibase + ix];
                                    if (gi) gi[ibase + ix] += g * pk.values[kbase + kx];
                                }
                            }
                        }
                    }
                }
            }
        };
    }
    return wrap(node);
}

}  // namespace fovcast::nn
