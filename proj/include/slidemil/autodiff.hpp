#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "slidemil/tensor.hpp"

namespace slidemil {

// Trainable tensor with its gradient and Adam state. All four tensors share
// one shape; adam_m and adam_v stay zero until the first optimizer step.
struct Param {
    Tensor2D value;
    Tensor2D grad;
    Tensor2D adam_m;
    Tensor2D adam_v;
    std::size_t step = 0;

    Param() = default;
    explicit Param(Tensor2D v)
        : value(std::move(v)),
          grad(value.rows, value.cols),
          adam_m(value.rows, value.cols),
          adam_v(value.rows, value.cols) {}

    void zero_grad() { grad.fill(0.0); }
};

using Var = std::int32_t;

// Records a forward computation and replays it in reverse for gradients.
// Nodes only reference earlier nodes, so reverse creation order is a valid
// topological order. One tape per bag; reuse via reset().
class Tape {
public:
    Var leaf(Tensor2D value) { return push(std::move(value), nullptr); }

    // Leaf bound to a Param; backward() adds the node gradient into p.grad.
    Var param(Param& p) {
        Var id = push(p.value, nullptr);
        bound_.push_back({id, &p});
        return id;
    }

    const Tensor2D& value(Var id) const { return nodes_[check(id)].value; }
    const Tensor2D& grad(Var id) const { return nodes_[check(id)].grad; }

    Var matmul(Var a, Var b) {
        Tensor2D out = ops::matmul(value(a), value(b));
        return push(std::move(out), [a, b](Tape& t, const Tensor2D& g, const Tensor2D&) {
            t.accumulate(a, ops::matmul(g, ops::transpose(t.value(b))));
            t.accumulate(b, ops::matmul(ops::transpose(t.value(a)), g));
        });
    }

    Var transpose(Var a) {
        return push(ops::transpose(value(a)), [a](Tape& t, const Tensor2D& g, const Tensor2D&) {
            t.accumulate(a, ops::transpose(g));
        });
    }

    Var add_row_bias(Var x, Var bias) {
        Tensor2D out = ops::add_row_bias(value(x), value(bias));
        return push(std::move(out), [x, bias](Tape& t, const Tensor2D& g, const Tensor2D&) {
            t.accumulate(x, g);
            Tensor2D gb(1, g.cols);
            for (std::size_t i = 0; i < g.rows; ++i)
                for (std::size_t j = 0; j < g.cols; ++j) gb.at(0, j) += g.at(i, j);
            t.accumulate(bias, std::move(gb));
        });
    }

    Var linear(Var x, Var weight, Var bias) { return add_row_bias(matmul(x, weight), bias); }

    Var activation(Var x, ops::Activation kind) {
        Tensor2D out = ops::activation(value(x), kind);
        return push(std::move(out), [x, kind](Tape& t, const Tensor2D& g, const Tensor2D& out_v) {
            const Tensor2D& in = t.value(x);
            Tensor2D gx(g.rows, g.cols);
            for (std::size_t i = 0; i < g.values.size(); ++i) {
                double d = 0.0;
                switch (kind) {
                    case ops::Activation::tanh:
                        d = 1.0 - out_v.values[i] * out_v.values[i];
                        break;
                    case ops::Activation::leaky_relu:
                        d = in.values[i] >= 0.0 ? 1.0 : ops::kLeakySlope;
                        break;
                    case ops::Activation::sigmoid:
                        d = out_v.values[i] * (1.0 - out_v.values[i]);
                        break;
                }
                gx.values[i] = g.values[i] * d;
            }
            t.accumulate(x, std::move(gx));
        });
    }

    Var softmax(Var s) {
        Tensor2D out = ops::softmax_instances(value(s));
        return push(std::move(out), [s](Tape& t, const Tensor2D& g, const Tensor2D& out_v) {
            double dot = 0.0;
            for (std::size_t i = 0; i < g.values.size(); ++i) dot += g.values[i] * out_v.values[i];
            Tensor2D gs(g.rows, g.cols);
            for (std::size_t i = 0; i < g.values.size(); ++i)
                gs.values[i] = out_v.values[i] * (g.values[i] - dot);
            t.accumulate(s, std::move(gs));
        });
    }

    // out[i,:] = a[i,0] * x[i,:]   (per-instance attention weighting)
    Var scale_rows(Var x, Var a) {
        const Tensor2D& xv = value(x);
        const Tensor2D& av = value(a);
        ops::require(av.rows == xv.rows && av.cols == 1, "scale_rows: weights must be n x 1");
        Tensor2D out(xv.rows, xv.cols);
        for (std::size_t i = 0; i < xv.rows; ++i)
            for (std::size_t j = 0; j < xv.cols; ++j) out.at(i, j) = av.at(i, 0) * xv.at(i, j);
        return push(std::move(out), [x, a](Tape& t, const Tensor2D& g, const Tensor2D&) {
            const Tensor2D& xv = t.value(x);
            const Tensor2D& av = t.value(a);
            Tensor2D gx(xv.rows, xv.cols);
            Tensor2D ga(av.rows, 1);
            for (std::size_t i = 0; i < xv.rows; ++i) {
                double dot = 0.0;
                for (std::size_t j = 0; j < xv.cols; ++j) {
                    gx.at(i, j) = g.at(i, j) * av.at(i, 0);
                    dot += g.at(i, j) * xv.at(i, j);
                }
                ga.at(i, 0) = dot;
            }
            t.accumulate(x, std::move(gx));
            t.accumulate(a, std::move(ga));
        });
    }

    // Column sums: n x m -> 1 x m. Sequential accumulation in row order.
    Var sum_rows(Var x) {
        const Tensor2D& xv = value(x);
        Tensor2D out(1, xv.cols);
        for (std::size_t i = 0; i < xv.rows; ++i)
            for (std::size_t j = 0; j < xv.cols; ++j) out.at(0, j) += xv.at(i, j);
        return push(std::move(out), [x](Tape& t, const Tensor2D& g, const Tensor2D&) {
            const Tensor2D& xv = t.value(x);
            Tensor2D gx(xv.rows, xv.cols);
            for (std::size_t i = 0; i < xv.rows; ++i)
                for (std::size_t j = 0; j < xv.cols; ++j) gx.at(i, j) = g.at(0, j);
            t.accumulate(x, std::move(gx));
        });
    }

    // Scalar sum of every entry, composed from the primitives above.
    Var sum_all(Var x) { return sum_rows(transpose(sum_rows(x))); }

    Var mul(Var a, Var b) {
        const Tensor2D& av = value(a);
        const Tensor2D& bv = value(b);
        ops::require(av.same_shape(bv), "mul: shape mismatch");
        Tensor2D out(av.rows, av.cols);
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values[i] = av.values[i] * bv.values[i];
        return push(std::move(out), [a, b](Tape& t, const Tensor2D& g, const Tensor2D&) {
            const Tensor2D& av = t.value(a);
            const Tensor2D& bv = t.value(b);
            Tensor2D ga(g.rows, g.cols), gb(g.rows, g.cols);
            for (std::size_t i = 0; i < g.values.size(); ++i) {
                ga.values[i] = g.values[i] * bv.values[i];
                gb.values[i] = g.values[i] * av.values[i];
            }
            t.accumulate(a, std::move(ga));
            t.accumulate(b, std::move(gb));
        });
    }

    Var add(Var a, Var b) {
        const Tensor2D& av = value(a);
        const Tensor2D& bv = value(b);
        ops::require(av.same_shape(bv), "add: shape mismatch");
        Tensor2D out(av.rows, av.cols);
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values[i] = av.values[i] + bv.values[i];
        return push(std::move(out), [a, b](Tape& t, const Tensor2D& g, const Tensor2D&) {
            t.accumulate(a, g);
            t.accumulate(b, g);
        });
    }

    // Column c of an n x k tensor, as n x 1.
    Var pick_col(Var x, std::size_t c) {
        const Tensor2D& xv = value(x);
        ops::require(c < xv.cols, "pick_col: column out of range");
        Tensor2D out(xv.rows, 1);
        for (std::size_t i = 0; i < xv.rows; ++i) out.at(i, 0) = xv.at(i, c);
        return push(std::move(out), [x, c](Tape& t, const Tensor2D& g, const Tensor2D&) {
            const Tensor2D& xv = t.value(x);
            Tensor2D gx(xv.rows, xv.cols);
            for (std::size_t i = 0; i < xv.rows; ++i) gx.at(i, c) = g.at(i, 0);
            t.accumulate(x, std::move(gx));
        });
    }

    // Single entry as a 1 x 1 tensor.
    Var pick(Var x, std::size_t r, std::size_t c) {
        const Tensor2D& xv = value(x);
        ops::require(r < xv.rows && c < xv.cols, "pick: index out of range");
        Tensor2D out(1, 1);
        out.at(0, 0) = xv.at(r, c);
        return push(std::move(out), [x, r, c](Tape& t, const Tensor2D& g, const Tensor2D&) {
            const Tensor2D& xv = t.value(x);
            Tensor2D gx(xv.rows, xv.cols);
            gx.at(r, c) = g.at(0, 0);
            t.accumulate(x, std::move(gx));
        });
    }

    // BCE against a fixed 0/1 label, probability clamped at the loss. The
    // clamp gates the gradient: saturated probabilities get zero gradient.
    Var bce(Var p, int y) {
        const Tensor2D& pv = value(p);
        ops::require(pv.rows == 1 && pv.cols == 1, "bce expects a scalar probability");
        Tensor2D out(1, 1);
        out.at(0, 0) = ops::bce_loss(pv.at(0, 0), y);
        return push(std::move(out), [p, y](Tape& t, const Tensor2D& g, const Tensor2D&) {
            const double raw = t.value(p).at(0, 0);
            Tensor2D gp(1, 1);
            if (raw > ops::kBceEps && raw < 1.0 - ops::kBceEps) {
                gp.at(0, 0) = g.at(0, 0) * ((1 - y) / (1.0 - raw) - y / raw);
            }
            t.accumulate(p, std::move(gp));
        });
    }

    // Reverse pass from a scalar root. Bound Params receive their gradients
    // (accumulated with +=, so call zero_grad between steps).
    void backward(Var root) {
        if (nodes_.empty()) throw StateError("backward called before any forward computation");
        Node& r = nodes_[check(root)];
        if (r.value.size() != 1) throw StateError("backward root must be scalar");
        r.grad.fill(1.0);
        for (std::size_t i = nodes_.size(); i-- > 0;) {
            Node& n = nodes_[i];
            if (n.backprop) n.backprop(*this, n.grad, n.value);
        }
        for (auto& [id, p] : bound_) {
            const Tensor2D& g = nodes_[id].grad;
            for (std::size_t i = 0; i < g.values.size(); ++i) p->grad.values[i] += g.values[i];
        }
    }

    void reset() {
        nodes_.clear();
        bound_.clear();
    }

    std::size_t size() const { return nodes_.size(); }

private:
    using Backprop = std::function<void(Tape&, const Tensor2D& out_grad, const Tensor2D& out_value)>;

    struct Node {
        Tensor2D value;
        Tensor2D grad;
        Backprop backprop;
    };

    std::size_t check(Var id) const {
        if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
            throw StateError("invalid tape node id");
        return static_cast<std::size_t>(id);
    }

    Var push(Tensor2D value, Backprop bp) {
        Node n;
        n.grad = Tensor2D(value.rows, value.cols);
        n.value = std::move(value);
        n.backprop = std::move(bp);
        nodes_.push_back(std::move(n));
        return static_cast<Var>(nodes_.size() - 1);
    }

    void accumulate(Var id, const Tensor2D& g) {
        Node& n = nodes_[check(id)];
        for (std::size_t i = 0; i < g.values.size(); ++i) n.grad.values[i] += g.values[i];
    }

    void accumulate(Var id, Tensor2D&& g) {
        Node& n = nodes_[check(id)];
        for (std::size_t i = 0; i < g.values.size(); ++i) n.grad.values[i] += g.values[i];
    }

    std::vector<Node> nodes_;
    std::vector<std::pair<Var, Param*>> bound_;
};

}  // namespace slidemil
