#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "slidemil/common.hpp"

namespace slidemil {

// Dense row-major matrix of doubles. Vectors are n x 1 (or 1 x n) tensors.
struct Tensor2D {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    Tensor2D() = default;
    Tensor2D(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), values(r * c, fill) {}

    static Tensor2D from_rows(std::initializer_list<std::initializer_list<double>> data) {
        Tensor2D t(data.size(), data.size() ? data.begin()->size() : 0);
        std::size_t i = 0;
        for (const auto& row : data) {
            if (row.size() != t.cols) throw ShapeError("ragged initializer");
            for (double v : row) t.values[i++] = v;
        }
        return t;
    }

    static Tensor2D column(const std::vector<double>& v) {
        Tensor2D t(v.size(), 1);
        t.values = v;
        return t;
    }

    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

    std::size_t size() const { return rows * cols; }
    bool same_shape(const Tensor2D& o) const { return rows == o.rows && cols == o.cols; }

    void fill(double v) { std::fill(values.begin(), values.end(), v); }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }

    std::string shape_str() const {
        return std::to_string(rows) + "x" + std::to_string(cols);
    }

    friend bool operator==(const Tensor2D& a, const Tensor2D& b) {
        return a.rows == b.rows && a.cols == b.cols && a.values == b.values;
    }
};

namespace ops {

inline void require(bool cond, const char* msg) {
    if (!cond) throw ShapeError(msg);
}

inline Tensor2D matmul(const Tensor2D& a, const Tensor2D& b) {
    require(a.cols == b.rows, "matmul: inner dimensions differ");
    Tensor2D out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = &a.values[i * a.cols];
        double* orow = &out.values[i * b.cols];
        for (std::size_t m = 0; m < a.cols; ++m) {
            const double av = arow[m];
            if (av == 0.0) continue;
            const double* brow = &b.values[m * b.cols];
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += av * brow[j];
        }
    }
    return out;
}

inline Tensor2D transpose(const Tensor2D& a) {
    Tensor2D out(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) out.at(j, i) = a.at(i, j);
    return out;
}

// out[i,j] = x[i,j] + bias[0,j]
inline Tensor2D add_row_bias(const Tensor2D& x, const Tensor2D& bias) {
    require(bias.rows == 1 && bias.cols == x.cols, "bias shape must be 1 x cols");
    Tensor2D out = x;
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j) out.at(i, j) += bias.at(0, j);
    return out;
}

// x[n x d] * weight[d x k] + bias[1 x k]
inline Tensor2D linear_forward(const Tensor2D& x, const Tensor2D& weight, const Tensor2D& bias) {
    require(x.cols == weight.rows, "linear: input width != weight rows");
    return add_row_bias(matmul(x, weight), bias);
}

enum class Activation { tanh, leaky_relu, sigmoid };

inline constexpr double kLeakySlope = 0.01;

inline double apply_activation(double v, Activation kind) {
    switch (kind) {
        case Activation::tanh: return std::tanh(v);
        case Activation::leaky_relu: return v >= 0.0 ? v : kLeakySlope * v;
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-v));
    }
    return v;
}

inline Tensor2D activation(const Tensor2D& x, Activation kind) {
    Tensor2D out = x;
    for (double& v : out.values) v = apply_activation(v, kind);
    return out;
}

// Numerically stable softmax over all entries of a vector-shaped tensor.
// Max subtraction is mandatory: the permutation-invariance guarantees of the
// models depend on the stabilized values.
inline Tensor2D softmax_instances(const Tensor2D& s) {
    if (s.size() == 0) throw EmptyBagError("softmax of empty vector");
    require(s.rows == 1 || s.cols == 1, "softmax expects a vector shape");
    double mx = s.values[0];
    for (double v : s.values) mx = std::max(mx, v);
    Tensor2D out = s;
    double sum = 0.0;
    for (double& v : out.values) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : out.values) v /= sum;
    return out;
}

inline constexpr double kBceEps = 1e-7;

// Binary cross-entropy with the probability clamped to [eps, 1-eps].
inline double bce_loss(double p, int y) {
    const double pc = std::min(1.0 - kBceEps, std::max(kBceEps, p));
    return -(y * std::log(pc) + (1 - y) * std::log(1.0 - pc));
}

}  // namespace ops
}  // namespace slidemil
