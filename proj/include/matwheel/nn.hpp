#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "matwheel/errors.hpp"
#include "matwheel/rng.hpp"

namespace matwheel {

/// Dense row-major matrix of doubles.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
    const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
    double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
};

// y = W x + b
inline void affine(const Matrix& w, const std::vector<double>& b, const double* x, double* y) {
    for (int r = 0; r < w.rows; ++r) {
        const double* wr = w.row(r);
        double acc = b[static_cast<std::size_t>(r)];
        for (int c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
        y[r] = acc;
    }
}

// dx += W^T dy
inline void add_transposed_matvec(const Matrix& w, const double* dy, double* dx) {
    for (int r = 0; r < w.rows; ++r) {
        const double* wr = w.row(r);
        const double g = dy[r];
        if (g == 0.0) continue;
        for (int c = 0; c < w.cols; ++c) dx[c] += wr[c] * g;
    }
}

// dW += dy x^T, db += dy
inline void add_outer(Matrix& dw, std::vector<double>& db, const double* dy, const double* x) {
    for (int r = 0; r < dw.rows; ++r) {
        double* gr = dw.row(r);
        const double g = dy[r];
        db[static_cast<std::size_t>(r)] += g;
        if (g == 0.0) continue;
        for (int c = 0; c < dw.cols; ++c) gr[c] += g * x[c];
    }
}

/// Fully-connected layer parameters (weights and bias share a lifetime,
/// so the same struct doubles as its own gradient holder).
struct Linear {
    Matrix w;
    std::vector<double> b;

    Linear() = default;
    Linear(int out_dim, int in_dim) : w(out_dim, in_dim), b(static_cast<std::size_t>(out_dim), 0.0) {}

    int in_dim() const { return w.cols; }
    int out_dim() const { return w.rows; }
};

/// Uniform(-s, s) fill with s = 1/sqrt(fan_in); draw order is row-major
/// weights then bias, so initialization is reproducible byte-for-byte.
inline void init_uniform(Linear& layer, Rng& rng) {
    const double s = 1.0 / std::sqrt(static_cast<double>(layer.w.cols));
    for (auto& v : layer.w.data) v = rng.uniform(-s, s);
    for (auto& v : layer.b) v = rng.uniform(-s, s);
}

inline void zero(Linear& layer) {
    std::fill(layer.w.data.begin(), layer.w.data.end(), 0.0);
    std::fill(layer.b.begin(), layer.b.end(), 0.0);
}

// p -= lr * g
inline void sgd_step(Linear& p, const Linear& g, double lr) {
    for (std::size_t i = 0; i < p.w.data.size(); ++i) p.w.data[i] -= lr * g.w.data[i];
    for (std::size_t i = 0; i < p.b.size(); ++i) p.b[i] -= lr * g.b[i];
}

// --- activations --------------------------------------------------------

inline double sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// log(1 + e^x), overflow-safe; derivative is sigmoid(x).
inline double softplus(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

} // namespace matwheel
