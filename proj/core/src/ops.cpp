#include "ucr/ops.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <vector>

#include "ucr/errors.hpp"
#include "ucr/tape.hpp"

namespace ucr {
namespace {

Tape* common_tape(std::span<const Tensor> inputs) {
    Tape* tape = nullptr;
    for (const auto& t : inputs) {
        if (!t.tape()) continue;
        if (tape && tape != t.tape()) throw ContractError("op mixes tensors from different tapes");
        tape = t.tape();
    }
    return tape;
}

Tensor finish(OpKind kind, Tensor out, std::initializer_list<Tensor> inputs, double scalar = 0.0,
              bool keep_output = false) {
    const std::span<const Tensor> in(inputs.begin(), inputs.size());
    if (Tape* tape = common_tape(in)) return tape->record(kind, std::move(out), in, scalar, keep_output);
    return out;
}

Tensor finish_span(OpKind kind, Tensor out, std::span<const Tensor> inputs) {
    if (Tape* tape = common_tape(inputs)) return tape->record(kind, std::move(out), inputs);
    return out;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!(a.shape() == b.shape())) {
        throw DimensionError(std::string(op) + ": shapes " + a.shape().to_string() + " and " +
                             b.shape().to_string() + " differ");
    }
}

bool is_row_broadcast(const Tensor& a, const Tensor& b) {
    return a.shape().rank() == 2 && b.shape().rank() == 1 && a.shape().cols() == b.size();
}

template <typename F>
Tensor elementwise_binary(const Tensor& a, const Tensor& b, const char* op, F f) {
    const auto av = a.values();
    const auto bv = b.values();
    std::vector<double> out(a.size());
    if (is_row_broadcast(a, b)) {
        const std::size_t cols = b.size();
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[i], bv[i % cols]);
    } else {
        require_same_shape(a, b, op);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[i], bv[i]);
    }
    return Tensor(std::move(out), a.shape());
}

template <typename F>
Tensor elementwise_unary(const Tensor& a, F f) {
    const auto av = a.values();
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[i]);
    return Tensor(std::move(out), a.shape());
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (b.shape().rank() != 2 || a.shape().rank() == 0) {
        throw DimensionError("matmul expects [m×k] or [k] times [k×n], got " + a.shape().to_string() +
                             " and " + b.shape().to_string());
    }
    const std::size_t m = a.shape().rows();
    const std::size_t k = a.shape().cols();
    const std::size_t n = b.shape().cols();
    if (b.shape().rows() != k) {
        throw DimensionError("matmul inner dimensions differ: " + a.shape().to_string() + " x " +
                             b.shape().to_string());
    }
    const auto av = a.values();
    const auto bv = b.values();
    std::vector<double> out(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = out.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = av[i * k + p];
            if (aip == 0.0) continue;
            const double* brow = bv.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
    Shape shape = a.shape().rank() == 1 ? Shape::vector(n) : Shape::matrix(m, n);
    return finish(OpKind::MatMul, Tensor(std::move(out), shape), {a, b});
}

Tensor dot(const Tensor& a, const Tensor& b) {
    if (a.shape().rank() != 1 || b.shape().rank() != 1 || a.size() != b.size()) {
        throw DimensionError("dot expects equal-length vectors, got " + a.shape().to_string() + " and " +
                             b.shape().to_string());
    }
    const auto av = a.values();
    const auto bv = b.values();
    double s = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
    return finish(OpKind::Dot, Tensor::scalar(s), {a, b});
}

Tensor add(const Tensor& a, const Tensor& b) {
    return finish(OpKind::Add, elementwise_binary(a, b, "add", [](double x, double y) { return x + y; }), {a, b});
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return finish(OpKind::Sub, elementwise_binary(a, b, "sub", [](double x, double y) { return x - y; }), {a, b});
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    return finish(OpKind::Mul, elementwise_binary(a, b, "mul", [](double x, double y) { return x * y; }), {a, b});
}

Tensor scale(const Tensor& a, double s) {
    return finish(OpKind::Scale, elementwise_unary(a, [s](double x) { return x * s; }), {a}, s);
}

Tensor exp(const Tensor& a) {
    return finish(OpKind::Exp, elementwise_unary(a, [](double x) { return std::exp(x); }), {a}, 0.0, true);
}

Tensor log(const Tensor& a) {
    return finish(OpKind::Log, elementwise_unary(a, [](double x) { return std::log(x); }), {a});
}

Tensor sigmoid(const Tensor& a) {
    auto f = [](double x) {
        // Split by sign so exp never overflows.
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
    };
    return finish(OpKind::Sigmoid, elementwise_unary(a, f), {a}, 0.0, true);
}

Tensor softmax(const Tensor& v) {
    if (v.shape().rank() != 1 || v.size() == 0) {
        throw DimensionError("softmax expects a non-empty vector, got " + v.shape().to_string());
    }
    const auto x = v.values();
    const double m = *std::max_element(x.begin(), x.end());
    std::vector<double> out(x.size());
    double z = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = std::exp(x[i] - m);
        z += out[i];
    }
    for (auto& o : out) o /= z;
    return finish(OpKind::Softmax, Tensor::vector(std::move(out)), {v}, 0.0, true);
}

Tensor concat(std::span<const Tensor> parts) {
    std::vector<double> out;
    for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
    return finish_span(OpKind::Concat, Tensor::vector(std::move(out)), parts);
}

Tensor stack(std::span<const Tensor> rows) {
    if (rows.empty()) throw DimensionError("stack of zero rows");
    const std::size_t cols = rows.front().size();
    std::vector<double> out;
    out.reserve(rows.size() * cols);
    for (const auto& r : rows) {
        if (r.shape().rank() != 1 || r.size() != cols) {
            throw DimensionError("stack expects equal-length vectors");
        }
        out.insert(out.end(), r.values().begin(), r.values().end());
    }
    return finish_span(OpKind::Stack, Tensor::matrix(rows.size(), cols, std::move(out)), rows);
}

Tensor mean(const Tensor& a) {
    const auto x = a.values();
    if (a.shape().rank() == 2) {
        const std::size_t r = a.shape().rows();
        const std::size_t c = a.shape().cols();
        if (r == 0) throw DimensionError("mean over zero rows");
        std::vector<double> out(c, 0.0);
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < c; ++j) out[j] += x[i * c + j];
        }
        for (auto& o : out) o /= static_cast<double>(r);
        return finish(OpKind::Mean, Tensor::vector(std::move(out)), {a});
    }
    if (a.size() == 0) throw DimensionError("mean of empty tensor");
    double s = 0.0;
    for (double v : x) s += v;
    return finish(OpKind::Mean, Tensor::scalar(s / static_cast<double>(a.size())), {a});
}

Tensor max_subtract(const Tensor& v) {
    if (v.size() == 0) throw DimensionError("max_subtract of empty tensor");
    const auto x = v.values();
    const auto at = std::max_element(x.begin(), x.end());
    const double m = *at;
    // The tape keeps the (first) argmax position for the backward pass.
    return finish(OpKind::MaxSubtract, elementwise_unary(v, [m](double t) { return t - m; }), {v},
                  static_cast<double>(at - x.begin()));
}

Tensor tanh(const Tensor& a) {
    // tanh(x) = 2·σ(2x) − 1
    return add_scalar(scale(sigmoid(scale(a, 2.0)), 2.0), -1.0);
}

Tensor sum(const Tensor& v) {
    if (v.shape().rank() != 1) throw DimensionError("sum expects a vector");
    return dot(v, Tensor::full(v.shape(), 1.0));
}

Tensor row(const Tensor& m, std::size_t i) {
    if (m.shape().rank() != 2) throw DimensionError("row expects a matrix");
    if (i >= m.shape().rows()) throw ContractError("row index out of range");
    return matmul(Tensor::one_hot(m.shape().rows(), i), m);
}

Tensor element(const Tensor& v, std::size_t i) {
    if (v.shape().rank() != 1) throw DimensionError("element expects a vector");
    if (i >= v.size()) throw ContractError("element index out of range");
    return dot(v, Tensor::one_hot(v.size(), i));
}

Tensor logsumexp(const Tensor& v) {
    if (v.shape().rank() != 1 || v.size() == 0) throw DimensionError("logsumexp expects a non-empty vector");
    const auto x = v.values();
    const auto top = static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
    return add(log(sum(exp(max_subtract(v)))), element(v, top));
}

Tensor add_scalar(const Tensor& a, double c) { return add(a, Tensor::full(a.shape(), c)); }

}  // namespace ucr
