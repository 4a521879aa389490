#include "ucr/tape.hpp"

#include <algorithm>

#include "ucr/errors.hpp"

namespace ucr {

const char* to_string(OpKind kind) {
    switch (kind) {
        case OpKind::Leaf: return "leaf";
        case OpKind::MatMul: return "matmul";
        case OpKind::Dot: return "dot";
        case OpKind::Add: return "add";
        case OpKind::Sub: return "sub";
        case OpKind::Mul: return "mul";
        case OpKind::Scale: return "scale";
        case OpKind::Exp: return "exp";
        case OpKind::Log: return "log";
        case OpKind::Sigmoid: return "sigmoid";
        case OpKind::Softmax: return "softmax";
        case OpKind::Concat: return "concat";
        case OpKind::Stack: return "stack";
        case OpKind::Mean: return "mean";
        case OpKind::MaxSubtract: return "max_subtract";
    }
    return "?";
}

Tensor Tape::leaf(const Tensor& value) {
    if (value.tape()) throw ContractError("tensor is already recorded on a tape");
    TapeNode n;
    n.kind = OpKind::Leaf;
    n.shape = value.shape();
    const NodeId id = nodes_.size();
    nodes_.push_back(std::move(n));
    leaves_.push_back(id);
    Tensor out = value;
    out.tape_ = this;
    out.node_ = id;
    return out;
}

Tensor Tape::record(OpKind kind, Tensor output, std::span<const Tensor> inputs, double scalar, bool keep_output) {
    TapeNode n;
    n.kind = kind;
    n.shape = output.shape();
    n.scalar = scalar;
    n.inputs.reserve(inputs.size());
    n.saved.reserve(inputs.size());
    for (const auto& in : inputs) {
        n.inputs.push_back(in.tape() == this ? in.node_ : kNoNode);
        n.saved.push_back(in.detached());
    }
    if (keep_output) n.output = output.detached();
    const NodeId id = nodes_.size();
    nodes_.push_back(std::move(n));
    output.tape_ = this;
    output.node_ = id;
    return output;
}

const Tensor& GradientMap::at(NodeId id) const {
    auto it = grads_.find(id);
    if (it == grads_.end()) throw ContractError("no gradient recorded for node " + std::to_string(id));
    return it->second;
}

const Tensor& GradientMap::at(const Tensor& leaf) const {
    if (!leaf.node()) throw ContractError("tensor is not recorded on a tape");
    return at(*leaf.node());
}

namespace {

using Buffer = std::vector<double>;

class Accumulator {
public:
    explicit Accumulator(const Tape& tape) : tape_(tape), grads_(tape.size()) {}

    Buffer& at(NodeId id) {
        auto& g = grads_[id];
        if (g.empty()) g.assign(tape_.node(id).shape.size(), 0.0);
        return g;
    }
    [[nodiscard]] bool has(NodeId id) const { return !grads_[id].empty(); }
    const Buffer& get(NodeId id) const { return grads_[id]; }

private:
    const Tape& tape_;
    std::vector<Buffer> grads_;
};

void propagate(const TapeNode& n, const Buffer& g, Accumulator& acc) {
    auto wants = [&](std::size_t i) { return n.inputs[i] != kNoNode; };
    switch (n.kind) {
        case OpKind::Leaf:
            return;
        case OpKind::MatMul: {
            const Tensor& a = n.saved[0];
            const Tensor& b = n.saved[1];
            const std::size_t m = a.shape().rows();
            const std::size_t k = a.shape().cols();
            const std::size_t cols = b.shape().cols();
            const auto av = a.values();
            const auto bv = b.values();
            if (wants(0)) {
                Buffer& ga = acc.at(n.inputs[0]);
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t p = 0; p < k; ++p) {
                        double s = 0.0;
                        for (std::size_t j = 0; j < cols; ++j) s += g[i * cols + j] * bv[p * cols + j];
                        ga[i * k + p] += s;
                    }
                }
            }
            if (wants(1)) {
                Buffer& gb = acc.at(n.inputs[1]);
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t p = 0; p < k; ++p) {
                        const double aip = av[i * k + p];
                        if (aip == 0.0) continue;
                        for (std::size_t j = 0; j < cols; ++j) gb[p * cols + j] += aip * g[i * cols + j];
                    }
                }
            }
            return;
        }
        case OpKind::Dot: {
            const double s = g[0];
            for (std::size_t t = 0; t < 2; ++t) {
                if (!wants(t)) continue;
                Buffer& gx = acc.at(n.inputs[t]);
                const auto other = n.saved[1 - t].values();
                for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += s * other[i];
            }
            return;
        }
        case OpKind::Add:
        case OpKind::Sub: {
            const double sign_b = n.kind == OpKind::Add ? 1.0 : -1.0;
            if (wants(0)) {
                Buffer& ga = acc.at(n.inputs[0]);
                for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
            }
            if (wants(1)) {
                Buffer& gb = acc.at(n.inputs[1]);
                const std::size_t cols = gb.size();
                // Broadcast operand collects the sum over rows.
                for (std::size_t i = 0; i < g.size(); ++i) gb[i % cols] += sign_b * g[i];
            }
            return;
        }
        case OpKind::Mul: {
            for (std::size_t t = 0; t < 2; ++t) {
                if (!wants(t)) continue;
                Buffer& gx = acc.at(n.inputs[t]);
                const auto other = n.saved[1 - t].values();
                for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i] * other[i];
            }
            return;
        }
        case OpKind::Scale: {
            if (!wants(0)) return;
            Buffer& ga = acc.at(n.inputs[0]);
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * n.scalar;
            return;
        }
        case OpKind::Exp: {
            if (!wants(0)) return;
            Buffer& ga = acc.at(n.inputs[0]);
            const auto y = n.output.values();
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * y[i];
            return;
        }
        case OpKind::Log: {
            if (!wants(0)) return;
            Buffer& ga = acc.at(n.inputs[0]);
            const auto x = n.saved[0].values();
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] / x[i];
            return;
        }
        case OpKind::Sigmoid: {
            if (!wants(0)) return;
            Buffer& ga = acc.at(n.inputs[0]);
            const auto y = n.output.values();
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
            return;
        }
        case OpKind::Softmax: {
            if (!wants(0)) return;
            Buffer& ga = acc.at(n.inputs[0]);
            const auto y = n.output.values();
            double inner = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) inner += g[i] * y[i];
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += y[i] * (g[i] - inner);
            return;
        }
        case OpKind::Concat:
        case OpKind::Stack: {
            std::size_t offset = 0;
            for (std::size_t t = 0; t < n.saved.size(); ++t) {
                const std::size_t len = n.saved[t].size();
                if (wants(t)) {
                    Buffer& gx = acc.at(n.inputs[t]);
                    for (std::size_t i = 0; i < len; ++i) gx[i] += g[offset + i];
                }
                offset += len;
            }
            return;
        }
        case OpKind::Mean: {
            if (!wants(0)) return;
            Buffer& ga = acc.at(n.inputs[0]);
            const Shape& in = n.saved[0].shape();
            if (in.rank() == 2) {
                const double inv = 1.0 / static_cast<double>(in.rows());
                const std::size_t c = in.cols();
                for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i % c] * inv;
            } else {
                const double share = g[0] / static_cast<double>(ga.size());
                for (auto& x : ga) x += share;
            }
            return;
        }
        case OpKind::MaxSubtract: {
            if (!wants(0)) return;
            Buffer& ga = acc.at(n.inputs[0]);
            double total = 0.0;
            for (std::size_t i = 0; i < ga.size(); ++i) {
                ga[i] += g[i];
                total += g[i];
            }
            ga[static_cast<std::size_t>(n.scalar)] -= total;
            return;
        }
    }
}

}  // namespace

GradientMap backward(const Tape& tape, const Tensor& output) {
    if (output.size() != 1) {
        throw ContractError("backward needs a single-element output, got shape " + output.shape().to_string());
    }
    std::unordered_map<NodeId, Tensor> result;
    const auto zero_leaves = [&] {
        for (NodeId leaf : tape.leaves()) result.emplace(leaf, Tensor::zeros(tape.node(leaf).shape));
    };
    if (!output.tape()) {
        zero_leaves();
        return GradientMap(std::move(result));
    }
    if (output.tape() != &tape) throw ContractError("output was recorded on a different tape");

    Accumulator acc(tape);
    const NodeId root = *output.node();
    acc.at(root)[0] = 1.0;
    for (NodeId id = root + 1; id-- > 0;) {
        if (!acc.has(id)) continue;
        propagate(tape.node(id), acc.get(id), acc);
    }
    for (NodeId leaf : tape.leaves()) {
        const Shape& shape = tape.node(leaf).shape;
        if (acc.has(leaf)) {
            result.emplace(leaf, Tensor(acc.get(leaf), shape));
        } else {
            result.emplace(leaf, Tensor::zeros(shape));
        }
    }
    return GradientMap(std::move(result));
}

GradientMap backward(const Tensor& output) {
    if (!output.tape()) {
        if (output.size() != 1) throw ContractError("backward needs a single-element output");
        return {};
    }
    return backward(*output.tape(), output);
}

}  // namespace ucr
