#pragma once

/** \file tape.hpp
 *  \brief Append-only operation record and reverse-mode gradient evaluation.
 *
 * Nodes are appended in evaluation order, so a node's inputs always carry
 * smaller ids. `backward` walks the record once from the output towards the
 * leaves and never mutates the tape; repeated calls give identical results.
 *
 * A tape is single-writer. Independent tapes may be used from different
 * threads. Tensors recorded on a tape hold a raw pointer to it, so the tape
 * must outlive every tensor derived from it that is still used in an op.
 */

#include <cstddef>
#include <span>
#include <unordered_map>
#include <vector>

#include "ucr/tensor.hpp"

namespace ucr {

/// The closed set of differentiable operations.
enum class OpKind {
    Leaf,
    MatMul,
    Dot,
    Add,
    Sub,
    Mul,
    Scale,
    Exp,
    Log,
    Sigmoid,
    Softmax,
    Concat,
    Stack,
    Mean,
    MaxSubtract,
};

const char* to_string(OpKind kind);

struct TapeNode {
    OpKind kind = OpKind::Leaf;
    Shape shape;
    /// Input node ids; kNoNode marks a constant input.
    std::vector<NodeId> inputs;
    /// Input values (detached), in the same order as `inputs`.
    std::vector<Tensor> saved;
    /// Output value, kept for ops whose derivative is expressed through it.
    Tensor output;
    double scalar = 0.0;
};

class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;
    Tape(Tape&&) = delete;
    Tape& operator=(Tape&&) = delete;

    /// Registers `value` as a differentiable leaf and returns it bound to this tape.
    Tensor leaf(const Tensor& value);

    /// Appends an op node. Used by the op implementations.
    Tensor record(OpKind kind, Tensor output, std::span<const Tensor> inputs, double scalar = 0.0,
                  bool keep_output = false);

    [[nodiscard]] std::size_t size() const { return nodes_.size(); }
    [[nodiscard]] const TapeNode& node(NodeId id) const { return nodes_.at(id); }
    [[nodiscard]] std::span<const NodeId> leaves() const { return leaves_; }

private:
    std::vector<TapeNode> nodes_;
    std::vector<NodeId> leaves_;
};

/// Gradients of one scalar output with respect to every leaf of a tape.
class GradientMap {
public:
    GradientMap() = default;
    explicit GradientMap(std::unordered_map<NodeId, Tensor> grads) : grads_(std::move(grads)) {}

    [[nodiscard]] std::size_t size() const { return grads_.size(); }
    [[nodiscard]] bool empty() const { return grads_.empty(); }
    [[nodiscard]] bool contains(NodeId id) const { return grads_.contains(id); }
    [[nodiscard]] const Tensor& at(NodeId id) const;
    /// Gradient for a leaf tensor returned by `Tape::leaf`.
    [[nodiscard]] const Tensor& at(const Tensor& leaf) const;
    [[nodiscard]] const std::unordered_map<NodeId, Tensor>& all() const { return grads_; }

    friend bool operator==(const GradientMap&, const GradientMap&) = default;

private:
    std::unordered_map<NodeId, Tensor> grads_;
};

/// d(output)/d(leaf) for every leaf on `tape`. Leaves that do not influence
/// `output` get zero tensors. A constant output (no tape) yields an empty map.
/// Throws ContractError if `output` is not a single-element tensor.
GradientMap backward(const Tape& tape, const Tensor& output);

/// Convenience overload using the output's own tape.
GradientMap backward(const Tensor& output);

}  // namespace ucr
