#pragma once

/** \file ops.hpp
 *  \brief Differentiable tensor operations.
 *
 * The primitive set is closed: matmul, dot, add, sub, mul, scale, exp, log,
 * sigmoid, softmax, concat, stack, mean and max_subtract. Everything else in
 * this header is composed from those primitives and needs no backward rule of
 * its own.
 *
 * An op records itself on the tape of its taped inputs and returns a constant
 * when no input is taped. Mixing tensors from two different tapes is a
 * ContractError. All reductions accumulate left to right in row-major order.
 */

#include <cstddef>
#include <span>

#include "ucr/tensor.hpp"

namespace ucr {

/// [m×k]·[k×n] -> [m×n]. A rank-1 left operand is treated as a single row and
/// yields a rank-1 result. Zero entries of the left operand are skipped, which
/// makes sparse bag-of-token rows cheap.
Tensor matmul(const Tensor& a, const Tensor& b);

/// Σ a_i·b_i over two equal-length vectors, as a scalar.
Tensor dot(const Tensor& a, const Tensor& b);

/// Elementwise; also accepts a matrix plus a row vector (broadcast over rows).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Elementwise product of equal shapes.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);

Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
/// Elementwise logistic function.
Tensor sigmoid(const Tensor& a);
/// Softmax of a non-empty vector, computed after subtracting the maximum.
Tensor softmax(const Tensor& v);

/// Flattens every input and joins them into one vector.
Tensor concat(std::span<const Tensor> parts);
/// Stacks equal-length vectors into the rows of a matrix.
Tensor stack(std::span<const Tensor> rows);

/// Vector -> scalar mean; matrix -> column-wise mean over rows (a vector).
Tensor mean(const Tensor& a);

/// v - max(v). The derivative routes through the first maximal element.
Tensor max_subtract(const Tensor& v);

// Composites.

Tensor tanh(const Tensor& a);
/// Σ v_i as a scalar.
Tensor sum(const Tensor& v);
/// Row `i` of a matrix as a vector.
Tensor row(const Tensor& m, std::size_t i);
/// Element `i` of a vector as a scalar.
Tensor element(const Tensor& v, std::size_t i);
/// log Σ exp(v_i), stable for large magnitudes.
Tensor logsumexp(const Tensor& v);
Tensor add_scalar(const Tensor& a, double c);

}  // namespace ucr
