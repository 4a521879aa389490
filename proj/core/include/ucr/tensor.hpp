#pragma once

/** \file tensor.hpp
 *  \brief Immutable rank-0/1/2 tensors of doubles with an optional tape handle.
 *
 * A Tensor owns its values through a shared, immutable buffer, so copies are
 * cheap and a tensor can be saved on a tape without duplicating data. A tensor
 * that carries a tape handle participates in reverse-mode differentiation; all
 * other tensors are constants.
 */

#include <array>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ucr {

using NodeId = std::size_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

class Tape;

/// Rank 0 (scalar), 1 (vector) or 2 (row-major matrix).
class Shape {
public:
    constexpr Shape() = default;

    static constexpr Shape scalar() { return Shape{}; }
    static constexpr Shape vector(std::size_t n) {
        Shape s;
        s.rank_ = 1;
        s.dims_ = {n, 1};
        return s;
    }
    static constexpr Shape matrix(std::size_t rows, std::size_t cols) {
        Shape s;
        s.rank_ = 2;
        s.dims_ = {rows, cols};
        return s;
    }

    [[nodiscard]] constexpr std::size_t rank() const { return rank_; }
    [[nodiscard]] constexpr std::size_t size() const {
        return rank_ == 0 ? 1 : (rank_ == 1 ? dims_[0] : dims_[0] * dims_[1]);
    }
    /// Rows of a matrix; 1 for a vector or scalar.
    [[nodiscard]] constexpr std::size_t rows() const { return rank_ == 2 ? dims_[0] : 1; }
    /// Columns of a matrix or length of a vector; 1 for a scalar.
    [[nodiscard]] constexpr std::size_t cols() const {
        return rank_ == 2 ? dims_[1] : (rank_ == 1 ? dims_[0] : 1);
    }
    [[nodiscard]] std::vector<std::size_t> dims() const;
    [[nodiscard]] std::string to_string() const;

    friend constexpr bool operator==(const Shape& a, const Shape& b) {
        return a.rank_ == b.rank_ && (a.rank_ == 0 || a.dims_[0] == b.dims_[0]) &&
               (a.rank_ < 2 || a.dims_[1] == b.dims_[1]);
    }

private:
    std::size_t rank_ = 0;
    std::array<std::size_t, 2> dims_{1, 1};
};

class Tensor {
public:
    /// Scalar zero.
    Tensor();
    Tensor(std::vector<double> values, Shape shape);

    static Tensor scalar(double v);
    static Tensor vector(std::vector<double> values);
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double v);
    /// Length-n vector with a single 1 at `index`.
    static Tensor one_hot(std::size_t n, std::size_t index);

    [[nodiscard]] const Shape& shape() const { return shape_; }
    [[nodiscard]] std::size_t size() const { return shape_.size(); }
    [[nodiscard]] std::span<const double> values() const { return {data_->data(), data_->size()}; }
    [[nodiscard]] double operator[](std::size_t i) const { return (*data_)[i]; }
    [[nodiscard]] double at(std::size_t r, std::size_t c) const { return (*data_)[r * shape_.cols() + c]; }
    /// Value of a single-element tensor.
    [[nodiscard]] double item() const;

    [[nodiscard]] bool requires_grad() const { return tape_ != nullptr; }
    [[nodiscard]] std::optional<NodeId> node() const {
        return tape_ ? std::optional<NodeId>(node_) : std::nullopt;
    }
    [[nodiscard]] Tape* tape() const { return tape_; }
    /// Same values, no tape handle.
    [[nodiscard]] Tensor detached() const;

    [[nodiscard]] bool all_finite() const;

    /// Value equality (shape and every element bit-equal); tape handles are ignored.
    friend bool operator==(const Tensor& a, const Tensor& b);

private:
    friend class Tape;

    Shape shape_;
    std::shared_ptr<const std::vector<double>> data_;
    Tape* tape_ = nullptr;
    NodeId node_ = kNoNode;
};

}  // namespace ucr
