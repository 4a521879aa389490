#include "ucr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "ucr/errors.hpp"

namespace ucr {

std::vector<std::size_t> Shape::dims() const {
    if (rank_ == 0) return {};
    if (rank_ == 1) return {dims_[0]};
    return {dims_[0], dims_[1]};
}

std::string Shape::to_string() const {
    if (rank_ == 0) return "[]";
    if (rank_ == 1) return "[" + std::to_string(dims_[0]) + "]";
    return "[" + std::to_string(dims_[0]) + "x" + std::to_string(dims_[1]) + "]";
}

Tensor::Tensor() : data_(std::make_shared<const std::vector<double>>(1, 0.0)) {}

Tensor::Tensor(std::vector<double> values, Shape shape) : shape_(shape) {
    if (values.size() != shape.size()) {
        throw DimensionError("tensor of shape " + shape.to_string() + " needs " +
                             std::to_string(shape.size()) + " values, got " +
                             std::to_string(values.size()));
    }
    data_ = std::make_shared<const std::vector<double>>(std::move(values));
}

Tensor Tensor::scalar(double v) { return Tensor({v}, Shape::scalar()); }

Tensor Tensor::vector(std::vector<double> values) {
    const auto n = values.size();
    return Tensor(std::move(values), Shape::vector(n));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    return Tensor(std::move(values), Shape::matrix(rows, cols));
}

Tensor Tensor::zeros(Shape shape) { return Tensor(std::vector<double>(shape.size(), 0.0), shape); }

Tensor Tensor::full(Shape shape, double v) { return Tensor(std::vector<double>(shape.size(), v), shape); }

Tensor Tensor::one_hot(std::size_t n, std::size_t index) {
    if (index >= n) throw DimensionError("one_hot index out of range");
    std::vector<double> v(n, 0.0);
    v[index] = 1.0;
    return vector(std::move(v));
}

double Tensor::item() const {
    if (size() != 1) throw DimensionError("item() on tensor of shape " + shape_.to_string());
    return (*data_)[0];
}

Tensor Tensor::detached() const {
    Tensor t = *this;
    t.tape_ = nullptr;
    t.node_ = kNoNode;
    return t;
}

bool Tensor::all_finite() const {
    return std::all_of(data_->begin(), data_->end(), [](double v) { return std::isfinite(v); });
}

bool operator==(const Tensor& a, const Tensor& b) {
    if (!(a.shape_ == b.shape_)) return false;
    if (a.data_ == b.data_) return true;
    return std::memcmp(a.data_->data(), b.data_->data(), a.size() * sizeof(double)) == 0;
}

}  // namespace ucr
