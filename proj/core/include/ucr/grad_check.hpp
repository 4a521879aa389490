#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ucr/tensor.hpp"

namespace ucr {

/// A scalar function of a parameter list. It is called once with taped
/// parameters and many more times with constant ones, and must build the same
/// computation either way.
using ScalarFunction = std::function<Tensor(std::span<const Tensor>)>;

struct GradCheckOptions {
    double eps = 1e-4;
    /// Check only this many coordinates, drawn uniformly with `seed`; all when unset.
    std::optional<std::size_t> sample = std::nullopt;
    std::uint64_t seed = 0;
};

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::size_t coordinates_checked = 0;
    /// Flat (parameter, element) position of the worst coordinate.
    std::size_t worst_param = 0;
    std::size_t worst_element = 0;
};

/// Compares reverse-mode gradients against central differences
/// (f(p+eps) − f(p−eps)) / 2eps. Relative error per coordinate is
/// |analytic − numeric| / max(|analytic|, |numeric|, 1e−8).
/// Throws ContractError for eps ≤ 0 and EvaluationError if f is non-finite.
GradCheckResult grad_check(const ScalarFunction& f, std::span<const Tensor> params, const GradCheckOptions& opts = {});

}  // namespace ucr
