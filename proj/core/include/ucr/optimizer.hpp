#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <optional>
#include <vector>

#include "ucr/tensor.hpp"

namespace ucr {

enum class LrSchedule { Constant, LinearDecay };

std::string_view to_string(LrSchedule s);
std::optional<LrSchedule> parse_schedule(std::string_view name);

/// Learning rate for the 1-based `step` of `total_steps`. LinearDecay gives
/// lr·(1 − step/total), which reaches zero on the final step.
double scheduled_lr(LrSchedule schedule, double base_lr, std::size_t step, std::size_t total_steps);

struct AdamWConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;

    friend bool operator==(const AdamWConfig&, const AdamWConfig&) = default;
};

/// First and second moments per parameter, plus the number of updates taken.
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::size_t step = 0;

    /// Zero moments shaped like `params`.
    static AdamState zeros_like(std::span<const Tensor> params);
};

/// One AdamW update with bias correction and decoupled weight decay:
///
///     m ← β1·m + (1−β1)·g          v ← β2·v + (1−β2)·g²
///     p ← p − lr·( m̂ / (√v̂ + ε) + λ·p ),   m̂ = m/(1−β1^t), v̂ = v/(1−β2^t)
///
/// Throws TrainingError (carrying `state.step + 1`) if any gradient is not finite;
/// nothing is modified in that case.
void optimizer_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state, double lr,
                    const AdamWConfig& cfg);

}  // namespace ucr
