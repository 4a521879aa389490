#include "ucr/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "ucr/errors.hpp"

namespace ucr {

std::string_view to_string(LrSchedule s) { return s == LrSchedule::Constant ? "constant" : "linear-decay"; }

std::optional<LrSchedule> parse_schedule(std::string_view name) {
    if (name == "constant") return LrSchedule::Constant;
    if (name == "linear-decay") return LrSchedule::LinearDecay;
    return std::nullopt;
}

double scheduled_lr(LrSchedule schedule, double base_lr, std::size_t step, std::size_t total_steps) {
    if (schedule == LrSchedule::Constant || total_steps == 0) return base_lr;
    const double frac = static_cast<double>(std::min(step, total_steps)) / static_cast<double>(total_steps);
    return base_lr * (1.0 - frac);
}

AdamState AdamState::zeros_like(std::span<const Tensor> params) {
    AdamState s;
    for (const auto& p : params) {
        s.m.push_back(Tensor::zeros(p.shape()));
        s.v.push_back(Tensor::zeros(p.shape()));
    }
    return s;
}

void optimizer_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state, double lr,
                    const AdamWConfig& cfg) {
    if (params.size() != grads.size() || params.size() != state.m.size() || params.size() != state.v.size()) {
        throw ContractError("optimizer_step: parameter, gradient and state counts differ");
    }
    const std::size_t t = state.step + 1;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].shape() != grads[i].shape()) throw DimensionError("optimizer_step: gradient shape mismatch");
        if (!grads[i].all_finite()) throw TrainingError("non-finite gradient for parameter " + std::to_string(i), t);
    }
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto p = params[i].values();
        const auto g = grads[i].values();
        const auto m0 = state.m[i].values();
        const auto v0 = state.v[i].values();
        std::vector<double> np(p.size());
        std::vector<double> nm(p.size());
        std::vector<double> nv(p.size());
        for (std::size_t j = 0; j < p.size(); ++j) {
            nm[j] = cfg.beta1 * m0[j] + (1.0 - cfg.beta1) * g[j];
            nv[j] = cfg.beta2 * v0[j] + (1.0 - cfg.beta2) * g[j] * g[j];
            const double mhat = nm[j] / bc1;
            const double vhat = nv[j] / bc2;
            np[j] = p[j] - lr * (mhat / (std::sqrt(vhat) + cfg.eps) + cfg.weight_decay * p[j]);
        }
        params[i] = Tensor(std::move(np), params[i].shape());
        state.m[i] = Tensor(std::move(nm), params[i].shape());
        state.v[i] = Tensor(std::move(nv), params[i].shape());
    }
    state.step = t;
}

}  // namespace ucr
