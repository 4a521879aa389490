#include "ucr/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "ucr/errors.hpp"
#include "ucr/rng.hpp"
#include "ucr/tape.hpp"

namespace ucr {
namespace {

double evaluate(const ScalarFunction& f, std::span<const Tensor> params) {
    const double v = f(params).item();
    if (!std::isfinite(v)) throw EvaluationError("grad_check: function value is not finite");
    return v;
}

}  // namespace

GradCheckResult grad_check(const ScalarFunction& f, std::span<const Tensor> params, const GradCheckOptions& opts) {
    if (!(opts.eps > 0.0)) throw ContractError("grad_check: eps must be positive");

    Tape tape;
    std::vector<Tensor> bound;
    bound.reserve(params.size());
    for (const auto& p : params) bound.push_back(tape.leaf(p.detached()));
    const Tensor out = f(bound);
    if (!std::isfinite(out.item())) throw EvaluationError("grad_check: function value is not finite");
    const GradientMap grads = backward(tape, out);

    std::vector<std::pair<std::size_t, std::size_t>> coords;
    for (std::size_t p = 0; p < params.size(); ++p) {
        for (std::size_t e = 0; e < params[p].size(); ++e) coords.emplace_back(p, e);
    }
    if (opts.sample && *opts.sample < coords.size()) {
        Rng rng(opts.seed);
        rng.shuffle(std::span(coords));
        coords.resize(*opts.sample);
    }

    std::vector<Tensor> probe(params.begin(), params.end());
    for (auto& t : probe) t = t.detached();

    GradCheckResult result;
    for (const auto& [p, e] : coords) {
        const Tensor original = probe[p];
        std::vector<double> values(original.values().begin(), original.values().end());

        values[e] = original[e] + opts.eps;
        probe[p] = Tensor(values, original.shape());
        const double plus = evaluate(f, probe);
        values[e] = original[e] - opts.eps;
        probe[p] = Tensor(values, original.shape());
        const double minus = evaluate(f, probe);
        probe[p] = original;

        const double numeric = (plus - minus) / (2.0 * opts.eps);
        const double analytic = grads.at(bound[p])[e];
        const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        const double rel = std::abs(analytic - numeric) / denom;
        if (rel > result.max_relative_error || result.coordinates_checked == 0) {
            result.max_relative_error = std::max(rel, result.max_relative_error);
            result.worst_param = p;
            result.worst_element = e;
        }
        ++result.coordinates_checked;
    }
    return result;
}

}  // namespace ucr
