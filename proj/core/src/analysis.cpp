#include "ucr/analysis.hpp"

#include "ucr/errors.hpp"

namespace ucr {

std::vector<std::size_t> default_pool_sizes() { return {256, 128, 64, 32, 16, 8, 4, 2}; }

std::vector<MetricsReport> pool_size_sweep(const Corpus& corpus, const Checkpoint& ck, TaskKind task,
                                           const std::vector<std::size_t>& sizes, const EvalSettings& base) {
    if (sizes.empty()) throw ConfigError("pool-size sweep needs at least one size");
    std::vector<MetricsReport> out;
    out.reserve(sizes.size());
    for (std::size_t n : sizes) {
        EvalSettings s = base;
        s.pool_size = n;
        out.push_back(evaluate(corpus, ck, task, s));
        out.back().label = "pool-" + std::to_string(n);
    }
    return out;
}

std::vector<MetricsReport> k_sweep(const CorpusSplit& split, const TrainConfig& base, TaskKind task,
                                   const std::vector<std::size_t>& ks, const EvalSettings& eval,
                                   const KSweepOptions& options) {
    if (ks.empty()) throw ConfigError("K sweep needs at least one k");
    if (!options.retrain && options.checkpoint == nullptr) throw ContractError("K sweep without retraining needs a checkpoint");

    std::vector<std::pair<ContextMode, std::string>> modes;
    for (std::size_t k : ks) modes.emplace_back(ContextMode::adaptive(k), "adaptive-" + std::to_string(k));
    modes.emplace_back(ContextMode::no_prev(), "no-prev");

    std::vector<MetricsReport> out;
    for (const auto& [mode, label] : modes) {
        EvalSettings s = eval;
        s.mode = mode;
        if (options.retrain) {
            TrainConfig cfg = base;
            cfg.mode = mode;
            const auto trained = train(split.train, cfg);
            out.push_back(evaluate(split.test, trained.checkpoint, task, s));
        } else {
            out.push_back(evaluate(split.test, *options.checkpoint, task, s));
        }
        out.back().label = label;
    }
    return out;
}

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::Full: return "full";
        case Variant::NoContextEnc: return "no-context-enc";
        case Variant::NoPair: return "no-pair";
        case Variant::NoHist: return "no-hist";
    }
    return "?";
}

std::optional<Variant> parse_variant(std::string_view name) {
    for (Variant v : {Variant::Full, Variant::NoContextEnc, Variant::NoPair, Variant::NoHist}) {
        if (name == to_string(v)) return v;
    }
    return std::nullopt;
}

TrainConfig apply_variant(const TrainConfig& base, Variant v) {
    TrainConfig cfg = base;
    switch (v) {
        case Variant::Full: break;
        case Variant::NoContextEnc: cfg.mode = ContextMode::mean_pool(); break;
        case Variant::NoPair: cfg.loss.use_pair = false; break;
        case Variant::NoHist: cfg.loss.use_hist = false; break;
    }
    return cfg;
}

std::vector<AblationCell> ablation_run(const CorpusSplit& split, const TrainConfig& base,
                                       const std::vector<Variant>& variants, const std::vector<std::uint64_t>& seeds,
                                       const std::vector<TaskKind>& tasks, const EvalSettings& eval) {
    if (variants.empty() || seeds.empty() || tasks.empty()) throw ConfigError("ablation needs variants, seeds and tasks");
    std::vector<AblationCell> out;
    for (Variant v : variants) {
        for (std::uint64_t seed : seeds) {
            TrainConfig cfg = apply_variant(base, v);
            cfg.seed = seed;
            const auto trained = train(split.train, cfg);
            for (TaskKind t : tasks) {
                EvalSettings s = eval;
                s.mode.reset();
                auto report = evaluate(split.test, trained.checkpoint, t, s);
                report.label = std::string(to_string(v));
                out.push_back({v, seed, std::move(report)});
            }
        }
    }
    return out;
}

}  // namespace ucr
