#pragma once

/** \file analysis.hpp
 *  \brief Pool-size sweep, K sweep and loss/context ablations.
 */

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "ucr/retrieval.hpp"
#include "ucr/trainer.hpp"

namespace ucr {

/// 256, 128, 64, 32, 16, 8, 4, 2.
std::vector<std::size_t> default_pool_sizes();

/// One report per size; every size uses the same eval seed.
std::vector<MetricsReport> pool_size_sweep(const Corpus& corpus, const Checkpoint& ck, TaskKind task,
                                           const std::vector<std::size_t>& sizes, const EvalSettings& base);

/// Reports for ADAPTIVE(k) per k followed by NO_PREV, labelled "adaptive-k"
/// and "no-prev". With `retrain` every mode gets its own model trained on
/// `train` under `base` (mode replaced); otherwise `ck` is evaluated under
/// each mode.
struct KSweepOptions {
    bool retrain = true;
    const Checkpoint* checkpoint = nullptr;  ///< required when !retrain
};
std::vector<MetricsReport> k_sweep(const CorpusSplit& split, const TrainConfig& base, TaskKind task,
                                   const std::vector<std::size_t>& ks, const EvalSettings& eval,
                                   const KSweepOptions& options = {});

enum class Variant {
    Full,
    NoContextEnc,  ///< context replaced by the mean of all utterance encodings
    NoPair,        ///< historical contrastive loss only
    NoHist,        ///< pairwise similarity loss only
};

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view name);

/// `base` with the variant's flags applied.
TrainConfig apply_variant(const TrainConfig& base, Variant v);

struct AblationCell {
    Variant variant;
    std::uint64_t seed;
    MetricsReport report;
};

/// Trains every (variant, seed) on `split.train` with base.seed replaced by
/// the seed, then evaluates each task of `tasks` on `split.test`.
std::vector<AblationCell> ablation_run(const CorpusSplit& split, const TrainConfig& base,
                                       const std::vector<Variant>& variants, const std::vector<std::uint64_t>& seeds,
                                       const std::vector<TaskKind>& tasks, const EvalSettings& eval);

}  // namespace ucr
