#pragma once

/** \file retrieval.hpp
 *  \brief Brute-force inner-product retrieval and R@k / MRR evaluation.
 */

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ucr/checkpoint.hpp"
#include "ucr/context_fusion.hpp"
#include "ucr/corpus.hpp"

namespace ucr {

/// Candidates of one task with their encodings as matrix rows.
struct EmbeddedPool {
    std::vector<std::string> ids;
    Tensor embeddings;  ///< n × d, row i encodes ids[i]
    TaskKind task = TaskKind::Persona;

    [[nodiscard]] std::size_t size() const { return ids.size(); }
};

/// Encodes `cands` without recording gradients. ContractError on an empty or
/// mixed-task list.
EmbeddedPool embed_pool(std::span<const Candidate> cands, const Vocab& vocab, const EncoderParams& params);

struct ScoredCandidate {
    std::string id;
    std::size_t row = 0;
    double score = 0.0;
};

/// Pool rows scored by h·row, best first; equal scores keep row order.
std::vector<double> score_pool(const Tensor& query, const EmbeddedPool& pool);

/// The top_n candidates by descending score, ties by ascending row.
/// ContractError unless 1 ≤ top_n ≤ pool size.
std::vector<ScoredCandidate> retrieve(const Tensor& query, const EmbeddedPool& pool, std::size_t top_n);

/// 1 + #{scores strictly above scores[target]} + #{equal scores at lower index}.
std::size_t rank_of(std::span<const double> scores, std::size_t target);

struct MetricsReport {
    double r_at_1 = 0.0;
    double r_at_5 = 0.0;
    double mrr = 0.0;
    std::size_t pool_size = 0;
    std::size_t query_count = 0;
    TaskKind task = TaskKind::Persona;
    /// Label of the evaluated configuration, e.g. "adaptive-3" or "no-hist".
    std::string label;
    nlohmann::json config;
    /// FNV-1a of config.dump(), as 16 hex digits.
    std::string fingerprint;
};

/// Metrics from 1-based ranks. EvaluationError when `ranks` is empty.
MetricsReport metrics_from_ranks(std::span<const std::size_t> ranks);

std::string fnv1a_hex(std::string_view bytes);

nlohmann::json to_json(const MetricsReport& r);

struct EvalSettings {
    std::size_t pool_size = 64;
    std::uint64_t seed = 0;
    /// Context mode to evaluate with; defaults to the checkpoint's.
    std::optional<ContextMode> mode;
    /// Evaluate only the first this-many examples of the task.
    std::optional<std::size_t> max_queries;
};

/// Ranks of the positive for every example of `task` in `corpus`. Each query
/// samples its pool with derive_seed(settings.seed, query index).
std::vector<std::size_t> evaluate_ranks(const Corpus& corpus, const Checkpoint& ck, TaskKind task,
                                        const EvalSettings& settings);

/// R@1, R@5 and MRR over the examples of `task`. EvaluationError when the
/// corpus has no such example; CapacityError from pool sampling propagates.
MetricsReport evaluate(const Corpus& corpus, const Checkpoint& ck, TaskKind task, const EvalSettings& settings);

}  // namespace ucr
