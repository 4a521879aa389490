#pragma once

/** \file context_fusion.hpp
 *  \brief Context-adaptive dialogue encoder.
 *
 * The query utterance u_t picks its K most similar utterances from earlier
 * sessions; those, followed by the earlier utterances of the current session,
 * form the history. The query attends over the history (single head, no
 * projections, scores scaled by 1/√d) and a learned gate blends the attended
 * history with the query:
 *
 *     λ   = σ(w · [h_hist; h_query])
 *     h_d = λ·h_hist + (1 − λ)·h_query
 *
 * The top-K choice is a hard selection; gradients reach only the selected
 * utterances. With an empty history the query encoding is returned unchanged.
 */

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ucr/corpus.hpp"
#include "ucr/encoder.hpp"
#include "ucr/tensor.hpp"

namespace ucr {

class Tape;
class Rng;

struct FusionParams {
    Tensor gate;  ///< length 2·dim
};

FusionParams init_fusion(std::size_t dim, Rng& rng);
FusionParams bind(const FusionParams& params, Tape& tape);

enum class ContextKind {
    Adaptive,    ///< top-K previous + current session, attention and gate
    FullConcat,  ///< every utterance joined into one token sequence
    NoPrev,      ///< current session only
    MeanPool,    ///< unweighted mean of every utterance encoding, query included
};

struct ContextMode {
    ContextKind kind = ContextKind::Adaptive;
    std::size_t k = 3;

    static ContextMode adaptive(std::size_t k);
    static ContextMode full_concat() { return {ContextKind::FullConcat, 0}; }
    static ContextMode no_prev() { return {ContextKind::NoPrev, 0}; }
    static ContextMode mean_pool() { return {ContextKind::MeanPool, 0}; }

    friend bool operator==(const ContextMode&, const ContextMode&) = default;
};

/// "adaptive", "full-concat", "no-prev" or "mean-pool".
std::string_view to_string(ContextKind kind);
std::optional<ContextKind> parse_context_kind(std::string_view name);

/// Indices (ascending) of the min(k, n) previous encodings with the largest
/// dot product against the query; ties go to the lower index.
std::vector<std::size_t> select_prev_topk_indices(const Tensor& query, std::span<const Tensor> previous, std::size_t k);
std::vector<Tensor> select_prev_topk(const Tensor& query, std::span<const Tensor> previous, std::size_t k);

/// softmax(q·h_j / √d) weighted sum of the history. ContractError if empty.
Tensor attend(const Tensor& query, std::span<const Tensor> history);
/// The attention weights `attend` uses.
Tensor attention_weights(const Tensor& query, std::span<const Tensor> history);

struct GateOutput {
    Tensor fused;
    Tensor lambda;
};
GateOutput gate_fuse(const Tensor& history, const Tensor& query, const FusionParams& params);

struct ContextEncoding {
    Tensor vector;
    /// Positions within the previous-session utterances chosen by top-K.
    std::vector<std::size_t> selected;
    /// Gate value when the gate ran.
    std::optional<double> lambda;
};

/// Full context encoding for the user turn `query_turn` of `d`.
/// `frozen_selection` replaces the top-K choice (for gradient checks that
/// hold the hard selection fixed).
ContextEncoding encode_context_detailed(const Dialogue& d, std::size_t query_turn, const ContextMode& mode,
                                        const Vocab& vocab, const EncoderParams& enc, const FusionParams& fusion,
                                        std::optional<std::span<const std::size_t>> frozen_selection = std::nullopt);

Tensor encode_context(const Dialogue& d, std::size_t query_turn, const ContextMode& mode, const Vocab& vocab,
                      const EncoderParams& enc, const FusionParams& fusion);

}  // namespace ucr
