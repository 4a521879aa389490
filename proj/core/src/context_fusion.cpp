#include "ucr/context_fusion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "ucr/errors.hpp"
#include "ucr/ops.hpp"
#include "ucr/rng.hpp"
#include "ucr/tape.hpp"

namespace ucr {

FusionParams init_fusion(std::size_t dim, Rng& rng) {
    std::vector<double> w(2 * dim);
    for (auto& x : w) x = rng.uniform(-0.1, 0.1);
    return FusionParams{Tensor::vector(std::move(w))};
}

FusionParams bind(const FusionParams& params, Tape& tape) { return FusionParams{tape.leaf(params.gate)}; }

ContextMode ContextMode::adaptive(std::size_t k) {
    if (k == 0) throw ConfigError("adaptive context mode needs k >= 1");
    return {ContextKind::Adaptive, k};
}

std::string_view to_string(ContextKind kind) {
    switch (kind) {
        case ContextKind::Adaptive: return "adaptive";
        case ContextKind::FullConcat: return "full-concat";
        case ContextKind::NoPrev: return "no-prev";
        case ContextKind::MeanPool: return "mean-pool";
    }
    return "?";
}

std::optional<ContextKind> parse_context_kind(std::string_view name) {
    for (auto k : {ContextKind::Adaptive, ContextKind::FullConcat, ContextKind::NoPrev, ContextKind::MeanPool}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

std::vector<std::size_t> select_prev_topk_indices(const Tensor& query, std::span<const Tensor> previous, std::size_t k) {
    if (k == 0) throw ContractError("select_prev_topk: k must be at least 1");
    std::vector<double> scores(previous.size());
    for (std::size_t j = 0; j < previous.size(); ++j) scores[j] = dot(query.detached(), previous[j].detached()).item();
    std::vector<std::size_t> idx(previous.size());
    std::iota(idx.begin(), idx.end(), 0);
    const std::size_t take = std::min(k, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(),
                      [&](std::size_t a, std::size_t b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); });
    idx.resize(take);
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::vector<Tensor> select_prev_topk(const Tensor& query, std::span<const Tensor> previous, std::size_t k) {
    std::vector<Tensor> out;
    for (std::size_t i : select_prev_topk_indices(query, previous, k)) out.push_back(previous[i]);
    return out;
}

Tensor attention_weights(const Tensor& query, std::span<const Tensor> history) {
    if (history.empty()) throw ContractError("attend: empty history");
    std::vector<Tensor> scores;
    scores.reserve(history.size());
    for (const auto& h : history) scores.push_back(dot(query, h));
    return softmax(scale(concat(scores), 1.0 / std::sqrt(static_cast<double>(query.size()))));
}

Tensor attend(const Tensor& query, std::span<const Tensor> history) {
    const Tensor weights = attention_weights(query, history);
    return matmul(weights, stack(history));
}

GateOutput gate_fuse(const Tensor& history, const Tensor& query, const FusionParams& params) {
    if (history.shape() != query.shape() || history.shape().rank() != 1) {
        throw DimensionError("gate_fuse: history and query must be vectors of equal length");
    }
    const std::array<Tensor, 2> parts{history, query};
    const Tensor lambda = sigmoid(dot(params.gate, concat(parts)));
    // λ broadcast to the vector length.
    const std::array<Tensor, 1> one{lambda};
    const Tensor lambdas = matmul(concat(one), Tensor::full(Shape::matrix(1, query.size()), 1.0));
    // h_query + λ·(h_hist − h_query) keeps h_d == h_query exactly when both inputs agree.
    return {add(query, mul(lambdas, sub(history, query))), lambda};
}

ContextEncoding encode_context_detailed(const Dialogue& d, std::size_t query_turn, const ContextMode& mode,
                                        const Vocab& vocab, const EncoderParams& enc, const FusionParams& fusion,
                                        std::optional<std::span<const std::size_t>> frozen_selection) {
    const SessionSplit split = split_sessions(d, query_turn);
    ContextEncoding out;

    if (mode.kind == ContextKind::FullConcat) {
        std::vector<TokenId> ids{token_id(SpecialToken::Cls)};
        const std::size_t limit = enc.config.max_candidate_tokens + 1;
        auto append = [&](const Utterance* u) {
            ids.push_back(token_id(role_token(u->role)));
            const auto body = tokenize(u->text, vocab, enc.config.max_utterance_tokens);
            ids.insert(ids.end(), body.begin(), body.end());
        };
        for (const auto* u : split.previous) append(u);
        for (const auto* u : split.current) append(u);
        append(split.query);
        if (ids.size() > limit) ids.resize(limit);
        out.vector = encode_tokens(ids, enc);
        return out;
    }

    const Tensor query = encode_utterance(*split.query, vocab, enc);

    if (mode.kind == ContextKind::MeanPool) {
        std::vector<Tensor> all;
        for (const auto* u : split.previous) all.push_back(encode_utterance(*u, vocab, enc));
        for (const auto* u : split.current) all.push_back(encode_utterance(*u, vocab, enc));
        all.push_back(query);
        out.vector = mean(stack(all));
        return out;
    }

    std::vector<Tensor> history;
    if (mode.kind == ContextKind::Adaptive && !split.previous.empty()) {
        if (mode.k == 0) throw ContractError("adaptive context mode needs k >= 1");
        std::vector<Tensor> previous;
        if (frozen_selection) {
            for (std::size_t i : *frozen_selection) {
                if (i >= split.previous.size()) throw ContractError("frozen selection index out of range");
                previous.push_back(encode_utterance(*split.previous[i], vocab, enc));
            }
            out.selected.assign(frozen_selection->begin(), frozen_selection->end());
            history = std::move(previous);
        } else {
            previous.reserve(split.previous.size());
            for (const auto* u : split.previous) previous.push_back(encode_utterance(*u, vocab, enc));
            out.selected = select_prev_topk_indices(query, previous, mode.k);
            for (std::size_t i : out.selected) history.push_back(previous[i]);
        }
    }
    for (const auto* u : split.current) history.push_back(encode_utterance(*u, vocab, enc));

    if (history.empty()) {
        out.vector = query;
        return out;
    }
    const Tensor attended = attend(query, history);
    auto gated = gate_fuse(attended, query, fusion);
    out.vector = gated.fused;
    out.lambda = gated.lambda.item();
    return out;
}

Tensor encode_context(const Dialogue& d, std::size_t query_turn, const ContextMode& mode, const Vocab& vocab,
                      const EncoderParams& enc, const FusionParams& fusion) {
    return encode_context_detailed(d, query_turn, mode, vocab, enc, fusion).vector;
}

}  // namespace ucr
