#include "ucr/encoder.hpp"

#include <algorithm>

#include "ucr/errors.hpp"
#include "ucr/ops.hpp"
#include "ucr/rng.hpp"
#include "ucr/tape.hpp"

namespace ucr {
namespace {

Tensor uniform(Shape shape, Rng& rng) {
    std::vector<double> v(shape.size());
    for (auto& x : v) x = rng.uniform(-0.1, 0.1);
    return Tensor(std::move(v), shape);
}

std::vector<TokenId> with_prefix(SpecialToken marker, std::string_view text, const Vocab& vocab, std::size_t max_len) {
    std::vector<TokenId> ids{token_id(SpecialToken::Cls), token_id(marker)};
    auto body = tokenize(text, vocab, max_len);
    ids.insert(ids.end(), body.begin(), body.end());
    return ids;
}

}  // namespace

EncoderParams init_encoder(std::size_t vocab_size, const EncoderConfig& cfg, Rng& rng) {
    if (cfg.dim == 0) throw ConfigError("embedding dimension must be positive");
    if (vocab_size < kSpecialTokenCount) throw ConfigError("vocabulary smaller than the special-token set");
    EncoderParams p;
    p.config = cfg;
    p.embedding = uniform(Shape::matrix(vocab_size, cfg.dim), rng);
    p.ff_weight = uniform(Shape::matrix(cfg.dim, cfg.dim), rng);
    p.ff_bias = uniform(Shape::vector(cfg.dim), rng);
    if (cfg.position_embedding) {
        if (cfg.max_positions == 0) throw ConfigError("position embedding needs max_positions > 0");
        p.position = uniform(Shape::matrix(cfg.max_positions, cfg.dim), rng);
    }
    return p;
}

EncoderParams bind(const EncoderParams& params, Tape& tape) {
    EncoderParams b;
    b.config = params.config;
    b.embedding = tape.leaf(params.embedding);
    b.ff_weight = tape.leaf(params.ff_weight);
    b.ff_bias = tape.leaf(params.ff_bias);
    if (params.position) b.position = tape.leaf(*params.position);
    return b;
}

std::vector<TokenId> tokenize(std::string_view text, const Vocab& vocab, std::size_t max_len) {
    if (max_len == 0) throw ContractError("tokenize: max_len must be at least 1");
    std::vector<TokenId> ids;
    for (auto w : split_words(text)) {
        if (ids.size() == max_len) break;
        ids.push_back(vocab.lookup(w));
    }
    return ids;
}

Tensor encode_tokens(std::span<const TokenId> ids, const EncoderParams& params, std::optional<std::size_t> position) {
    if (ids.empty()) throw ContractError("encode_tokens: empty token sequence");
    const std::size_t vocab = params.vocab_size();
    std::vector<double> bag(vocab, 0.0);
    for (TokenId id : ids) bag[id < vocab ? id : token_id(SpecialToken::Unk)] += 1.0;
    Tensor x = scale(matmul(Tensor::vector(std::move(bag)), params.embedding), 1.0 / static_cast<double>(ids.size()));
    if (position && params.position) {
        const std::size_t rows = params.position->shape().rows();
        x = add(x, row(*params.position, std::min(*position, rows - 1)));
    }
    return tanh(add(matmul(x, params.ff_weight), params.ff_bias));
}

std::vector<TokenId> utterance_tokens(const Utterance& u, const Vocab& vocab, const EncoderConfig& cfg) {
    return with_prefix(role_token(u.role), u.text, vocab, cfg.max_utterance_tokens);
}

std::vector<TokenId> candidate_tokens(const Candidate& c, const Vocab& vocab, const EncoderConfig& cfg) {
    return with_prefix(task_token(c.task), c.text, vocab, cfg.max_candidate_tokens);
}

Tensor encode_utterance(const Utterance& u, const Vocab& vocab, const EncoderParams& params) {
    const auto ids = utterance_tokens(u, vocab, params.config);
    return encode_tokens(ids, params, params.position ? std::optional(u.turn_index) : std::nullopt);
}

Tensor encode_candidate(const Candidate& c, const Vocab& vocab, const EncoderParams& params) {
    return encode_tokens(candidate_tokens(c, vocab, params.config), params);
}

Tensor encode_candidates(std::span<const Candidate> cands, const Vocab& vocab, const EncoderParams& params) {
    if (cands.empty()) throw ContractError("encode_candidates: no candidates");
    const std::size_t n = cands.size();
    const std::size_t vocab_size = params.vocab_size();
    const std::size_t d = params.dim();
    std::vector<double> bags(n * vocab_size, 0.0);
    std::vector<double> inv_len(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ids = candidate_tokens(cands[i], vocab, params.config);
        for (TokenId id : ids) bags[i * vocab_size + (id < vocab_size ? id : token_id(SpecialToken::Unk))] += 1.0;
        std::fill_n(inv_len.begin() + static_cast<std::ptrdiff_t>(i * d), d, 1.0 / static_cast<double>(ids.size()));
    }
    const Tensor x = mul(matmul(Tensor::matrix(n, vocab_size, std::move(bags)), params.embedding),
                         Tensor::matrix(n, d, std::move(inv_len)));
    return tanh(add(matmul(x, params.ff_weight), params.ff_bias));
}

}  // namespace ucr
