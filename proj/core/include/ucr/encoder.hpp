#pragma once

/** \file encoder.hpp
 *  \brief Tokenization and the shared text encoder for utterances and candidates.
 *
 * The encoder is h = tanh(mean(embed(tokens)) · W + b), where tokens are
 * prefixed with [CLS] and a role token ([USR]/[SYS]) for utterances or a task
 * token ([PERSONA]/[KNOWLEDGE]/[RESPONSE]) for candidates. The mean embedding
 * is a bag-of-token row times the embedding table, which keeps the op set
 * closed while costing only the non-zero rows.
 */

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ucr/corpus.hpp"
#include "ucr/tensor.hpp"

namespace ucr {

class Tape;
class Rng;

struct EncoderConfig {
    std::size_t dim = 64;
    std::size_t max_utterance_tokens = 64;
    std::size_t max_candidate_tokens = 512;
    /// Adds a learned discourse-position vector per utterance.
    bool position_embedding = false;
    std::size_t max_positions = 64;

    friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

struct EncoderParams {
    EncoderConfig config;
    Tensor embedding;  ///< vocab × dim
    Tensor ff_weight;  ///< dim × dim
    Tensor ff_bias;    ///< dim
    std::optional<Tensor> position;  ///< max_positions × dim, only with position_embedding

    [[nodiscard]] std::size_t dim() const { return config.dim; }
    [[nodiscard]] std::size_t vocab_size() const { return embedding.shape().rows(); }
};

/// Uniform [−0.1, 0.1] initialization, drawn in declaration order.
EncoderParams init_encoder(std::size_t vocab_size, const EncoderConfig& cfg, Rng& rng);

/// Same values bound as leaves of `tape`.
EncoderParams bind(const EncoderParams& params, Tape& tape);

/// Whitespace split, vocabulary lookup with UNK for misses, truncated to max_len.
std::vector<TokenId> tokenize(std::string_view text, const Vocab& vocab, std::size_t max_len);

/// tanh(mean(embed(ids)) · W + b), optionally adding the position vector for
/// `position` (clamped to the last row) before the feed-forward layer.
Tensor encode_tokens(std::span<const TokenId> ids, const EncoderParams& params,
                     std::optional<std::size_t> position = std::nullopt);

/// [CLS, USR|SYS] ++ tokens (at most max_utterance_tokens).
Tensor encode_utterance(const Utterance& u, const Vocab& vocab, const EncoderParams& params);

/// [CLS, task token] ++ tokens (at most max_candidate_tokens).
Tensor encode_candidate(const Candidate& c, const Vocab& vocab, const EncoderParams& params);

/// Token ids a candidate is encoded from.
std::vector<TokenId> candidate_tokens(const Candidate& c, const Vocab& vocab, const EncoderConfig& cfg);
/// Token ids an utterance is encoded from.
std::vector<TokenId> utterance_tokens(const Utterance& u, const Vocab& vocab, const EncoderConfig& cfg);

/// Encodes many candidates at once as the rows of an n×dim matrix. Each row
/// is bit-identical to `encode_candidate` on that candidate.
Tensor encode_candidates(std::span<const Candidate> cands, const Vocab& vocab, const EncoderParams& params);

}  // namespace ucr
