#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "support.hpp"
#include "ucr/encoder.hpp"
#include "ucr/errors.hpp"
#include "ucr/grad_check.hpp"
#include "ucr/ops.hpp"

namespace ucr {
namespace {

Vocab small_vocab() { return Vocab({"x", "t1", "t2", "t3", "t4"}); }

EncoderParams small_params(std::size_t vocab_size, std::size_t dim = 6, bool position = false) {
    Rng rng(17);
    EncoderConfig cfg;
    cfg.dim = dim;
    cfg.position_embedding = position;
    cfg.max_positions = 8;
    return init_encoder(vocab_size, cfg, rng);
}

// Independent forward pass: tanh(mean of embedding rows · W + b).
std::vector<double> oracle_encode(const std::vector<TokenId>& ids, const EncoderParams& p) {
    const std::size_t d = p.dim();
    std::vector<double> m(d, 0.0);
    for (TokenId id : ids) {
        for (std::size_t j = 0; j < d; ++j) m[j] += p.embedding.at(id, j);
    }
    for (auto& x : m) x /= static_cast<double>(ids.size());
    std::vector<double> h(d);
    for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) s += m[i] * p.ff_weight.at(i, j);
        h[j] = std::tanh(s + p.ff_bias[j]);
    }
    return h;
}

void expect_close(const Tensor& t, const std::vector<double>& v, double tol) {
    ASSERT_EQ(t.size(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(t[i], v[i], tol) << "at " << i;
}

TEST(Tokenize, LooksUpAndTruncates) {
    const Vocab v = small_vocab();
    EXPECT_EQ(tokenize("t1 t2 t1", v, 64), (std::vector<TokenId>{10, 11, 10}));
    EXPECT_EQ(tokenize("zzz", v, 64), (std::vector<TokenId>{token_id(SpecialToken::Unk)}));
    EXPECT_TRUE(tokenize("", v, 64).empty());
    std::string long_text;
    for (int i = 0; i < 100; ++i) long_text += (i % 2 ? "t1 " : "t2 ");
    const auto ids = tokenize(long_text, v, 64);
    ASSERT_EQ(ids.size(), 64u);
    EXPECT_EQ(ids.front(), 11u);
    EXPECT_THROW(tokenize("t1", v, 0), ContractError);
}

TEST(EncodeUtterance, PureAndRoleSensitive) {
    const Vocab v = small_vocab();
    const EncoderParams p = small_params(v.size());
    const Utterance u{Role::User, "t1 t2", 0};
    EXPECT_EQ(encode_utterance(u, v, p), encode_utterance(u, v, p));
    const Utterance s{Role::System, "t1 t2", 0};
    EXPECT_NE(encode_utterance(u, v, p), encode_utterance(s, v, p));
}

TEST(EncodeUtterance, MatchesOracle) {
    const Vocab v = small_vocab();
    const EncoderParams p = small_params(v.size());
    const Utterance u{Role::User, "t1 t3 t3 zzz", 0};
    const std::vector<TokenId> ids{token_id(SpecialToken::Cls), token_id(SpecialToken::Usr), 10, 12, 12,
                                   token_id(SpecialToken::Unk)};
    expect_close(encode_utterance(u, v, p), oracle_encode(ids, p), 1e-12);
}

TEST(EncodeUtterance, EmptyTextUsesSpecialTokensOnly) {
    const Vocab v = small_vocab();
    const EncoderParams p = small_params(v.size());
    const Utterance u{Role::System, "", 0};
    expect_close(encode_utterance(u, v, p), oracle_encode({token_id(SpecialToken::Cls), token_id(SpecialToken::Sys)}, p),
                 1e-12);
    EXPECT_EQ(encode_utterance(u, v, p).shape(), Shape::vector(6));
}

TEST(EncodeCandidate, TaskTokenChangesEncoding) {
    const Vocab v = small_vocab();
    const EncoderParams p = small_params(v.size());
    const Candidate a{"a", TaskKind::Persona, "t1 t4"};
    const Candidate b{"b", TaskKind::Knowledge, "t1 t4"};
    EXPECT_NE(encode_candidate(a, v, p), encode_candidate(b, v, p));
    const Candidate empty{"e", TaskKind::Response, ""};
    expect_close(encode_candidate(empty, v, p),
                 oracle_encode({token_id(SpecialToken::Cls), token_id(SpecialToken::Response)}, p), 1e-12);
}

TEST(EncodeCandidate, TruncatesAt512Tokens) {
    const Vocab v = small_vocab();
    const EncoderParams p = small_params(v.size());
    std::string head;
    for (int i = 0; i < 512; ++i) head += "t1 ";
    std::string tail;
    for (int i = 0; i < 88; ++i) tail += "t4 ";
    const Candidate full{"f", TaskKind::Persona, head + tail};
    const Candidate cut{"c", TaskKind::Persona, head};
    EXPECT_EQ(candidate_tokens(full, v, p.config).size(), 514u);
    EXPECT_EQ(encode_candidate(full, v, p), encode_candidate(cut, v, p));
}

TEST(EncodeCandidates, BatchedRowsEqualSingleEncodings) {
    const Vocab v = small_vocab();
    const EncoderParams p = small_params(v.size());
    const std::vector<Candidate> cands{{"a", TaskKind::Persona, "t1 t2 t3"},
                                       {"b", TaskKind::Persona, ""},
                                       {"c", TaskKind::Persona, "t4 t4 zzz t1"},
                                       {"d", TaskKind::Persona, "t1 t2 t3"}};
    const Tensor m = encode_candidates(cands, v, p);
    ASSERT_EQ(m.shape(), Shape::matrix(4, 6));
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const Tensor single = encode_candidate(cands[i], v, p);
        for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(m.at(i, j), single[j]);
    }
}

TEST(EncodeUtterance, PositionEmbeddingDistinguishesTurns) {
    const Vocab v = small_vocab();
    const EncoderParams p = small_params(v.size(), 6, true);
    ASSERT_TRUE(p.position.has_value());
    EXPECT_NE(encode_utterance({Role::User, "t1", 0}, v, p), encode_utterance({Role::User, "t1", 2}, v, p));
    const EncoderParams off = small_params(v.size());
    EXPECT_EQ(encode_utterance({Role::User, "t1", 0}, v, off), encode_utterance({Role::User, "t1", 2}, v, off));
}

TEST(EncoderGradient, DotOfUtteranceAndCandidateMatchesFiniteDifferences) {
    const Vocab v = small_vocab();
    for (bool position : {false, true}) {
        const EncoderParams p = small_params(v.size(), 5, position);
        std::vector<Tensor> flat{p.embedding, p.ff_weight, p.ff_bias};
        if (p.position) flat.push_back(*p.position);
        const auto f = [&](std::span<const Tensor> x) {
            EncoderParams q = p;
            q.embedding = x[0];
            q.ff_weight = x[1];
            q.ff_bias = x[2];
            if (position) q.position = x[3];
            return dot(encode_utterance({Role::User, "t1 t2 t2", 3}, v, q),
                       encode_candidate({"c", TaskKind::Knowledge, "t2 t3 t4"}, v, q));
        };
        EXPECT_LT(grad_check(f, flat).max_relative_error, 1e-4);
    }
}

}  // namespace
}  // namespace ucr
