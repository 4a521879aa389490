#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "support.hpp"
#include "ucr/corpus.hpp"
#include "ucr/errors.hpp"

namespace ucr {
namespace {

Corpus parse(const std::string& text) {
    std::istringstream in(text);
    return read_corpus(in);
}

const char* kTiny =
    R"({"kind":"candidate","id":"p1","task":"persona","text":"likes tea"}
{"kind":"candidate","id":"p2","task":"persona","text":"likes coffee"}
{"kind":"dialogue","id":"d","sessions":[[{"role":"user","text":"hi there"},{"role":"system","text":"hello"}]],"examples":[{"turn":0,"task":"persona","positive":"p1","historical":[]}]}
)";

TEST(LoadCorpus, EmptyInputGivesEmptyCorpus) {
    const Corpus c = parse("");
    EXPECT_TRUE(c.dialogues().empty());
    EXPECT_TRUE(c.examples().empty());
    EXPECT_EQ(c.vocab().size(), kSpecialTokenCount);
}

TEST(LoadCorpus, MinimalWellFormedCorpus) {
    const Corpus c = parse(kTiny);
    EXPECT_EQ(c.examples().size(), 1u);
    EXPECT_EQ(c.candidates(TaskKind::Persona).size(), 2u);
    EXPECT_TRUE(c.vocab().contains("likes"));
    EXPECT_TRUE(c.vocab().contains("hello"));
}

TEST(LoadCorpus, DanglingPositiveNamesTheId) {
    std::string text = kTiny;
    text.replace(text.find(R"("positive":"p1")"), 15, R"("positive":"p9")");
    try {
        parse(text);
        FAIL() << "expected IntegrityError";
    } catch (const IntegrityError& e) {
        EXPECT_EQ(e.id(), "p9");
    }
}

TEST(LoadCorpus, MalformedRecordReportsLine) {
    const std::string text = std::string(kTiny) + "{not json\n";
    try {
        parse(text);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4u);
    }
}

TEST(LoadCorpus, UnknownKindIsParseError) {
    EXPECT_THROW(parse(R"({"kind":"mystery"})" "\n"), ParseError);
}

TEST(LoadCorpus, QueryTurnMustBeUser) {
    std::string text = kTiny;
    text.replace(text.find(R"("turn":0)"), 8, R"("turn":1)");
    EXPECT_THROW(parse(text), IntegrityError);
}

TEST(LoadCorpus, DuplicateCandidateIdRejected) {
    const std::string text = R"({"kind":"candidate","id":"p1","task":"persona","text":"a"}
{"kind":"candidate","id":"p1","task":"persona","text":"b"}
)";
    EXPECT_THROW(parse(text), IntegrityError);
}

TEST(LoadCorpus, MissingFileIsParseError) { EXPECT_THROW(load_corpus("/nonexistent/corpus.jsonl"), ParseError); }

TEST(LoadCorpus, RoundTripIsLossless) {
    const Corpus c = parse(kTiny);
    const Corpus again = parse(corpus_to_string(c));
    EXPECT_TRUE(c == again);
    EXPECT_EQ(corpus_to_string(again), corpus_to_string(c));
}

TEST(Vocab, SpecialsFirstThenFrequencyThenLexicographic) {
    const Vocab v = Vocab::from_texts({"b a b", "c a b"});
    ASSERT_EQ(v.size(), kSpecialTokenCount + 3);
    EXPECT_EQ(v.token(0), "[CLS]");
    EXPECT_EQ(v.token(token_id(SpecialToken::Unk)), "[UNK]");
    EXPECT_EQ(v.token(kSpecialTokenCount), "b");
    EXPECT_EQ(v.token(kSpecialTokenCount + 1), "a");
    EXPECT_EQ(v.token(kSpecialTokenCount + 2), "c");
    EXPECT_EQ(v.lookup("zzz"), token_id(SpecialToken::Unk));
}

TEST(SemiHard, MostRecentHistoricalOtherThanPositive) {
    RetrievalExample ex;
    ex.positive_id = "c";
    ex.historical_ids = {"a", "b", "c"};
    EXPECT_EQ(semi_hard_id(ex), "b");
    ex.historical_ids = {"c"};
    EXPECT_FALSE(semi_hard_id(ex).has_value());
    ex.historical_ids = {};
    EXPECT_FALSE(semi_hard_id(ex).has_value());
}

TEST(SplitSessions, QueryOpensSecondSession) {
    const Dialogue d = test::make_dialogue("d", {{"u0", "s1", "u2", "s3"}, {"u4", "s5"}});
    const SessionSplit s = split_sessions(d, 4);
    EXPECT_EQ(s.previous.size(), 4u);
    EXPECT_TRUE(s.current.empty());
    EXPECT_EQ(s.query->text, "u4");
}

TEST(SplitSessions, CurrentSessionHoldsEarlierTurns) {
    const Dialogue d = test::make_dialogue("d", {{"u0", "s1"}, {"u2", "s3", "u4", "s5"}});
    const SessionSplit s = split_sessions(d, 4);
    ASSERT_EQ(s.previous.size(), 2u);
    ASSERT_EQ(s.current.size(), 2u);
    EXPECT_EQ(s.current[0]->text, "u2");
    EXPECT_EQ(s.current[1]->text, "s3");
}

TEST(SplitSessions, SingleSessionTreatsTurnPairsAsUnits) {
    const Dialogue d = test::make_dialogue("d", {{"u0", "s1", "u2", "s3", "u4", "s5"}});
    const SessionSplit s = split_sessions(d, 4);
    ASSERT_EQ(s.previous.size(), 4u);
    EXPECT_EQ(s.previous[0]->text, "u0");
    EXPECT_EQ(s.previous[3]->text, "s3");
    EXPECT_TRUE(s.current.empty());
    EXPECT_EQ(s.query->text, "u4");
}

TEST(SplitSessions, OnlyQueryUtterance) {
    const Dialogue d = test::make_dialogue("d", {{"u0"}});
    const SessionSplit s = split_sessions(d, 0);
    EXPECT_TRUE(s.previous.empty());
    EXPECT_TRUE(s.current.empty());
}

TEST(SplitSessions, SystemTurnIsContractError) {
    const Dialogue d = test::make_dialogue("d", {{"u0", "s1"}});
    EXPECT_THROW(split_sessions(d, 1), ContractError);
    EXPECT_THROW(split_sessions(d, 7), ContractError);
}

Corpus pool_corpus(std::size_t n, std::vector<std::string> historical) {
    auto cands = test::make_candidates(TaskKind::Knowledge, "k", n);
    Dialogue d = test::make_dialogue("d", {{"hello", "hi"}});
    RetrievalExample ex{"d", 0, TaskKind::Knowledge, "k0", std::move(historical)};
    return Corpus({d}, cands, {ex});
}

TEST(SamplePool, MinimalPool) {
    const Corpus c = pool_corpus(5, {});
    const auto pool = sample_pool(c.examples()[0], c, 2, 1);
    ASSERT_EQ(pool.size(), 2u);
    EXPECT_EQ(std::count_if(pool.begin(), pool.end(), [](const Candidate& x) { return x.id == "k0"; }), 1);
    EXPECT_EQ(pool, sample_pool(c.examples()[0], c, 2, 1));
}

TEST(SamplePool, ContainsPositiveAndSemiHard) {
    const Corpus c = pool_corpus(100, {"k7"});
    const auto pool = sample_pool(c.examples()[0], c, 64, 5);
    ASSERT_EQ(pool.size(), 64u);
    std::set<std::string> ids;
    for (const auto& x : pool) ids.insert(x.id);
    EXPECT_EQ(ids.size(), 64u);
    EXPECT_TRUE(ids.contains("k0"));
    EXPECT_TRUE(ids.contains("k7"));
}

TEST(SamplePool, HistoricalEqualToPositiveFallsBackToRandom) {
    const Corpus c = pool_corpus(10, {"k0"});
    const auto pool = sample_pool(c.examples()[0], c, 3, 2);
    std::set<std::string> ids;
    for (const auto& x : pool) ids.insert(x.id);
    EXPECT_EQ(ids.size(), 3u);
    EXPECT_TRUE(ids.contains("k0"));
}

TEST(SamplePool, PropertiesOverManySeeds) {
    const Corpus c = pool_corpus(40, {"k3", "k9"});
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const std::size_t n = 2 + seed % 39;
        const auto pool = sample_pool(c.examples()[0], c, n, seed);
        std::set<std::string> ids;
        for (const auto& x : pool) ids.insert(x.id);
        EXPECT_EQ(ids.size(), n);
        EXPECT_TRUE(ids.contains("k0"));
        EXPECT_TRUE(ids.contains("k9"));
    }
}

TEST(SamplePool, CapacityErrors) {
    const Corpus c = pool_corpus(5, {});
    EXPECT_THROW(sample_pool(c.examples()[0], c, 6, 0), CapacityError);
    EXPECT_THROW(sample_pool(c.examples()[0], c, 1, 0), CapacityError);
}

TEST(SplitByDialogue, HoldsOutTheRequestedFraction) {
    std::vector<Dialogue> ds;
    std::vector<RetrievalExample> exs;
    for (int i = 0; i < 10; ++i) {
        ds.push_back(test::make_dialogue("d" + std::to_string(i), {{"hello", "hi"}}));
        exs.push_back({"d" + std::to_string(i), 0, TaskKind::Persona, "p0", {}});
    }
    const Corpus c(ds, test::make_candidates(TaskKind::Persona, "p", 3), exs);
    const CorpusSplit s = split_by_dialogue(c, 0.2);
    EXPECT_EQ(s.test.dialogues().size(), 2u);
    EXPECT_EQ(s.train.dialogues().size(), 8u);
    EXPECT_EQ(s.train.vocab(), c.vocab());
    EXPECT_EQ(s.test.candidates(TaskKind::Persona).size(), 3u);
    EXPECT_EQ(split_by_dialogue(c, 0.0).test.dialogues().size(), 0u);
    EXPECT_THROW(split_by_dialogue(c, 1.0), ConfigError);
}

}  // namespace
}  // namespace ucr
