#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "support.hpp"
#include "ucr/checkpoint.hpp"
#include "ucr/errors.hpp"
#include "ucr/trainer.hpp"

namespace ucr {
namespace {

const Checkpoint& trained() {
    static const Checkpoint ck = [] {
        auto cfg = test::small_train_config();
        cfg.max_steps = 3;
        cfg.encoder.position_embedding = true;
        return train(test::small_corpus(), cfg).checkpoint;
    }();
    return ck;
}

std::string bytes_of(const Checkpoint& ck) {
    std::ostringstream out;
    write_checkpoint(ck, out);
    return out.str();
}

Checkpoint from_bytes(const std::string& b) {
    std::istringstream in(b);
    return read_checkpoint(in);
}

TEST(Checkpoint, RoundTripIsBitExact) {
    const Checkpoint& ck = trained();
    const Checkpoint back = from_bytes(bytes_of(ck));
    EXPECT_EQ(back.step, ck.step);
    EXPECT_EQ(back.config, ck.config);
    EXPECT_EQ(back.vocab, ck.vocab);
    EXPECT_EQ(back.params.flatten(), ck.params.flatten());
    EXPECT_EQ(back.optimizer.m, ck.optimizer.m);
    EXPECT_EQ(back.optimizer.v, ck.optimizer.v);
    EXPECT_EQ(back.optimizer.step, ck.optimizer.step);
    EXPECT_EQ(bytes_of(back), bytes_of(ck));
}

TEST(Checkpoint, ForwardPassUnchangedAfterReload) {
    const Checkpoint& ck = trained();
    const Checkpoint back = from_bytes(bytes_of(ck));
    const Corpus corpus = test::small_corpus();
    const auto& ex = corpus.examples().front();
    const auto& d = corpus.dialogue(ex.dialogue_id);
    EXPECT_EQ(encode_context(d, ex.query_turn, ck.config.mode, ck.vocab, ck.params.encoder, ck.params.fusion),
              encode_context(d, ex.query_turn, back.config.mode, back.vocab, back.params.encoder, back.params.fusion));
    const auto& c = corpus.candidate(ex.positive_id);
    EXPECT_EQ(encode_candidate(c, ck.vocab, ck.params.encoder), encode_candidate(c, back.vocab, back.params.encoder));
}

TEST(Checkpoint, StartsWithMagic) {
    const std::string b = bytes_of(trained());
    EXPECT_EQ(b.substr(0, 4), "UCR1");
}

TEST(Checkpoint, EveryTruncationIsParseError) {
    const std::string b = bytes_of(trained());
    for (std::size_t len = 0; len < b.size(); len += 1 + len / 4) {
        EXPECT_THROW(from_bytes(b.substr(0, len)), ParseError) << "length " << len;
    }
    EXPECT_THROW(from_bytes(b.substr(0, b.size() - 1)), ParseError);
}

TEST(Checkpoint, OtherVersionIsIncompatible) {
    std::string b = bytes_of(trained());
    b[3] = '2';
    EXPECT_THROW(from_bytes(b), IncompatibleVersionError);
    b[0] = 'X';
    EXPECT_THROW(from_bytes(b), ParseError);
}

TEST(Checkpoint, TrailingBytesRejected) {
    EXPECT_THROW(from_bytes(bytes_of(trained()) + "x"), ParseError);
}

TEST(Checkpoint, FileRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "ucr_checkpoint_test.bin";
    save_checkpoint(trained(), path);
    const Checkpoint back = load_checkpoint(path);
    EXPECT_EQ(back.params.flatten(), trained().params.flatten());
    std::filesystem::remove(path);
    EXPECT_THROW(load_checkpoint(path), ParseError);
}

TEST(Checkpoint, InitialMatchesInitModel) {
    const Corpus corpus = test::small_corpus();
    auto cfg = test::small_train_config();
    cfg.seed = 9;
    const Checkpoint ck = initial_checkpoint(corpus.vocab(), cfg);
    EXPECT_EQ(ck.step, 0u);
    EXPECT_EQ(ck.params.flatten(), init_model(corpus.vocab().size(), cfg.encoder, 9).flatten());
}

}  // namespace
}  // namespace ucr
