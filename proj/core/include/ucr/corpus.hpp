#pragma once

/** \file corpus.hpp
 *  \brief Multi-session dialogues, grounded candidate pools and retrieval examples.
 *
 * A corpus file is newline-delimited JSON with two record kinds:
 *
 *     {"kind":"candidate","id":..., "task":"persona"|"knowledge"|"response","text":...}
 *     {"kind":"dialogue","id":..., "sessions":[[{"role":"user"|"system","text":...}, ...], ...],
 *      "examples":[{"turn":int,"task":...,"positive":id,"historical":[id, ...]}, ...]}
 *
 * Turn indices are global over the flattened dialogue and 0-based. A Corpus
 * is immutable once built and can be shared between threads.
 */

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ucr {

enum class Role { User, System };

enum class TaskKind { Persona = 0, Knowledge = 1, Response = 2 };

inline constexpr std::array<TaskKind, 3> kAllTasks{TaskKind::Persona, TaskKind::Knowledge, TaskKind::Response};

std::string_view to_string(Role role);
std::string_view to_string(TaskKind task);
/// Accepts the lowercase names used in corpus files and on the command line.
std::optional<TaskKind> parse_task(std::string_view name);
constexpr std::size_t task_index(TaskKind t) { return static_cast<std::size_t>(t); }

struct Utterance {
    Role role = Role::User;
    std::string text;
    std::size_t turn_index = 0;

    friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct Session {
    std::vector<Utterance> utterances;

    friend bool operator==(const Session&, const Session&) = default;
};

struct Dialogue {
    std::string id;
    std::vector<Session> sessions;

    /// Total number of utterances across sessions.
    [[nodiscard]] std::size_t turn_count() const;
    /// Utterance with global turn index `turn`, or nullptr.
    [[nodiscard]] const Utterance* find_turn(std::size_t turn) const;

    friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

struct Candidate {
    std::string id;
    TaskKind task = TaskKind::Persona;
    std::string text;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct RetrievalExample {
    std::string dialogue_id;
    std::size_t query_turn = 0;
    TaskKind task = TaskKind::Persona;
    std::string positive_id;
    /// Candidates selected at earlier turns, oldest first.
    std::vector<std::string> historical_ids;

    friend bool operator==(const RetrievalExample&, const RetrievalExample&) = default;
};

/// The semi-hard negative of an example: the most recent historical id that
/// differs from the positive, if any.
std::optional<std::string> semi_hard_id(const RetrievalExample& ex);

using TokenId = std::uint32_t;

enum class SpecialToken : TokenId { Cls = 0, Sep, Usr, Sys, Persona, Knowledge, Response, Unk, Pad };
inline constexpr std::size_t kSpecialTokenCount = 9;

std::string_view to_string(SpecialToken t);
constexpr TokenId token_id(SpecialToken t) { return static_cast<TokenId>(t); }
SpecialToken task_token(TaskKind task);
SpecialToken role_token(Role role);

/// Token ↔ id map. Special tokens take ids 0..8; corpus tokens follow in
/// descending frequency, ties in lexicographic order.
class Vocab {
public:
    /// Special tokens only.
    Vocab();
    /// Specials followed by `tokens` in the given order.
    explicit Vocab(const std::vector<std::string>& tokens);

    /// Builds from whitespace tokens of every text.
    static Vocab from_texts(const std::vector<std::string_view>& texts);

    [[nodiscard]] std::size_t size() const { return tokens_.size(); }
    /// Id of `token`, or UNK.
    [[nodiscard]] TokenId lookup(std::string_view token) const;
    [[nodiscard]] bool contains(std::string_view token) const;
    [[nodiscard]] const std::string& token(TokenId id) const { return tokens_.at(id); }
    [[nodiscard]] const std::vector<std::string>& tokens() const { return tokens_; }

    friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
    };
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId, Hash, std::equal_to<>> ids_;
};

class Corpus {
public:
    Corpus() = default;
    /// Validates cross references and builds the vocabulary.
    /// Throws IntegrityError for dangling or duplicate ids and invalid turns.
    Corpus(std::vector<Dialogue> dialogues, std::vector<Candidate> candidates, std::vector<RetrievalExample> examples);
    /// Same, with an explicit vocabulary (used when splitting).
    Corpus(std::vector<Dialogue> dialogues, std::vector<Candidate> candidates, std::vector<RetrievalExample> examples,
           Vocab vocab);

    [[nodiscard]] const std::vector<Dialogue>& dialogues() const { return dialogues_; }
    [[nodiscard]] const std::vector<Candidate>& candidates(TaskKind task) const { return pools_[task_index(task)]; }
    /// Every candidate, in pool order persona, knowledge, response.
    [[nodiscard]] std::vector<Candidate> all_candidates() const;
    [[nodiscard]] const std::vector<RetrievalExample>& examples() const { return examples_; }
    [[nodiscard]] const Vocab& vocab() const { return vocab_; }

    [[nodiscard]] const Dialogue& dialogue(std::string_view id) const;
    [[nodiscard]] const Candidate& candidate(std::string_view id) const;
    /// Position of a candidate inside its task pool.
    [[nodiscard]] std::size_t candidate_index(std::string_view id) const;
    [[nodiscard]] bool has_candidate(std::string_view id) const;

    friend bool operator==(const Corpus& a, const Corpus& b) {
        return a.dialogues_ == b.dialogues_ && a.pools_ == b.pools_ && a.examples_ == b.examples_ &&
               a.vocab_ == b.vocab_;
    }

private:
    struct Location {
        TaskKind task;
        std::size_t index;
    };
    void index_and_validate();

    std::vector<Dialogue> dialogues_;
    std::array<std::vector<Candidate>, 3> pools_;
    std::vector<RetrievalExample> examples_;
    Vocab vocab_;
    std::unordered_map<std::string, std::size_t> dialogue_index_;
    std::unordered_map<std::string, Location> candidate_index_;
};

/// Parses a corpus stream. ParseError carries the 1-based line number.
Corpus read_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);

/// Candidates first (persona, knowledge, response), then dialogues with their examples.
void write_corpus(const Corpus& corpus, std::ostream& out);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
std::string corpus_to_string(const Corpus& corpus);

struct SessionSplit {
    /// Utterances of earlier sessions, in dialogue order.
    std::vector<const Utterance*> previous;
    /// Utterances of the query's session that precede the query.
    std::vector<const Utterance*> current;
    const Utterance* query = nullptr;
};

/// Splits the context of `query_turn` into previous sessions, current session
/// and the query utterance. In a single-session dialogue every user-initiated
/// turn pair counts as its own session. Throws ContractError unless the turn
/// exists and is a user utterance.
SessionSplit split_sessions(const Dialogue& d, std::size_t query_turn);

/// Candidate pool of `pool_size` for one example: the positive, the
/// semi-hard negative when there is one, and distinct random fillers from the
/// example's task pool, shuffled. Throws CapacityError if the task pool holds
/// fewer than `pool_size` candidates or pool_size < 2.
std::vector<Candidate> sample_pool(const RetrievalExample& ex, const Corpus& corpus, std::size_t pool_size,
                                   std::uint64_t seed);

/// Deterministic dialogue-level split: dialogue i (in corpus order) is held out
/// when floor((i+1)·fraction) > floor(i·fraction). Both parts keep every
/// candidate pool and the full vocabulary.
struct CorpusSplit {
    Corpus train;
    Corpus test;
};
CorpusSplit split_by_dialogue(const Corpus& corpus, double holdout_fraction);

/// Whitespace tokens of `text`.
std::vector<std::string_view> split_words(std::string_view text);

}  // namespace ucr
