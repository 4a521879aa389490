#include "ucr/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ucr/errors.hpp"
#include "ucr/rng.hpp"

namespace ucr {

using nlohmann::json;

std::string_view to_string(Role role) { return role == Role::User ? "user" : "system"; }

std::string_view to_string(TaskKind task) {
    switch (task) {
        case TaskKind::Persona: return "persona";
        case TaskKind::Knowledge: return "knowledge";
        case TaskKind::Response: return "response";
    }
    return "?";
}

std::optional<TaskKind> parse_task(std::string_view name) {
    for (TaskKind t : kAllTasks) {
        if (to_string(t) == name) return t;
    }
    return std::nullopt;
}

std::string_view to_string(SpecialToken t) {
    static constexpr std::array<std::string_view, kSpecialTokenCount> names{
        "[CLS]", "[SEP]", "[USR]", "[SYS]", "[PERSONA]", "[KNOWLEDGE]", "[RESPONSE]", "[UNK]", "[PAD]"};
    return names[static_cast<std::size_t>(t)];
}

SpecialToken task_token(TaskKind task) {
    switch (task) {
        case TaskKind::Persona: return SpecialToken::Persona;
        case TaskKind::Knowledge: return SpecialToken::Knowledge;
        case TaskKind::Response: return SpecialToken::Response;
    }
    return SpecialToken::Unk;
}

SpecialToken role_token(Role role) { return role == Role::User ? SpecialToken::Usr : SpecialToken::Sys; }

std::vector<std::string_view> split_words(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        const std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        if (i > start) out.push_back(text.substr(start, i - start));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Vocab

Vocab::Vocab() : Vocab(std::vector<std::string>{}) {}

Vocab::Vocab(const std::vector<std::string>& tokens) {
    tokens_.reserve(kSpecialTokenCount + tokens.size());
    for (std::size_t i = 0; i < kSpecialTokenCount; ++i) {
        tokens_.emplace_back(to_string(static_cast<SpecialToken>(i)));
    }
    tokens_.insert(tokens_.end(), tokens.begin(), tokens.end());
    ids_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (!ids_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
            throw ContractError("duplicate vocabulary token '" + tokens_[i] + "'");
        }
    }
}

Vocab Vocab::from_texts(const std::vector<std::string_view>& texts) {
    std::map<std::string_view, std::size_t> counts;
    for (auto text : texts) {
        for (auto w : split_words(text)) ++counts[w];
    }
    for (std::size_t i = 0; i < kSpecialTokenCount; ++i) counts.erase(to_string(static_cast<SpecialToken>(i)));
    std::vector<std::pair<std::string_view, std::size_t>> ordered(counts.begin(), counts.end());
    // std::map iteration is lexicographic, so a stable sort by count keeps that order for ties.
    std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> tokens;
    tokens.reserve(ordered.size());
    for (const auto& [w, _] : ordered) tokens.emplace_back(w);
    return Vocab(tokens);
}

TokenId Vocab::lookup(std::string_view token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? token_id(SpecialToken::Unk) : it->second;
}

bool Vocab::contains(std::string_view token) const { return ids_.find(token) != ids_.end(); }

// ---------------------------------------------------------------------------
// Dialogue / examples

std::size_t Dialogue::turn_count() const {
    std::size_t n = 0;
    for (const auto& s : sessions) n += s.utterances.size();
    return n;
}

const Utterance* Dialogue::find_turn(std::size_t turn) const {
    for (const auto& s : sessions) {
        for (const auto& u : s.utterances) {
            if (u.turn_index == turn) return &u;
        }
    }
    return nullptr;
}

std::optional<std::string> semi_hard_id(const RetrievalExample& ex) {
    for (auto it = ex.historical_ids.rbegin(); it != ex.historical_ids.rend(); ++it) {
        if (*it != ex.positive_id) return *it;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Corpus

namespace {

std::vector<std::string_view> corpus_texts(const std::vector<Dialogue>& dialogues,
                                           const std::array<std::vector<Candidate>, 3>& pools) {
    std::vector<std::string_view> texts;
    for (const auto& d : dialogues) {
        for (const auto& s : d.sessions) {
            for (const auto& u : s.utterances) texts.push_back(u.text);
        }
    }
    for (const auto& pool : pools) {
        for (const auto& c : pool) texts.push_back(c.text);
    }
    return texts;
}

std::array<std::vector<Candidate>, 3> to_pools(std::vector<Candidate> candidates) {
    std::array<std::vector<Candidate>, 3> pools;
    for (auto& c : candidates) pools[task_index(c.task)].push_back(std::move(c));
    return pools;
}

}  // namespace

Corpus::Corpus(std::vector<Dialogue> dialogues, std::vector<Candidate> candidates,
               std::vector<RetrievalExample> examples)
    : dialogues_(std::move(dialogues)), pools_(to_pools(std::move(candidates))), examples_(std::move(examples)) {
    index_and_validate();
    vocab_ = Vocab::from_texts(corpus_texts(dialogues_, pools_));
}

Corpus::Corpus(std::vector<Dialogue> dialogues, std::vector<Candidate> candidates,
               std::vector<RetrievalExample> examples, Vocab vocab)
    : dialogues_(std::move(dialogues)),
      pools_(to_pools(std::move(candidates))),
      examples_(std::move(examples)),
      vocab_(std::move(vocab)) {
    index_and_validate();
}

void Corpus::index_and_validate() {
    for (std::size_t i = 0; i < dialogues_.size(); ++i) {
        const auto& d = dialogues_[i];
        if (!dialogue_index_.emplace(d.id, i).second) throw IntegrityError("duplicate dialogue id", d.id);
        if (d.sessions.empty()) throw IntegrityError("dialogue has no sessions", d.id);
        std::optional<std::size_t> last;
        for (const auto& s : d.sessions) {
            if (s.utterances.empty()) throw IntegrityError("dialogue has an empty session", d.id);
            for (const auto& u : s.utterances) {
                if (last && u.turn_index <= *last) throw IntegrityError("turn indices not increasing in dialogue", d.id);
                last = u.turn_index;
                if (split_words(u.text).empty()) throw IntegrityError("empty utterance text in dialogue", d.id);
            }
        }
    }
    for (TaskKind t : kAllTasks) {
        const auto& pool = pools_[task_index(t)];
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (!candidate_index_.emplace(pool[i].id, Location{t, i}).second) {
                throw IntegrityError("duplicate candidate id", pool[i].id);
            }
        }
    }
    for (const auto& ex : examples_) {
        auto dit = dialogue_index_.find(ex.dialogue_id);
        if (dit == dialogue_index_.end()) throw IntegrityError("example references unknown dialogue", ex.dialogue_id);
        const Utterance* u = dialogues_[dit->second].find_turn(ex.query_turn);
        if (!u || u->role != Role::User) {
            throw IntegrityError("example query turn " + std::to_string(ex.query_turn) +
                                     " is not a user utterance of dialogue",
                                 ex.dialogue_id);
        }
        auto check = [&](const std::string& id, const char* what) {
            auto cit = candidate_index_.find(id);
            if (cit == candidate_index_.end()) throw IntegrityError(std::string(what) + " candidate does not exist", id);
            if (cit->second.task != ex.task) throw IntegrityError(std::string(what) + " candidate has a different task", id);
        };
        check(ex.positive_id, "positive");
        for (const auto& h : ex.historical_ids) check(h, "historical");
    }
}

std::vector<Candidate> Corpus::all_candidates() const {
    std::vector<Candidate> out;
    for (const auto& pool : pools_) out.insert(out.end(), pool.begin(), pool.end());
    return out;
}

const Dialogue& Corpus::dialogue(std::string_view id) const {
    auto it = dialogue_index_.find(std::string(id));
    if (it == dialogue_index_.end()) throw IntegrityError("unknown dialogue", std::string(id));
    return dialogues_[it->second];
}

const Candidate& Corpus::candidate(std::string_view id) const {
    auto it = candidate_index_.find(std::string(id));
    if (it == candidate_index_.end()) throw IntegrityError("unknown candidate", std::string(id));
    return pools_[task_index(it->second.task)][it->second.index];
}

std::size_t Corpus::candidate_index(std::string_view id) const {
    auto it = candidate_index_.find(std::string(id));
    if (it == candidate_index_.end()) throw IntegrityError("unknown candidate", std::string(id));
    return it->second.index;
}

bool Corpus::has_candidate(std::string_view id) const { return candidate_index_.contains(std::string(id)); }

// ---------------------------------------------------------------------------
// File format

namespace {

template <typename T>
T field(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(std::string("missing field \"") + key + "\"", line);
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ParseError(std::string("field \"") + key + "\" has the wrong type", line);
    }
}

TaskKind task_field(const json& obj, std::size_t line) {
    const auto name = field<std::string>(obj, "task", line);
    auto t = parse_task(name);
    if (!t) throw ParseError("unknown task \"" + name + "\"", line);
    return *t;
}

}  // namespace

Corpus read_corpus(std::istream& in) {
    std::vector<Dialogue> dialogues;
    std::vector<Candidate> candidates;
    std::vector<RetrievalExample> examples;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (split_words(line).empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
        }
        if (!rec.is_object()) throw ParseError("record is not a JSON object", lineno);
        const auto kind = field<std::string>(rec, "kind", lineno);
        if (kind == "candidate") {
            candidates.push_back(
                Candidate{field<std::string>(rec, "id", lineno), task_field(rec, lineno), field<std::string>(rec, "text", lineno)});
        } else if (kind == "dialogue") {
            Dialogue d;
            d.id = field<std::string>(rec, "id", lineno);
            const auto sessions = field<json>(rec, "sessions", lineno);
            if (!sessions.is_array()) throw ParseError("\"sessions\" must be an array", lineno);
            std::size_t turn = 0;
            for (const auto& s : sessions) {
                if (!s.is_array()) throw ParseError("each session must be an array", lineno);
                Session session;
                for (const auto& u : s) {
                    if (!u.is_object()) throw ParseError("utterance must be an object", lineno);
                    const auto role = field<std::string>(u, "role", lineno);
                    if (role != "user" && role != "system") throw ParseError("unknown role \"" + role + "\"", lineno);
                    session.utterances.push_back(
                        Utterance{role == "user" ? Role::User : Role::System, field<std::string>(u, "text", lineno), turn++});
                }
                d.sessions.push_back(std::move(session));
            }
            if (auto it = rec.find("examples"); it != rec.end()) {
                if (!it->is_array()) throw ParseError("\"examples\" must be an array", lineno);
                for (const auto& e : *it) {
                    if (!e.is_object()) throw ParseError("example must be an object", lineno);
                    const auto t = field<std::int64_t>(e, "turn", lineno);
                    if (t < 0) throw ParseError("negative turn index", lineno);
                    RetrievalExample ex;
                    ex.dialogue_id = d.id;
                    ex.query_turn = static_cast<std::size_t>(t);
                    ex.task = task_field(e, lineno);
                    ex.positive_id = field<std::string>(e, "positive", lineno);
                    if (auto h = e.find("historical"); h != e.end()) {
                        try {
                            ex.historical_ids = h->get<std::vector<std::string>>();
                        } catch (const json::exception&) {
                            throw ParseError("\"historical\" must be an array of strings", lineno);
                        }
                    }
                    examples.push_back(std::move(ex));
                }
            }
            dialogues.push_back(std::move(d));
        } else {
            throw ParseError("unknown record kind \"" + kind + "\"", lineno);
        }
    }
    if (in.bad()) throw ParseError("read failure", lineno);
    return Corpus(std::move(dialogues), std::move(candidates), std::move(examples));
}

Corpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open corpus file " + path.string(), 0);
    return read_corpus(in);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
    for (TaskKind t : kAllTasks) {
        for (const auto& c : corpus.candidates(t)) {
            json rec = {{"kind", "candidate"}, {"id", c.id}, {"task", to_string(c.task)}, {"text", c.text}};
            out << rec.dump() << '\n';
        }
    }
    std::unordered_map<std::string_view, std::vector<const RetrievalExample*>> by_dialogue;
    for (const auto& ex : corpus.examples()) by_dialogue[ex.dialogue_id].push_back(&ex);
    for (const auto& d : corpus.dialogues()) {
        json sessions = json::array();
        for (const auto& s : d.sessions) {
            json session = json::array();
            for (const auto& u : s.utterances) session.push_back({{"role", to_string(u.role)}, {"text", u.text}});
            sessions.push_back(std::move(session));
        }
        json examples = json::array();
        if (auto it = by_dialogue.find(d.id); it != by_dialogue.end()) {
            for (const auto* ex : it->second) {
                examples.push_back({{"turn", ex->query_turn},
                                    {"task", to_string(ex->task)},
                                    {"positive", ex->positive_id},
                                    {"historical", ex->historical_ids}});
            }
        }
        json rec = {{"kind", "dialogue"}, {"id", d.id}, {"sessions", std::move(sessions)}, {"examples", std::move(examples)}};
        out << rec.dump() << '\n';
    }
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    write_corpus(corpus, out);
    if (!out) throw Error("failed writing " + path.string());
}

std::string corpus_to_string(const Corpus& corpus) {
    std::ostringstream os;
    write_corpus(corpus, os);
    return os.str();
}

// ---------------------------------------------------------------------------
// Session split

SessionSplit split_sessions(const Dialogue& d, std::size_t query_turn) {
    SessionSplit out;
    std::size_t session_of_query = d.sessions.size();
    for (std::size_t s = 0; s < d.sessions.size() && session_of_query == d.sessions.size(); ++s) {
        for (const auto& u : d.sessions[s].utterances) {
            if (u.turn_index == query_turn) {
                out.query = &u;
                session_of_query = s;
                break;
            }
        }
    }
    if (!out.query) throw ContractError("turn " + std::to_string(query_turn) + " not found in dialogue " + d.id);
    if (out.query->role != Role::User) {
        throw ContractError("turn " + std::to_string(query_turn) + " of dialogue " + d.id + " is not a user utterance");
    }

    if (d.sessions.size() == 1) {
        // Each turn pair starting at a user utterance is a session unit.
        const auto& utts = d.sessions.front().utterances;
        std::size_t unit_start = 0;
        for (std::size_t i = 0; i < utts.size() && utts[i].turn_index <= query_turn; ++i) {
            if (utts[i].role == Role::User) unit_start = i;
        }
        for (std::size_t i = 0; i < unit_start; ++i) out.previous.push_back(&utts[i]);
        for (std::size_t i = unit_start; i < utts.size() && utts[i].turn_index < query_turn; ++i) {
            out.current.push_back(&utts[i]);
        }
        return out;
    }

    for (std::size_t s = 0; s < session_of_query; ++s) {
        for (const auto& u : d.sessions[s].utterances) out.previous.push_back(&u);
    }
    for (const auto& u : d.sessions[session_of_query].utterances) {
        if (u.turn_index >= query_turn) break;
        out.current.push_back(&u);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pool sampling

std::vector<Candidate> sample_pool(const RetrievalExample& ex, const Corpus& corpus, std::size_t pool_size,
                                   std::uint64_t seed) {
    if (pool_size < 2) throw CapacityError("pool size must be at least 2");
    const auto& pool = corpus.candidates(ex.task);
    if (pool.size() < pool_size) {
        throw CapacityError("task pool '" + std::string(to_string(ex.task)) + "' has " + std::to_string(pool.size()) +
                            " candidates, need " + std::to_string(pool_size));
    }
    std::vector<std::size_t> chosen{corpus.candidate_index(ex.positive_id)};
    if (auto semi = semi_hard_id(ex)) chosen.push_back(corpus.candidate_index(*semi));

    std::vector<std::size_t> rest;
    rest.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) rest.push_back(i);
    }
    Rng rng(seed);
    const std::size_t need = pool_size - chosen.size();
    // Partial Fisher–Yates: the first `need` slots become a uniform sample.
    for (std::size_t i = 0; i < need; ++i) {
        std::swap(rest[i], rest[i + rng.index(rest.size() - i)]);
        chosen.push_back(rest[i]);
    }
    rng.shuffle(std::span(chosen));

    std::vector<Candidate> out;
    out.reserve(chosen.size());
    for (std::size_t i : chosen) out.push_back(pool[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Split

CorpusSplit split_by_dialogue(const Corpus& corpus, double holdout_fraction) {
    if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) throw ConfigError("holdout fraction must be in [0, 1)");
    std::vector<Dialogue> train_d;
    std::vector<Dialogue> test_d;
    std::unordered_map<std::string_view, bool> held_out;
    const auto& ds = corpus.dialogues();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const bool test = std::floor(static_cast<double>(i + 1) * holdout_fraction) >
                          std::floor(static_cast<double>(i) * holdout_fraction);
        held_out[ds[i].id] = test;
        (test ? test_d : train_d).push_back(ds[i]);
    }
    std::vector<RetrievalExample> train_e;
    std::vector<RetrievalExample> test_e;
    for (const auto& ex : corpus.examples()) (held_out.at(ex.dialogue_id) ? test_e : train_e).push_back(ex);
    return CorpusSplit{Corpus(std::move(train_d), corpus.all_candidates(), std::move(train_e), corpus.vocab()),
                       Corpus(std::move(test_d), corpus.all_candidates(), std::move(test_e), corpus.vocab())};
}

}  // namespace ucr
