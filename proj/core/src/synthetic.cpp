#include "ucr/synthetic.hpp"

#include <string>
#include <vector>

#include "ucr/errors.hpp"
#include "ucr/rng.hpp"

namespace ucr {
namespace {

constexpr std::uint64_t kCandidateStream = 101;
constexpr std::uint64_t kDialogueStream = 202;

class WordSpace {
public:
    explicit WordSpace(const GeneratorConfig& cfg)
        : cfg_(cfg),
          facet_base_(cfg.topics * cfg.words_per_topic),
          filler_base_(facet_base_ + cfg.facets * cfg.words_per_facet) {}

    std::size_t filler_count() const { return cfg_.vocab_size - filler_base_; }

    std::string topic_word(std::size_t topic, std::size_t k) const { return word(topic * cfg_.words_per_topic + k); }
    std::string facet_word(std::size_t facet, std::size_t k) const {
        return word(facet_base_ + facet * cfg_.words_per_facet + k);
    }
    std::string filler(Rng& rng) const { return word(filler_base_ + rng.index(filler_count())); }

    /// `count` distinct topic words, order drawn from rng.
    void topic_words(std::vector<std::string>& out, std::size_t topic, std::size_t count, Rng& rng) const {
        for (std::size_t k : distinct(cfg_.words_per_topic, count, rng)) out.push_back(topic_word(topic, k));
    }
    void facet_words(std::vector<std::string>& out, std::size_t facet, std::size_t count, Rng& rng) const {
        for (std::size_t k : distinct(cfg_.words_per_facet, count, rng)) out.push_back(facet_word(facet, k));
    }
    void fillers(std::vector<std::string>& out, std::size_t count, Rng& rng) const {
        for (std::size_t i = 0; i < count; ++i) out.push_back(filler(rng));
    }

private:
    static std::string word(std::size_t id) { return "t" + std::to_string(id); }

    static std::vector<std::size_t> distinct(std::size_t n, std::size_t count, Rng& rng) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        rng.shuffle(std::span(idx));
        idx.resize(std::min(count, n));
        return idx;
    }

    const GeneratorConfig& cfg_;
    std::size_t facet_base_;
    std::size_t filler_base_;
};

std::string join(std::vector<std::string>& words, Rng& rng) {
    rng.shuffle(std::span(words));
    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

std::string candidate_id(TaskKind task, std::size_t topic, std::size_t facet) {
    return std::string(1, to_string(task).front()) + "-" + std::to_string(topic) + "-" + std::to_string(facet);
}

void validate(const GeneratorConfig& cfg) {
    if (cfg.topics == 0) throw ConfigError("generator needs at least one topic");
    if (cfg.vocab_size == 0) throw ConfigError("generator needs a non-empty vocabulary");
    if (cfg.facets == 0) throw ConfigError("generator needs at least one facet");
    if (cfg.dialogues_per_task == 0) throw ConfigError("generator needs at least one dialogue per task");
    if (cfg.sessions_per_dialogue == 0 || cfg.turns_per_session == 0) {
        throw ConfigError("generator needs at least one session and one turn");
    }
    if (cfg.words_per_topic == 0 || cfg.words_per_facet == 0) throw ConfigError("topic and facet words must be non-empty");
    if (cfg.vocab_size <= cfg.topics * cfg.words_per_topic + cfg.facets * cfg.words_per_facet) {
        throw ConfigError("vocabulary of " + std::to_string(cfg.vocab_size) +
                          " words cannot hold every topic and facet word plus filler");
    }
    for (double p : {cfg.query_topic_prob, cfg.history_topic_prob, cfg.distractor_prob}) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("generator probabilities must lie in [0, 1]");
    }
    if (cfg.topics < 2 && cfg.distractor_prob > 0.0 && cfg.sessions_per_dialogue > 1) {
        throw ConfigError("distractor turns need at least two topics");
    }
}

}  // namespace

Corpus generate_synthetic(const GeneratorConfig& cfg, std::uint64_t seed) {
    validate(cfg);
    const WordSpace words(cfg);

    std::vector<Candidate> candidates;
    candidates.reserve(3 * cfg.topics * cfg.facets);
    for (TaskKind task : kAllTasks) {
        for (std::size_t topic = 0; topic < cfg.topics; ++topic) {
            for (std::size_t facet = 0; facet < cfg.facets; ++facet) {
                Rng rng(derive_seed(seed, kCandidateStream + task_index(task), topic * cfg.facets + facet));
                std::vector<std::string> w;
                words.topic_words(w, topic, cfg.words_per_topic > 1 ? cfg.words_per_topic - 1 : 1, rng);
                words.facet_words(w, facet, cfg.words_per_facet, rng);
                words.fillers(w, cfg.filler_per_candidate, rng);
                candidates.push_back(Candidate{candidate_id(task, topic, facet), task, join(w, rng)});
            }
        }
    }
    // Texts of response candidates double as system utterances.
    auto candidate_text = [&](TaskKind task, std::size_t topic, std::size_t facet) -> const std::string& {
        return candidates[(task_index(task) * cfg.topics + topic) * cfg.facets + facet].text;
    };

    std::vector<Dialogue> dialogues;
    std::vector<RetrievalExample> examples;
    dialogues.reserve(3 * cfg.dialogues_per_task);
    for (TaskKind task : kAllTasks) {
        for (std::size_t di = 0; di < cfg.dialogues_per_task; ++di) {
            Rng rng(derive_seed(seed, kDialogueStream + task_index(task), di));
            Dialogue d;
            d.id = std::string(to_string(task)) + "-" + std::to_string(di);
            const std::size_t topic = rng.index(cfg.topics);
            std::size_t distractor = topic;
            if (cfg.topics > 1) {
                distractor = rng.index(cfg.topics - 1);
                if (distractor >= topic) ++distractor;
            }

            std::vector<std::string> selected;
            std::size_t turn = 0;
            for (std::size_t s = 0; s < cfg.sessions_per_dialogue; ++s) {
                const bool final_session = s + 1 == cfg.sessions_per_dialogue;
                Session session;
                for (std::size_t j = 0; j < cfg.turns_per_session; ++j) {
                    std::vector<std::string> user;
                    std::vector<std::string> sys;
                    if (!final_session && rng.bernoulli(cfg.distractor_prob)) {
                        words.topic_words(user, distractor, 2, rng);
                        words.fillers(user, cfg.filler_per_utterance, rng);
                        words.topic_words(sys, distractor, 2, rng);
                        words.fillers(sys, cfg.filler_per_utterance, rng);
                        session.utterances.push_back(Utterance{Role::User, join(user, rng), turn++});
                        session.utterances.push_back(Utterance{Role::System, join(sys, rng), turn++});
                        continue;
                    }

                    const std::size_t facet = rng.index(cfg.facets);
                    words.facet_words(user, facet, std::min<std::size_t>(2, cfg.words_per_facet), rng);
                    if (rng.bernoulli(final_session ? cfg.query_topic_prob : cfg.history_topic_prob)) {
                        words.topic_words(user, topic, 1, rng);
                    }
                    words.fillers(user, cfg.filler_per_utterance, rng);
                    const std::size_t user_turn = turn;
                    session.utterances.push_back(Utterance{Role::User, join(user, rng), turn++});

                    std::string sys_text;
                    if (task == TaskKind::Response) {
                        sys_text = candidate_text(task, topic, facet);
                    } else {
                        words.topic_words(sys, topic, 2, rng);
                        words.facet_words(sys, facet, 1, rng);
                        words.fillers(sys, cfg.filler_per_utterance, rng);
                        sys_text = join(sys, rng);
                    }
                    session.utterances.push_back(Utterance{Role::System, std::move(sys_text), turn++});

                    std::string positive = candidate_id(task, topic, facet);
                    if (!cfg.grounded) {
                        positive = candidate_id(task, rng.index(cfg.topics), rng.index(cfg.facets));
                    }
                    if (final_session) {
                        examples.push_back(RetrievalExample{d.id, user_turn, task, positive, selected});
                    }
                    selected.push_back(std::move(positive));
                }
                d.sessions.push_back(std::move(session));
            }
            dialogues.push_back(std::move(d));
        }
    }
    return Corpus(std::move(dialogues), std::move(candidates), std::move(examples));
}

}  // namespace ucr
