#pragma once

/** \file synthetic.hpp
 *  \brief Deterministic synthetic multi-session corpus with grounded candidates.
 *
 * Words are rendered as "t<id>". The id space is cut into topic words, facet
 * words and filler words. Every task pool holds one candidate per
 * (topic, facet) pair; its text carries the topic and facet words plus filler.
 *
 * A dialogue follows one main topic. Each grounded turn picks a facet; the
 * user utterance names the facet (and only sometimes the topic), the system
 * utterance is grounded on the selected (topic, facet) candidate. Earlier
 * sessions also contain chit-chat turns about a distractor topic. Examples are
 * the user turns of the final session: the positive is that turn's candidate,
 * the historical list is every candidate selected before it. Historical
 * candidates share the topic with the positive but not, in general, the facet.
 */

#include <cstddef>
#include <cstdint>

#include "ucr/corpus.hpp"

namespace ucr {

struct GeneratorConfig {
    std::size_t topics = 50;
    std::size_t facets = 8;
    std::size_t dialogues_per_task = 1000;
    std::size_t sessions_per_dialogue = 3;
    /// User/system pairs per session.
    std::size_t turns_per_session = 3;
    std::size_t vocab_size = 600;
    std::size_t words_per_topic = 4;
    std::size_t words_per_facet = 3;
    std::size_t filler_per_utterance = 3;
    std::size_t filler_per_candidate = 3;
    /// Chance that a grounded user utterance of the final session also names
    /// a topic word.
    double query_topic_prob = 0.5;
    /// The same for grounded user utterances of earlier sessions.
    double history_topic_prob = 0.75;
    /// Chance that a turn of an earlier session is distractor chit-chat.
    double distractor_prob = 0.35;
    /// When false, positives are drawn independently of the dialogue text,
    /// which leaves nothing to learn (useful for chance-level calibration).
    bool grounded = true;
};

/// Throws ConfigError for zero topics, facets, vocabulary, dialogues, sessions
/// or turns, or when the vocabulary cannot hold every topic and facet word plus
/// at least one filler word.
Corpus generate_synthetic(const GeneratorConfig& cfg, std::uint64_t seed);

}  // namespace ucr
