#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ucr/corpus.hpp"
#include "ucr/model.hpp"
#include "ucr/rng.hpp"
#include "ucr/synthetic.hpp"
#include "ucr/tensor.hpp"

namespace ucr::test {

inline Tensor random_vector(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return Tensor::vector(std::move(v));
}

inline Tensor random_matrix(Rng& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(r * c);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return Tensor::matrix(r, c, std::move(v));
}

inline double naive_dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Utterance user(std::string text, std::size_t turn) { return {Role::User, std::move(text), turn}; }
inline Utterance system(std::string text, std::size_t turn) { return {Role::System, std::move(text), turn}; }

/// Dialogue whose sessions hold the given texts, alternating user/system
/// within each session and numbering turns globally.
inline Dialogue make_dialogue(std::string id, const std::vector<std::vector<std::string>>& sessions) {
    Dialogue d;
    d.id = std::move(id);
    std::size_t turn = 0;
    for (const auto& texts : sessions) {
        Session s;
        for (std::size_t i = 0; i < texts.size(); ++i) {
            s.utterances.push_back(Utterance{i % 2 == 0 ? Role::User : Role::System, texts[i], turn++});
        }
        d.sessions.push_back(std::move(s));
    }
    return d;
}

/// `n` candidates "<prefix>0".."<prefix>n-1" of one task with distinct texts.
inline std::vector<Candidate> make_candidates(TaskKind task, const std::string& prefix, std::size_t n) {
    std::vector<Candidate> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(Candidate{prefix + std::to_string(i), task, "w" + std::to_string(i) + " shared w" + std::to_string(i + 1)});
    }
    return out;
}

/// A few hundred examples over small task pools; trains in well under a second.
inline Corpus small_corpus(std::uint64_t seed = 1, std::size_t dialogues_per_task = 24) {
    GeneratorConfig g;
    g.topics = 6;
    g.facets = 4;
    g.dialogues_per_task = dialogues_per_task;
    g.sessions_per_dialogue = 2;
    g.turns_per_session = 2;
    g.vocab_size = 80;
    return generate_synthetic(g, seed);
}

/// Small model settings matching small_corpus.
inline TrainConfig small_train_config() {
    TrainConfig cfg;
    cfg.encoder.dim = 8;
    cfg.batch_size = 4;
    cfg.epochs = 1;
    return cfg;
}

}  // namespace ucr::test
