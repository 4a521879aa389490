#include "ucr/retrieval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "ucr/errors.hpp"
#include "ucr/rng.hpp"

namespace ucr {
namespace {

EncoderParams constant_params(const EncoderParams& p) {
    EncoderParams out{p.config, p.embedding.detached(), p.ff_weight.detached(), p.ff_bias.detached(), std::nullopt};
    if (p.position) out.position = p.position->detached();
    return out;
}

}  // namespace

EmbeddedPool embed_pool(std::span<const Candidate> cands, const Vocab& vocab, const EncoderParams& params) {
    if (cands.empty()) throw ContractError("cannot embed an empty pool");
    EmbeddedPool pool;
    pool.task = cands.front().task;
    pool.ids.reserve(cands.size());
    for (const auto& c : cands) {
        if (c.task != pool.task) {
            throw ContractError("pool mixes tasks: '" + c.id + "' is " + std::string(to_string(c.task)) + ", expected " +
                                std::string(to_string(pool.task)));
        }
        pool.ids.push_back(c.id);
    }
    pool.embeddings = encode_candidates(cands, vocab, constant_params(params));
    return pool;
}

std::vector<double> score_pool(const Tensor& query, const EmbeddedPool& pool) {
    const auto& e = pool.embeddings;
    const std::size_t n = e.shape().rows();
    const std::size_t d = e.shape().cols();
    if (query.shape() != Shape::vector(d)) {
        throw DimensionError("query " + query.shape().to_string() + " does not match pool width " + std::to_string(d));
    }
    const auto& q = query.values();
    const auto& m = e.values();
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = m.data() + i * d;
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += q[j] * row[j];
        scores[i] = s;
    }
    return scores;
}

std::vector<ScoredCandidate> retrieve(const Tensor& query, const EmbeddedPool& pool, std::size_t top_n) {
    if (top_n < 1 || top_n > pool.size()) {
        throw ContractError("top_n " + std::to_string(top_n) + " outside [1, " + std::to_string(pool.size()) + "]");
    }
    const auto scores = score_pool(query, pool);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto better = [&](std::size_t a, std::size_t b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top_n), order.end(), better);
    std::vector<ScoredCandidate> out;
    out.reserve(top_n);
    for (std::size_t i = 0; i < top_n; ++i) out.push_back({pool.ids[order[i]], order[i], scores[order[i]]});
    return out;
}

std::size_t rank_of(std::span<const double> scores, std::size_t target) {
    if (target >= scores.size()) throw ContractError("rank target out of range");
    const double s = scores[target];
    std::size_t rank = 1;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] > s || (scores[i] == s && i < target)) ++rank;
    }
    return rank;
}

MetricsReport metrics_from_ranks(std::span<const std::size_t> ranks) {
    if (ranks.empty()) throw EvaluationError("no queries to evaluate");
    std::size_t hit1 = 0;
    std::size_t hit5 = 0;
    double rr = 0.0;
    for (std::size_t r : ranks) {
        if (r == 0) throw ContractError("ranks are 1-based");
        hit1 += r <= 1;
        hit5 += r <= 5;
        rr += 1.0 / static_cast<double>(r);
    }
    const double n = static_cast<double>(ranks.size());
    MetricsReport m;
    m.r_at_1 = static_cast<double>(hit1) / n;
    m.r_at_5 = static_cast<double>(hit5) / n;
    m.mrr = rr / n;
    m.query_count = ranks.size();
    return m;
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

nlohmann::json to_json(const MetricsReport& r) {
    nlohmann::json j;
    j["task"] = to_string(r.task);
    j["pool_size"] = r.pool_size;
    j["query_count"] = r.query_count;
    j["r_at_1"] = r.r_at_1;
    j["r_at_5"] = r.r_at_5;
    j["mrr"] = r.mrr;
    if (!r.label.empty()) j["label"] = r.label;
    j["config"] = r.config;
    j["fingerprint"] = r.fingerprint;
    return j;
}

std::vector<std::size_t> evaluate_ranks(const Corpus& corpus, const Checkpoint& ck, TaskKind task,
                                        const EvalSettings& settings) {
    const ContextMode mode = settings.mode.value_or(ck.config.mode);
    const auto& enc = ck.params.encoder;
    const auto& task_pool = corpus.candidates(task);
    if (task_pool.empty()) throw EvaluationError("corpus has no " + std::string(to_string(task)) + " candidates");

    // Every sampled pool is a subset of the task pool, so encode it once.
    const EmbeddedPool all = embed_pool(task_pool, ck.vocab, enc);
    const std::size_t d = enc.dim();
    const auto& all_rows = all.embeddings.values();

    std::vector<std::size_t> ranks;
    std::size_t query = 0;
    for (const auto& ex : corpus.examples()) {
        if (ex.task != task) continue;
        if (settings.max_queries && query >= *settings.max_queries) break;
        const auto pool = sample_pool(ex, corpus, settings.pool_size, derive_seed(settings.seed, query));
        std::vector<double> rows;
        rows.reserve(pool.size() * d);
        std::size_t target = pool.size();
        for (std::size_t i = 0; i < pool.size(); ++i) {
            const std::size_t src = corpus.candidate_index(pool[i].id);
            rows.insert(rows.end(), all_rows.begin() + static_cast<std::ptrdiff_t>(src * d),
                        all_rows.begin() + static_cast<std::ptrdiff_t>((src + 1) * d));
            if (pool[i].id == ex.positive_id) target = i;
        }
        EmbeddedPool embedded;
        embedded.task = task;
        embedded.embeddings = Tensor(std::move(rows), Shape::matrix(pool.size(), d));
        for (const auto& c : pool) embedded.ids.push_back(c.id);

        const Tensor h =
            encode_context(corpus.dialogue(ex.dialogue_id), ex.query_turn, mode, ck.vocab, enc, ck.params.fusion);
        const auto scores = score_pool(h, embedded);
        ranks.push_back(rank_of(scores, target));
        ++query;
    }
    return ranks;
}

MetricsReport evaluate(const Corpus& corpus, const Checkpoint& ck, TaskKind task, const EvalSettings& settings) {
    const auto ranks = evaluate_ranks(corpus, ck, task, settings);
    if (ranks.empty()) throw EvaluationError("corpus has no " + std::string(to_string(task)) + " examples to evaluate");
    MetricsReport m = metrics_from_ranks(ranks);
    m.task = task;
    m.pool_size = settings.pool_size;
    ContextMode mode = settings.mode.value_or(ck.config.mode);
    m.config = to_json(ck.config);
    m.config["eval_mode"] = to_string(mode.kind);
    m.config["eval_k"] = mode.k;
    m.config["eval_seed"] = settings.seed;
    m.config["train_steps"] = ck.step;
    m.fingerprint = fnv1a_hex(m.config.dump());
    if (!(m.r_at_1 <= m.r_at_5 && m.r_at_1 <= m.mrr && m.mrr <= 1.0)) {
        throw EvaluationError("metric invariants violated");
    }
    return m;
}

}  // namespace ucr
