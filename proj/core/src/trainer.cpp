#include "ucr/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "ucr/errors.hpp"
#include "ucr/ops.hpp"
#include "ucr/rng.hpp"
#include "ucr/tape.hpp"

namespace ucr {
namespace {

constexpr std::uint64_t kShuffleStream = 0x5eed;
constexpr std::uint64_t kEasyStream = 0xea5e;

std::array<std::vector<std::size_t>, 3> regime_examples(const Corpus& corpus, const TrainConfig& cfg) {
    std::array<std::vector<std::size_t>, 3> by_task;
    const auto& exs = corpus.examples();
    for (std::size_t i = 0; i < exs.size(); ++i) {
        if (cfg.single_task && exs[i].task != *cfg.single_task) continue;
        by_task[task_index(exs[i].task)].push_back(i);
    }
    return by_task;
}

void require_examples(const std::array<std::vector<std::size_t>, 3>& by_task, const TrainConfig& cfg) {
    std::size_t total = 0;
    for (const auto& v : by_task) total += v.size();
    if (total < cfg.batch_size) {
        throw ConfigError("regime '" + regime_name(cfg) + "' has " + std::to_string(total) +
                          " examples, fewer than batch size " + std::to_string(cfg.batch_size));
    }
}

}  // namespace

std::vector<PlannedBatch> plan_epoch(const Corpus& corpus, const TrainConfig& cfg, std::size_t epoch) {
    auto by_task = regime_examples(corpus, cfg);
    std::array<std::vector<PlannedBatch>, 3> per_task;
    for (TaskKind t : kAllTasks) {
        auto& ids = by_task[task_index(t)];
        Rng rng(derive_seed(cfg.seed, kShuffleStream + epoch, task_index(t)));
        rng.shuffle(std::span(ids));
        for (std::size_t start = 0; start + cfg.batch_size <= ids.size(); start += cfg.batch_size) {
            per_task[task_index(t)].push_back(
                PlannedBatch{t, std::vector<std::size_t>(ids.begin() + static_cast<std::ptrdiff_t>(start),
                                                         ids.begin() + static_cast<std::ptrdiff_t>(start + cfg.batch_size))});
        }
    }
    std::vector<PlannedBatch> out;
    for (std::size_t round = 0;; ++round) {
        bool any = false;
        for (auto& batches : per_task) {
            if (round < batches.size()) {
                out.push_back(std::move(batches[round]));
                any = true;
            }
        }
        if (!any) break;
    }
    return out;
}

std::size_t steps_per_epoch(const Corpus& corpus, const TrainConfig& cfg) {
    const auto by_task = regime_examples(corpus, cfg);
    std::size_t n = 0;
    for (const auto& v : by_task) n += v.size() / cfg.batch_size;
    return n;
}

BatchSimilarities batch_similarities(const Corpus& corpus, const PlannedBatch& batch, const TrainConfig& cfg,
                                     const Vocab& vocab, const ModelParams& model, std::uint64_t easy_seed,
                                     TrainStats* stats) {
    const std::size_t b = batch.examples.size();
    const auto& pool = corpus.candidates(batch.task);
    auto count_candidate = [&](TaskKind t) {
        if (stats) ++stats->candidate_reads[task_index(t)];
    };

    Rng rng(easy_seed);
    std::vector<Tensor> contexts;
    std::vector<Tensor> positives;
    std::vector<Tensor> semis;
    std::vector<Tensor> easies;
    std::vector<bool> present;
    contexts.reserve(b);
    for (std::size_t idx : batch.examples) {
        const auto& ex = corpus.examples()[idx];
        if (ex.task != batch.task) throw ContractError("batch mixes tasks");
        if (stats) ++stats->example_reads[task_index(ex.task)];

        contexts.push_back(
            encode_context(corpus.dialogue(ex.dialogue_id), ex.query_turn, cfg.mode, vocab, model.encoder, model.fusion));

        const Candidate& pos = corpus.candidate(ex.positive_id);
        count_candidate(pos.task);
        positives.push_back(encode_candidate(pos, vocab, model.encoder));

        const auto semi_id = semi_hard_id(ex);
        present.push_back(semi_id.has_value());
        std::size_t semi_index = pool.size();
        if (semi_id) {
            const Candidate& semi = corpus.candidate(*semi_id);
            count_candidate(semi.task);
            semi_index = corpus.candidate_index(*semi_id);
            semis.push_back(encode_candidate(semi, vocab, model.encoder));
        }

        const std::size_t pos_index = corpus.candidate_index(ex.positive_id);
        const std::size_t excluded = 1 + (semi_id ? 1 : 0);
        if (pool.size() <= excluded) {
            throw CapacityError("task pool too small to draw an easy negative");
        }
        // Uniform over the pool minus the excluded indices, by rank skipping.
        std::size_t pick = rng.index(pool.size() - excluded);
        const std::size_t lo = std::min(pos_index, semi_index);
        const std::size_t hi = std::max(pos_index, semi_index);
        if (pick >= lo) ++pick;
        if (semi_id && pick >= hi) ++pick;
        count_candidate(pool[pick].task);
        easies.push_back(encode_candidate(pool[pick], vocab, model.encoder));
    }

    std::vector<std::vector<Tensor>> cross(b);
    std::vector<Tensor> semi_sims;
    std::vector<Tensor> easy_sims;
    std::size_t semi_cursor = 0;
    for (std::size_t i = 0; i < b; ++i) {
        cross[i].reserve(b);
        for (std::size_t j = 0; j < b; ++j) cross[i].push_back(dot(contexts[i], positives[j]));
        // Absent semi-hard entries are masked and never read.
        semi_sims.push_back(present[i] ? dot(contexts[i], semis[semi_cursor++]) : Tensor::scalar(0.0));
        easy_sims.push_back(dot(contexts[i], easies[i]));
    }
    return assemble_similarities(cross, semi_sims, present, easy_sims);
}

TrainResult train(const Corpus& corpus, const TrainConfig& cfg, const Checkpoint* resume, const StepCallback& on_step) {
    cfg.validate();
    const auto by_task = regime_examples(corpus, cfg);
    require_examples(by_task, cfg);

    TrainResult result;
    if (resume) {
        result.checkpoint = *resume;
        result.checkpoint.config = cfg;
        if (!(resume->params.encoder.config == cfg.encoder)) {
            throw ConfigError("resume checkpoint encoder settings differ from the training config");
        }
    } else {
        result.checkpoint = initial_checkpoint(corpus.vocab(), cfg);
    }
    Checkpoint& ck = result.checkpoint;
    const Vocab& vocab = ck.vocab;

    const std::size_t per_epoch = steps_per_epoch(corpus, cfg);
    if (cfg.epochs > 0 && per_epoch == 0) {
        throw ConfigError("no task of regime '" + regime_name(cfg) + "' fills a batch of " + std::to_string(cfg.batch_size));
    }
    const std::size_t total = per_epoch * cfg.epochs;
    const std::size_t stop = cfg.max_steps ? std::min(*cfg.max_steps, total) : total;

    for (std::size_t epoch = 0; epoch < cfg.epochs && ck.step < stop; ++epoch) {
        const std::size_t first = epoch * per_epoch;
        if (ck.step >= first + per_epoch) continue;
        const auto batches = plan_epoch(corpus, cfg, epoch);
        for (std::size_t bi = ck.step - first; bi < batches.size() && ck.step < stop; ++bi) {
            const std::size_t step = ck.step + 1;
            Tape tape;
            ModelParams bound{bind(ck.params.encoder, tape), bind(ck.params.fusion, tape)};
            const auto sims = batch_similarities(corpus, batches[bi], cfg, vocab, bound,
                                                 derive_seed(cfg.seed, kEasyStream, step), &result.stats);
            const Tensor loss = combined_loss(sims, cfg.loss);
            const double value = loss.item();
            if (!std::isfinite(value)) throw TrainingError("non-finite loss", step);

            const GradientMap grads = backward(tape, loss);
            const auto leaves = bound.flatten();
            std::vector<Tensor> g;
            g.reserve(leaves.size());
            for (const auto& leaf : leaves) g.push_back(grads.at(leaf));

            auto params = ck.params.flatten();
            ck.optimizer.step = ck.step;
            optimizer_step(params, g, ck.optimizer, scheduled_lr(cfg.schedule, cfg.learning_rate, step, total), cfg.adamw);
            ck.params.assign(params);
            ck.step = step;
            result.loss_history.push_back(value);
            if (on_step) on_step(step, value);
        }
    }
    return result;
}

}  // namespace ucr
