#pragma once

/** \file trainer.hpp
 *  \brief Mini-batch training of the dual encoder.
 *
 * Each epoch shuffles the examples of every task with a seed derived from
 * (seed, epoch, task), cuts them into full batches (the partial tail is
 * dropped) and interleaves the tasks round-robin, so every batch holds a
 * single task. A step encodes the batch contexts and the positive, semi-hard
 * and easy-negative candidates of each item, evaluates the combined loss,
 * back-propagates and applies one AdamW update. Everything is a pure function
 * of (corpus, config), so runs are bit-reproducible.
 */

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "ucr/checkpoint.hpp"
#include "ucr/corpus.hpp"
#include "ucr/model.hpp"
#include "ucr/objectives.hpp"

namespace ucr {

/// How often training touched each task's data, indexed by task_index().
struct TrainStats {
    std::array<std::size_t, 3> example_reads{};
    std::array<std::size_t, 3> candidate_reads{};
};

struct TrainResult {
    Checkpoint checkpoint;
    /// Loss of every optimizer step taken by this call.
    std::vector<double> loss_history;
    TrainStats stats;
};

/// One planned batch: example positions within Corpus::examples().
struct PlannedBatch {
    TaskKind task;
    std::vector<std::size_t> examples;
};

/// Batches of one epoch, in execution order.
std::vector<PlannedBatch> plan_epoch(const Corpus& corpus, const TrainConfig& cfg, std::size_t epoch);

/// Optimizer steps one epoch takes.
std::size_t steps_per_epoch(const Corpus& corpus, const TrainConfig& cfg);

/// Similarities for one batch on an already-bound model (tape leaves or constants).
/// Easy negatives are drawn with `easy_seed` from the task pool, never equal
/// to the item's positive or semi-hard candidate.
BatchSimilarities batch_similarities(const Corpus& corpus, const PlannedBatch& batch, const TrainConfig& cfg,
                                     const Vocab& vocab, const ModelParams& model, std::uint64_t easy_seed,
                                     TrainStats* stats = nullptr);

/// Called after every step with (global step, loss).
using StepCallback = std::function<void(std::size_t, double)>;

/// Trains from scratch, or continues `resume` (its parameters, optimizer
/// state and step counter) under `cfg`. Throws ConfigError when the regime
/// has fewer than batch_size examples and TrainingError on a non-finite loss
/// or gradient.
TrainResult train(const Corpus& corpus, const TrainConfig& cfg, const Checkpoint* resume = nullptr,
                  const StepCallback& on_step = {});

}  // namespace ucr
