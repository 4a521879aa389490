#include <benchmark/benchmark.h>

#include "ucr/retrieval.hpp"
#include "ucr/rng.hpp"
#include "ucr/synthetic.hpp"
#include "ucr/tape.hpp"
#include "ucr/trainer.hpp"

namespace {

using namespace ucr;

const Corpus& corpus() {
    static const Corpus c = generate_synthetic(GeneratorConfig{}, 0);
    return c;
}

EmbeddedPool random_pool(std::size_t n, std::size_t d) {
    Rng rng(1);
    EmbeddedPool p;
    std::vector<double> flat(n * d);
    for (auto& v : flat) v = rng.uniform(-1, 1);
    for (std::size_t i = 0; i < n; ++i) p.ids.push_back(std::to_string(i));
    p.embeddings = Tensor::matrix(n, d, std::move(flat));
    return p;
}

void BM_ScorePool(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto pool = random_pool(n, 64);
    const Tensor q = Tensor::full(Shape::vector(64), 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(score_pool(q, pool));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ScorePool)->RangeMultiplier(4)->Range(4, 4096);

void BM_RetrieveTop5(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto pool = random_pool(n, 64);
    const Tensor q = Tensor::full(Shape::vector(64), 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(retrieve(q, pool, 5));
}
BENCHMARK(BM_RetrieveTop5)->Arg(64)->Arg(256);

void BM_EncodeCandidates(benchmark::State& state) {
    const auto& c = corpus();
    const auto& pool = c.candidates(TaskKind::Knowledge);
    const auto model = init_model(c.vocab().size(), EncoderConfig{}, 0);
    const std::span<const Candidate> first(pool.data(), 64);
    for (auto _ : state) benchmark::DoNotOptimize(encode_candidates(first, c.vocab(), model.encoder));
}
BENCHMARK(BM_EncodeCandidates);

void BM_EncodeContext(benchmark::State& state) {
    const auto& c = corpus();
    const auto& ex = c.examples().front();
    const auto model = init_model(c.vocab().size(), EncoderConfig{}, 0);
    const auto& d = c.dialogue(ex.dialogue_id);
    const auto mode = ContextMode::adaptive(3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(encode_context(d, ex.query_turn, mode, c.vocab(), model.encoder, model.fusion));
    }
}
BENCHMARK(BM_EncodeContext);

void BM_TrainStep(benchmark::State& state) {
    const auto& c = corpus();
    TrainConfig cfg;
    const auto model = init_model(c.vocab().size(), cfg.encoder, 0);
    const auto plan = plan_epoch(c, cfg, 0);
    std::size_t i = 0;
    for (auto _ : state) {
        Tape tape;
        const ModelParams bound{bind(model.encoder, tape), bind(model.fusion, tape)};
        const auto sims = batch_similarities(c, plan[i++ % plan.size()], cfg, c.vocab(), bound, i);
        const Tensor loss = combined_loss(sims, cfg.loss);
        benchmark::DoNotOptimize(backward(tape, loss));
    }
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

void BM_EvaluatePool64(benchmark::State& state) {
    const auto& c = corpus();
    const Checkpoint ck = initial_checkpoint(c.vocab(), TrainConfig{});
    EvalSettings s;
    s.max_queries = 200;
    for (auto _ : state) benchmark::DoNotOptimize(evaluate(c, ck, TaskKind::Response, s));
}
BENCHMARK(BM_EvaluatePool64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
