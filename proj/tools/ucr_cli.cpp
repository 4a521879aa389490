// Command-line front end: corpus generation, training, evaluation and the
// analysis sweeps. Reports go to stdout as JSON; diagnostics go to stderr.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ucr/analysis.hpp"
#include "ucr/checkpoint.hpp"
#include "ucr/errors.hpp"
#include "ucr/retrieval.hpp"
#include "ucr/synthetic.hpp"
#include "ucr/trainer.hpp"

namespace {

using nlohmann::json;
using namespace ucr;

struct TrainArgs {
    std::string regime = "full";
    std::string mode = "adaptive";
    std::size_t k = 3;
    double gamma = 1.0;
    bool no_pair = false;
    bool no_hist = false;
    std::size_t epochs = 5;
    std::size_t batch = 16;
    double lr = 5e-3;
    std::string schedule = "constant";
    std::size_t dim = 64;
    bool position = false;
    double weight_decay = 0.01;
    std::uint64_t seed = 0;
    std::optional<std::size_t> max_steps;

    void add_to(CLI::App& app) {
        app.add_option("--regime", regime, "full, persona, knowledge or response")->capture_default_str();
        app.add_option("--mode", mode, "adaptive, full-concat, no-prev or mean-pool")->capture_default_str();
        app.add_option("--k", k, "previous-session utterances kept by adaptive mode")->capture_default_str();
        app.add_option("--gamma", gamma, "pairwise loss scale")->capture_default_str();
        app.add_flag("--no-pair", no_pair, "drop the pairwise similarity loss");
        app.add_flag("--no-hist", no_hist, "drop the historical contrastive loss");
        app.add_option("--epochs", epochs)->capture_default_str();
        app.add_option("--batch", batch)->capture_default_str();
        app.add_option("--lr", lr)->capture_default_str();
        app.add_option("--schedule", schedule, "constant or linear-decay")->capture_default_str();
        app.add_option("--dim", dim, "embedding dimension")->capture_default_str();
        app.add_flag("--position", position, "add discourse-position embeddings");
        app.add_option("--weight-decay", weight_decay)->capture_default_str();
        app.add_option("--seed", seed)->capture_default_str();
        app.add_option("--max-steps", max_steps, "stop after this many optimizer steps");
    }

    [[nodiscard]] TrainConfig config() const {
        TrainConfig c;
        c.epochs = epochs;
        c.batch_size = batch;
        c.learning_rate = lr;
        const auto s = parse_schedule(schedule);
        if (!s) throw ConfigError("unknown schedule '" + schedule + "'");
        c.schedule = *s;
        const auto m = parse_context_kind(mode);
        if (!m) throw ConfigError("unknown mode '" + mode + "'");
        c.mode = *m == ContextKind::Adaptive ? ContextMode::adaptive(k) : ContextMode{*m, 0};
        c.loss.gamma = gamma;
        c.loss.use_pair = !no_pair;
        c.loss.use_hist = !no_hist;
        if (regime != "full") {
            const auto t = parse_task(regime);
            if (!t) throw ConfigError("unknown regime '" + regime + "'");
            c.single_task = *t;
        }
        c.encoder.dim = dim;
        c.encoder.position_embedding = position;
        c.adamw.weight_decay = weight_decay;
        c.seed = seed;
        c.max_steps = max_steps;
        c.validate();
        return c;
    }
};

std::vector<TaskKind> parse_tasks(const std::string& spec) {
    if (spec == "all") return {kAllTasks.begin(), kAllTasks.end()};
    std::vector<TaskKind> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto t = parse_task(item);
        if (!t) throw ConfigError("unknown task '" + item + "'");
        out.push_back(*t);
    }
    if (out.empty()) throw ConfigError("no task given");
    return out;
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

void print_table(const std::vector<MetricsReport>& reports) {
    std::printf("%-12s %-16s %6s %8s %8s %8s %8s\n", "task", "label", "pool", "queries", "R@1", "R@5", "MRR");
    for (const auto& r : reports) {
        std::printf("%-12s %-16s %6zu %8zu %8.4f %8.4f %8.4f\n", std::string(to_string(r.task)).c_str(),
                    r.label.c_str(), r.pool_size, r.query_count, r.r_at_1, r.r_at_5, r.mrr);
    }
}

json reports_json(const std::vector<MetricsReport>& reports) {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    return arr;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-session dialogue candidate retrieval with history-aware dual encoders"};
    app.require_subcommand(1);

    // gen-data
    GeneratorConfig gen;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    bool ungrounded = false;
    auto* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic corpus");
    gen_cmd->add_option("--out", gen_out, "output corpus file")->required();
    gen_cmd->add_option("--topics", gen.topics)->capture_default_str();
    gen_cmd->add_option("--facets", gen.facets)->capture_default_str();
    gen_cmd->add_option("--dialogues-per-task", gen.dialogues_per_task)->capture_default_str();
    gen_cmd->add_option("--sessions", gen.sessions_per_dialogue)->capture_default_str();
    gen_cmd->add_option("--turns", gen.turns_per_session, "user/system pairs per session")->capture_default_str();
    gen_cmd->add_option("--vocab-size", gen.vocab_size)->capture_default_str();
    gen_cmd->add_option("--query-topic-prob", gen.query_topic_prob)->capture_default_str();
    gen_cmd->add_option("--history-topic-prob", gen.history_topic_prob)->capture_default_str();
    gen_cmd->add_option("--distractor-prob", gen.distractor_prob)->capture_default_str();
    gen_cmd->add_flag("--ungrounded", ungrounded, "draw positives independently of the text");
    gen_cmd->add_option("--seed", gen_seed)->capture_default_str();

    // Shared by every command that reads a corpus.
    std::string corpus_path;
    double holdout = 0.2;
    auto add_corpus = [&](CLI::App* cmd) {
        cmd->add_option("--corpus", corpus_path, "corpus file")->required();
        cmd->add_option("--holdout", holdout, "fraction of dialogues held out for evaluation")->capture_default_str();
    };

    // train
    TrainArgs targs;
    std::string train_out;
    std::string resume_path;
    auto* train_cmd = app.add_subcommand("train", "train a model on the training split");
    add_corpus(train_cmd);
    targs.add_to(*train_cmd);
    train_cmd->add_option("--out", train_out, "output checkpoint")->required();
    train_cmd->add_option("--resume", resume_path, "continue from this checkpoint");

    // eval
    std::string ckpt_path;
    std::string task_spec = "all";
    EvalSettings eval;
    std::string eval_mode;
    std::size_t eval_k = 0;
    bool as_json = false;
    auto add_eval = [&](CLI::App* cmd, const std::string& seed_flag) {
        cmd->add_option(seed_flag, eval.seed, "pool sampling seed")->capture_default_str();
        cmd->add_option("--max-queries", eval.max_queries, "evaluate at most this many queries per task");
    };
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the held-out split");
    add_corpus(eval_cmd);
    add_eval(eval_cmd, "--seed");
    eval_cmd->add_flag("--json", as_json, "emit JSON instead of a table");
    eval_cmd->add_option("--ckpt", ckpt_path, "checkpoint")->required();
    eval_cmd->add_option("--task", task_spec, "persona, knowledge, response or all")->capture_default_str();
    eval_cmd->add_option("--pool-size", eval.pool_size)->capture_default_str();
    eval_cmd->add_option("--mode", eval_mode, "override the checkpoint's context mode");
    eval_cmd->add_option("--k", eval_k, "k for an adaptive --mode override");

    // sweep-pool
    std::string sizes_spec = "256,128,64,32,16,8,4,2";
    auto* pool_cmd = app.add_subcommand("sweep-pool", "evaluate one checkpoint over several pool sizes");
    add_corpus(pool_cmd);
    add_eval(pool_cmd, "--seed");
    pool_cmd->add_option("--ckpt", ckpt_path)->required();
    pool_cmd->add_option("--task", task_spec)->capture_default_str();
    pool_cmd->add_option("--sizes", sizes_spec)->capture_default_str();

    // sweep-k
    std::string ks_spec = "1,2,3,4";
    bool no_retrain = false;
    auto* k_cmd = app.add_subcommand("sweep-k", "compare adaptive K values against the no-previous-session mode");
    add_corpus(k_cmd);
    add_eval(k_cmd, "--eval-seed");
    targs.add_to(*k_cmd);
    k_cmd->add_option("--task", task_spec)->capture_default_str();
    k_cmd->add_option("--ks", ks_spec)->capture_default_str();
    k_cmd->add_option("--pool-size", eval.pool_size)->capture_default_str();
    k_cmd->add_flag("--no-retrain", no_retrain, "evaluate --ckpt under each mode instead of training per mode");
    k_cmd->add_option("--ckpt", ckpt_path, "checkpoint for --no-retrain");

    // ablate
    std::string variants_spec = "full,no-context-enc,no-pair,no-hist";
    std::string seeds_spec = "0,1,2";
    auto* ab_cmd = app.add_subcommand("ablate", "train and evaluate loss and context ablations");
    add_corpus(ab_cmd);
    targs.add_to(*ab_cmd);
    ab_cmd->add_option("--variants", variants_spec)->capture_default_str();
    ab_cmd->add_option("--seeds", seeds_spec, "training seeds")->capture_default_str();
    ab_cmd->add_option("--task", task_spec)->capture_default_str();
    ab_cmd->add_option("--pool-size", eval.pool_size)->capture_default_str();
    add_eval(ab_cmd, "--eval-seed");

    CLI11_PARSE(app, argc, argv);

    auto list = [](const std::string& spec, const char* what) {
        std::vector<std::string> items;
        std::stringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) items.push_back(item);
        }
        if (items.empty()) throw ConfigError(std::string("empty ") + what + " list");
        return items;
    };
    auto numbers = [&](const std::string& spec, const char* what) {
        std::vector<std::uint64_t> out;
        for (const auto& s : list(spec, what)) {
            std::size_t used = 0;
            unsigned long long v = 0;
            try {
                v = std::stoull(s, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != s.size()) throw ConfigError(std::string("bad ") + what + " value '" + s + "'");
            out.push_back(v);
        }
        return out;
    };

    try {
        if (*gen_cmd) {
            gen.grounded = !ungrounded;
            const Corpus corpus = generate_synthetic(gen, gen_seed);
            save_corpus(corpus, gen_out);
            print(json{{"corpus", gen_out},
                       {"dialogues", corpus.dialogues().size()},
                       {"examples", corpus.examples().size()},
                       {"candidates", corpus.all_candidates().size()},
                       {"vocab_size", corpus.vocab().size()}});
            return 0;
        }

        const Corpus corpus = load_corpus(corpus_path);
        const CorpusSplit split = split_by_dialogue(corpus, holdout);

        if (*train_cmd) {
            const TrainConfig cfg = targs.config();
            std::optional<Checkpoint> resume;
            if (!resume_path.empty()) resume = load_checkpoint(resume_path);
            const auto result = train(split.train, cfg, resume ? &*resume : nullptr);
            save_checkpoint(result.checkpoint, train_out);
            const double last = result.loss_history.empty() ? 0.0 : result.loss_history.back();
            print(json{{"checkpoint", train_out},
                       {"steps", result.checkpoint.step},
                       {"final_loss", last},
                       {"config", to_json(cfg)}});
            return 0;
        }

        if (*eval_cmd) {
            const Checkpoint ck = load_checkpoint(ckpt_path);
            if (!eval_mode.empty()) {
                const auto m = parse_context_kind(eval_mode);
                if (!m) throw ConfigError("unknown mode '" + eval_mode + "'");
                eval.mode = *m == ContextKind::Adaptive ? ContextMode::adaptive(eval_k ? eval_k : ck.config.mode.k)
                                                        : ContextMode{*m, 0};
            }
            std::vector<MetricsReport> reports;
            for (TaskKind t : parse_tasks(task_spec)) reports.push_back(evaluate(split.test, ck, t, eval));
            if (!as_json) {
                print_table(reports);
            } else if (reports.size() == 1) {
                print(to_json(reports.front()));
            } else {
                print(reports_json(reports));
            }
            return 0;
        }

        if (*pool_cmd) {
            const Checkpoint ck = load_checkpoint(ckpt_path);
            std::vector<std::size_t> sizes;
            for (auto v : numbers(sizes_spec, "size")) sizes.push_back(v);
            std::vector<MetricsReport> reports;
            for (TaskKind t : parse_tasks(task_spec)) {
                auto part = pool_size_sweep(split.test, ck, t, sizes, eval);
                reports.insert(reports.end(), part.begin(), part.end());
            }
            print(reports_json(reports));
            return 0;
        }

        if (*k_cmd) {
            std::vector<std::size_t> ks;
            for (auto v : numbers(ks_spec, "k")) ks.push_back(v);
            std::optional<Checkpoint> ck;
            KSweepOptions opts;
            opts.retrain = !no_retrain;
            if (no_retrain) {
                if (ckpt_path.empty()) throw ConfigError("--no-retrain needs --ckpt");
                ck = load_checkpoint(ckpt_path);
                opts.checkpoint = &*ck;
            }
            const TrainConfig cfg = targs.config();
            std::vector<MetricsReport> reports;
            for (TaskKind t : parse_tasks(task_spec)) {
                auto part = k_sweep(split, cfg, t, ks, eval, opts);
                reports.insert(reports.end(), part.begin(), part.end());
            }
            print(reports_json(reports));
            return 0;
        }

        if (*ab_cmd) {
            std::vector<Variant> variants;
            for (const auto& name : list(variants_spec, "variant")) {
                const auto v = parse_variant(name);
                if (!v) throw ConfigError("unknown variant '" + name + "'");
                variants.push_back(*v);
            }
            const auto cells =
                ablation_run(split, targs.config(), variants, numbers(seeds_spec, "seed"), parse_tasks(task_spec), eval);
            json arr = json::array();
            for (const auto& c : cells) {
                json j = to_json(c.report);
                j["variant"] = to_string(c.variant);
                j["seed"] = c.seed;
                arr.push_back(std::move(j));
            }
            print(arr);
            return 0;
        }
    } catch (const ParseError& e) {
        std::cerr << "ucr: parse error: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        std::cerr << "ucr: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "ucr: unexpected failure: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
