#include "ucr/model.hpp"

#include "ucr/errors.hpp"
#include "ucr/rng.hpp"

namespace ucr {

using nlohmann::json;

std::vector<Tensor> ModelParams::flatten() const {
    std::vector<Tensor> out{encoder.embedding, encoder.ff_weight, encoder.ff_bias};
    if (encoder.position) out.push_back(*encoder.position);
    out.push_back(fusion.gate);
    return out;
}

std::vector<std::string> ModelParams::names() const {
    std::vector<std::string> out{"embedding", "ff_weight", "ff_bias"};
    if (encoder.position) out.emplace_back("position");
    out.emplace_back("gate");
    return out;
}

void ModelParams::assign(const std::vector<Tensor>& flat) {
    const auto current = flatten();
    if (flat.size() != current.size()) throw ContractError("parameter count mismatch");
    for (std::size_t i = 0; i < flat.size(); ++i) {
        if (flat[i].shape() != current[i].shape()) {
            throw DimensionError("parameter " + std::to_string(i) + " has shape " + flat[i].shape().to_string() +
                                 ", expected " + current[i].shape().to_string());
        }
    }
    std::size_t i = 0;
    encoder.embedding = flat[i++].detached();
    encoder.ff_weight = flat[i++].detached();
    encoder.ff_bias = flat[i++].detached();
    if (encoder.position) encoder.position = flat[i++].detached();
    fusion.gate = flat[i++].detached();
}

ModelParams init_model(std::size_t vocab_size, const EncoderConfig& cfg, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x1417));
    ModelParams p;
    p.encoder = init_encoder(vocab_size, cfg, rng);
    p.fusion = init_fusion(cfg.dim, rng);
    return p;
}

void TrainConfig::validate() const {
    if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (!(loss.gamma > 0.0)) throw ConfigError("gamma must be positive");
    if (!loss.use_hist && !loss.use_pair) throw ConfigError("at least one loss must be enabled");
    if (mode.kind == ContextKind::Adaptive && mode.k == 0) throw ConfigError("adaptive mode needs k >= 1");
    if (encoder.dim == 0) throw ConfigError("embedding dimension must be positive");
    if (encoder.max_utterance_tokens == 0 || encoder.max_candidate_tokens == 0) {
        throw ConfigError("token limits must be positive");
    }
    if (!(adamw.beta1 >= 0.0 && adamw.beta1 < 1.0 && adamw.beta2 >= 0.0 && adamw.beta2 < 1.0 && adamw.eps > 0.0 &&
          adamw.weight_decay >= 0.0)) {
        throw ConfigError("invalid AdamW hyper-parameters");
    }
}

std::string regime_name(const TrainConfig& cfg) {
    return cfg.single_task ? std::string(to_string(*cfg.single_task)) : "full";
}

json to_json(const TrainConfig& cfg) {
    json j;
    j["epochs"] = cfg.epochs;
    j["batch_size"] = cfg.batch_size;
    j["learning_rate"] = cfg.learning_rate;
    j["schedule"] = to_string(cfg.schedule);
    j["mode"] = to_string(cfg.mode.kind);
    j["k"] = cfg.mode.k;
    j["gamma"] = cfg.loss.gamma;
    j["use_hist"] = cfg.loss.use_hist;
    j["use_pair"] = cfg.loss.use_pair;
    j["regime"] = regime_name(cfg);
    j["seed"] = cfg.seed;
    j["dim"] = cfg.encoder.dim;
    j["max_utterance_tokens"] = cfg.encoder.max_utterance_tokens;
    j["max_candidate_tokens"] = cfg.encoder.max_candidate_tokens;
    j["position_embedding"] = cfg.encoder.position_embedding;
    j["max_positions"] = cfg.encoder.max_positions;
    j["beta1"] = cfg.adamw.beta1;
    j["beta2"] = cfg.adamw.beta2;
    j["adam_eps"] = cfg.adamw.eps;
    j["weight_decay"] = cfg.adamw.weight_decay;
    j["max_steps"] = cfg.max_steps ? json(*cfg.max_steps) : json(nullptr);
    return j;
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig c;
    try {
        auto get = [&](const char* key, auto& out) {
            if (auto it = j.find(key); it != j.end() && !it->is_null()) it->get_to(out);
        };
        get("epochs", c.epochs);
        get("batch_size", c.batch_size);
        get("learning_rate", c.learning_rate);
        if (auto it = j.find("schedule"); it != j.end()) {
            auto s = parse_schedule(it->get<std::string>());
            if (!s) throw ConfigError("unknown schedule " + it->dump());
            c.schedule = *s;
        }
        if (auto it = j.find("mode"); it != j.end()) {
            auto k = parse_context_kind(it->get<std::string>());
            if (!k) throw ConfigError("unknown context mode " + it->dump());
            c.mode.kind = *k;
        }
        get("k", c.mode.k);
        get("gamma", c.loss.gamma);
        get("use_hist", c.loss.use_hist);
        get("use_pair", c.loss.use_pair);
        if (auto it = j.find("regime"); it != j.end()) {
            const auto r = it->get<std::string>();
            if (r == "full") {
                c.single_task.reset();
            } else if (auto t = parse_task(r)) {
                c.single_task = *t;
            } else {
                throw ConfigError("unknown regime " + r);
            }
        }
        get("seed", c.seed);
        get("dim", c.encoder.dim);
        get("max_utterance_tokens", c.encoder.max_utterance_tokens);
        get("max_candidate_tokens", c.encoder.max_candidate_tokens);
        get("position_embedding", c.encoder.position_embedding);
        get("max_positions", c.encoder.max_positions);
        get("beta1", c.adamw.beta1);
        get("beta2", c.adamw.beta2);
        get("adam_eps", c.adamw.eps);
        get("weight_decay", c.adamw.weight_decay);
        if (auto it = j.find("max_steps"); it != j.end() && !it->is_null()) c.max_steps = it->get<std::size_t>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed training config: ") + e.what());
    }
    c.validate();
    return c;
}

}  // namespace ucr
