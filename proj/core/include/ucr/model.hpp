#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ucr/context_fusion.hpp"
#include "ucr/corpus.hpp"
#include "ucr/encoder.hpp"
#include "ucr/objectives.hpp"
#include "ucr/optimizer.hpp"

namespace ucr {

/// All trainable tensors of the dual encoder.
struct ModelParams {
    EncoderParams encoder;
    FusionParams fusion;

    /// Parameters in their fixed declared order:
    /// embedding, ff_weight, ff_bias, [position], gate.
    [[nodiscard]] std::vector<Tensor> flatten() const;
    /// Inverse of flatten(); shapes must match.
    void assign(const std::vector<Tensor>& flat);
    [[nodiscard]] std::vector<std::string> names() const;
};

ModelParams init_model(std::size_t vocab_size, const EncoderConfig& cfg, std::uint64_t seed);

struct TrainConfig {
    std::size_t epochs = 5;
    std::size_t batch_size = 16;
    double learning_rate = 5e-3;
    LrSchedule schedule = LrSchedule::Constant;
    ContextMode mode = ContextMode::adaptive(3);
    LossConfig loss;
    /// Train on one task only; nullopt is the multi-task regime.
    std::optional<TaskKind> single_task;
    std::uint64_t seed = 0;
    EncoderConfig encoder;
    AdamWConfig adamw;
    /// Stop after this many optimizer steps in total (the schedule still
    /// spans every epoch).
    std::optional<std::size_t> max_steps;

    /// Throws ConfigError on invalid values.
    void validate() const;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// "full" or a task name.
std::string regime_name(const TrainConfig& cfg);

nlohmann::json to_json(const TrainConfig& cfg);
/// Missing fields keep their defaults. Throws ConfigError on bad values.
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace ucr
