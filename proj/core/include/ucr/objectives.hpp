#pragma once

/** \file objectives.hpp
 *  \brief Historical contrastive loss, pairwise similarity loss and their sum.
 *
 * For a batch of B contexts with similarities
 *   cross[i][j] = sim(context i, positive of j)   (pos[i] = cross[i][i])
 *   semi[i]     = sim(context i, its semi-hard historical candidate), when present
 *   easy[i]     = sim(context i, a random easy negative)
 *
 * L_hist = mean_i [ log(Σ_j e^{cross[i][j]} + e^{neg_i}) − cross[i][i] ],
 *          neg_i = semi[i] if present, else easy[i]
 * L_pair = log(1 + Σ_{i∈S} e^{γ(easy[i] − semi[i])} + Σ_{i∈S} e^{γ(semi[i] − pos[i])}),
 *          S = items that have a semi-hard candidate
 *
 * Both are evaluated through log-sum-exp and stay finite for similarity
 * magnitudes far beyond what training produces.
 */

#include <cstddef>
#include <vector>

#include "ucr/tensor.hpp"

namespace ucr {

struct BatchSimilarities {
    Tensor pos;    ///< [B]
    Tensor cross;  ///< [B×B]
    Tensor semi;   ///< [B]; entries with semi_present[i] == false are never read
    std::vector<bool> semi_present;
    Tensor easy;   ///< [B]

    [[nodiscard]] std::size_t batch_size() const { return pos.size(); }
    /// Number of items with a semi-hard candidate.
    [[nodiscard]] std::size_t semi_count() const;
};

/// Assembles a BatchSimilarities from per-item scalar similarity tensors so
/// gradients flow back to each of them. `cross[i][j]` is context i vs positive j.
BatchSimilarities assemble_similarities(const std::vector<std::vector<Tensor>>& cross, const std::vector<Tensor>& semi,
                                        const std::vector<bool>& semi_present, const std::vector<Tensor>& easy);

/// Checks shapes and the cross-diagonal invariant; throws DimensionError.
void validate(const BatchSimilarities& s);

struct LossConfig {
    double gamma = 1.0;
    bool use_hist = true;
    bool use_pair = true;

    friend bool operator==(const LossConfig&, const LossConfig&) = default;
};

Tensor historical_contrastive_loss(const BatchSimilarities& s);
/// Zero (a constant) when no item has a semi-hard candidate.
Tensor pairwise_similarity_loss(const BatchSimilarities& s, const LossConfig& cfg);
/// Unweighted sum of the enabled losses. ConfigError when both are disabled
/// or gamma is not positive.
Tensor combined_loss(const BatchSimilarities& s, const LossConfig& cfg);

}  // namespace ucr
