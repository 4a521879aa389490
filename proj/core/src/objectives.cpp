#include "ucr/objectives.hpp"

#include <array>
#include <cmath>

#include "ucr/errors.hpp"
#include "ucr/ops.hpp"

namespace ucr {

std::size_t BatchSimilarities::semi_count() const {
    std::size_t n = 0;
    for (bool b : semi_present) n += b ? 1 : 0;
    return n;
}

BatchSimilarities assemble_similarities(const std::vector<std::vector<Tensor>>& cross, const std::vector<Tensor>& semi,
                                        const std::vector<bool>& semi_present, const std::vector<Tensor>& easy) {
    const std::size_t b = cross.size();
    if (b == 0 || semi.size() != b || semi_present.size() != b || easy.size() != b) {
        throw DimensionError("assemble_similarities: inconsistent batch sizes");
    }
    std::vector<Tensor> rows;
    std::vector<Tensor> diag;
    rows.reserve(b);
    diag.reserve(b);
    for (std::size_t i = 0; i < b; ++i) {
        if (cross[i].size() != b) throw DimensionError("assemble_similarities: cross row length differs from batch size");
        rows.push_back(concat(cross[i]));
        diag.push_back(cross[i][i]);
    }
    return BatchSimilarities{concat(diag), stack(rows), concat(semi), semi_present, concat(easy)};
}

void validate(const BatchSimilarities& s) {
    const std::size_t b = s.pos.size();
    if (b == 0) throw DimensionError("empty batch");
    if (s.pos.shape() != Shape::vector(b) || s.cross.shape() != Shape::matrix(b, b) ||
        s.semi.shape() != Shape::vector(b) || s.easy.shape() != Shape::vector(b) || s.semi_present.size() != b) {
        throw DimensionError("batch similarities have inconsistent shapes");
    }
    for (std::size_t i = 0; i < b; ++i) {
        if (std::abs(s.cross.at(i, i) - s.pos[i]) > 1e-12) throw DimensionError("cross diagonal differs from pos");
    }
}

Tensor historical_contrastive_loss(const BatchSimilarities& s) {
    validate(s);
    const std::size_t b = s.batch_size();
    std::vector<Tensor> per_item;
    per_item.reserve(b);
    for (std::size_t i = 0; i < b; ++i) {
        const Tensor r = row(s.cross, i);
        const Tensor neg = s.semi_present[i] ? element(s.semi, i) : element(s.easy, i);
        const std::array<Tensor, 2> logits{r, neg};
        per_item.push_back(sub(logsumexp(concat(logits)), element(r, i)));
    }
    return mean(concat(per_item));
}

Tensor pairwise_similarity_loss(const BatchSimilarities& s, const LossConfig& cfg) {
    validate(s);
    if (!(cfg.gamma > 0.0)) throw ConfigError("gamma must be positive");
    std::vector<Tensor> terms{Tensor::scalar(0.0)};
    std::vector<Tensor> upper;
    for (std::size_t i = 0; i < s.batch_size(); ++i) {
        if (!s.semi_present[i]) continue;
        const Tensor hist = element(s.semi, i);
        terms.push_back(scale(sub(element(s.easy, i), hist), cfg.gamma));
        upper.push_back(scale(sub(hist, element(s.pos, i)), cfg.gamma));
    }
    if (upper.empty()) return Tensor::scalar(0.0);
    terms.insert(terms.end(), upper.begin(), upper.end());
    return logsumexp(concat(terms));
}

Tensor combined_loss(const BatchSimilarities& s, const LossConfig& cfg) {
    if (!cfg.use_hist && !cfg.use_pair) throw ConfigError("at least one loss must be enabled");
    if (!(cfg.gamma > 0.0)) throw ConfigError("gamma must be positive");
    if (!cfg.use_pair) return historical_contrastive_loss(s);
    if (!cfg.use_hist) return pairwise_similarity_loss(s, cfg);
    return add(historical_contrastive_loss(s), pairwise_similarity_loss(s, cfg));
}

}  // namespace ucr
