// Copyright 2026 The kgx Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KGX_KGE_TRAINER_HPP
#define KGX_KGE_TRAINER_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <unordered_set>
#include <vector>

#include "kgx/core/knowledge_graph.hpp"
#include "kgx/kge/complex_model.hpp"
#include "kgx/kge/train_config.hpp"

namespace kgx {

/// One softmax classification problem: predict `target` for (anchor, relation row, ?).
struct Query {
    EntityId anchor;
    std::size_t row;
    EntityId target;
};

/// Each triple yields an object query (s, r, ?) and a subject query (o, r^-1, ?).
inline std::vector<Query> make_queries(std::span<const Triple> triples, std::size_t num_relations) {
    std::vector<Query> qs;
    qs.reserve(2 * triples.size());
    for (const auto& t : triples) {
        qs.push_back({t.subject, t.relation.index(), t.object});
        qs.push_back({t.object, t.relation.index() + num_relations, t.subject});
    }
    return qs;
}

/// Dense gradient with the same shape as the model.
struct Gradient {
    std::vector<double> entity;
    std::vector<double> relation;

    explicit Gradient(const EmbeddingModel& m) : entity(m.entity_data().size(), 0.0), relation(m.relation_data().size(), 0.0) {}
};

struct BatchLoss {
    double nll = 0.0;    // mean negative log-likelihood over the batch
    double total = 0.0;  // nll + weighted N3 penalty
};

/// Full-softmax NLL with N3 regularisation, averaged over the batch.
///
///   L = 1/B sum_q [ logsumexp_e f(a_q, w_q, e) - f(a_q, w_q, t_q) ]
///     + lambda/B sum_q sum_k (|a_qk|^3 + |w_qk|^3 + |t_qk|^3)
///
/// When `grad` is non-null the analytic gradient is accumulated into it.
inline BatchLoss batch_loss(const EmbeddingModel& m, std::span<const Query> batch, double regularization,
                            Gradient* grad = nullptr) {
    const auto d = m.dim();
    const auto w2 = m.row_width();
    const auto ne = m.num_entities();
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    std::vector<double> q(w2), gq(w2), scores(ne);
    BatchLoss out;
    double penalty = 0.0;

    auto n3 = [&](std::span<const double> row, double* g) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double mod = std::sqrt(row[k] * row[k] + row[k + d] * row[k + d]);
            s += mod * mod * mod;
            if (g) {
                const double c = regularization * inv_b * 3.0 * mod;
                g[k] += c * row[k];
                g[k + d] += c * row[k + d];
            }
        }
        return s;
    };

    for (const auto& qy : batch) {
        auto a = m.entity(qy.anchor);
        auto w = m.relation_row(qy.row);
        detail::complex_product(a, w, q);
        double mx = -INFINITY;
        for (std::size_t e = 0; e < ne; ++e) {
            scores[e] = detail::real_dot(q, m.entity(EntityId{e}));
            mx = std::max(mx, scores[e]);
        }
        double z = 0.0;
        for (std::size_t e = 0; e < ne; ++e) z += std::exp(scores[e] - mx);
        const double lse = mx + std::log(z);
        out.nll += lse - scores[qy.target.index()];

        if (grad) {
            std::fill(gq.begin(), gq.end(), 0.0);
            for (std::size_t e = 0; e < ne; ++e) {
                double ge = std::exp(scores[e] - lse);
                if (e == qy.target.index()) ge -= 1.0;
                ge *= inv_b;
                auto x = m.entity(EntityId{e});
                double* gx = grad->entity.data() + e * w2;
                for (std::size_t k = 0; k < w2; ++k) {
                    gx[k] += ge * q[k];
                    gq[k] += ge * x[k];
                }
            }
            double* ga = grad->entity.data() + qy.anchor.index() * w2;
            double* gw = grad->relation.data() + qy.row * w2;
            for (std::size_t k = 0; k < d; ++k) {
                ga[k] += gq[k] * w[k] + gq[k + d] * w[k + d];
                ga[k + d] += -gq[k] * w[k + d] + gq[k + d] * w[k];
                gw[k] += gq[k] * a[k] + gq[k + d] * a[k + d];
                gw[k + d] += -gq[k] * a[k + d] + gq[k + d] * a[k];
            }
        }
        if (regularization > 0.0) {
            penalty += n3(a, grad ? grad->entity.data() + qy.anchor.index() * w2 : nullptr);
            penalty += n3(w, grad ? grad->relation.data() + qy.row * w2 : nullptr);
            penalty += n3(m.entity(qy.target), grad ? grad->entity.data() + qy.target.index() * w2 : nullptr);
        }
    }
    out.nll *= inv_b;
    out.total = out.nll + regularization * inv_b * penalty;
    return out;
}

/// Rows allowed to change during training; an empty vector means "all".
struct TrainMask {
    std::vector<bool> entities;
    std::vector<bool> relation_rows;
};

struct TrainHistory {
    std::vector<double> train_nll;  // running mean of batch NLL over each epoch
    std::vector<double> valid_nll;  // NLL on evaluable valid triples after each epoch; empty without a valid split
};

struct TrainResult {
    EmbeddingModel model;
    TrainHistory history;
};

/// Mean NLL of the given triples under the model (both query directions), no regulariser.
inline double mean_nll(const EmbeddingModel& m, std::span<const Triple> triples) {
    if (triples.empty()) return 0.0;
    auto qs = make_queries(triples, m.num_relations());
    return batch_loss(m, qs, 0.0).nll;
}

namespace detail {

inline std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) {
    std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (epoch + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    return x;
}

inline bool row_trainable(const std::vector<bool>& mask, std::size_t row) { return mask.empty() || mask[row]; }

} // namespace detail

/// Adagrad over shuffled mini-batches. Accumulators start fresh on every call.
inline TrainResult train(EmbeddingModel model, const KnowledgeGraph& kg, std::span<const Triple> triples,
                         const TrainConfig& config, const TrainMask& mask = {}, bool record_validation = true) {
    config.validate();
    if (triples.empty()) throw DomainError("training needs a non-empty training set");
    const auto w2 = model.row_width();
    auto queries = make_queries(triples, model.num_relations());
    const auto valid = record_validation ? kg.evaluable(Split::valid) : std::vector<Triple>{};
    std::vector<double> acc_e(model.entity_data().size(), config.adagrad_initial_accumulator);
    std::vector<double> acc_r(model.relation_data().size(), config.adagrad_initial_accumulator);
    std::vector<std::size_t> order(queries.size());
    std::vector<Query> batch;
    TrainHistory history;

    auto step = [&](std::vector<double>& param, std::vector<double>& grad, std::vector<double>& acc,
                    const std::vector<bool>& rows) {
        const auto nrows = param.size() / w2;
        for (std::size_t r = 0; r < nrows; ++r) {
            if (!detail::row_trainable(rows, r)) continue;
            for (std::size_t k = r * w2; k < (r + 1) * w2; ++k) {
                const double g = grad[k];
                if (g == 0.0) continue;
                acc[k] += g * g;
                param[k] -= config.learning_rate * g / (std::sqrt(acc[k]) + config.adagrad_epsilon);
            }
        }
    };

    for (std::size_t epoch = 0; epoch < config.epochs && !queries.empty(); ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 rng(detail::epoch_seed(config.seed, epoch));
        std::shuffle(order.begin(), order.end(), rng);

        double nll_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const auto end = std::min(order.size(), start + config.batch_size);
            batch.clear();
            for (auto i = start; i < end; ++i) batch.push_back(queries[order[i]]);
            Gradient g(model);
            auto loss = batch_loss(model, batch, config.regularization, &g);
            if (!std::isfinite(loss.total)) throw TrainingError(epoch + 1, "loss diverged (non-finite)");
            nll_sum += loss.nll * static_cast<double>(batch.size());
            step(model.entity_data(), g.entity, acc_e, mask.entities);
            step(model.relation_data(), g.relation, acc_r, mask.relation_rows);
        }
        if (!model.all_finite()) throw TrainingError(epoch + 1, "non-finite embedding after update");
        history.train_nll.push_back(nll_sum / static_cast<double>(queries.size()));
        if (!valid.empty()) history.valid_nll.push_back(mean_nll(model, valid));
    }
    return {std::move(model), std::move(history)};
}

inline TrainResult train(EmbeddingModel model, const KnowledgeGraph& kg, const TrainConfig& config) {
    return train(std::move(model), kg, kg.train(), config);
}

/// Fine-tunes only the embeddings of `trainable` entities (and optionally the relations, with their
/// reciprocals, of triples in `modified_train` touching them); every other entry stays bit-identical.
inline EmbeddingModel post_train(const EmbeddingModel& model, const KnowledgeGraph& kg,
                                 std::span<const Triple> modified_train, const std::unordered_set<EntityId>& trainable,
                                 const TrainConfig& config, bool train_relations = false) {
    if (trainable.empty()) throw ConfigError("post-training needs at least one trainable entity");
    if (modified_train.empty()) throw ConfigError("post-training needs a non-empty training set");
    TrainMask mask;
    mask.entities.assign(model.num_entities(), false);
    mask.relation_rows.assign(model.num_relation_rows(), false);
    for (auto e : trainable) {
        if (e.index() >= model.num_entities()) throw DomainError("trainable entity outside the model");
        mask.entities[e.index()] = true;
    }
    if (train_relations)
        for (const auto& t : modified_train)
            if (trainable.contains(t.subject) || trainable.contains(t.object)) {
                mask.relation_rows[t.relation.index()] = true;
                mask.relation_rows[t.relation.index() + model.num_relations()] = true;
            }
    return train(model, kg, modified_train, config, mask, false).model;
}

} // namespace kgx

#endif
