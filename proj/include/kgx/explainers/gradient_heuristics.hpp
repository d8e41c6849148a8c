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

#ifndef KGX_EXPLAINERS_GRADIENT_HEURISTICS_HPP
#define KGX_EXPLAINERS_GRADIENT_HEURISTICS_HPP

#include <algorithm>
#include <numeric>

#include <spdlog/spdlog.h>

#include "kgx/explainers/run.hpp"

namespace kgx {

/// d f / d (subject, relation row, object) for the forward score of t, row layout.
struct ScoreGradient {
    std::vector<double> subject, relation, object;
};

inline ScoreGradient score_gradient(const EmbeddingModel& m, const Triple& t) {
    check_ids(m, t);
    const auto d = m.dim();
    auto a = m.entity(t.subject);
    auto w = m.relation_row(t.relation.index());
    auto x = m.entity(t.object);
    ScoreGradient g{grad_score_wrt_subject(m, t), std::vector<double>(2 * d), std::vector<double>(2 * d)};
    detail::complex_product(a, w, g.object);
    for (std::size_t k = 0; k < d; ++k) {
        g.relation[k] = a[k] * x[k] + a[k + d] * x[k + d];
        g.relation[k + d] = a[k] * x[k + d] - a[k + d] * x[k];
    }
    return g;
}

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline std::vector<std::size_t> order_desc(const std::vector<double>& key, const std::vector<std::size_t>& tiebreak) {
    std::vector<std::size_t> idx(key.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto i, auto j) {
        if (key[i] != key[j]) return key[i] > key[j];
        return tiebreak[i] < tiebreak[j];
    });
    return idx;
}

inline ExplanationRun heuristic_run(Algorithm algo, const EffectivenessEvaluator& eval, const ExplainerConfig& config,
                                    SpacePreset space, const std::vector<std::size_t>& pool,
                                    const std::vector<double>& heuristic, std::size_t evaluate_count,
                                    std::chrono::steady_clock::time_point start) {
    auto run = start_run(algo, config, eval, space);
    const auto& train = eval.kg().train();
    auto order = order_desc(heuristic, pool);
    evaluate_count = std::min(evaluate_count, order.size());
    std::vector<CandidateExplanation> head;
    std::vector<std::optional<double>> head_h;
    for (std::size_t k = 0; k < evaluate_count; ++k) {
        head.push_back({{train[pool[order[k]]]}, space});
        head_h.push_back(heuristic[order[k]]);
    }
    run.candidates = evaluate_batch(eval, std::move(head), std::move(head_h), config.workers);
    for (std::size_t k = evaluate_count; k < order.size(); ++k)
        run.candidates.push_back({{{train[pool[order[k]]]}, space}, heuristic[order[k]], std::nullopt, 0.0});
    finalize(run, eval, start);
    return run;
}

inline ExplanationRun empty_run(Algorithm algo, const EffectivenessEvaluator& eval, const ExplainerConfig& config,
                                SpacePreset space, std::string warning, std::chrono::steady_clock::time_point start) {
    auto run = start_run(algo, config, eval, space);
    spdlog::warn("{}", warning);
    run.warnings.push_back(std::move(warning));
    finalize(run, eval, start);
    return run;
}

} // namespace detail

/// Direct poisoning heuristic: shift e_s along -step * df/de_s of the prediction and rank the subject's
/// train triples (s_x, r, o) by f - lambda * f_shifted. The top M are evaluated; the rest carry only the heuristic.
inline std::vector<double> data_poisoning_scores(const EmbeddingModel& m, const Triple& prediction,
                                                 std::span<const Triple> candidates, double lambda, double step) {
    auto g = grad_score_wrt_subject(m, prediction);
    EmbeddingModel shifted = m;
    auto es = shifted.entity(prediction.subject);
    for (std::size_t k = 0; k < es.size(); ++k) es[k] -= step * g[k];
    std::vector<double> out;
    out.reserve(candidates.size());
    for (const auto& t : candidates) out.push_back(score(m, t) - lambda * score(shifted, t));
    return out;
}

inline ExplanationRun data_poisoning_direct(const EffectivenessEvaluator& eval, ExplainerConfig config = {}) {
    auto start = std::chrono::steady_clock::now();
    config.algorithm = Algorithm::data_poisoning;
    const auto& kg = eval.kg();
    const auto& pred = eval.prediction();
    std::vector<std::size_t> pool;
    for (auto i : kg.train_incident(pred.subject))
        if (kg.train()[i].subject == pred.subject && kg.train()[i] != pred) pool.push_back(i);
    if (pool.empty())
        return detail::empty_run(Algorithm::data_poisoning, eval, config, SpacePreset::subject_match,
                                 "data poisoning: the prediction's subject has no outgoing train triples", start);
    std::vector<Triple> cands;
    for (auto i : pool) cands.push_back(kg.train()[i]);
    auto h = data_poisoning_scores(eval.model(), pred, cands, config.lambda, config.perturbation_step);
    return detail::heuristic_run(Algorithm::data_poisoning, eval, config, SpacePreset::subject_match, pool, h,
                                 config.top_m, start);
}

/// First-order estimate of f'(prediction) - f(prediction) after removing `candidate`.
///
/// Removing a triple leaves the gradient -grad l_t at the old optimum, so one descent step of size `step`
/// moves each embedding by +step * grad l_t, where l_t is the candidate's NLL over both query directions.
/// Only embeddings the candidate and the prediction both name explicitly move; the change is pushed
/// through the prediction's score gradient.
inline double influence_estimate(const EmbeddingModel& m, const Triple& prediction, const Triple& candidate,
                                 double step) {
    check_ids(m, prediction);
    check_ids(m, candidate);
    const auto w2 = m.row_width();
    auto fg = score_gradient(m, prediction);
    Gradient lg(m);
    std::array<Triple, 1> one{candidate};
    auto qs = make_queries(one, m.num_relations());
    batch_loss(m, qs, 0.0, &lg);

    auto entity_grad = [&](EntityId e) {
        std::vector<double> v(w2, 0.0);
        if (e == prediction.subject)
            for (std::size_t k = 0; k < w2; ++k) v[k] += fg.subject[k];
        if (e == prediction.object)
            for (std::size_t k = 0; k < w2; ++k) v[k] += fg.object[k];
        return v;
    };
    // batch_loss averages over the two queries; scale back to a sum.
    const double scale = static_cast<double>(qs.size());
    double delta = 0.0;
    std::vector<EntityId> shared;
    for (auto e : {candidate.subject, candidate.object})
        if ((e == prediction.subject || e == prediction.object) && std::ranges::find(shared, e) == shared.end())
            shared.push_back(e);
    for (auto e : shared) {
        auto fe = entity_grad(e);
        std::span<const double> le(lg.entity.data() + e.index() * w2, w2);
        delta += detail::dot(fe, le);
    }
    if (candidate.relation == prediction.relation) {
        std::span<const double> lw(lg.relation.data() + prediction.relation.index() * w2, w2);
        delta += detail::dot(fg.relation, lw);
    }
    return step * scale * delta;
}

/// Influence-style ranking over train triples (s, r, o_x) sharing the prediction's object.
/// Candidates are ordered by estimated damage (-estimate); the heuristic stored per record is the estimate itself.
inline ExplanationRun criage_first_order(const EffectivenessEvaluator& eval, ExplainerConfig config = {}) {
    auto start = std::chrono::steady_clock::now();
    config.algorithm = Algorithm::criage;
    const auto& kg = eval.kg();
    const auto& pred = eval.prediction();
    std::vector<std::size_t> pool;
    for (auto i : kg.train_incident(pred.object))
        if (kg.train()[i].object == pred.object && kg.train()[i] != pred) pool.push_back(i);
    if (pool.empty())
        return detail::empty_run(Algorithm::criage, eval, config, SpacePreset::object_match,
                                 "first-order influence: the prediction's object has no incoming train triples", start);
    std::vector<double> estimate, damage;
    for (auto i : pool) {
        estimate.push_back(influence_estimate(eval.model(), pred, kg.train()[i], config.influence_step));
        damage.push_back(-estimate.back());
    }
    auto run = detail::heuristic_run(Algorithm::criage, eval, config, SpacePreset::object_match, pool, damage,
                                     config.evaluate_all ? pool.size() : config.top_m, start);
    for (auto& rec : run.candidates) rec.heuristic = -*rec.heuristic;
    return run;
}

} // namespace kgx

#endif
