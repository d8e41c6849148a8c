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

#ifndef KGX_EXPLAIN_EFFECTIVENESS_HPP
#define KGX_EXPLAIN_EFFECTIVENESS_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <optional>
#include <random>
#include <span>
#include <unordered_set>
#include <vector>

#include <spdlog/spdlog.h>

#include "kgx/explain/types.hpp"
#include "kgx/kge/ranking.hpp"
#include "kgx/kge/trainer.hpp"

namespace kgx {

/// Retraining operator F: full retraining from the original seed, or post-training from the base model.
/// Every call is metered.
class Retrainer {
public:
    Retrainer(const KnowledgeGraph& kg, const EmbeddingModel& base, const EffectivenessConfig& config)
        : kg_(kg), base_(base), config_(config) {}

    EmbeddingModel full(std::span<const Triple> train_set) const {
        if (train_set.empty()) throw DomainError("degenerate training: the modified training set is empty");
        ++count_;
        return train(init_model(kg_, config_.train), kg_, train_set, config_.train, {}, false).model;
    }

    EmbeddingModel post(std::span<const Triple> train_set, const std::unordered_set<EntityId>& trainable) const {
        if (train_set.empty()) throw DomainError("degenerate training: the modified training set is empty");
        std::vector<Triple> fit;
        if (config_.post_train_incident_only) {
            for (const auto& t : train_set)
                if (trainable.contains(t.subject) || trainable.contains(t.object)) fit.push_back(t);
        } else {
            fit.assign(train_set.begin(), train_set.end());
        }
        ++count_;
        if (fit.empty()) return base_;
        return post_train(base_, kg_, fit, trainable, config_.post_train, config_.post_train_relations);
    }

    EmbeddingModel run(EvaluatorKind kind, std::span<const Triple> train_set,
                       const std::unordered_set<EntityId>& trainable) const {
        return kind == EvaluatorKind::full_retrain ? full(train_set) : post(train_set, trainable);
    }

    std::size_t retrains() const noexcept { return count_.load(); }

private:
    const KnowledgeGraph& kg_;
    const EmbeddingModel& base_;
    EffectivenessConfig config_;
    mutable std::atomic<std::size_t> count_{0};
};

namespace detail {

inline std::vector<Triple> unique_triples(std::span<const Triple> x) {
    std::vector<Triple> out(x.begin(), x.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline void require_in_train(const KnowledgeGraph& kg, std::span<const Triple> x) {
    if (x.empty()) throw DomainError("an explanation must be non-empty");
    for (const auto& t : x)
        if (!kg.in_train(t)) throw DomainError("explanation triple is not a training triple");
}

inline std::vector<Triple> train_without(const KnowledgeGraph& kg, std::span<const Triple> x) {
    std::unordered_set<Triple, TripleHash> drop(x.begin(), x.end());
    std::vector<Triple> out;
    out.reserve(kg.train().size());
    for (const auto& t : kg.train())
        if (!drop.contains(t)) out.push_back(t);
    return out;
}

inline std::vector<Triple> train_with(const KnowledgeGraph& kg, std::span<const Triple> extra) {
    std::vector<Triple> out(kg.train().begin(), kg.train().end());
    out.insert(out.end(), extra.begin(), extra.end());
    return out;
}

// `anchor` plus every entity sharing a triple with it in `triples`.
inline std::unordered_set<EntityId> neighbourhood(EntityId anchor, std::span<const Triple> triples) {
    std::unordered_set<EntityId> out{anchor};
    for (const auto& t : triples)
        if (t.touches(anchor)) {
            out.insert(t.subject);
            out.insert(t.object);
        }
    return out;
}

inline Triple swap_entity(const Triple& t, EntityId from, EntityId to) {
    Triple s = t;
    if (s.subject == from) s.subject = to;
    if (s.object == from) s.object = to;
    return s;
}

} // namespace detail

/// Psi = rank' - rank after removing X from train and retraining.
inline EffectivenessResult effectiveness_necessary(const KnowledgeGraph& kg, const EmbeddingModel& model,
                                                   const Triple& prediction, std::span<const Triple> explanation,
                                                   EvaluatorKind evaluator, const EffectivenessConfig& config) {
    auto x = detail::unique_triples(explanation);
    detail::require_in_train(kg, x);
    auto before = rank(model, kg, prediction, Direction::object, config.ties);
    const auto candidates = filtered_candidate_count(kg, prediction);
    if (before.rank >= candidates)
        throw PreconditionError("necessary explanations need rank < |E'| (rank " + std::to_string(before.rank) +
                                ", |E'| " + std::to_string(candidates) + ")");
    auto remaining = detail::train_without(kg, x);
    if (remaining.empty()) throw DomainError("degenerate training: removing X leaves the training set empty");

    Retrainer f(kg, model, config);
    auto trainable = detail::neighbourhood(prediction.subject, kg.train());
    auto retrained = f.run(evaluator, remaining, trainable);
    auto after = rank(retrained, kg, prediction, Direction::object, config.ties);

    EffectivenessResult r;
    r.mode = ExplanationMode::necessary;
    r.op = RetrainOperator::remove_retrain;
    r.evaluator = evaluator;
    r.rank_before = before.rank;
    r.rank_after = after.rank;
    r.psi = static_cast<double>(after.rank) - static_cast<double>(before.rank);
    r.score_before = before.score;
    r.score_after = after.score;
    r.retrains = f.retrains();
    return r;
}

/// Psi = rank - rank' after retraining on X alone.
///
/// With the frozen-neighborhood policy only the entities of X move, starting from the base
/// embeddings; with `none` a fresh model is trained on X alone.
inline EffectivenessResult effectiveness_sufficient(const KnowledgeGraph& kg, const EmbeddingModel& model,
                                                    const Triple& prediction, std::span<const Triple> explanation,
                                                    ContextPolicy context, const EffectivenessConfig& config) {
    auto x = detail::unique_triples(explanation);
    detail::require_in_train(kg, x);
    auto before = rank(model, kg, prediction, Direction::object, config.ties);

    Retrainer f(kg, model, config);
    EffectivenessResult r;
    EmbeddingModel retrained;
    if (context == ContextPolicy::none) {
        retrained = f.full(x);
        r.evaluator = EvaluatorKind::full_retrain;
        r.flags.push_back("likely meaningless embeddings: trained on the explanation alone without context");
    } else if (x.size() == kg.train().size()) {
        retrained = model;
        r.evaluator = EvaluatorKind::post_train;
    } else {
        std::unordered_set<EntityId> trainable;
        for (const auto& t : x) {
            trainable.insert(t.subject);
            trainable.insert(t.object);
        }
        retrained = f.post(x, trainable);
        r.evaluator = EvaluatorKind::post_train;
    }
    auto after = rank(retrained, kg, prediction, Direction::object, config.ties);
    const double diff = static_cast<double>(before.rank) - static_cast<double>(after.rank);
    r.mode = ExplanationMode::sufficient;
    r.op = RetrainOperator::keep_only_retrain;
    r.rank_before = before.rank;
    r.rank_after = after.rank;
    r.psi = config.sufficient_psi == SufficientPsi::signed_difference ? diff : -std::abs(diff);
    r.score_before = before.score;
    r.score_after = after.score;
    r.retrains = f.retrains();
    return r;
}

/// Entities whose (c, r_x, o_x) is not top-ranked; what C-sufficient explanations transfer to.
struct TargetSet {
    std::vector<EntityId> entities;
    Triple prediction;
    std::vector<std::string> warnings;
};

inline TargetSet build_target_set(const KnowledgeGraph& kg, const EmbeddingModel& model, const Triple& prediction,
                                  std::size_t size, std::uint64_t seed, TiePolicy ties = TiePolicy::optimistic) {
    if (size < 1) throw ConfigError("target set size must be >= 1");
    kg.check_triple(prediction);
    std::vector<EntityId> pool;
    for (std::size_t e = 0; e < kg.num_entities(); ++e) {
        EntityId c{e};
        if (c == prediction.subject) continue;
        Triple t{c, prediction.relation, prediction.object};
        if (rank(model, kg, t, Direction::object, ties).rank > 1) pool.push_back(c);
    }
    if (pool.empty()) throw DomainError("no entity c != s_x has (c, r_x, o_x) ranked below 1");
    TargetSet ts;
    ts.prediction = prediction;
    if (pool.size() < size) {
        ts.warnings.push_back("eligible pool has " + std::to_string(pool.size()) + " entities, fewer than " +
                              std::to_string(size) + " requested");
        spdlog::warn("target set: {}", ts.warnings.back());
    }
    std::mt19937_64 rng(seed);
    std::sample(pool.begin(), pool.end(), std::back_inserter(ts.entities), size, rng);
    return ts;
}

/// Psi = mean over C of rank(c, r_x, o_x) - rank'(c, r_x, o_x), after adding X with s_x swapped for c.
inline EffectivenessResult effectiveness_c_sufficient(const KnowledgeGraph& kg, const EmbeddingModel& model,
                                                      const Triple& prediction, std::span<const Triple> explanation,
                                                      const TargetSet& targets, EvaluatorKind evaluator,
                                                      const EffectivenessConfig& config) {
    auto x = detail::unique_triples(explanation);
    detail::require_in_train(kg, x);
    for (const auto& t : x)
        if (!t.touches(prediction.subject)) throw DomainError("C-sufficient explanations must contain s_x in every triple");
    if (targets.entities.empty()) throw DomainError("empty target set");

    Retrainer f(kg, model, config);
    EffectivenessResult r;
    r.mode = ExplanationMode::c_sufficient;
    r.op = RetrainOperator::add_swap_retrain;
    r.evaluator = evaluator;

    struct Plan {
        EntityId c;
        std::vector<Triple> added;
        std::vector<Triple> skipped;
    };
    std::vector<Plan> plans;
    for (auto c : targets.entities) {
        Plan p{c, {}, {}};
        for (const auto& t : x) {
            auto s = detail::swap_entity(t, prediction.subject, c);
            if (kg.in_train(s) || std::find(p.added.begin(), p.added.end(), s) != p.added.end()) {
                p.skipped.push_back(s);
                spdlog::debug("c-sufficient: swapped triple already in train, skipped for target {}", c.value);
            } else {
                p.added.push_back(s);
            }
        }
        plans.push_back(std::move(p));
    }

    auto rank_of = [&](const EmbeddingModel& m, EntityId c) {
        return rank(m, kg, Triple{c, prediction.relation, prediction.object}, Direction::object, config.ties);
    };

    std::optional<EmbeddingModel> shared;
    if (config.batched_targets) {
        std::vector<Triple> all_added;
        std::unordered_set<EntityId> trainable;
        for (const auto& p : plans) all_added.insert(all_added.end(), p.added.begin(), p.added.end());
        auto modified = detail::train_with(kg, all_added);
        for (const auto& p : plans) trainable.merge(detail::neighbourhood(p.c, modified));
        if (!all_added.empty()) shared = f.run(evaluator, modified, trainable);
    }

    double score_before = 0, score_after = 0;
    for (const auto& p : plans) {
        TargetOutcome o;
        o.target = p.c;
        o.skipped = p.skipped;
        auto b = rank_of(model, p.c);
        o.rank_before = b.rank;
        score_before += b.score;
        if (p.added.empty()) {
            o.rank_after = o.rank_before;
            score_after += b.score;
        } else {
            auto retrained = shared ? *shared : [&] {
                auto modified = detail::train_with(kg, p.added);
                return f.run(evaluator, modified, detail::neighbourhood(p.c, modified));
            }();
            auto a = rank_of(retrained, p.c);
            o.rank_after = a.rank;
            score_after += a.score;
        }
        o.psi = static_cast<double>(o.rank_before) - static_cast<double>(o.rank_after);
        if (config.normalize_target_change)
            o.psi /= std::max(1.0, static_cast<double>(o.rank_after) - 1.0);
        r.rank_before += o.rank_before;
        r.rank_after += o.rank_after;
        r.per_target.push_back(std::move(o));
    }
    if (config.aggregate == TargetAggregate::mean) {
        double s = 0;
        for (const auto& o : r.per_target) s += o.psi;
        r.psi = s / static_cast<double>(r.per_target.size());
    } else {
        r.psi = std::min_element(r.per_target.begin(), r.per_target.end(),
                                 [](const auto& a, const auto& b) { return a.psi < b.psi; })->psi;
    }
    auto n = static_cast<double>(plans.size());
    r.score_before = score_before / n;  // mean target score
    r.score_after = score_after / n;
    r.retrains = f.retrains();
    return r;
}

/// Adds unobserved triples X to train and retrains.
/// Psi = rank - rank' (positive polarity) or rank' - rank (negative), so higher is better for both.
inline EffectivenessResult effectiveness_latent(const KnowledgeGraph& kg, const EmbeddingModel& model,
                                                const Triple& prediction, std::span<const Triple> explanation,
                                                Polarity polarity, EvaluatorKind evaluator,
                                                const EffectivenessConfig& config) {
    auto x = detail::unique_triples(explanation);
    if (x.empty()) throw DomainError("an explanation must be non-empty");
    for (const auto& t : x) {
        kg.check_triple(t);
        if (kg.in_train(t)) throw DomainError("latent explanation overlaps the training set");
    }
    auto before = rank(model, kg, prediction, Direction::object, config.ties);
    if (polarity == Polarity::positive && before.rank <= 1)
        throw PreconditionError("positive latent explanations need rank > 1");
    if (polarity == Polarity::negative && before.rank >= kg.num_entities())
        throw PreconditionError("negative latent explanations need rank < |E|");

    auto modified = detail::train_with(kg, x);
    Retrainer f(kg, model, config);
    auto retrained = f.run(evaluator, modified, detail::neighbourhood(prediction.subject, modified));
    auto after = rank(retrained, kg, prediction, Direction::object, config.ties);

    EffectivenessResult r;
    r.mode = polarity == Polarity::positive ? ExplanationMode::latent_positive : ExplanationMode::latent_negative;
    r.op = RetrainOperator::add_retrain;
    r.evaluator = evaluator;
    r.rank_before = before.rank;
    r.rank_after = after.rank;
    const double diff = static_cast<double>(before.rank) - static_cast<double>(after.rank);
    r.psi = polarity == Polarity::positive ? diff : -diff;
    r.score_before = before.score;
    r.score_after = after.score;
    r.retrains = f.retrains();
    return r;
}

/// Binds a prediction, mode and evaluator so explainers can score candidates uniformly; meters calls.
class EffectivenessEvaluator {
public:
    EffectivenessEvaluator(const KnowledgeGraph& kg, const EmbeddingModel& model, Triple prediction,
                           ExplanationMode mode, EvaluatorKind evaluator, EffectivenessConfig config,
                           std::optional<TargetSet> targets = std::nullopt)
        : kg_(kg), model_(model), prediction_(prediction), mode_(mode), evaluator_(evaluator),
          config_(std::move(config)), targets_(std::move(targets)) {
        if (mode_ == ExplanationMode::c_sufficient && !targets_)
            throw ConfigError("C-sufficient evaluation needs a target set");
    }

    EffectivenessResult operator()(std::span<const Triple> x) const {
        EffectivenessResult r;
        switch (mode_) {
        case ExplanationMode::necessary:
            r = effectiveness_necessary(kg_, model_, prediction_, x, evaluator_, config_);
            break;
        case ExplanationMode::sufficient:
            r = effectiveness_sufficient(kg_, model_, prediction_, x, config_.context, config_);
            break;
        case ExplanationMode::c_sufficient:
            r = effectiveness_c_sufficient(kg_, model_, prediction_, x, *targets_, evaluator_, config_);
            break;
        case ExplanationMode::latent_positive:
            r = effectiveness_latent(kg_, model_, prediction_, x, Polarity::positive, evaluator_, config_);
            break;
        case ExplanationMode::latent_negative:
            r = effectiveness_latent(kg_, model_, prediction_, x, Polarity::negative, evaluator_, config_);
            break;
        }
        retrains_ += r.retrains;
        ++calls_;
        return r;
    }

    const KnowledgeGraph& kg() const noexcept { return kg_; }
    const EmbeddingModel& model() const noexcept { return model_; }
    const Triple& prediction() const noexcept { return prediction_; }
    ExplanationMode mode() const noexcept { return mode_; }
    EvaluatorKind evaluator() const noexcept { return evaluator_; }
    const EffectivenessConfig& config() const noexcept { return config_; }
    const std::optional<TargetSet>& targets() const noexcept { return targets_; }
    std::size_t retrains() const noexcept { return retrains_.load(); }
    std::size_t calls() const noexcept { return calls_.load(); }

private:
    const KnowledgeGraph& kg_;
    const EmbeddingModel& model_;
    Triple prediction_;
    ExplanationMode mode_;
    EvaluatorKind evaluator_;
    EffectivenessConfig config_;
    std::optional<TargetSet> targets_;
    mutable std::atomic<std::size_t> retrains_{0};
    mutable std::atomic<std::size_t> calls_{0};
};

} // namespace kgx

#endif
