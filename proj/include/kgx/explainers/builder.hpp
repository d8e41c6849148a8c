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

#ifndef KGX_EXPLAINERS_BUILDER_HPP
#define KGX_EXPLAINERS_BUILDER_HPP

#include <deque>
#include <limits>
#include <map>
#include <random>

#include <spdlog/spdlog.h>

#include "kgx/explainers/run.hpp"

namespace kgx {

inline constexpr std::size_t unreachable = std::numeric_limits<std::size_t>::max();

/// Undirected hop distance from `source` to every entity over the train graph; unreachable entities get `unreachable`.
inline std::vector<std::size_t> train_distances(const KnowledgeGraph& kg, EntityId source) {
    kg.check_entity(source);
    std::vector<std::size_t> dist(kg.num_entities(), unreachable);
    std::deque<EntityId> queue{source};
    dist[source.index()] = 0;
    while (!queue.empty()) {
        auto u = queue.front();
        queue.pop_front();
        for (auto i : kg.train_incident(u)) {
            const auto& t = kg.train()[i];
            auto v = t.subject == u ? t.object : t.subject;
            if (dist[v.index()] == unreachable) {
                dist[v.index()] = dist[u.index()] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

/// Train triples touching s_x, closest other endpoint to o_x first (ties by train index), at most k.
inline std::vector<Triple> prefilter_topk(const KnowledgeGraph& kg, const Triple& prediction, std::size_t k) {
    if (k < 1) throw ConfigError("prefilter size must be >= 1");
    kg.check_triple(prediction);
    auto dist = train_distances(kg, prediction.object);
    std::vector<std::pair<std::size_t, std::size_t>> keyed;  // (distance, train index)
    for (auto i : kg.train_incident(prediction.subject)) {
        const auto& t = kg.train()[i];
        if (t == prediction) continue;
        auto other = t.subject == prediction.subject ? t.object : t.subject;
        keyed.emplace_back(dist[other.index()], i);
    }
    if (keyed.empty()) spdlog::warn("prefilter: entity {} has no train triples", kg.entities().label(prediction.subject));
    std::ranges::sort(keyed);
    if (keyed.size() > k) keyed.resize(k);
    std::vector<Triple> out;
    for (auto [d, i] : keyed) out.push_back(kg.train()[i]);
    return out;
}

namespace detail {

inline void next_combination_all(std::size_t n, std::size_t len, std::vector<std::vector<std::size_t>>& out) {
    std::vector<std::size_t> c(len);
    std::iota(c.begin(), c.end(), 0);
    while (true) {
        out.push_back(c);
        std::size_t i = len;
        while (i > 0 && c[i - 1] == n - len + i - 1) --i;
        if (i == 0) return;
        ++c[i - 1];
        for (std::size_t j = i; j < len; ++j) c[j] = c[j - 1] + 1;
    }
}

inline double binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

} // namespace detail

/// Prefilter, then singletons, then longer combinations up to max_length. Stops at the first candidate with
/// psi >= threshold. Each length evaluates at most max_candidates_per_length combinations: all of them in
/// relevance order when they fit, otherwise a seeded annealing walk started from the most relevant one.
inline ExplanationRun variable_length_builder(const EffectivenessEvaluator& eval, ExplainerConfig config = {}) {
    auto start = std::chrono::steady_clock::now();
    config.algorithm = Algorithm::builder;
    if (config.max_length > 4) throw ConfigError("max_length must lie in [1, 4]");
    auto pool = prefilter_topk(eval.kg(), eval.prediction(), config.top_k);
    if (pool.empty()) throw DomainError("builder: empty prefiltered space");
    auto run = detail::start_run(Algorithm::builder, config, eval, SpacePreset::subject_incident);
    const auto prov = SpacePreset::subject_incident;
    const std::size_t batch = std::max<std::size_t>(config.workers, 1);

    auto make = [&](const std::vector<std::size_t>& members) {
        CandidateExplanation x{{}, prov};
        for (auto i : members) x.triples.push_back(pool[i]);
        return x;
    };
    bool accepted = false;
    std::map<std::vector<std::size_t>, double> cache;
    // Evaluates a list of combinations in batches; stops as soon as one is accepted.
    auto evaluate_in_order = [&](const std::vector<std::vector<std::size_t>>& combos,
                                 const std::vector<std::optional<double>>& relevance) {
        for (std::size_t lo = 0; lo < combos.size() && !accepted; lo += batch) {
            auto hi = std::min(lo + batch, combos.size());
            std::vector<CandidateExplanation> xs;
            std::vector<std::optional<double>> hs;
            for (auto i = lo; i < hi; ++i) {
                xs.push_back(make(combos[i]));
                hs.push_back(relevance[i]);
            }
            auto recs = detail::evaluate_batch(eval, std::move(xs), std::move(hs), batch);
            for (std::size_t i = 0; i < recs.size(); ++i) {
                cache[combos[lo + i]] = recs[i].result->psi;
                if (recs[i].result->psi >= config.threshold) accepted = true;
                run.candidates.push_back(std::move(recs[i]));
            }
        }
    };

    std::vector<std::vector<std::size_t>> singles;
    for (std::size_t i = 0; i < pool.size(); ++i) singles.push_back({i});
    evaluate_in_order(singles, std::vector<std::optional<double>>(singles.size()));
    std::vector<double> single_psi(pool.size(), 0.0);
    for (std::size_t i = 0; i < pool.size() && i < run.candidates.size(); ++i) single_psi[i] = cache[{i}];

    auto relevance_of = [&](const std::vector<std::size_t>& c) {
        double r = 0.0;
        for (auto i : c) r += single_psi[i];
        return r;
    };
    auto more_relevant = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
        auto ra = relevance_of(a), rb = relevance_of(b);
        return ra != rb ? ra > rb : a < b;
    };

    std::mt19937_64 rng(config.seed);
    const std::size_t budget = config.max_candidates_per_length;
    for (std::size_t len = 2; len <= config.max_length && len <= pool.size() && !accepted; ++len) {
        if (detail::binomial(pool.size(), len) <= static_cast<double>(budget)) {
            std::vector<std::vector<std::size_t>> combos;
            detail::next_combination_all(pool.size(), len, combos);
            std::ranges::sort(combos, more_relevant);
            std::vector<std::optional<double>> rel;
            for (const auto& c : combos) rel.push_back(relevance_of(c));
            evaluate_in_order(combos, rel);
            continue;
        }
        // Annealing walk: swap one member for a non-member; Metropolis acceptance on psi.
        std::vector<std::size_t> by_rel(pool.size());
        std::iota(by_rel.begin(), by_rel.end(), 0);
        std::ranges::stable_sort(by_rel, [&](auto a, auto b) { return single_psi[a] > single_psi[b]; });
        std::vector<std::size_t> state(by_rel.begin(), by_rel.begin() + static_cast<std::ptrdiff_t>(len));
        std::ranges::sort(state);
        evaluate_in_order({state}, {relevance_of(state)});
        double state_psi = cache[state];
        std::size_t evaluated = 1;
        double temperature = config.initial_temperature;
        const std::size_t max_proposals = 20 * budget + 100;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (std::size_t proposals = 0; evaluated < budget && !accepted && proposals < max_proposals;) {
            std::vector<std::vector<std::size_t>> fresh;
            std::vector<std::vector<std::size_t>> proposed;
            // Draw up to `batch` proposals from the current state; unseen ones are evaluated together.
            for (std::size_t b = 0; b < batch && proposals < max_proposals; ++b, ++proposals) {
                std::vector<std::size_t> outside;
                for (std::size_t i = 0; i < pool.size(); ++i)
                    if (!std::ranges::binary_search(state, i)) outside.push_back(i);
                auto next = state;
                next[std::uniform_int_distribution<std::size_t>(0, len - 1)(rng)] =
                    outside[std::uniform_int_distribution<std::size_t>(0, outside.size() - 1)(rng)];
                std::ranges::sort(next);
                proposed.push_back(next);
                if (!cache.contains(next) && std::ranges::find(fresh, next) == fresh.end() &&
                    evaluated + fresh.size() < budget)
                    fresh.push_back(next);
                if ((proposals + 1) % config.proposals_per_temperature == 0) temperature *= config.cooling;
            }
            std::vector<std::optional<double>> rel;
            for (const auto& c : fresh) rel.push_back(relevance_of(c));
            evaluate_in_order(fresh, rel);
            evaluated += fresh.size();
            for (const auto& next : proposed) {
                auto it = cache.find(next);
                if (it == cache.end()) continue;
                double diff = it->second - state_psi;
                if (diff >= 0.0 || unit(rng) < std::exp(diff / temperature)) {
                    state = next;
                    state_psi = it->second;
                }
            }
        }
    }
    detail::finalize(run, eval, start);
    return run;
}

} // namespace kgx

#endif
