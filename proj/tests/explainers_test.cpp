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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>

#include "helpers.hpp"
#include "kgx/explain/json.hpp"
#include "kgx/explainers.hpp"

using namespace kgx;

namespace {

struct Desk {
    KnowledgeGraph kg;
    TrainConfig cfg;
    EmbeddingModel model;
    std::vector<Triple> preds;  // rank-1 test predictions
};

const Desk& desk40() {
    static const Desk d = [] {
        SyntheticSpec s;
        s.entities = 40;
        s.seed = 4;
        auto kg = make_synthetic_kg(s);
        auto cfg = test::desk_config();
        cfg.dimension = 8;
        cfg.epochs = 60;
        auto m = train(init_model(kg, cfg), kg, cfg).model;
        std::vector<Triple> preds;
        for (const auto& t : kg.evaluable(Split::test))
            if (rank(m, kg, t).rank == 1) preds.push_back(t);
        return Desk{std::move(kg), cfg, std::move(m), std::move(preds)};
    }();
    return d;
}

EffectivenessConfig eff(const TrainConfig& cfg) {
    EffectivenessConfig e;
    e.train = cfg;
    e.post_train = cfg;
    return e;
}

EffectivenessEvaluator necessary(const Desk& d, const Triple& p, EvaluatorKind k = EvaluatorKind::post_train) {
    return EffectivenessEvaluator(d.kg, d.model, p, ExplanationMode::necessary, k, eff(d.cfg));
}

double best_psi(const ExplanationRun& run) { return run.best_record() ? run.best_record()->result->psi : -1e300; }

// Spearman correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::ranges::sort(idx, [&](auto i, auto j) { return v[i] < v[j]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size();) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
            for (auto k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
            i = j + 1;
        }
        return r;
    };
    auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n, mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

} // namespace

TEST(Exhaustive, SingleTripleSpaceIsBestByVacuity) {
    const auto& d = desk40();
    ASSERT_FALSE(d.preds.empty());
    auto ev = necessary(d, d.preds[0]);
    std::vector<Triple> one{d.kg.train()[d.kg.train_incident(d.preds[0].subject).front()]};
    auto run = exhaustive_length1(ev, one, SpacePreset::subject_incident);
    ASSERT_TRUE(run.best);
    EXPECT_EQ(run.best_record()->explanation.triples, one);
    EXPECT_THROW(exhaustive_length1(ev, std::vector<Triple>{}, SpacePreset::train_all), DomainError);
}

TEST(Exhaustive, SupersetSpaceNeverLowersBestPsi) {
    const auto& d = desk40();
    for (std::size_t i = 0; i < std::min<std::size_t>(3, d.preds.size()); ++i) {
        auto ev = necessary(d, d.preds[i]);
        ExplainerConfig c;
        c.space = SpacePreset::subject_match;
        auto narrow = exhaustive_length1(ev, c);
        c.space = SpacePreset::one_hop;
        auto wide = exhaustive_length1(ev, c);
        EXPECT_GE(best_psi(wide), best_psi(narrow));
        auto space = build_search_space(d.kg, SpacePreset::one_hop, d.preds[i]);
        for (const auto& rec : wide.candidates) {
            EXPECT_TRUE(space.contains(rec.explanation.triples[0]));
            EXPECT_EQ(rec.explanation.length(), 1u);
        }
    }
}

TEST(Exhaustive, MatchesRemoveRetrainSweep) {
    const auto& d = desk40();
    auto p = d.preds[0];
    auto ev = necessary(d, p, EvaluatorKind::full_retrain);
    ExplainerConfig c;
    c.workers = 4;
    auto run = exhaustive_length1(ev, c);

    // independent sweep: every train triple touching s_x, in train order
    double best = -1e300;
    Triple best_t{};
    const auto base = rank(d.model, d.kg, p).rank;
    std::size_t n = 0;
    for (const auto& t : d.kg.train()) {
        if (!t.touches(p.subject)) continue;
        ++n;
        std::vector<Triple> kept;
        for (const auto& u : d.kg.train())
            if (u != t) kept.push_back(u);
        auto m = train(init_model(d.kg, d.cfg), d.kg, kept, d.cfg, {}, false).model;
        const double psi = static_cast<double>(rank(m, d.kg, p).rank) - static_cast<double>(base);
        if (psi > best) {
            best = psi;
            best_t = t;
        }
    }
    ASSERT_EQ(run.candidates.size(), n);
    EXPECT_EQ(best_psi(run), best);
    EXPECT_EQ(run.best_record()->explanation.triples[0], best_t);
    EXPECT_EQ(run.retrains, n);
}

TEST(DataPoisoning, LambdaZeroOrdersByScore) {
    const auto& d = desk40();
    auto p = d.preds[0];
    std::vector<Triple> nb;
    for (const auto& t : d.kg.train())
        if (t.subject == p.subject && t != p) nb.push_back(t);
    ASSERT_FALSE(nb.empty());
    auto h = data_poisoning_scores(d.model, p, nb, 0.0, 0.1);
    for (std::size_t i = 0; i < nb.size(); ++i) EXPECT_DOUBLE_EQ(h[i], score(d.model, nb[i]));
    auto h0 = data_poisoning_scores(d.model, p, nb, 0.3, 0.0);
    for (std::size_t i = 0; i < nb.size(); ++i) EXPECT_NEAR(h0[i], 0.7 * score(d.model, nb[i]), 1e-12);

    auto ev = necessary(d, p);
    ExplainerConfig c;
    c.lambda = 0.0;
    c.top_m = 1;
    auto run = data_poisoning_direct(ev, c);
    ASSERT_TRUE(run.best);
    double top = -1e300;
    for (const auto& t : nb) top = std::max(top, score(d.model, t));
    EXPECT_DOUBLE_EQ(score(d.model, run.best_record()->explanation.triples[0]), top);
    EXPECT_EQ(run.space, SpacePreset::subject_match);
}

TEST(Criage, NoSharedEmbeddingGivesZero) {
    const auto& d = desk40();
    auto p = d.preds[0];
    for (const auto& t : d.kg.train()) {
        if (t.touches(p.subject) || t.touches(p.object) || t.relation == p.relation) continue;
        EXPECT_EQ(influence_estimate(d.model, p, t, 0.1), 0.0);
    }
}

TEST(Criage, EstimateIsLinearInStep) {
    const auto& d = desk40();
    auto p = d.preds[0];
    for (auto i : d.kg.train_incident(p.object)) {
        const auto& t = d.kg.train()[i];
        EXPECT_NEAR(influence_estimate(d.model, p, t, 0.2), 2.0 * influence_estimate(d.model, p, t, 0.1), 1e-12);
    }
}

TEST(Criage, EstimateCorrelatesWithPostTrainScoreChange) {
    const auto& d = desk40();
    std::vector<double> est, truth;
    auto cfg = eff(d.cfg);
    for (const auto& p : d.preds) {
        for (auto i : d.kg.train_incident(p.object)) {
            const auto& t = d.kg.train()[i];
            if (t.object != p.object || t == p) continue;
            est.push_back(influence_estimate(d.model, p, t, 0.1));
            std::vector<Triple> kept;
            for (const auto& u : d.kg.train())
                if (u != t) kept.push_back(u);
            std::unordered_set<EntityId> trainable{p.subject, p.object, t.subject};
            auto m = post_train(d.model, d.kg, kept, trainable, cfg.post_train);
            truth.push_back(score(m, p) - score(d.model, p));
        }
    }
    ASSERT_GE(est.size(), 5u);
    EXPECT_GT(spearman(est, truth), 0.0);
}

TEST(Criage, RunIsObjectMatchAndEvaluatesAllWhenAsked) {
    const auto& d = desk40();
    auto p = d.preds[0];
    auto ev = necessary(d, p);
    ExplainerConfig c;
    c.evaluate_all = true;
    auto run = criage_first_order(ev, c);
    for (const auto& rec : run.candidates) {
        EXPECT_EQ(rec.explanation.triples[0].object, p.object);
        EXPECT_TRUE(rec.result.has_value());
        EXPECT_TRUE(rec.heuristic.has_value());
    }
    for (std::size_t i = 1; i < run.candidates.size(); ++i)
        EXPECT_LE(*run.candidates[i - 1].heuristic, *run.candidates[i].heuristic);
}

TEST(OracleDominance, ExhaustiveBeatsHeuristicsOnSameSpace) {
    const auto& d = desk40();
    for (std::size_t i = 0; i < std::min<std::size_t>(5, d.preds.size()); ++i) {
        auto p = d.preds[i];
        auto ev_dp = necessary(d, p);
        auto dp = data_poisoning_direct(ev_dp);
        auto ev_cr = necessary(d, p);
        auto cr = criage_first_order(ev_cr);
        auto ev_o = necessary(d, p);
        ExplainerConfig c;
        c.space = SpacePreset::subject_match;
        if (dp.best) {
            EXPECT_GE(best_psi(exhaustive_length1(ev_o, c)), best_psi(dp));
        }
        c.space = SpacePreset::object_match;
        auto ev_o2 = necessary(d, p);
        if (cr.best) {
            EXPECT_GE(best_psi(exhaustive_length1(ev_o2, c)), best_psi(cr));
        }
    }
}

TEST(Prefilter, SmallNeighbourhoodReturnedWhole) {
    auto kg = KnowledgeGraph::from_labeled(
        test::labeled({{"s", "r", "a"}, {"b", "r", "s"}, {"s", "q", "c"}, {"a", "r", "o"}, {"x", "r", "y"}}), {},
        test::labeled({{"s", "r", "o"}}));
    auto p = kg.test()[0];
    auto got = prefilter_topk(kg, p, 10);
    EXPECT_EQ(got.size(), 3u);
    auto kg2 = KnowledgeGraph::from_labeled(test::labeled({{"s", "r", "a"}, {"s", "q", "o"}, {"b", "r", "s"}}), {},
                                            test::labeled({{"s", "r", "o"}}));
    auto first = prefilter_topk(kg2, kg2.test()[0], 1);
    ASSERT_EQ(first.size(), 1u);
    EXPECT_EQ(first[0], kg2.ids({"s", "q", "o"}));
    EXPECT_THROW(prefilter_topk(kg2, kg2.test()[0], 0), ConfigError);
}

TEST(Prefilter, DistancesMatchBfsOracle) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto kg = test::random_kg(25, 3, 40, seed, 0);
        EntityId src{seed % 25};
        auto dist = train_distances(kg, src);
        // independent BFS over an edge list
        std::vector<std::vector<std::size_t>> adj(kg.num_entities());
        for (const auto& t : kg.train()) {
            adj[t.subject.index()].push_back(t.object.index());
            adj[t.object.index()].push_back(t.subject.index());
        }
        std::vector<std::size_t> ref(kg.num_entities(), unreachable);
        std::queue<std::size_t> q;
        ref[src.index()] = 0;
        q.push(src.index());
        while (!q.empty()) {
            auto u = q.front();
            q.pop();
            for (auto v : adj[u])
                if (ref[v] == unreachable) {
                    ref[v] = ref[u] + 1;
                    q.push(v);
                }
        }
        EXPECT_EQ(dist, ref);
    }
}

TEST(Builder, MinusInfinityThresholdStopsAfterFirstBatch) {
    const auto& d = desk40();
    auto ev = necessary(d, d.preds[0]);
    ExplainerConfig c;
    c.threshold = -std::numeric_limits<double>::infinity();
    auto run = variable_length_builder(ev, c);
    ASSERT_EQ(run.candidates.size(), 1u);
    EXPECT_EQ(run.best_record()->explanation.length(), 1u);
}

TEST(Builder, PlusInfinityExhaustsPairsInRelevanceOrder) {
    const auto& d = desk40();
    auto p = d.preds[0];
    ExplainerConfig c;
    c.threshold = std::numeric_limits<double>::infinity();
    c.top_k = 4;
    c.max_length = 2;
    auto pool = prefilter_topk(d.kg, p, 4);
    ASSERT_EQ(pool.size(), 4u);
    auto ev = necessary(d, p);
    auto run = variable_length_builder(ev, c);
    ASSERT_EQ(run.candidates.size(), 4u + 6u);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(run.candidates[i].explanation.triples[0], pool[i]);
    for (std::size_t i = 5; i < 10; ++i)
        EXPECT_GE(*run.candidates[i - 1].heuristic, *run.candidates[i].heuristic);
    for (std::size_t i = 4; i < 10; ++i) {
        double rel = 0.0;
        for (const auto& t : run.candidates[i].explanation.triples)
            for (std::size_t k = 0; k < 4; ++k)
                if (pool[k] == t) rel += run.candidates[k].result->psi;
        EXPECT_EQ(*run.candidates[i].heuristic, rel);
    }
    EXPECT_EQ(run.retrains, 10u);
    EXPECT_EQ(run.evaluations, 10u);
}

TEST(Builder, FrontIsSubsetOfEnumeratedTrueFront) {
    const auto& d = desk40();
    for (std::size_t n = 0; n < std::min<std::size_t>(3, d.preds.size()); ++n) {
        auto p = d.preds[n];
        ExplainerConfig c;
        c.threshold = std::numeric_limits<double>::infinity();
        c.top_k = 5;
        c.max_length = 2;
        auto ev = necessary(d, p);
        auto run = variable_length_builder(ev, c);

        auto pool = prefilter_topk(d.kg, p, 5);
        std::vector<ObjectivePoint> truth;
        auto oracle = necessary(d, p);
        for (std::size_t i = 0; i < pool.size(); ++i) {
            truth.push_back({1, oracle(std::vector<Triple>{pool[i]}).psi});
            for (std::size_t j = i + 1; j < pool.size(); ++j)
                truth.push_back({2, oracle(std::vector<Triple>{pool[i], pool[j]}).psi});
        }
        auto keep = pareto_indices(std::span<const ObjectivePoint>(truth));
        for (auto i : run.front) {
            ObjectivePoint pt{static_cast<double>(run.candidates[i].explanation.length()),
                              run.candidates[i].result->psi};
            bool on = std::ranges::any_of(keep, [&](auto k) { return truth[k].length == pt.length && truth[k].psi == pt.psi; });
            EXPECT_TRUE(on) << "(" << pt.length << ", " << pt.psi << ")";
        }
    }
}

TEST(Builder, AnnealingIsDeterministicAndBounded) {
    const auto& d = desk40();
    auto p = d.preds[0];
    ExplainerConfig c;
    c.threshold = std::numeric_limits<double>::infinity();
    c.top_k = 10;
    c.max_length = 3;
    c.max_candidates_per_length = 8;
    c.seed = 17;
    c.workers = 3;
    auto ev1 = necessary(d, p);
    auto a = variable_length_builder(ev1, c);
    auto ev2 = necessary(d, p);
    auto b = variable_length_builder(ev2, c);
    ASSERT_EQ(a.candidates.size(), b.candidates.size());
    for (std::size_t i = 0; i < a.candidates.size(); ++i) {
        EXPECT_EQ(a.candidates[i].explanation.triples, b.candidates[i].explanation.triples);
        EXPECT_EQ(a.candidates[i].result->psi, b.candidates[i].result->psi);
    }
    auto pool = prefilter_topk(d.kg, p, 10);
    std::map<std::size_t, std::size_t> per_length;
    for (const auto& rec : a.candidates) {
        EXPECT_LE(rec.explanation.length(), 3u);
        ++per_length[rec.explanation.length()];
        for (const auto& t : rec.explanation.triples) {
            EXPECT_TRUE(t.touches(p.subject));
            EXPECT_NE(std::ranges::find(pool, t), pool.end());
        }
    }
    EXPECT_LE(per_length[2], 8u);
    EXPECT_LE(per_length[3], 8u);
    EXPECT_EQ(a.retrains, a.candidates.size());
    c.max_length = 5;
    auto ev3 = necessary(d, p);
    EXPECT_THROW(variable_length_builder(ev3, c), ConfigError);
}

TEST(RunJson, RoundTripPreservesRecords) {
    const auto& d = desk40();
    auto ev = necessary(d, d.preds[0]);
    ExplainerConfig c;
    c.threshold = std::numeric_limits<double>::infinity();
    c.top_k = 3;
    auto run = variable_length_builder(ev, c);
    auto j = to_json(d.kg, run);
    auto back = run_from_json(d.kg, j);
    EXPECT_EQ(back.candidates.size(), run.candidates.size());
    EXPECT_EQ(back.front, run.front);
    EXPECT_EQ(back.best, run.best);
    EXPECT_EQ(back.config.threshold, run.config.threshold);
    EXPECT_EQ(to_json(d.kg, back).dump(), j.dump());
}
