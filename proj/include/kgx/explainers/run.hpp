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

#ifndef KGX_EXPLAINERS_RUN_HPP
#define KGX_EXPLAINERS_RUN_HPP

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "kgx/explain/effectiveness.hpp"
#include "kgx/explain/pareto.hpp"
#include "kgx/parallel.hpp"

namespace kgx {

enum class Algorithm { exhaustive, data_poisoning, criage, builder };

inline constexpr std::string_view algorithm_names[] = {"exhaustive", "data-poisoning", "criage", "builder"};
inline std::string_view to_string(Algorithm a) { return algorithm_names[static_cast<int>(a)]; }
inline Algorithm parse_algorithm(std::string_view s) {
    return detail::parse_enum<Algorithm>(s, algorithm_names, "algorithm");
}

struct ExplainerConfig {
    Algorithm algorithm = Algorithm::exhaustive;
    SpacePreset space = SpacePreset::subject_incident;  // exhaustive search only
    std::size_t max_length = 4;
    std::size_t top_k = 20;  // prefilter size
    EvaluatorKind evaluator = EvaluatorKind::post_train;

    // data poisoning
    double lambda = 1.0;
    double perturbation_step = 0.1;
    std::size_t top_m = 1;
    // first-order influence
    double influence_step = 0.1;
    bool evaluate_all = false;
    // builder
    double threshold = 1.0;
    std::size_t max_candidates_per_length = 50;
    double initial_temperature = 1.0;
    double cooling = 0.9;
    std::size_t proposals_per_temperature = 50;

    std::uint64_t seed = 0;
    std::size_t workers = 1;

    void validate() const {
        if (max_length < 1) throw ConfigError("max_length must be >= 1");
        if (top_k < 1) throw ConfigError("top_k must be >= 1");
        if (top_m < 1) throw ConfigError("top_m must be >= 1");
        if (max_candidates_per_length < 1) throw ConfigError("max_candidates_per_length must be >= 1");
        if (proposals_per_temperature < 1) throw ConfigError("proposals_per_temperature must be >= 1");
        for (double v : {lambda, perturbation_step, influence_step, initial_temperature, cooling})
            if (!std::isfinite(v)) throw ConfigError("explainer scalars must be finite");
        if (std::isnan(threshold)) throw ConfigError("threshold must not be NaN");
        if (!(cooling > 0.0 && cooling < 1.0)) throw ConfigError("cooling must lie in (0, 1)");
        if (!(initial_temperature > 0.0)) throw ConfigError("initial_temperature must be > 0");
    }
};

struct CandidateRecord {
    CandidateExplanation explanation;
    std::optional<double> heuristic;  // the algorithm's own estimate, when it has one
    std::optional<EffectivenessResult> result;
    double seconds = 0.0;
};

struct ExplanationRun {
    Algorithm algorithm = Algorithm::exhaustive;
    ExplainerConfig config;
    Triple prediction;
    ExplanationMode mode = ExplanationMode::necessary;
    EvaluatorKind evaluator = EvaluatorKind::post_train;
    SpacePreset space = SpacePreset::subject_incident;
    std::vector<CandidateRecord> candidates;
    std::vector<std::size_t> front;  // indices into candidates
    std::optional<std::size_t> best;
    std::size_t retrains = 0;
    std::size_t evaluations = 0;
    double wall_seconds = 0.0;
    std::vector<std::string> warnings;

    const CandidateRecord* best_record() const { return best ? &candidates[*best] : nullptr; }
};

namespace detail {

inline CandidateRecord evaluate_record(const EffectivenessEvaluator& eval, CandidateExplanation x,
                                       std::optional<double> heuristic = std::nullopt) {
    auto t0 = std::chrono::steady_clock::now();
    CandidateRecord rec{std::move(x), heuristic, std::nullopt, 0.0};
    rec.result = eval(rec.explanation.triples);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

inline std::vector<CandidateRecord> evaluate_batch(const EffectivenessEvaluator& eval,
                                                   std::vector<CandidateExplanation> xs,
                                                   std::vector<std::optional<double>> heuristics, std::size_t workers) {
    heuristics.resize(xs.size());
    return parallel_map(xs.size(), workers,
                        [&](std::size_t i) { return evaluate_record(eval, xs[i], heuristics[i]); });
}

// Front over evaluated records; best = highest psi, then shortest, then earliest record.
inline void finalize(ExplanationRun& run, const EffectivenessEvaluator& eval,
                     std::chrono::steady_clock::time_point start) {
    std::vector<std::size_t> evaluated;
    for (std::size_t i = 0; i < run.candidates.size(); ++i)
        if (run.candidates[i].result) evaluated.push_back(i);
    std::vector<ObjectivePoint> pts;
    for (auto i : evaluated)
        pts.push_back({static_cast<double>(run.candidates[i].explanation.length()), run.candidates[i].result->psi});
    run.front.clear();
    for (auto k : pareto_indices(std::span<const ObjectivePoint>(pts))) run.front.push_back(evaluated[k]);
    run.best.reset();
    for (auto i : evaluated) {
        if (!run.best) {
            run.best = i;
            continue;
        }
        const auto& b = run.candidates[*run.best];
        const auto& c = run.candidates[i];
        if (c.result->psi > b.result->psi ||
            (c.result->psi == b.result->psi && c.explanation.length() < b.explanation.length()))
            run.best = i;
    }
    run.retrains = eval.retrains();
    run.evaluations = eval.calls();
    run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline ExplanationRun start_run(Algorithm algo, const ExplainerConfig& config, const EffectivenessEvaluator& eval,
                                SpacePreset space) {
    config.validate();
    ExplanationRun run;
    run.algorithm = algo;
    run.config = config;
    run.config.algorithm = algo;
    run.prediction = eval.prediction();
    run.mode = eval.mode();
    run.evaluator = eval.evaluator();
    run.space = space;
    return run;
}

} // namespace detail

} // namespace kgx

#endif
