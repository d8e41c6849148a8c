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

#ifndef KGX_EXPLAINERS_EXHAUSTIVE_HPP
#define KGX_EXPLAINERS_EXHAUSTIVE_HPP

#include "kgx/core/search_space.hpp"
#include "kgx/explainers/run.hpp"

namespace kgx {

/// Evaluates every singleton of `candidates`; the best is the highest psi, earliest candidate on ties.
inline ExplanationRun exhaustive_length1(const EffectivenessEvaluator& eval, std::span<const Triple> candidates,
                                         SpacePreset provenance, const ExplainerConfig& config = {}) {
    auto start = std::chrono::steady_clock::now();
    if (candidates.empty()) throw DomainError("exhaustive search over an empty space");
    auto run = detail::start_run(Algorithm::exhaustive, config, eval, provenance);
    std::vector<CandidateExplanation> xs;
    xs.reserve(candidates.size());
    for (const auto& t : candidates) xs.push_back({{t}, provenance});
    run.candidates = detail::evaluate_batch(eval, std::move(xs), {}, config.workers);
    detail::finalize(run, eval, start);
    return run;
}

/// Exhaustive oracle over a finitely enumerable search space, visited in train order.
inline ExplanationRun exhaustive_length1(const EffectivenessEvaluator& eval, const SearchSpace& space,
                                         const ExplainerConfig& config = {}) {
    if (!space.finite()) throw DomainError("exhaustive search needs a finitely enumerable space");
    auto members = space.enumerate();
    return exhaustive_length1(eval, members, space.preset(), config);
}

/// Builds the configured preset around the evaluator's prediction and searches it.
inline ExplanationRun exhaustive_length1(const EffectivenessEvaluator& eval, const ExplainerConfig& config) {
    auto space = build_search_space(eval.kg(), config.space, eval.prediction());
    return exhaustive_length1(eval, space, config);
}

} // namespace kgx

#endif
