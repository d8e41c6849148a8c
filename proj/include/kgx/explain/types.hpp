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

#ifndef KGX_EXPLAIN_TYPES_HPP
#define KGX_EXPLAIN_TYPES_HPP

#include <string>
#include <string_view>
#include <vector>

#include "kgx/core/search_space.hpp"
#include "kgx/core/triple.hpp"
#include "kgx/kge/ranking.hpp"
#include "kgx/kge/train_config.hpp"

namespace kgx {

enum class ExplanationMode { necessary, sufficient, c_sufficient, latent_positive, latent_negative };
enum class RetrainOperator { remove_retrain, keep_only_retrain, add_swap_retrain, add_retrain };
enum class EvaluatorKind { full_retrain, post_train };
enum class ContextPolicy { none, frozen_neighborhood };
enum class Polarity { positive, negative };

// Sufficient-mode effectiveness: rank - rank' (default) or -|rank - rank'|.
enum class SufficientPsi { signed_difference, absolute_difference };
// How per-target rank changes combine in C-sufficient mode.
enum class TargetAggregate { mean, all_decrease };

namespace detail {
template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::string_view (&names)[N], const char* what) {
    for (std::size_t i = 0; i < N; ++i)
        if (names[i] == s) return static_cast<E>(i);
    throw ConfigError(std::string("unknown ") + what + " '" + std::string(s) + "'");
}
} // namespace detail

inline constexpr std::string_view mode_names[] = {"necessary", "sufficient", "c-sufficient", "latent-positive",
                                                  "latent-negative"};
inline constexpr std::string_view operator_names[] = {"remove-retrain", "keep-only-retrain", "add-swap-retrain",
                                                      "add-retrain"};
inline constexpr std::string_view evaluator_names[] = {"full-retrain", "post-train"};
inline constexpr std::string_view context_names[] = {"none", "frozen-neighborhood"};

inline std::string_view to_string(ExplanationMode m) { return mode_names[static_cast<int>(m)]; }
inline std::string_view to_string(RetrainOperator o) { return operator_names[static_cast<int>(o)]; }
inline std::string_view to_string(EvaluatorKind e) { return evaluator_names[static_cast<int>(e)]; }
inline std::string_view to_string(ContextPolicy c) { return context_names[static_cast<int>(c)]; }

inline ExplanationMode parse_mode(std::string_view s) { return detail::parse_enum<ExplanationMode>(s, mode_names, "mode"); }
inline EvaluatorKind parse_evaluator(std::string_view s) {
    return detail::parse_enum<EvaluatorKind>(s, evaluator_names, "evaluator");
}
inline ContextPolicy parse_context(std::string_view s) {
    return detail::parse_enum<ContextPolicy>(s, context_names, "context policy");
}

struct CandidateExplanation {
    std::vector<Triple> triples;
    SpacePreset provenance = SpacePreset::train_all;

    std::size_t length() const noexcept { return triples.size(); }
};

struct TargetOutcome {
    EntityId target;
    std::size_t rank_before = 0;
    std::size_t rank_after = 0;
    double psi = 0.0;
    std::vector<Triple> skipped;  // swapped triples already in train, not re-added
};

struct EffectivenessResult {
    double psi = 0.0;
    // Ranks of the prediction; in C-sufficient mode the sums over the target set.
    std::size_t rank_before = 0;
    std::size_t rank_after = 0;
    RetrainOperator op = RetrainOperator::remove_retrain;
    EvaluatorKind evaluator = EvaluatorKind::full_retrain;
    ExplanationMode mode = ExplanationMode::necessary;
    double score_before = 0.0;
    double score_after = 0.0;
    std::size_t retrains = 0;
    std::vector<TargetOutcome> per_target;
    std::vector<std::string> flags;
};

/// Knobs shared by every effectiveness function.
struct EffectivenessConfig {
    TrainConfig train;       // full retraining reuses the original config and seed
    TrainConfig post_train;  // fine-tuning schedule for the post-training proxy
    bool post_train_relations = false;
    // Post-training fits only the triples touching trainable entities.
    bool post_train_incident_only = true;
    ContextPolicy context = ContextPolicy::frozen_neighborhood;
    SufficientPsi sufficient_psi = SufficientPsi::signed_difference;
    TargetAggregate aggregate = TargetAggregate::mean;
    bool batched_targets = false;
    // Divide each target's rank change by max(rank' - 1, 1).
    bool normalize_target_change = false;
    TiePolicy ties = TiePolicy::optimistic;
};

} // namespace kgx

#endif
