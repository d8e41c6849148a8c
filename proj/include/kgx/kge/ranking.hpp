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

#ifndef KGX_KGE_RANKING_HPP
#define KGX_KGE_RANKING_HPP

#include <algorithm>
#include <vector>

#include "kgx/core/knowledge_graph.hpp"
#include "kgx/kge/complex_model.hpp"

namespace kgx {

// optimistic: only strictly higher scores count (the default); pessimistic: ties count too.
enum class TiePolicy { optimistic, pessimistic };

struct RankedPrediction {
    Triple triple;
    double score = 0.0;
    std::size_t rank = 1;
    Direction direction = Direction::object;
};

namespace detail {

// Entities filtered out of the candidate set for `t` in direction `d`: completions already in the KG.
inline std::span<const EntityId> known_completions(const KnowledgeGraph& kg, const Triple& t, Direction d) {
    return d == Direction::object ? kg.known_objects(t.subject, t.relation) : kg.known_subjects(t.relation, t.object);
}

} // namespace detail

/// Size of the filtered candidate set: entities whose completion is not a KG triple.
inline std::size_t filtered_candidate_count(const KnowledgeGraph& kg, const Triple& t,
                                            Direction d = Direction::object) {
    return kg.num_entities() - detail::known_completions(kg, t, d).size();
}

/// Filtered rank: 1 + number of filtered candidates scoring above the target.
inline RankedPrediction rank(const EmbeddingModel& m, const KnowledgeGraph& kg, const Triple& t,
                             Direction d = Direction::object, TiePolicy ties = TiePolicy::optimistic) {
    check_ids(m, t);
    const EntityId anchor = d == Direction::object ? t.subject : t.object;
    const EntityId target = d == Direction::object ? t.object : t.subject;
    std::vector<double> scores(m.num_entities());
    score_all(m, anchor, m.query_row(t.relation, d), scores);

    std::vector<char> filtered(m.num_entities(), 0);
    for (auto e : detail::known_completions(kg, t, d)) filtered[e.index()] = 1;

    const double ref = scores[target.index()];
    std::size_t r = 1;
    for (std::size_t e = 0; e < scores.size(); ++e) {
        if (filtered[e] || e == target.index()) continue;
        if (scores[e] > ref || (ties == TiePolicy::pessimistic && scores[e] == ref)) ++r;
    }
    return {t, ref, r, d};
}

} // namespace kgx

#endif
