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

#ifndef KGX_CORE_SEARCH_SPACE_HPP
#define KGX_CORE_SEARCH_SPACE_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "kgx/core/knowledge_graph.hpp"

namespace kgx {

// Constraint presets, one per row family of the explainer taxonomy.
enum class SpacePreset {
    train_all,        // (s,r,o) in train
    shares_entity,    // s or o in {s_x, o_x}
    subject_match,    // s = s_x
    object_match,     // o = o_x
    subject_incident, // s = s_x or o = s_x
    one_hop,          // touches an entity within one hop of s_x
    wcc,              // in the weakly connected component of s_x
    unobserved,       // (s,r,o) in Omega minus train, enumerated lazily
};

inline constexpr std::string_view preset_names[] = {"train-all", "shares-entity", "subject-match", "object-match",
                                                    "subject-incident", "one-hop", "wcc", "unobserved"};

inline std::string_view to_string(SpacePreset p) { return preset_names[static_cast<int>(p)]; }

inline SpacePreset parse_preset(std::string_view name) {
    for (int i = 0; i < 8; ++i)
        if (preset_names[i] == name) return static_cast<SpacePreset>(i);
    throw ConfigError("unknown search-space preset '" + std::string(name) + "'");
}

enum class Enumeration { explicit_set, generator };

struct Constraint {
    std::string name;
    std::function<bool(const Triple&)> test;
};

/// Candidate-explanation space: the triples of Omega passing every constraint.
class SearchSpace {
public:
    SearchSpace(const KnowledgeGraph& kg, SpacePreset preset, Enumeration mode, std::vector<Constraint> constraints)
        : kg_(&kg), preset_(preset), mode_(mode), constraints_(std::move(constraints)) {}

    SpacePreset preset() const noexcept { return preset_; }
    Enumeration mode() const noexcept { return mode_; }
    bool finite() const noexcept { return mode_ == Enumeration::explicit_set; }
    const std::vector<Constraint>& constraints() const noexcept { return constraints_; }

    bool contains(const Triple& t) const {
        for (const auto& c : constraints_)
            if (!c.test(t)) return false;
        return true;
    }

    // Visits members once each: train order for explicit spaces, lexicographic (s, r, o) for generators.
    // The visitor returns false to stop early.
    template <typename Visitor>
    void for_each(Visitor&& visit) const {
        if (mode_ == Enumeration::explicit_set) {
            for (const auto& t : kg_->train())
                if (contains(t) && !visit(t)) return;
            return;
        }
        const auto ne = kg_->num_entities();
        const auto nr = kg_->num_relations();
        for (std::size_t s = 0; s < ne; ++s)
            for (std::size_t r = 0; r < nr; ++r)
                for (std::size_t o = 0; o < ne; ++o) {
                    Triple t{EntityId{s}, RelationId{r}, EntityId{o}};
                    if (contains(t) && !visit(t)) return;
                }
    }

    std::vector<Triple> enumerate(std::size_t limit = static_cast<std::size_t>(-1)) const {
        std::vector<Triple> out;
        if (limit == 0) return out;
        for_each([&](const Triple& t) {
            out.push_back(t);
            return out.size() < limit;
        });
        return out;
    }

private:
    const KnowledgeGraph* kg_;
    SpacePreset preset_;
    Enumeration mode_;
    std::vector<Constraint> constraints_;
};

inline SearchSpace build_search_space(const KnowledgeGraph& kg, SpacePreset preset,
                                      std::optional<Triple> prediction = std::nullopt) {
    const bool needs_prediction = preset != SpacePreset::train_all && preset != SpacePreset::unobserved;
    if (needs_prediction && !prediction)
        throw ConfigError("search-space preset '" + std::string(to_string(preset)) + "' requires a prediction");
    if (prediction) kg.check_triple(*prediction);

    const KnowledgeGraph* g = &kg;
    std::vector<Constraint> cs;
    if (preset != SpacePreset::unobserved)
        cs.push_back({"in-train", [g](const Triple& t) { return g->in_train(t); }});

    const auto sx = prediction ? prediction->subject : EntityId{};
    const auto ox = prediction ? prediction->object : EntityId{};
    switch (preset) {
    case SpacePreset::train_all:
        break;
    case SpacePreset::shares_entity:
        cs.push_back({"shares-entity", [sx, ox](const Triple& t) { return t.touches(sx) || t.touches(ox); }});
        break;
    case SpacePreset::subject_match:
        cs.push_back({"subject-match", [sx](const Triple& t) { return t.subject == sx; }});
        break;
    case SpacePreset::object_match:
        cs.push_back({"object-match", [ox](const Triple& t) { return t.object == ox; }});
        break;
    case SpacePreset::subject_incident:
        cs.push_back({"subject-incident", [sx](const Triple& t) { return t.touches(sx); }});
        break;
    case SpacePreset::one_hop: {
        auto hood = std::make_shared<std::unordered_set<EntityId>>();
        hood->insert(sx);
        for (auto i : kg.train_incident(sx)) {
            hood->insert(kg.train()[i].subject);
            hood->insert(kg.train()[i].object);
        }
        cs.push_back({"one-hop", [hood](const Triple& t) {
                          return hood->contains(t.subject) || hood->contains(t.object);
                      }});
        break;
    }
    case SpacePreset::wcc: {
        const auto comp = kg.component_of(sx);
        cs.push_back({"wcc", [g, comp](const Triple& t) { return g->component_of(t.subject) == comp; }});
        break;
    }
    case SpacePreset::unobserved:
        cs.push_back({"unobserved", [g](const Triple& t) { return !g->in_train(t); }});
        break;
    }
    auto mode = preset == SpacePreset::unobserved ? Enumeration::generator : Enumeration::explicit_set;
    return SearchSpace(kg, preset, mode, std::move(cs));
}

} // namespace kgx

#endif
