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

#ifndef KGX_CORE_SYNTHETIC_HPP
#define KGX_CORE_SYNTHETIC_HPP

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "kgx/core/knowledge_graph.hpp"

namespace kgx {

struct SyntheticSpec {
    std::size_t entities = 50;
    std::size_t relation_pairs = 3;  // each pair is r_k and its inverse r_k_inv
    double coverage = 0.8;           // probability an entity has an r_k edge
    double valid_fraction = 0.05;
    double test_fraction = 0.10;
    std::uint64_t seed = 7;
};

/// Desk-scale graph built from random functional relations and their inverses, so
/// most held-out triples are recoverable from their inverse in train.
inline KnowledgeGraph make_synthetic_kg(const SyntheticSpec& spec) {
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, spec.entities - 1);

    auto ent = [](std::size_t i) {
        std::string s = std::to_string(i);
        return "e" + std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
    };
    std::vector<LabeledTriple> all;
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
    for (std::size_t k = 0; k < spec.relation_pairs; ++k) {
        const auto fwd = "r" + std::to_string(k);
        const auto inv = fwd + "_inv";
        for (std::size_t x = 0; x < spec.entities; ++x) {
            if (coin(rng) >= spec.coverage) continue;
            std::size_t y = pick(rng);
            if (y == x) y = (y + 1) % spec.entities;
            if (!seen.insert({x, 2 * k, y}).second) continue;
            seen.insert({y, 2 * k + 1, x});
            all.push_back({ent(x), fwd, ent(y)});
            all.push_back({ent(y), inv, ent(x)});
        }
    }
    std::shuffle(all.begin(), all.end(), rng);

    const auto n_test = static_cast<std::size_t>(spec.test_fraction * static_cast<double>(all.size()));
    const auto n_valid = static_cast<std::size_t>(spec.valid_fraction * static_cast<double>(all.size()));
    std::vector<LabeledTriple> test(all.begin(), all.begin() + n_test);
    std::vector<LabeledTriple> valid(all.begin() + n_test, all.begin() + n_test + n_valid);
    std::vector<LabeledTriple> train(all.begin() + n_test + n_valid, all.end());

    // Held-out triples must be answerable: move back any whose labels train never mentions.
    std::set<std::string> ents, rels;
    for (const auto& t : train) {
        ents.insert(t.subject);
        ents.insert(t.object);
        rels.insert(t.relation);
    }
    auto keep = [&](std::vector<LabeledTriple>& part) {
        std::vector<LabeledTriple> kept;
        for (auto& t : part) {
            if (ents.contains(t.subject) && ents.contains(t.object) && rels.contains(t.relation))
                kept.push_back(std::move(t));
            else
                train.push_back(std::move(t));
        }
        part = std::move(kept);
    };
    keep(test);
    keep(valid);
    return KnowledgeGraph::from_labeled(train, valid, test);
}

} // namespace kgx

#endif
