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

#ifndef KGX_CORE_KNOWLEDGE_GRAPH_HPP
#define KGX_CORE_KNOWLEDGE_GRAPH_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "kgx/core/disjoint_set.hpp"
#include "kgx/core/triple.hpp"
#include "kgx/errors.hpp"

namespace kgx {

enum class Split : std::uint8_t { train = 0, valid = 1, test = 2 };

inline const char* to_string(Split s) {
    switch (s) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
    }
    return "?";
}

struct TripleRef {
    Split split;
    std::uint32_t index;
    friend bool operator==(const TripleRef&, const TripleRef&) = default;
};

struct LabeledTriple {
    std::string subject;
    std::string relation;
    std::string object;
};

struct LoadReport {
    std::array<std::size_t, 3> counts{};
    std::size_t duplicates_dropped = 0;
    std::size_t cross_split_dropped = 0;
    // valid/test triples mentioning an entity or relation absent from train; kept, never ranked.
    std::vector<TripleRef> unseen;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const {
        return {{"train", counts[0]},
                {"valid", counts[1]},
                {"test", counts[2]},
                {"duplicates_dropped", duplicates_dropped},
                {"cross_split_dropped", cross_split_dropped},
                {"unseen_excluded", unseen.size()},
                {"warnings", warnings}};
    }
};

/// Immutable, integer-indexed knowledge graph with train/valid/test splits.
///
/// Ids are dense and assigned in first-appearance order over train, then
/// valid, then test. Adjacency covers every split; connectivity (weakly
/// connected components) is computed over the train split only.
class KnowledgeGraph {
public:
    KnowledgeGraph() = default;

    static KnowledgeGraph from_labeled(std::span<const LabeledTriple> train,
                                       std::span<const LabeledTriple> valid = {},
                                       std::span<const LabeledTriple> test = {}) {
        KnowledgeGraph kg;
        const std::span<const LabeledTriple> parts[3] = {train, valid, test};
        std::vector<Triple> ids[3];
        for (int s = 0; s < 3; ++s)
            for (const auto& lt : parts[s])
                ids[s].push_back({kg.entities_.intern(lt.subject), kg.relations_.intern(lt.relation),
                                  kg.entities_.intern(lt.object)});
        kg.assemble(std::move(ids[0]), std::move(ids[1]), std::move(ids[2]));
        return kg;
    }

    // Builds a graph over existing dictionaries; used when a derived copy must keep ids stable.
    static KnowledgeGraph from_ids(Dictionary<EntityId> entities, Dictionary<RelationId> relations,
                                   std::vector<Triple> train, std::vector<Triple> valid = {},
                                   std::vector<Triple> test = {}) {
        KnowledgeGraph kg;
        kg.entities_ = std::move(entities);
        kg.relations_ = std::move(relations);
        for (auto* split : {&train, &valid, &test})
            for (const auto& t : *split)
                if (!kg.entities_.contains(t.subject) || !kg.entities_.contains(t.object) ||
                    !kg.relations_.contains(t.relation))
                    throw DomainError("triple references an id outside the dictionaries");
        kg.assemble(std::move(train), std::move(valid), std::move(test));
        return kg;
    }

    const Dictionary<EntityId>& entities() const noexcept { return entities_; }
    const Dictionary<RelationId>& relations() const noexcept { return relations_; }
    std::size_t num_entities() const noexcept { return entities_.size(); }
    std::size_t num_relations() const noexcept { return relations_.size(); }

    std::span<const Triple> split(Split s) const noexcept { return splits_[static_cast<int>(s)]; }
    std::span<const Triple> train() const noexcept { return split(Split::train); }
    std::span<const Triple> valid() const noexcept { return split(Split::valid); }
    std::span<const Triple> test() const noexcept { return split(Split::test); }

    // Valid/test triples whose entities and relation all occur in train.
    std::vector<Triple> evaluable(Split s) const {
        std::vector<Triple> out;
        for (const auto& t : split(s))
            if (seen_in_train(t)) out.push_back(t);
        return out;
    }

    bool seen_in_train(const Triple& t) const noexcept {
        return t.subject.index() < entity_in_train_.size() && entity_in_train_[t.subject.index()] &&
               entity_in_train_[t.object.index()] && relation_in_train_[t.relation.index()];
    }

    std::span<const TripleRef> adjacency(EntityId e) const {
        check_entity(e);
        return adjacency_[e.index()];
    }

    const Triple& resolve(TripleRef ref) const { return splits_[static_cast<int>(ref.split)][ref.index]; }

    // Indices into train() of triples with e as subject or object, ascending.
    std::vector<std::size_t> train_incident(EntityId e) const {
        std::vector<std::size_t> out;
        for (const auto& ref : adjacency(e))
            if (ref.split == Split::train) out.push_back(ref.index);
        std::sort(out.begin(), out.end());
        return out;
    }

    bool contains(const Triple& t) const { return all_.contains(t); }

    std::optional<std::size_t> train_index(const Triple& t) const {
        auto it = train_index_.find(t);
        if (it == train_index_.end()) return std::nullopt;
        return it->second;
    }
    bool in_train(const Triple& t) const { return train_index_.contains(t); }

    // Objects e with (s, r, e) in any split, ascending.
    std::span<const EntityId> known_objects(EntityId s, RelationId r) const {
        auto it = known_objects_.find(key(s, r));
        if (it == known_objects_.end()) return {};
        return it->second;
    }
    // Subjects e with (e, r, o) in any split, ascending.
    std::span<const EntityId> known_subjects(RelationId r, EntityId o) const {
        auto it = known_subjects_.find(key(o, r));
        if (it == known_subjects_.end()) return {};
        return it->second;
    }

    /// All train triples in the weakly connected component containing `e`.
    std::vector<Triple> weakly_connected_component(EntityId e) const {
        check_entity(e);
        std::vector<Triple> out;
        for (auto i : component_triples_[component_[e.index()]]) out.push_back(splits_[0][i]);
        return out;
    }

    bool same_component(EntityId a, EntityId b) const {
        check_entity(a);
        check_entity(b);
        return component_[a.index()] == component_[b.index()];
    }

    std::size_t component_of(EntityId e) const {
        check_entity(e);
        return component_[e.index()];
    }

    const LoadReport& report() const noexcept { return report_; }

    LabeledTriple labels(const Triple& t) const {
        return {entities_.label(t.subject), relations_.label(t.relation), entities_.label(t.object)};
    }

    Triple ids(const LabeledTriple& lt) const {
        return {entities_.at(lt.subject), relations_.at(lt.relation), entities_.at(lt.object)};
    }

    std::uint64_t fingerprint() const noexcept {
        return entities_.fingerprint() * 31 + relations_.fingerprint();
    }

    void check_entity(EntityId e) const {
        if (!entities_.contains(e)) throw DomainError("unknown entity id " + std::to_string(e.value));
    }
    void check_relation(RelationId r) const {
        if (!relations_.contains(r)) throw DomainError("unknown relation id " + std::to_string(r.value));
    }
    void check_triple(const Triple& t) const {
        check_entity(t.subject);
        check_relation(t.relation);
        check_entity(t.object);
    }

private:
    static std::uint64_t key(EntityId e, RelationId r) noexcept {
        return (std::uint64_t{e.value} << 32) | r.value;
    }

    void assemble(std::vector<Triple> train, std::vector<Triple> valid, std::vector<Triple> test) {
        std::vector<Triple>* parts[3] = {&train, &valid, &test};
        for (int s = 0; s < 3; ++s) {
            auto& dst = splits_[s];
            for (const auto& t : *parts[s]) {
                if (all_.contains(t)) {
                    bool same_split = std::find(dst.begin(), dst.end(), t) != dst.end();
                    if (same_split) {
                        ++report_.duplicates_dropped;
                    } else {
                        ++report_.cross_split_dropped;
                    }
                    continue;
                }
                all_.insert(t);
                dst.push_back(t);
            }
            report_.counts[s] = dst.size();
        }
        if (report_.duplicates_dropped > 0)
            report_.warnings.push_back(std::to_string(report_.duplicates_dropped) +
                                       " duplicate triple(s) dropped within a split");
        if (report_.cross_split_dropped > 0)
            report_.warnings.push_back(std::to_string(report_.cross_split_dropped) +
                                       " triple(s) already present in an earlier split dropped");

        const auto ne = entities_.size();
        adjacency_.assign(ne, {});
        entity_in_train_.assign(ne, false);
        relation_in_train_.assign(relations_.size(), false);
        for (int s = 0; s < 3; ++s) {
            const auto& part = splits_[s];
            for (std::uint32_t i = 0; i < part.size(); ++i) {
                const auto& t = part[i];
                TripleRef ref{static_cast<Split>(s), i};
                adjacency_[t.subject.index()].push_back(ref);
                if (t.object != t.subject) adjacency_[t.object.index()].push_back(ref);
                known_objects_[key(t.subject, t.relation)].push_back(t.object);
                known_subjects_[key(t.object, t.relation)].push_back(t.subject);
                if (s == 0) {
                    train_index_.emplace(t, i);
                    entity_in_train_[t.subject.index()] = true;
                    entity_in_train_[t.object.index()] = true;
                    relation_in_train_[t.relation.index()] = true;
                }
            }
        }
        for (auto* m : {&known_objects_, &known_subjects_})
            for (auto& [k, v] : *m) std::sort(v.begin(), v.end());
        for (int s = 1; s < 3; ++s)
            for (std::uint32_t i = 0; i < splits_[s].size(); ++i)
                if (!seen_in_train(splits_[s][i])) report_.unseen.push_back({static_cast<Split>(s), i});
        if (!report_.unseen.empty())
            report_.warnings.push_back(std::to_string(report_.unseen.size()) +
                                       " valid/test triple(s) mention entities or relations unseen in train");

        DisjointSet ds(ne);
        for (const auto& t : splits_[0]) ds.unite(t.subject.index(), t.object.index());
        component_.assign(ne, 0);
        std::unordered_map<std::size_t, std::size_t> label;
        for (std::size_t e = 0; e < ne; ++e) {
            auto root = ds.find(e);
            auto [it, inserted] = label.emplace(root, label.size());
            component_[e] = it->second;
        }
        component_triples_.assign(label.size(), {});
        for (std::uint32_t i = 0; i < splits_[0].size(); ++i)
            component_triples_[component_[splits_[0][i].subject.index()]].push_back(i);
    }

    Dictionary<EntityId> entities_;
    Dictionary<RelationId> relations_;
    std::vector<Triple> splits_[3];
    std::unordered_set<Triple, TripleHash> all_;
    std::unordered_map<Triple, std::uint32_t, TripleHash> train_index_;
    std::unordered_map<std::uint64_t, std::vector<EntityId>> known_objects_;
    std::unordered_map<std::uint64_t, std::vector<EntityId>> known_subjects_;
    std::vector<std::vector<TripleRef>> adjacency_;
    std::vector<bool> entity_in_train_;
    std::vector<bool> relation_in_train_;
    std::vector<std::size_t> component_;
    std::vector<std::vector<std::uint32_t>> component_triples_;
    LoadReport report_;
};

namespace detail {

inline std::vector<LabeledTriple> read_triple_file(const std::filesystem::path& path) {
    if (!std::filesystem::is_regular_file(path)) throw IoError("not a regular file: " + path.string());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<LabeledTriple> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string_view rest(line);
        std::string_view fields[3];
        std::size_t n = 0;
        while (true) {
            auto tab = rest.find('\t');
            if (n == 3) {
                n = 4;
                break;
            }
            fields[n++] = rest.substr(0, tab);
            if (tab == std::string_view::npos) break;
            rest.remove_prefix(tab + 1);
        }
        if (n != 3)
            throw ParseError(path.string(), lineno,
                             "expected 3 TAB-separated fields, got " + std::string(n > 3 ? "more than 3" : std::to_string(n)));
        for (auto f : fields)
            if (f.empty()) throw ParseError(path.string(), lineno, "empty field");
        out.push_back({std::string(fields[0]), std::string(fields[1]), std::string(fields[2])});
    }
    return out;
}

} // namespace detail

/// Loads train.txt, valid.txt and test.txt from `directory` and logs the load report.
inline KnowledgeGraph load_dataset(const std::filesystem::path& directory) {
    if (!std::filesystem::is_directory(directory)) throw IoError("dataset directory not found: " + directory.string());
    auto train = detail::read_triple_file(directory / "train.txt");
    auto valid = detail::read_triple_file(directory / "valid.txt");
    auto test = detail::read_triple_file(directory / "test.txt");
    auto kg = KnowledgeGraph::from_labeled(train, valid, test);
    spdlog::info("load_report {} {}", directory.string(), kg.report().to_json().dump());
    for (const auto& w : kg.report().warnings) spdlog::warn("{}: {}", directory.string(), w);
    return kg;
}

inline void write_triples(const std::filesystem::path& path, const KnowledgeGraph& kg, std::span<const Triple> triples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& t : triples) {
        auto l = kg.labels(t);
        out << l.subject << '\t' << l.relation << '\t' << l.object << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

inline void save_dataset(const std::filesystem::path& directory, const KnowledgeGraph& kg) {
    std::filesystem::create_directories(directory);
    write_triples(directory / "train.txt", kg, kg.train());
    write_triples(directory / "valid.txt", kg, kg.valid());
    write_triples(directory / "test.txt", kg, kg.test());
}

} // namespace kgx

#endif
