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

#ifndef KGX_CORE_TRIPLE_HPP
#define KGX_CORE_TRIPLE_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgx/errors.hpp"

namespace kgx {

template <typename Tag>
struct StrongId {
    std::uint32_t value = 0;

    constexpr StrongId() = default;
    constexpr explicit StrongId(std::uint32_t v) : value(v) {}
    constexpr explicit StrongId(std::size_t v) : value(static_cast<std::uint32_t>(v)) {}
    constexpr explicit StrongId(int v) : value(static_cast<std::uint32_t>(v)) {}

    constexpr std::size_t index() const noexcept { return value; }
    friend constexpr auto operator<=>(StrongId, StrongId) = default;
};

using EntityId = StrongId<struct EntityTag>;
using RelationId = StrongId<struct RelationTag>;

struct Triple {
    EntityId subject;
    RelationId relation;
    EntityId object;

    friend constexpr auto operator<=>(const Triple&, const Triple&) = default;

    constexpr bool touches(EntityId e) const noexcept { return subject == e || object == e; }
};

inline std::uint64_t pack(const Triple& t) noexcept {
    // 24 bits per entity and 16 bits per relation covers every public benchmark.
    return (std::uint64_t{t.subject.value} << 40) | (std::uint64_t{t.relation.value} << 24) |
           std::uint64_t{t.object.value};
}

struct TripleHash {
    std::size_t operator()(const Triple& t) const noexcept {
        std::uint64_t x = pack(t);
        x ^= x >> 33;
        x *= 0xff51afd7ed558ccdULL;
        x ^= x >> 33;
        return static_cast<std::size_t>(x);
    }
};

/// Bidirectional label <-> dense id map. Ids are handed out in insertion order.
template <typename Id>
class Dictionary {
public:
    Id intern(std::string_view label) {
        auto it = ids_.find(std::string(label));
        if (it != ids_.end()) return it->second;
        Id id{labels_.size()};
        labels_.emplace_back(label);
        ids_.emplace(labels_.back(), id);
        return id;
    }

    std::optional<Id> find(std::string_view label) const {
        auto it = ids_.find(std::string(label));
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }

    Id at(std::string_view label) const {
        if (auto id = find(label)) return *id;
        throw DomainError("unknown label '" + std::string(label) + "'");
    }

    const std::string& label(Id id) const {
        if (id.index() >= labels_.size()) throw DomainError("id " + std::to_string(id.value) + " out of range");
        return labels_[id.index()];
    }

    bool contains(Id id) const noexcept { return id.index() < labels_.size(); }
    std::size_t size() const noexcept { return labels_.size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    // FNV-1a over the labels in id order; identifies a dictionary across processes.
    std::uint64_t fingerprint() const noexcept {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (const auto& l : labels_) {
            for (unsigned char c : l) {
                h ^= c;
                h *= 0x100000001b3ULL;
            }
            h ^= 0xff;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, Id> ids_;
};

} // namespace kgx

template <typename Tag>
struct std::hash<kgx::StrongId<Tag>> {
    std::size_t operator()(kgx::StrongId<Tag> id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};

#endif
