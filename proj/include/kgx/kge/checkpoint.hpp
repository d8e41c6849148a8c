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

#ifndef KGX_KGE_CHECKPOINT_HPP
#define KGX_KGE_CHECKPOINT_HPP

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "kgx/core/knowledge_graph.hpp"
#include "kgx/kge/complex_model.hpp"

namespace kgx {

// Little-endian binary layout:
//   magic "KGXCKPT1" | u32 kind | u64 entity-dictionary hash | u64 relation-dictionary hash
//   | u64 dim | u64 entities | u64 relations | u64 seed | f64 entity rows | f64 relation rows (2|R|)
inline constexpr char checkpoint_magic[8] = {'K', 'G', 'X', 'C', 'K', 'P', 'T', '1'};

struct CheckpointHeader {
    ModelKind kind = ModelKind::complex_bilinear;
    std::uint64_t entity_hash = 0;
    std::uint64_t relation_hash = 0;
    std::uint64_t dim = 0;
    std::uint64_t entities = 0;
    std::uint64_t relations = 0;
    std::uint64_t seed = 0;
};

namespace detail {

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError("truncated checkpoint " + path.string());
    return v;
}

} // namespace detail

inline void save_checkpoint(const std::filesystem::path& path, const EmbeddingModel& m, const KnowledgeGraph& kg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(checkpoint_magic, sizeof(checkpoint_magic));
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(m.kind()));
    detail::put<std::uint64_t>(out, kg.entities().fingerprint());
    detail::put<std::uint64_t>(out, kg.relations().fingerprint());
    detail::put<std::uint64_t>(out, m.dim());
    detail::put<std::uint64_t>(out, m.num_entities());
    detail::put<std::uint64_t>(out, m.num_relations());
    detail::put<std::uint64_t>(out, m.seed());
    out.write(reinterpret_cast<const char*>(m.entity_data().data()),
              static_cast<std::streamsize>(m.entity_data().size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(m.relation_data().data()),
              static_cast<std::streamsize>(m.relation_data().size() * sizeof(double)));
    if (!out) throw IoError("write failed: " + path.string());
}

inline CheckpointHeader read_checkpoint_header(std::istream& in, const std::filesystem::path& path) {
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, checkpoint_magic, 8) != 0)
        throw IoError("not a kgx checkpoint: " + path.string());
    CheckpointHeader h;
    h.kind = static_cast<ModelKind>(detail::get<std::uint32_t>(in, path));
    h.entity_hash = detail::get<std::uint64_t>(in, path);
    h.relation_hash = detail::get<std::uint64_t>(in, path);
    h.dim = detail::get<std::uint64_t>(in, path);
    h.entities = detail::get<std::uint64_t>(in, path);
    h.relations = detail::get<std::uint64_t>(in, path);
    h.seed = detail::get<std::uint64_t>(in, path);
    return h;
}

/// Loads a checkpoint and verifies that it was trained on the same dictionaries as `kg`.
inline EmbeddingModel load_checkpoint(const std::filesystem::path& path, const KnowledgeGraph& kg) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    auto h = read_checkpoint_header(in, path);
    if (h.kind != ModelKind::complex_bilinear) throw IoError("unsupported model kind in " + path.string());
    if (h.entity_hash != kg.entities().fingerprint() || h.relation_hash != kg.relations().fingerprint() ||
        h.entities != kg.num_entities() || h.relations != kg.num_relations())
        throw DomainError("checkpoint " + path.string() + " does not match the dataset dictionaries");
    EmbeddingModel m(h.entities, h.relations, h.dim, h.seed);
    auto read_block = [&](std::vector<double>& v) {
        if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double))))
            throw IoError("truncated checkpoint " + path.string());
    };
    read_block(m.entity_data());
    read_block(m.relation_data());
    return m;
}

} // namespace kgx

#endif
