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

// Shared fixtures for the test suite.
#ifndef KGX_TESTS_HELPERS_HPP
#define KGX_TESTS_HELPERS_HPP

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "kgx/core/knowledge_graph.hpp"
#include "kgx/core/synthetic.hpp"
#include "kgx/kge/trainer.hpp"

namespace kgx::test {

inline std::vector<LabeledTriple> labeled(std::initializer_list<std::array<const char*, 3>> rows) {
    std::vector<LabeledTriple> out;
    for (const auto& r : rows) out.push_back({r[0], r[1], r[2]});
    return out;
}

/// Uniform random triples over `ne` entities and `nr` relations (labels e<i>, r<j>).
inline KnowledgeGraph random_kg(std::size_t ne, std::size_t nr, std::size_t nt, std::uint64_t seed,
                                std::size_t held_out = 0) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pe(0, ne - 1), pr(0, nr - 1);
    std::vector<LabeledTriple> train, test;
    for (std::size_t i = 0; i < nt + held_out; ++i) {
        LabeledTriple t{"e" + std::to_string(pe(rng)), "r" + std::to_string(pr(rng)), "e" + std::to_string(pe(rng))};
        (i < nt ? train : test).push_back(t);
    }
    return KnowledgeGraph::from_labeled(train, {}, test);
}

inline EmbeddingModel random_model(const KnowledgeGraph& kg, std::size_t d, std::uint64_t seed) {
    TrainConfig c;
    c.dimension = d;
    c.seed = seed;
    return init_model(kg, c);
}

inline TrainConfig desk_config() {
    TrainConfig c;
    c.dimension = 16;
    c.epochs = 100;
    c.seed = 42;
    return c;
}

/// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("kgx_" + tag + "_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

} // namespace kgx::test

#endif
