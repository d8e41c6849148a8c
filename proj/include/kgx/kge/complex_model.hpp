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

#ifndef KGX_KGE_COMPLEX_MODEL_HPP
#define KGX_KGE_COMPLEX_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "kgx/core/knowledge_graph.hpp"
#include "kgx/kge/train_config.hpp"

namespace kgx {

// TransE and DistMult are reserved slots; only the complex-bilinear scorer is implemented.
enum class ModelKind : std::uint32_t { complex_bilinear = 0, transe = 1, distmult = 2 };

enum class Direction { object, subject };

/// ComplEx embeddings. Each row holds d complex numbers as [re_0..re_{d-1}, im_0..im_{d-1}].
///
/// Relation storage has 2|R| rows: row r is the relation itself, row r + |R| its
/// reciprocal, used to answer subject queries (?, r, o) as object queries (o, r^-1, ?).
class EmbeddingModel {
public:
    EmbeddingModel() = default;
    EmbeddingModel(std::size_t num_entities, std::size_t num_relations, std::size_t dim, std::uint64_t seed = 0)
        : dim_(dim), num_entities_(num_entities), num_relations_(num_relations), seed_(seed),
          entity_(num_entities * 2 * dim, 0.0), relation_(2 * num_relations * 2 * dim, 0.0) {}

    ModelKind kind() const noexcept { return ModelKind::complex_bilinear; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t row_width() const noexcept { return 2 * dim_; }
    std::size_t num_entities() const noexcept { return num_entities_; }
    std::size_t num_relations() const noexcept { return num_relations_; }
    std::size_t num_relation_rows() const noexcept { return 2 * num_relations_; }
    std::uint64_t seed() const noexcept { return seed_; }

    std::span<const double> entity(EntityId e) const { return {entity_.data() + e.index() * row_width(), row_width()}; }
    std::span<double> entity(EntityId e) { return {entity_.data() + e.index() * row_width(), row_width()}; }
    std::span<const double> relation_row(std::size_t row) const {
        return {relation_.data() + row * row_width(), row_width()};
    }
    std::span<double> relation_row(std::size_t row) { return {relation_.data() + row * row_width(), row_width()}; }

    std::size_t query_row(RelationId r, Direction d) const noexcept {
        return d == Direction::object ? r.index() : r.index() + num_relations_;
    }

    std::vector<double>& entity_data() noexcept { return entity_; }
    const std::vector<double>& entity_data() const noexcept { return entity_; }
    std::vector<double>& relation_data() noexcept { return relation_; }
    const std::vector<double>& relation_data() const noexcept { return relation_; }

    bool all_finite() const noexcept {
        for (double v : entity_)
            if (!std::isfinite(v)) return false;
        for (double v : relation_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    friend bool operator==(const EmbeddingModel&, const EmbeddingModel&) = default;

private:
    std::size_t dim_ = 0;
    std::size_t num_entities_ = 0;
    std::size_t num_relations_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<double> entity_;
    std::vector<double> relation_;
};

inline EmbeddingModel init_model(const KnowledgeGraph& kg, const TrainConfig& config,
                                 ModelKind kind = ModelKind::complex_bilinear) {
    config.validate();
    if (kind != ModelKind::complex_bilinear) throw ConfigError("only the complex-bilinear model is implemented");
    if (kg.num_entities() == 0 || kg.num_relations() == 0) throw ConfigError("empty dictionaries");
    EmbeddingModel m(kg.num_entities(), kg.num_relations(), config.dimension, config.seed);
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, config.init_scale / std::sqrt(static_cast<double>(config.dimension)));
    for (auto& v : m.entity_data()) v = normal(rng);
    for (auto& v : m.relation_data()) v = normal(rng);
    return m;
}

namespace detail {

// q = a * w (complex, elementwise), written into `out` in row layout.
inline void complex_product(std::span<const double> a, std::span<const double> w, std::span<double> out) {
    const auto d = a.size() / 2;
    for (std::size_t k = 0; k < d; ++k) {
        out[k] = a[k] * w[k] - a[k + d] * w[k + d];
        out[k + d] = a[k] * w[k + d] + a[k + d] * w[k];
    }
}

// Re(<q, conj(x)>)
inline double real_dot(std::span<const double> q, std::span<const double> x) {
    double s = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) s += q[k] * x[k];
    return s;
}

} // namespace detail

/// Scores every entity as completion of (s, row, ?): out[e] = Re(<e_s, w_row, conj(e_e)>).
inline void score_all(const EmbeddingModel& m, EntityId s, std::size_t row, std::span<double> out) {
    std::vector<double> q(m.row_width());
    detail::complex_product(m.entity(s), m.relation_row(row), q);
    for (std::size_t e = 0; e < m.num_entities(); ++e) out[e] = detail::real_dot(q, m.entity(EntityId{e}));
}

inline double score_row(const EmbeddingModel& m, EntityId s, std::size_t row, EntityId o) {
    std::vector<double> q(m.row_width());
    detail::complex_product(m.entity(s), m.relation_row(row), q);
    return detail::real_dot(q, m.entity(o));
}

inline void check_ids(const EmbeddingModel& m, const Triple& t) {
    if (t.subject.index() >= m.num_entities() || t.object.index() >= m.num_entities())
        throw DomainError("entity id outside the model");
    if (t.relation.index() >= m.num_relations()) throw DomainError("relation id outside the model");
}

/// Re(<e_s, w_r, conj(e_o)>).
inline double score(const EmbeddingModel& m, const Triple& t) {
    check_ids(m, t);
    return score_row(m, t.subject, t.relation.index(), t.object);
}

/// Score used when ranking `t` in the given direction; subject queries go through the reciprocal relation.
inline double score(const EmbeddingModel& m, const Triple& t, Direction d) {
    check_ids(m, t);
    return d == Direction::object ? score_row(m, t.subject, m.query_row(t.relation, d), t.object)
                                  : score_row(m, t.object, m.query_row(t.relation, d), t.subject);
}

/// d score / d e_s in row layout (real parts then imaginary parts).
inline std::vector<double> grad_score_wrt_subject(const EmbeddingModel& m, const Triple& t) {
    check_ids(m, t);
    const auto d = m.dim();
    auto w = m.relation_row(t.relation.index());
    auto x = m.entity(t.object);
    std::vector<double> g(2 * d);
    for (std::size_t k = 0; k < d; ++k) {
        g[k] = w[k] * x[k] + w[k + d] * x[k + d];
        g[k + d] = w[k] * x[k + d] - w[k + d] * x[k];
    }
    return g;
}

} // namespace kgx

#endif
