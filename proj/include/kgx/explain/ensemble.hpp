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

#ifndef KGX_EXPLAIN_ENSEMBLE_HPP
#define KGX_EXPLAIN_ENSEMBLE_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <span>
#include <unordered_set>
#include <vector>

#include <spdlog/spdlog.h>

#include "kgx/kge/complex_model.hpp"

namespace kgx {

struct PlattFit {
    double scale = 1.0;
    double bias = 0.0;
    bool degenerate = false;
};

inline double logistic(double z) {
    return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

/// Maximum-likelihood logistic fit p = sigmoid(scale * x + bias) by damped Newton steps.
/// A tiny ridge keeps separable data finite. Constant inputs return the identity scale.
inline PlattFit fit_platt(std::span<const double> x, std::span<const int> y, double ridge = 1e-6) {
    if (x.size() != y.size() || x.empty()) throw DomainError("calibration needs equally sized, non-empty inputs");
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*lo == *hi) return {1.0, 0.0, true};

    double a = 1.0, b = 0.0;
    auto objective = [&](double sa, double sb) {
        double l = 0.5 * ridge * (sa * sa + sb * sb);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double z = sa * x[i] + sb;
            // log(1 + e^z) - y z, stably
            l += (z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) - y[i] * z;
        }
        return l;
    };
    double current = objective(a, b);
    for (int it = 0; it < 200; ++it) {
        double ga = ridge * a, gb = ridge * b, haa = ridge, hab = 0.0, hbb = ridge;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double p = logistic(a * x[i] + b);
            const double r = p - y[i];
            const double w = p * (1.0 - p);
            ga += r * x[i];
            gb += r;
            haa += w * x[i] * x[i];
            hab += w * x[i];
            hbb += w;
        }
        const double det = haa * hbb - hab * hab;
        if (!(det > 0)) break;
        const double da = (hbb * ga - hab * gb) / det;
        const double db = (haa * gb - hab * ga) / det;
        double t = 1.0, next = objective(a - da, b - db);
        while (next > current && t > 1e-10) {
            t *= 0.5;
            next = objective(a - t * da, b - t * db);
        }
        a -= t * da;
        b -= t * db;
        const bool done = std::abs(current - next) < 1e-13 * (1.0 + std::abs(current));
        current = next;
        if (done) break;
    }
    return {a, b, false};
}

/// Independent Bernoulli variables over Omega with p(Y_sro = 1) = sigmoid(scale * f(s,r,o) + bias).
class GenerativeEnsemble {
public:
    GenerativeEnsemble(std::shared_ptr<const EmbeddingModel> model, double scale, double bias)
        : model_(std::move(model)), scale_(scale), bias_(bias) {}

    double scale() const noexcept { return scale_; }
    double bias() const noexcept { return bias_; }
    const EmbeddingModel& model() const noexcept { return *model_; }

    double probability_from_score(double s) const noexcept { return logistic(scale_ * s + bias_); }
    double probability(const Triple& t) const { return probability_from_score(score(*model_, t)); }

private:
    std::shared_ptr<const EmbeddingModel> model_;
    double scale_;
    double bias_;
};

/// Platt-calibrates the scorer: held-out triples are positives, seeded object corruptions
/// (never KG triples) are negatives.
inline GenerativeEnsemble calibrate_ensemble(const EmbeddingModel& model, const KnowledgeGraph& kg,
                                             std::span<const Triple> heldout, std::uint64_t seed = 0,
                                             std::size_t negatives_per_positive = 1) {
    if (heldout.empty()) throw DomainError("calibration needs a non-empty held-out set");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, kg.num_entities() - 1);
    std::vector<double> x;
    std::vector<int> y;
    for (const auto& t : heldout) {
        x.push_back(score(model, t));
        y.push_back(1);
        for (std::size_t k = 0; k < negatives_per_positive; ++k) {
            for (int attempt = 0; attempt < 100; ++attempt) {
                Triple c{t.subject, t.relation, EntityId{pick(rng)}};
                if (kg.contains(c)) continue;
                x.push_back(score(model, c));
                y.push_back(0);
                break;
            }
        }
    }
    auto fit = fit_platt(x, y);
    if (fit.degenerate) spdlog::warn("calibration: held-out scores are all identical; using identity scale");
    return GenerativeEnsemble(std::make_shared<const EmbeddingModel>(model), fit.scale, fit.bias);
}

struct LatentCandidate {
    Triple triple;
    double probability = 0.0;
};

// Canonical order of latent candidates: most probable first, then lexicographic triple.
inline bool latent_before(const LatentCandidate& a, const LatentCandidate& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.triple < b.triple;
}

/// Up to `budget` unobserved triples with p >= 1 - epsilon, in canonical order.
///
/// (s, r) patterns are scanned exhaustively when |E||R| <= max_patterns; otherwise every pattern
/// observed in train is scanned first and the rest of the allowance is a seeded uniform draw.
inline std::vector<LatentCandidate> sample_latent_candidates(const GenerativeEnsemble& ensemble,
                                                             const KnowledgeGraph& kg, double epsilon,
                                                             std::size_t budget, std::uint64_t seed,
                                                             std::size_t max_patterns = std::size_t{1} << 20) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
    if (budget < 1) throw ConfigError("budget must be >= 1");
    const auto& m = ensemble.model();
    const auto ne = kg.num_entities();
    const auto nr = kg.num_relations();
    const double threshold = 1.0 - epsilon;

    std::vector<std::pair<std::size_t, std::size_t>> patterns;
    if (ne * nr <= max_patterns) {
        for (std::size_t s = 0; s < ne; ++s)
            for (std::size_t r = 0; r < nr; ++r) patterns.emplace_back(s, r);
    } else {
        std::unordered_set<std::uint64_t> taken;
        for (const auto& t : kg.train()) {
            if (patterns.size() >= max_patterns) break;
            if (taken.insert((std::uint64_t{t.subject.value} << 32) | t.relation.value).second)
                patterns.emplace_back(t.subject.index(), t.relation.index());
        }
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> ps(0, ne - 1), pr(0, nr - 1);
        for (std::size_t guard = 0; patterns.size() < max_patterns && guard < 4 * max_patterns; ++guard) {
            auto s = ps(rng), r = pr(rng);
            if (taken.insert((std::uint64_t{s} << 32) | r).second) patterns.emplace_back(s, r);
        }
    }

    std::vector<LatentCandidate> out;
    std::vector<double> scores(ne);
    auto prune = [&] {
        if (out.size() <= budget) return;
        std::nth_element(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(budget), out.end(), latent_before);
        out.resize(budget);
    };
    for (auto [s, r] : patterns) {
        score_all(m, EntityId{s}, r, scores);
        for (std::size_t o = 0; o < ne; ++o) {
            Triple t{EntityId{s}, RelationId{r}, EntityId{o}};
            const double p = ensemble.probability_from_score(scores[o]);
            if (p >= threshold && !kg.in_train(t)) out.push_back({t, p});
        }
        if (out.size() > 4 * budget + 1024) prune();
    }
    prune();
    std::sort(out.begin(), out.end(), latent_before);
    return out;
}

} // namespace kgx

#endif
