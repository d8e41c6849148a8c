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

#ifndef KGX_EXPLAIN_PARETO_HPP
#define KGX_EXPLAIN_PARETO_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "kgx/explain/types.hpp"

namespace kgx {

/// A point of the (length, effectiveness) objective: length is minimised, psi maximised.
struct ObjectivePoint {
    double length = 0.0;
    double psi = 0.0;
};

/// a dominates b: no longer, at least as effective, strictly better in one of the two.
inline bool dominates(const ObjectivePoint& a, const ObjectivePoint& b) noexcept {
    return a.length <= b.length && a.psi >= b.psi && (a.length < b.length || a.psi > b.psi);
}

/// Indices of the non-dominated items, ordered by (length, input position). Equal points are all kept.
template <typename T, typename Projection>
std::vector<std::size_t> pareto_indices(std::span<const T> items, Projection project) {
    std::vector<std::size_t> idx(items.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<ObjectivePoint> pts;
    pts.reserve(items.size());
    for (const auto& it : items) pts.push_back(project(it));
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (pts[a].length != pts[b].length) return pts[a].length < pts[b].length;
        return pts[a].psi > pts[b].psi;
    });

    std::vector<std::size_t> front;
    double best_shorter = -INFINITY;
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j < idx.size() && pts[idx[j]].length == pts[idx[i]].length) ++j;
        const double group_best = pts[idx[i]].psi;
        if (group_best > best_shorter) {
            std::vector<std::size_t> tied;
            for (auto k = i; k < j && pts[idx[k]].psi == group_best; ++k) tied.push_back(idx[k]);
            std::sort(tied.begin(), tied.end());
            front.insert(front.end(), tied.begin(), tied.end());
            best_shorter = group_best;
        }
        i = j;
    }
    return front;
}

inline std::vector<std::size_t> pareto_indices(std::span<const ObjectivePoint> points) {
    return pareto_indices(points, [](const ObjectivePoint& p) { return p; });
}

struct ParetoEntry {
    CandidateExplanation explanation;
    EffectivenessResult result;
};

struct ParetoFront {
    std::vector<ParetoEntry> points;
};

/// Non-dominated explanations over (|X|, psi).
inline ParetoFront pareto_front(std::span<const ParetoEntry> candidates) {
    if (candidates.empty()) throw DomainError("Pareto front of an empty candidate list");
    auto keep = pareto_indices(candidates, [](const ParetoEntry& c) {
        return ObjectivePoint{static_cast<double>(c.explanation.length()), c.result.psi};
    });
    ParetoFront f;
    for (auto i : keep) f.points.push_back(candidates[i]);
    return f;
}

} // namespace kgx

#endif
