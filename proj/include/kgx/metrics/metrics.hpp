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

#ifndef KGX_METRICS_METRICS_HPP
#define KGX_METRICS_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "kgx/explain/json.hpp"

namespace kgx {

enum class Which { before, after };

struct RankRow {
    Triple triple;
    std::size_t rank_before = 1;
    std::size_t rank_after = 1;

    long long delta() const noexcept {
        return static_cast<long long>(rank_after) - static_cast<long long>(rank_before);
    }
    std::size_t rank(Which w) const noexcept { return w == Which::before ? rank_before : rank_after; }
};

/// Evaluation set with ranks before and after removing explanations.
class RankTable {
public:
    RankTable() = default;
    explicit RankTable(std::vector<RankRow> rows, std::optional<std::string> cohort = std::nullopt)
        : rows_(std::move(rows)), cohort_(std::move(cohort)) {
        std::set<Triple> seen;
        for (const auto& r : rows_) {
            if (r.rank_before < 1 || r.rank_after < 1) throw DomainError("ranks must be >= 1");
            if (!seen.insert(r.triple).second) throw DomainError("duplicate triple in rank table");
        }
    }

    const std::vector<RankRow>& rows() const noexcept { return rows_; }
    const std::optional<std::string>& cohort() const noexcept { return cohort_; }
    std::size_t size() const noexcept { return rows_.size(); }
    bool empty() const noexcept { return rows_.empty(); }

private:
    std::vector<RankRow> rows_;
    std::optional<std::string> cohort_;
};

/// Rows with rank <= k.
inline std::size_t hits_at_k(const RankTable& t, std::size_t k, Which w) {
    if (k < 1) throw ConfigError("k must be >= 1");
    if (t.empty()) throw DomainError("Hits@k of an empty table");
    return static_cast<std::size_t>(
        std::ranges::count_if(t.rows(), [&](const RankRow& r) { return r.rank(w) <= k; }));
}

inline double hits_fraction(const RankTable& t, std::size_t k, Which w) {
    return static_cast<double>(hits_at_k(t, k, w)) / static_cast<double>(t.size());
}

inline double mrr(const RankTable& t, Which w) {
    if (t.empty()) throw DomainError("MRR of an empty table");
    double s = 0.0;
    for (const auto& r : t.rows()) s += 1.0 / static_cast<double>(r.rank(w));
    return s / static_cast<double>(t.size());
}

inline double mean_rank(const RankTable& t, Which w) {
    if (t.empty()) throw DomainError("mean rank of an empty table");
    double s = 0.0;
    for (const auto& r : t.rows()) s += static_cast<double>(r.rank(w));
    return s / static_cast<double>(t.size());
}

/// Mean rank difference; checked against the difference of mean ranks.
inline double m_delta_r(const RankTable& t) {
    if (t.empty()) throw DomainError("MΔR of an empty table");
    double s = 0.0;
    for (const auto& r : t.rows()) s += static_cast<double>(r.delta());
    const double mean_of_diffs = s / static_cast<double>(t.size());
    const double before = mean_rank(t, Which::before), after = mean_rank(t, Which::after);
    if (std::abs(mean_of_diffs - (after - before)) > 1e-12 * std::max(1.0, before + after))
        throw std::logic_error("mean rank difference identity violated");
    return mean_of_diffs;
}

inline RankTable cohort_filter(const RankTable& t, std::size_t rank_value) {
    std::vector<RankRow> keep;
    for (const auto& r : t.rows())
        if (r.rank_before == rank_value) keep.push_back(r);
    if (keep.empty()) spdlog::warn("cohort rank {} is empty", rank_value);
    return RankTable(std::move(keep), "rank-" + std::to_string(rank_value));
}

/// Prediction ranks from each run's best explanation; runs with no evaluated candidate are skipped with a warning.
inline RankTable table_from_runs(std::span<const ExplanationRun> runs) {
    std::vector<RankRow> rows;
    for (const auto& run : runs) {
        if (const auto* b = run.best_record()) {
            rows.push_back({run.prediction, b->result->rank_before, b->result->rank_after});
        } else {
            spdlog::warn("run for {} has no evaluated candidate; left out of the rank table", run.prediction.subject.value);
        }
    }
    return RankTable(std::move(rows));
}

/// Mean length of the runs' best explanations; nullopt when no run has one.
inline std::optional<double> mean_explanation_length(std::span<const ExplanationRun> runs) {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& run : runs)
        if (const auto* b = run.best_record()) {
            s += static_cast<double>(b->explanation.length());
            ++n;
        }
    if (n == 0) return std::nullopt;
    return s / static_cast<double>(n);
}

inline constexpr int report_schema_version = 1;

struct MetricsReport {
    std::size_t size = 0;
    std::optional<std::string> cohort;
    double mrr_before = 0.0, mrr_after = 0.0;
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> hits;  // k -> (before, after) counts
    double m_delta_r = 0.0;
    double mean_rank_before = 0.0, mean_rank_after = 0.0;
    std::optional<double> mean_length;
    long long max_delta_r = 0;
    Triple max_delta_triple;
    std::vector<long long> deltas;
};

inline MetricsReport make_report(const RankTable& t, std::span<const ExplanationRun> runs,
                                 std::span<const std::size_t> ks) {
    if (t.empty()) throw DomainError("report over an empty table");
    MetricsReport r;
    r.size = t.size();
    r.cohort = t.cohort();
    r.mrr_before = mrr(t, Which::before);
    r.mrr_after = mrr(t, Which::after);
    for (auto k : ks) r.hits[k] = {hits_at_k(t, k, Which::before), hits_at_k(t, k, Which::after)};
    r.m_delta_r = m_delta_r(t);
    r.mean_rank_before = mean_rank(t, Which::before);
    r.mean_rank_after = mean_rank(t, Which::after);
    r.mean_length = mean_explanation_length(runs);
    bool first = true;
    for (const auto& row : t.rows()) {
        r.deltas.push_back(row.delta());
        if (first || row.delta() > r.max_delta_r) {
            r.max_delta_r = row.delta();
            r.max_delta_triple = row.triple;
            first = false;
        }
    }
    return r;
}

namespace detail {

inline double round6(double x) { return std::isfinite(x) ? std::stod(fmt::format("{:.6g}", x)) : x; }

// Rounded value plus "<key>_full" carrying every digit.
inline void put_float(json& j, const std::string& key, double x) {
    j[key] = round6(x);
    j[key + "_full"] = x;
}

inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::ofstream open_out(const std::filesystem::path& p) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p);
    if (!f) throw IoError("cannot write " + p.string());
    return f;
}

} // namespace detail

inline json to_json(const KnowledgeGraph& kg, const MetricsReport& r) {
    json j;
    j["schema_version"] = report_schema_version;
    j["size"] = r.size;
    j["cohort"] = r.cohort ? json(*r.cohort) : json(nullptr);
    detail::put_float(j, "mrr_before", r.mrr_before);
    detail::put_float(j, "mrr_after", r.mrr_after);
    json hits = json::object();
    for (const auto& [k, c] : r.hits) {
        json h = {{"before_count", c.first}, {"after_count", c.second}};
        detail::put_float(h, "before_percent", 100.0 * static_cast<double>(c.first) / static_cast<double>(r.size));
        detail::put_float(h, "after_percent", 100.0 * static_cast<double>(c.second) / static_cast<double>(r.size));
        hits[std::to_string(k)] = h;
    }
    j["hits"] = hits;
    detail::put_float(j, "m_delta_r", r.m_delta_r);
    detail::put_float(j, "mean_rank_before", r.mean_rank_before);
    detail::put_float(j, "mean_rank_after", r.mean_rank_after);
    if (r.mean_length) {
        detail::put_float(j, "mean_length", *r.mean_length);
    } else {
        j["mean_length"] = nullptr;
        j["mean_length_full"] = nullptr;
    }
    j["max_delta_r"] = r.max_delta_r;
    j["max_delta_r_triple"] = triple_json(kg, r.max_delta_triple);
    j["delta_r"] = r.deltas;
    return j;
}

inline constexpr std::string_view per_triple_csv_header =
    "subject,relation,object,rank_before,rank_after,delta_r,reciprocal_before,reciprocal_after,changed";

inline void write_per_triple_csv(const std::filesystem::path& p, const KnowledgeGraph& kg, const RankTable& t) {
    auto f = detail::open_out(p);
    f << per_triple_csv_header << '\n';
    for (const auto& r : t.rows()) {
        auto l = kg.labels(r.triple);
        f << detail::csv_field(l.subject) << ',' << detail::csv_field(l.relation) << ',' << detail::csv_field(l.object)
          << ',' << r.rank_before << ',' << r.rank_after << ',' << r.delta() << ','
          << fmt::format("{:.6g}", 1.0 / static_cast<double>(r.rank_before)) << ','
          << fmt::format("{:.6g}", 1.0 / static_cast<double>(r.rank_after)) << ','
          << (r.rank_before != r.rank_after ? 1 : 0) << '\n';
    }
    if (!f) throw IoError("write failed: " + p.string());
}

inline constexpr std::string_view pareto_csv_header = "algorithm,subject,relation,object,length,psi";

inline void write_pareto_csv(const std::filesystem::path& p, const KnowledgeGraph& kg,
                             std::span<const ExplanationRun> runs) {
    auto f = detail::open_out(p);
    f << pareto_csv_header << '\n';
    for (const auto& run : runs) {
        auto l = kg.labels(run.prediction);
        for (auto i : run.front)
            f << to_string(run.algorithm) << ',' << detail::csv_field(l.subject) << ','
              << detail::csv_field(l.relation) << ',' << detail::csv_field(l.object) << ','
              << run.candidates[i].explanation.length() << ','
              << fmt::format("{:.6g}", run.candidates[i].result->psi) << '\n';
    }
    if (!f) throw IoError("write failed: " + p.string());
}

/// Writes report.json, per_triple.csv and pareto.csv into `dir`.
inline MetricsReport emit_report(const std::filesystem::path& dir, const KnowledgeGraph& kg, const RankTable& table,
                                 std::span<const ExplanationRun> runs, std::span<const std::size_t> ks,
                                 const json& extra = json::object()) {
    std::set<Triple> in_table;
    for (const auto& r : table.rows()) in_table.insert(r.triple);
    for (const auto& run : runs)
        if (!in_table.contains(run.prediction)) throw DomainError("run prediction missing from the rank table");
    auto report = make_report(table, runs, ks);
    auto j = to_json(kg, report);
    for (const auto& [k, v] : extra.items()) j[k] = v;
    {
        auto f = detail::open_out(dir / "report.json");
        f << j.dump(2) << '\n';
        if (!f) throw IoError("write failed: " + (dir / "report.json").string());
    }
    write_per_triple_csv(dir / "per_triple.csv", kg, table);
    write_pareto_csv(dir / "pareto.csv", kg, runs);
    return report;
}

/// One line of an algorithm comparison.
struct ComparisonRow {
    std::string name;
    std::optional<double> mean_length;
    double m_delta_r = 0.0;
    double mrr_after = 0.0;
    double hits1_after = 0.0;  // fraction
    bool pareto_optimal = false;
};

/// Sorted by descending MΔR; pareto_optimal marks rows not dominated on (shorter ML, larger MΔR).
inline std::vector<ComparisonRow> compare(std::vector<ComparisonRow> rows) {
    std::vector<ObjectivePoint> pts;
    for (const auto& r : rows)
        pts.push_back({r.mean_length.value_or(std::numeric_limits<double>::infinity()), r.m_delta_r});
    for (auto i : pareto_indices(std::span<const ObjectivePoint>(pts))) rows[i].pareto_optimal = true;
    std::ranges::stable_sort(rows, [](const auto& a, const auto& b) { return a.m_delta_r > b.m_delta_r; });
    return rows;
}

inline ComparisonRow comparison_row(std::string name, const RankTable& t, std::span<const ExplanationRun> runs) {
    return {std::move(name), mean_explanation_length(runs), m_delta_r(t), mrr(t, Which::after),
            hits_fraction(t, 1, Which::after), false};
}

} // namespace kgx

#endif
