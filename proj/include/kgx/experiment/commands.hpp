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

#ifndef KGX_EXPERIMENT_COMMANDS_HPP
#define KGX_EXPERIMENT_COMMANDS_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "kgx/experiment/config.hpp"
#include "kgx/explain/ensemble.hpp"
#include "kgx/explain/json.hpp"
#include "kgx/explainers.hpp"
#include "kgx/kge/checkpoint.hpp"
#include "kgx/metrics/metrics.hpp"

namespace kgx::experiment {

namespace fs = std::filesystem;

enum class Format { json, csv };

inline fs::path checkpoint_path(const ExperimentConfig& c) { return c.output / "model.ckpt"; }
inline fs::path loss_path(const ExperimentConfig& c) { return c.output / "loss.csv"; }
inline fs::path selection_path(const ExperimentConfig& c) { return c.output / "selection.tsv"; }
inline fs::path runs_dir(const ExperimentConfig& c, Algorithm a) { return c.output / "runs" / std::string(to_string(a)); }
inline fs::path run_path(const ExperimentConfig& c, Algorithm a, std::size_t i) {
    return runs_dir(c, a) / fmt::format("{:04d}.json", i);
}
inline fs::path simultaneous_path(const ExperimentConfig& c, Algorithm a) { return runs_dir(c, a) / "simultaneous.json"; }
inline fs::path simultaneous_checkpoint(const ExperimentConfig& c, Algorithm a) {
    return runs_dir(c, a) / "simultaneous.ckpt";
}

namespace detail {

// Write to <path>.tmp, then rename.
inline void write_atomic(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    auto tmp = p;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw IoError("cannot write " + tmp.string());
        f << content;
        if (!f) throw IoError("write failed: " + tmp.string());
    }
    fs::rename(tmp, p);
}

inline json read_json(const fs::path& p) {
    std::ifstream f(p);
    if (!f) throw IoError("cannot read " + p.string());
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw ParseError(p.string(), 0, e.what());
    }
}

inline void echo_config(const ExperimentConfig& c, const fs::path& dir) { write_atomic(dir / "config.ini", c.text); }

inline void require_file(const fs::path& p, const std::string& what) {
    if (!fs::exists(p)) throw ConfigError(what + " not found: " + p.string() + " (run the earlier command first)");
}

inline EffectivenessConfig effectiveness_config(const ExperimentConfig& c) {
    EffectivenessConfig e;
    e.train = c.train;
    e.post_train = c.post_train;
    e.context = c.context;
    return e;
}

} // namespace detail

/// Trains from scratch; writes the checkpoint and the per-epoch loss curve.
inline fs::path cmd_train(const ExperimentConfig& c) {
    c.validate();
    auto kg = load_dataset(c.dataset);
    auto result = train(init_model(kg, c.train), kg, c.train);
    fs::create_directories(c.output);
    save_checkpoint(checkpoint_path(c), result.model, kg);
    std::string csv = "epoch,train_nll,valid_nll\n";
    for (std::size_t e = 0; e < result.history.train_nll.size(); ++e) {
        csv += fmt::format("{},{:.17g},", e + 1, result.history.train_nll[e]);
        if (e < result.history.valid_nll.size()) csv += fmt::format("{:.17g}", result.history.valid_nll[e]);
        csv += '\n';
    }
    detail::write_atomic(loss_path(c), csv);
    detail::echo_config(c, c.output);
    spdlog::info("train: wrote {}", checkpoint_path(c).string());
    return checkpoint_path(c);
}

struct SelectedTriple {
    Triple triple;
    std::size_t rank = 0;
};

/// Selection file: subject, relation, object, rank; TAB-separated, one per line.
inline std::vector<SelectedTriple> read_selection(const KnowledgeGraph& kg, const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw IoError("cannot open " + p.string());
    std::vector<SelectedTriple> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        boost::algorithm::split(f, line, boost::is_any_of("\t"));
        if (f.size() != 4) throw ParseError(p.string(), lineno, "expected 4 TAB-separated fields");
        try {
            out.push_back({kg.ids({f[0], f[1], f[2]}), std::stoul(f[3])});
        } catch (const std::invalid_argument&) {
            throw ParseError(p.string(), lineno, "rank is not a number");
        }
    }
    return out;
}

/// Ranks the evaluable test triples, keeps the cohort, samples `count` of them with the select seed.
inline fs::path cmd_select(const ExperimentConfig& c) {
    c.validate();
    detail::require_file(checkpoint_path(c), "checkpoint");
    auto kg = load_dataset(c.dataset);
    auto model = load_checkpoint(checkpoint_path(c), kg);
    std::vector<SelectedTriple> cohort;
    for (const auto& t : kg.evaluable(Split::test)) {
        auto r = rank(model, kg, t);
        if (r.rank == c.cohort) cohort.push_back({t, r.rank});
    }
    std::vector<SelectedTriple> chosen;
    if (cohort.size() < c.select_count) {
        spdlog::warn("select: cohort rank {} has {} triples, fewer than the {} requested; taking all", c.cohort,
                     cohort.size(), c.select_count);
        chosen = cohort;
    } else {
        std::mt19937_64 rng(c.select_seed);
        std::sample(cohort.begin(), cohort.end(), std::back_inserter(chosen), c.select_count, rng);
    }
    std::string tsv;
    for (const auto& s : chosen) {
        auto l = kg.labels(s.triple);
        tsv += fmt::format("{}\t{}\t{}\t{}\n", l.subject, l.relation, l.object, s.rank);
    }
    detail::write_atomic(selection_path(c), tsv);
    detail::echo_config(c, c.output);
    spdlog::info("select: {} triples written to {}", chosen.size(), selection_path(c).string());
    return selection_path(c);
}

/// Runs one algorithm on one prediction.
inline ExplanationRun explain_one(const ExperimentConfig& c, const KnowledgeGraph& kg, const EmbeddingModel& model,
                                  const Triple& prediction, const ExplainerConfig& ec,
                                  const std::optional<GenerativeEnsemble>& ensemble) {
    auto eff = detail::effectiveness_config(c);
    std::optional<TargetSet> targets;
    if (c.mode == ExplanationMode::c_sufficient)
        targets = build_target_set(kg, model, prediction, c.target_size, ec.seed, eff.ties);
    EffectivenessEvaluator eval(kg, model, prediction, c.mode, ec.evaluator, eff, targets);
    ExplanationRun run;
    if (c.mode == ExplanationMode::latent_positive || c.mode == ExplanationMode::latent_negative) {
        auto latent = sample_latent_candidates(*ensemble, kg, c.epsilon, c.latent_budget, ec.seed);
        std::vector<Triple> xs;
        for (const auto& l : latent) xs.push_back(l.triple);
        run = exhaustive_length1(eval, xs, SpacePreset::unobserved, ec);
    } else {
        switch (ec.algorithm) {
        case Algorithm::exhaustive: run = exhaustive_length1(eval, ec); break;
        case Algorithm::data_poisoning: run = data_poisoning_direct(eval, ec); break;
        case Algorithm::criage: run = criage_first_order(eval, ec); break;
        case Algorithm::builder: run = variable_length_builder(eval, ec); break;
        }
    }
    if (targets)
        for (const auto& w : targets->warnings) run.warnings.push_back(w);
    return run;
}

struct ExplainSummary {
    std::size_t written = 0;
    std::size_t skipped = 0;  // already present
    std::vector<std::string> failures;
    std::vector<fs::path> simultaneous_checkpoints;
};

namespace detail {

inline json read_simultaneous(const fs::path& p) { return read_json(p); }

// Pools every run's best explanation, removes them all from train, retrains once and re-ranks the selection.
inline fs::path simultaneous_removal(const ExperimentConfig& c, const KnowledgeGraph& kg, const EmbeddingModel& model,
                                     const std::vector<SelectedTriple>& selection, Algorithm algo) {
    std::vector<Triple> removed;
    std::vector<std::size_t> covered;
    for (std::size_t i = 0; i < selection.size(); ++i) {
        auto p = run_path(c, algo, i);
        if (!fs::exists(p)) continue;
        auto run = run_from_json(kg, read_json(p));
        covered.push_back(i);
        if (const auto* b = run.best_record())
            for (const auto& t : b->explanation.triples)
                if (std::ranges::find(removed, t) == removed.end()) removed.push_back(t);
    }
    auto eff = effectiveness_config(c);
    Retrainer f(kg, model, eff);
    auto retrained = f.full(kgx::detail::train_without(kg, removed));
    save_checkpoint(simultaneous_checkpoint(c, algo), retrained, kg);
    json rows = json::array();
    for (auto i : covered) {
        const auto& t = selection[i].triple;
        rows.push_back({{"index", i},
                        {"triple", triple_json(kg, t)},
                        {"rank_before", rank(model, kg, t).rank},
                        {"rank_after", rank(retrained, kg, t).rank}});
    }
    json j = {{"algorithm", to_string(algo)},
              {"removed", triples_json(kg, removed)},
              {"retrains", f.retrains()},
              {"checkpoint", simultaneous_checkpoint(c, algo).filename().string()},
              {"rows", rows}};
    write_atomic(simultaneous_path(c, algo), j.dump(2) + "\n");
    return simultaneous_checkpoint(c, algo);
}

} // namespace detail

/// One run file per (selected triple, algorithm). Existing files are skipped.
inline ExplainSummary cmd_explain(const ExperimentConfig& c) {
    c.validate();
    detail::require_file(checkpoint_path(c), "checkpoint");
    detail::require_file(selection_path(c), "selection");
    auto kg = load_dataset(c.dataset);
    auto model = load_checkpoint(checkpoint_path(c), kg);
    auto selection = read_selection(kg, selection_path(c));

    std::optional<GenerativeEnsemble> ensemble;
    if (c.mode == ExplanationMode::latent_positive || c.mode == ExplanationMode::latent_negative) {
        auto held = kg.evaluable(Split::valid);
        if (held.empty()) throw DomainError("latent mode needs a non-empty validation split for calibration");
        ensemble = calibrate_ensemble(model, kg, held, c.select_seed);
    }

    struct Job {
        std::size_t triple;
        std::size_t algo;
    };
    std::vector<Job> jobs;
    ExplainSummary summary;
    for (std::size_t i = 0; i < selection.size(); ++i)
        for (std::size_t a = 0; a < c.explainers.size(); ++a) {
            if (fs::exists(run_path(c, c.explainers[a].algorithm, i))) {
                ++summary.skipped;
                continue;
            }
            jobs.push_back({i, a});
        }

    std::mutex mu;
    parallel_map(jobs.size(), c.workers, [&](std::size_t j) {
        const auto& job = jobs[j];
        auto ec = c.explainers[job.algo];
        ec.workers = 1;
        const auto& pred = selection[job.triple].triple;
        try {
            auto run = explain_one(c, kg, model, pred, ec, ensemble);
            detail::write_atomic(run_path(c, ec.algorithm, job.triple), to_json(kg, run).dump(2) + "\n");
            std::lock_guard lock(mu);
            ++summary.written;
        } catch (const std::exception& e) {
            auto l = kg.labels(pred);
            auto msg = fmt::format("{} on #{} ({} {} {}): {}", to_string(ec.algorithm), job.triple, l.subject,
                                   l.relation, l.object, e.what());
            spdlog::error("explain: {}", msg);
            std::lock_guard lock(mu);
            summary.failures.push_back(msg);
        }
        return 0;
    });
    std::ranges::sort(summary.failures);

    if (c.removal == Removal::simultaneous)
        for (const auto& ec : c.explainers) {
            if (fs::exists(simultaneous_path(c, ec.algorithm))) continue;
            summary.simultaneous_checkpoints.push_back(
                detail::simultaneous_removal(c, kg, model, selection, ec.algorithm));
        }
    detail::write_atomic(c.output / "runs" / "failures.json", json(summary.failures).dump(2) + "\n");
    detail::echo_config(c, c.output / "runs");
    return summary;
}

/// Thrown when run files needed by evaluate are absent; lists every gap.
class MissingRunsError : public Error {
public:
    explicit MissingRunsError(std::vector<std::string> gaps)
        : Error("missing run files:\n  " + boost::algorithm::join(gaps, "\n  ")), gaps_(std::move(gaps)) {}
    const std::vector<std::string>& gaps() const noexcept { return gaps_; }

private:
    std::vector<std::string> gaps_;
};

namespace detail {

inline RankTable simultaneous_table(const KnowledgeGraph& kg, const json& j) {
    std::vector<RankRow> rows;
    for (const auto& r : j.at("rows"))
        rows.push_back({triple_from_json(kg, r.at("triple")), r.at("rank_before").get<std::size_t>(),
                        r.at("rank_after").get<std::size_t>()});
    return RankTable(std::move(rows));
}

inline std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
    std::string s = "algorithm,mean_length,m_delta_r,mrr_after,hits1_after,pareto_optimal\n";
    for (const auto& r : rows)
        s += fmt::format("{},{},{:.6g},{:.6g},{:.6g},{}\n", r.name,
                         r.mean_length ? fmt::format("{:.6g}", *r.mean_length) : std::string(), r.m_delta_r,
                         r.mrr_after, r.hits1_after, r.pareto_optimal ? 1 : 0);
    return s;
}

inline json comparison_json(const std::vector<ComparisonRow>& rows) {
    json a = json::array();
    for (const auto& r : rows) {
        json j = {{"algorithm", r.name}, {"pareto_optimal", r.pareto_optimal}};
        if (r.mean_length) {
            kgx::detail::put_float(j, "mean_length", *r.mean_length);
        } else {
            j["mean_length"] = nullptr;
        }
        kgx::detail::put_float(j, "m_delta_r", r.m_delta_r);
        kgx::detail::put_float(j, "mrr_after", r.mrr_after);
        kgx::detail::put_float(j, "hits1_after", r.hits1_after);
        a.push_back(j);
    }
    return {{"schema_version", report_schema_version}, {"sorted_by", "m_delta_r"}, {"rows", a}};
}

} // namespace detail

/// Per-algorithm reports plus a comparison table sorted by MΔR.
inline fs::path cmd_evaluate(const ExperimentConfig& c, Format format = Format::json) {
    c.validate();
    detail::require_file(selection_path(c), "selection");
    auto kg = load_dataset(c.dataset);
    auto selection = read_selection(kg, selection_path(c));
    std::vector<std::string> gaps;
    for (const auto& ec : c.explainers) {
        for (std::size_t i = 0; i < selection.size(); ++i)
            if (!fs::exists(run_path(c, ec.algorithm, i))) gaps.push_back(run_path(c, ec.algorithm, i).string());
        if (c.removal == Removal::simultaneous && !fs::exists(simultaneous_path(c, ec.algorithm)))
            gaps.push_back(simultaneous_path(c, ec.algorithm).string());
    }
    if (!gaps.empty()) throw MissingRunsError(std::move(gaps));

    auto eval_dir = c.output / "eval";
    std::vector<ComparisonRow> rows;
    for (const auto& ec : c.explainers) {
        std::vector<ExplanationRun> runs;
        for (std::size_t i = 0; i < selection.size(); ++i)
            runs.push_back(run_from_json(kg, detail::read_json(run_path(c, ec.algorithm, i))));
        auto table = c.removal == Removal::simultaneous
                         ? detail::simultaneous_table(kg, detail::read_json(simultaneous_path(c, ec.algorithm)))
                         : table_from_runs(runs);
        if (table.empty()) {
            spdlog::warn("evaluate: {} has no rows to report", to_string(ec.algorithm));
            continue;
        }
        json extra = {{"algorithm", to_string(ec.algorithm)},
                      {"removal", removal_names[static_cast<int>(c.removal)]},
                      {"mode", to_string(c.mode)}};
        emit_report(eval_dir / std::string(to_string(ec.algorithm)), kg, table, runs, c.hits_k, extra);
        rows.push_back(comparison_row(std::string(to_string(ec.algorithm)), table, runs));
    }
    rows = compare(std::move(rows));
    auto out = eval_dir / (format == Format::json ? "comparison.json" : "comparison.csv");
    detail::write_atomic(out, format == Format::json ? detail::comparison_json(rows).dump(2) + "\n"
                                                     : detail::comparison_csv(rows));
    detail::echo_config(c, eval_dir);
    return out;
}

/// Exports every available run's Pareto front.
inline fs::path cmd_pareto(const ExperimentConfig& c, Format format = Format::json) {
    c.validate();
    detail::require_file(selection_path(c), "selection");
    auto kg = load_dataset(c.dataset);
    auto selection = read_selection(kg, selection_path(c));
    std::vector<ExplanationRun> runs;
    for (const auto& ec : c.explainers)
        for (std::size_t i = 0; i < selection.size(); ++i)
            if (fs::exists(run_path(c, ec.algorithm, i)))
                runs.push_back(run_from_json(kg, detail::read_json(run_path(c, ec.algorithm, i))));
    fs::path out = c.output / (format == Format::json ? "pareto.json" : "pareto.csv");
    if (format == Format::csv) {
        write_pareto_csv(out, kg, runs);
    } else {
        json a = json::array();
        for (const auto& run : runs) {
            json pts = json::array();
            for (auto i : run.front) {
                const auto& rec = run.candidates[i];
                json p = {{"triples", triples_json(kg, rec.explanation.triples)},
                          {"length", rec.explanation.length()}};
                kgx::detail::put_float(p, "psi", rec.result->psi);
                pts.push_back(p);
            }
            a.push_back({{"algorithm", to_string(run.algorithm)},
                         {"prediction", triple_json(kg, run.prediction)},
                         {"front", pts}});
        }
        detail::write_atomic(out, a.dump(2) + "\n");
    }
    return out;
}

} // namespace kgx::experiment

#endif
