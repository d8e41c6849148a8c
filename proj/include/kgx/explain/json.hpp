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

#ifndef KGX_EXPLAIN_JSON_HPP
#define KGX_EXPLAIN_JSON_HPP

#include <nlohmann/json.hpp>

#include "kgx/explainers/run.hpp"

namespace kgx {

using json = nlohmann::json;

inline constexpr int run_schema_version = 1;

inline json triple_json(const KnowledgeGraph& kg, const Triple& t) {
    auto l = kg.labels(t);
    return json::array({l.subject, l.relation, l.object});
}

inline Triple triple_from_json(const KnowledgeGraph& kg, const json& j) {
    if (!j.is_array() || j.size() != 3) throw DomainError("triple must be a [subject, relation, object] array");
    return kg.ids({j[0].get<std::string>(), j[1].get<std::string>(), j[2].get<std::string>()});
}

inline json triples_json(const KnowledgeGraph& kg, std::span<const Triple> ts) {
    json a = json::array();
    for (const auto& t : ts) a.push_back(triple_json(kg, t));
    return a;
}

inline std::vector<Triple> triples_from_json(const KnowledgeGraph& kg, const json& j) {
    std::vector<Triple> out;
    for (const auto& x : j) out.push_back(triple_from_json(kg, x));
    return out;
}

inline json to_json(const KnowledgeGraph& kg, const EffectivenessResult& r) {
    json targets = json::array();
    for (const auto& o : r.per_target)
        targets.push_back({{"target", kg.entities().label(o.target)},
                           {"rank_before", o.rank_before},
                           {"rank_after", o.rank_after},
                           {"psi", o.psi},
                           {"skipped", triples_json(kg, o.skipped)}});
    return {{"psi", r.psi},
            {"rank_before", r.rank_before},
            {"rank_after", r.rank_after},
            {"operator", to_string(r.op)},
            {"evaluator", to_string(r.evaluator)},
            {"mode", to_string(r.mode)},
            {"score_before", r.score_before},
            {"score_after", r.score_after},
            {"retrains", r.retrains},
            {"per_target", targets},
            {"flags", r.flags}};
}

inline EffectivenessResult result_from_json(const KnowledgeGraph& kg, const json& j) {
    EffectivenessResult r;
    r.psi = j.at("psi").get<double>();
    r.rank_before = j.at("rank_before").get<std::size_t>();
    r.rank_after = j.at("rank_after").get<std::size_t>();
    r.op = detail::parse_enum<RetrainOperator>(j.at("operator").get<std::string>(), operator_names, "operator");
    r.evaluator = parse_evaluator(j.at("evaluator").get<std::string>());
    r.mode = parse_mode(j.at("mode").get<std::string>());
    r.score_before = j.at("score_before").get<double>();
    r.score_after = j.at("score_after").get<double>();
    r.retrains = j.at("retrains").get<std::size_t>();
    for (const auto& o : j.at("per_target"))
        r.per_target.push_back({kg.entities().at(o.at("target").get<std::string>()),
                                o.at("rank_before").get<std::size_t>(), o.at("rank_after").get<std::size_t>(),
                                o.at("psi").get<double>(), triples_from_json(kg, o.at("skipped"))});
    r.flags = j.at("flags").get<std::vector<std::string>>();
    return r;
}

inline json to_json(const ExplainerConfig& c) {
    return {{"algorithm", to_string(c.algorithm)},
            {"space", to_string(c.space)},
            {"max_length", c.max_length},
            {"top_k", c.top_k},
            {"evaluator", to_string(c.evaluator)},
            {"lambda", c.lambda},
            {"perturbation_step", c.perturbation_step},
            {"top_m", c.top_m},
            {"influence_step", c.influence_step},
            {"evaluate_all", c.evaluate_all},
            {"threshold", std::isfinite(c.threshold) ? json(c.threshold) : json(c.threshold > 0 ? "inf" : "-inf")},
            {"max_candidates_per_length", c.max_candidates_per_length},
            {"initial_temperature", c.initial_temperature},
            {"cooling", c.cooling},
            {"proposals_per_temperature", c.proposals_per_temperature},
            {"seed", c.seed},
            {"workers", c.workers}};
}

/// Run file: algorithm id, config echo, per-candidate records, front, cost counters.
inline json to_json(const KnowledgeGraph& kg, const ExplanationRun& run) {
    json cands = json::array();
    for (const auto& c : run.candidates) {
        json jc = {{"triples", triples_json(kg, c.explanation.triples)},
                   {"provenance", to_string(c.explanation.provenance)},
                   {"length", c.explanation.length()},
                   {"seconds", c.seconds}};
        jc["heuristic"] = c.heuristic ? json(*c.heuristic) : json(nullptr);
        jc["result"] = c.result ? to_json(kg, *c.result) : json(nullptr);
        cands.push_back(std::move(jc));
    }
    json j = {{"schema_version", run_schema_version},
              {"algorithm", to_string(run.algorithm)},
              {"config", to_json(run.config)},
              {"prediction", triple_json(kg, run.prediction)},
              {"mode", to_string(run.mode)},
              {"evaluator", to_string(run.evaluator)},
              {"space", to_string(run.space)},
              {"candidates", cands},
              {"front", run.front},
              {"retrains", run.retrains},
              {"evaluations", run.evaluations},
              {"wall_seconds", run.wall_seconds},
              {"warnings", run.warnings}};
    j["best"] = run.best ? json(*run.best) : json(nullptr);
    return j;
}

inline ExplanationRun run_from_json(const KnowledgeGraph& kg, const json& j) {
    if (j.value("schema_version", 0) != run_schema_version) throw DomainError("unsupported run schema version");
    ExplanationRun run;
    run.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    const auto& c = j.at("config");
    run.config.algorithm = run.algorithm;
    run.config.space = parse_preset(c.at("space").get<std::string>());
    run.config.max_length = c.at("max_length");
    run.config.top_k = c.at("top_k");
    run.config.evaluator = parse_evaluator(c.at("evaluator").get<std::string>());
    run.config.lambda = c.at("lambda");
    run.config.perturbation_step = c.at("perturbation_step");
    run.config.top_m = c.at("top_m");
    run.config.influence_step = c.at("influence_step");
    run.config.evaluate_all = c.at("evaluate_all");
    const auto& th = c.at("threshold");
    run.config.threshold = th.is_string() ? (th == "-inf" ? -std::numeric_limits<double>::infinity()
                                                          : std::numeric_limits<double>::infinity())
                                          : th.get<double>();
    run.config.max_candidates_per_length = c.at("max_candidates_per_length");
    run.config.initial_temperature = c.at("initial_temperature");
    run.config.cooling = c.at("cooling");
    run.config.proposals_per_temperature = c.at("proposals_per_temperature");
    run.config.seed = c.at("seed");
    run.config.workers = c.at("workers");
    run.prediction = triple_from_json(kg, j.at("prediction"));
    run.mode = parse_mode(j.at("mode").get<std::string>());
    run.evaluator = parse_evaluator(j.at("evaluator").get<std::string>());
    run.space = parse_preset(j.at("space").get<std::string>());
    for (const auto& jc : j.at("candidates")) {
        CandidateRecord rec;
        rec.explanation.triples = triples_from_json(kg, jc.at("triples"));
        rec.explanation.provenance = parse_preset(jc.at("provenance").get<std::string>());
        rec.seconds = jc.at("seconds");
        if (!jc.at("heuristic").is_null()) rec.heuristic = jc.at("heuristic").get<double>();
        if (!jc.at("result").is_null()) rec.result = result_from_json(kg, jc.at("result"));
        run.candidates.push_back(std::move(rec));
    }
    run.front = j.at("front").get<std::vector<std::size_t>>();
    if (!j.at("best").is_null()) run.best = j.at("best").get<std::size_t>();
    run.retrains = j.at("retrains");
    run.evaluations = j.at("evaluations");
    run.wall_seconds = j.at("wall_seconds");
    run.warnings = j.at("warnings").get<std::vector<std::string>>();
    return run;
}

inline json to_json(const KnowledgeGraph& kg, const ParetoFront& front) {
    json pts = json::array();
    for (const auto& p : front.points)
        pts.push_back({{"triples", triples_json(kg, p.explanation.triples)},
                       {"length", p.explanation.length()},
                       {"result", to_json(kg, p.result)}});
    return {{"points", pts}};
}

} // namespace kgx

#endif
