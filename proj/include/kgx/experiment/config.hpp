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

#ifndef KGX_EXPERIMENT_CONFIG_HPP
#define KGX_EXPERIMENT_CONFIG_HPP

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "kgx/explainers/run.hpp"

namespace kgx::experiment {

enum class Removal { per_triple, simultaneous };

inline constexpr std::string_view removal_names[] = {"per-triple", "simultaneous"};

/// Everything one experiment needs; loaded from an INI file whose text is echoed into every output directory.
struct ExperimentConfig {
    std::filesystem::path source;
    std::string text;

    std::filesystem::path dataset;
    std::filesystem::path output;
    TrainConfig train;
    TrainConfig post_train;

    ExplanationMode mode = ExplanationMode::necessary;
    EvaluatorKind evaluator = EvaluatorKind::post_train;
    ContextPolicy context = ContextPolicy::frozen_neighborhood;
    Removal removal = Removal::per_triple;
    std::vector<ExplainerConfig> explainers;
    std::size_t target_size = 5;
    double epsilon = 0.1;
    std::size_t latent_budget = 20;

    std::size_t select_count = 50;
    std::uint64_t select_seed = 0;
    std::size_t cohort = 1;
    std::vector<std::size_t> hits_k{1, 3, 10};
    std::size_t workers = 1;

    /// Checks everything that can be checked without computing.
    void validate() const {
        train.validate();
        post_train.validate();
        if (!std::filesystem::is_directory(dataset))
            throw ConfigError("dataset directory does not exist: " + dataset.string());
        for (auto f : {"train.txt", "valid.txt", "test.txt"})
            if (!std::filesystem::is_regular_file(dataset / f))
                throw ConfigError("dataset file missing: " + (dataset / f).string());
        if (output.empty()) throw ConfigError("output directory is not set");
        if (select_count < 1) throw ConfigError("select.count must be >= 1");
        if (cohort < 1) throw ConfigError("select.cohort must be >= 1");
        if (hits_k.empty()) throw ConfigError("evaluate.hits must list at least one k");
        for (auto k : hits_k)
            if (k < 1) throw ConfigError("evaluate.hits entries must be >= 1");
        if (workers < 1) throw ConfigError("workers must be >= 1");
        if (explainers.empty()) throw ConfigError("explain.algorithms must name at least one algorithm");
        if (target_size < 1) throw ConfigError("explain.target_size must be >= 1");
        if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("explain.epsilon must lie in (0, 1)");
        if (latent_budget < 1) throw ConfigError("explain.latent_budget must be >= 1");
        const bool latent = mode == ExplanationMode::latent_positive || mode == ExplanationMode::latent_negative;
        std::set<Algorithm> seen;
        for (const auto& e : explainers) {
            e.validate();
            if (!seen.insert(e.algorithm).second) throw ConfigError("algorithm listed twice");
            if (latent && e.algorithm != Algorithm::exhaustive)
                throw ConfigError("latent modes support only the exhaustive algorithm");
            if (e.algorithm == Algorithm::criage && mode != ExplanationMode::necessary)
                throw ConfigError("criage supports only the necessary mode");
            if (e.algorithm == Algorithm::builder && e.max_length > 4)
                throw ConfigError("builder max_length must lie in [1, 4]");
        }
        if (removal == Removal::simultaneous && mode != ExplanationMode::necessary)
            throw ConfigError("simultaneous removal applies to the necessary mode only");
    }
};

namespace detail {

using boost::property_tree::ptree;

inline const std::map<std::string, std::set<std::string>>& allowed_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"dataset", {"path"}},
        {"output", {"directory"}},
        {"train",
         {"dimension", "epochs", "learning_rate", "regularization", "batch_size", "seed", "init_scale",
          "adagrad_initial_accumulator", "adagrad_epsilon"}},
        {"post_train",
         {"dimension", "epochs", "learning_rate", "regularization", "batch_size", "seed", "init_scale",
          "adagrad_initial_accumulator", "adagrad_epsilon"}},
        {"select", {"count", "seed", "cohort"}},
        {"explain",
         {"mode", "evaluator", "context", "removal", "algorithms", "space", "max_length", "top_k", "lambda",
          "perturbation_step", "top_m", "influence_step", "evaluate_all", "threshold", "max_candidates_per_length",
          "initial_temperature", "cooling", "proposals_per_temperature", "seed", "target_size", "epsilon",
          "latent_budget"}},
        {"evaluate", {"hits"}},
        {"run", {"workers"}},
    };
    return keys;
}

template <typename T>
T get(const ptree& pt, const std::string& key, T fallback) {
    try {
        return pt.get<T>(key, fallback);
    } catch (const boost::property_tree::ptree_bad_data&) {
        throw ConfigError("bad value for '" + key + "': " + pt.get<std::string>(key));
    }
}

inline double get_real(const ptree& pt, const std::string& key, double fallback) {
    auto v = pt.get_optional<std::string>(key);
    if (!v) return fallback;
    auto s = boost::algorithm::trim_copy(*v);
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        double x = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("bad number for '" + key + "': " + s);
    }
}

inline std::vector<std::string> get_list(const ptree& pt, const std::string& key) {
    std::vector<std::string> out;
    auto v = pt.get_optional<std::string>(key);
    if (!v) return out;
    std::vector<std::string> parts;
    boost::algorithm::split(parts, *v, boost::is_any_of(","));
    for (auto& p : parts) {
        boost::algorithm::trim(p);
        if (!p.empty()) out.push_back(p);
    }
    return out;
}

inline TrainConfig read_train(const ptree& pt, const std::string& section, const TrainConfig& base) {
    TrainConfig c = base;
    auto k = [&](const char* name) { return section + "." + name; };
    c.dimension = get<std::size_t>(pt, k("dimension"), c.dimension);
    c.epochs = get<std::size_t>(pt, k("epochs"), c.epochs);
    c.learning_rate = get_real(pt, k("learning_rate"), c.learning_rate);
    c.regularization = get_real(pt, k("regularization"), c.regularization);
    c.batch_size = get<std::size_t>(pt, k("batch_size"), c.batch_size);
    c.seed = get<std::uint64_t>(pt, k("seed"), c.seed);
    c.init_scale = get_real(pt, k("init_scale"), c.init_scale);
    c.adagrad_initial_accumulator = get_real(pt, k("adagrad_initial_accumulator"), c.adagrad_initial_accumulator);
    c.adagrad_epsilon = get_real(pt, k("adagrad_epsilon"), c.adagrad_epsilon);
    return c;
}

} // namespace detail

struct Overrides {
    std::optional<std::filesystem::path> output;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
};

/// Parses INI text. Relative dataset and output paths resolve against `base_dir`.
inline ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                                     const Overrides& over = {}) {
    detail::ptree pt;
    try {
        std::istringstream in(text);
        boost::property_tree::ini_parser::read_ini(in, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax error: ") + e.what());
    }
    for (const auto& [section, body] : pt) {
        auto it = detail::allowed_keys().find(section);
        if (it == detail::allowed_keys().end()) throw ConfigError("unknown config section [" + section + "]");
        for (const auto& [key, _] : body)
            if (!it->second.contains(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
    }

    ExperimentConfig c;
    c.text = text;
    auto dataset = pt.get_optional<std::string>("dataset.path");
    if (!dataset) throw ConfigError("dataset.path is required");
    c.dataset = base_dir / *dataset;
    c.output = over.output ? *over.output : base_dir / pt.get<std::string>("output.directory", "out");

    if (!over.seed) {
        for (auto key : {"train.seed", "select.seed", "explain.seed"})
            if (!pt.get_optional<std::string>(key)) throw ConfigError(std::string(key) + " is required");
    }
    c.train = detail::read_train(pt, "train", TrainConfig{});
    c.post_train = detail::read_train(pt, "post_train", c.train);

    c.mode = parse_mode(pt.get<std::string>("explain.mode", "necessary"));
    c.evaluator = parse_evaluator(pt.get<std::string>("explain.evaluator", "post-train"));
    c.context = parse_context(pt.get<std::string>("explain.context", "frozen-neighborhood"));
    c.removal = kgx::detail::parse_enum<Removal>(pt.get<std::string>("explain.removal", "per-triple"), removal_names,
                                                 "removal");
    c.target_size = detail::get<std::size_t>(pt, "explain.target_size", c.target_size);
    c.epsilon = detail::get_real(pt, "explain.epsilon", c.epsilon);
    c.latent_budget = detail::get<std::size_t>(pt, "explain.latent_budget", c.latent_budget);

    ExplainerConfig base;
    base.evaluator = c.evaluator;
    base.space = parse_preset(pt.get<std::string>("explain.space", std::string(to_string(base.space))));
    base.max_length = detail::get<std::size_t>(pt, "explain.max_length", base.max_length);
    base.top_k = detail::get<std::size_t>(pt, "explain.top_k", base.top_k);
    base.lambda = detail::get_real(pt, "explain.lambda", base.lambda);
    base.perturbation_step = detail::get_real(pt, "explain.perturbation_step", base.perturbation_step);
    base.top_m = detail::get<std::size_t>(pt, "explain.top_m", base.top_m);
    base.influence_step = detail::get_real(pt, "explain.influence_step", base.influence_step);
    base.evaluate_all = detail::get<bool>(pt, "explain.evaluate_all", base.evaluate_all);
    base.threshold = detail::get_real(pt, "explain.threshold", base.threshold);
    base.max_candidates_per_length =
        detail::get<std::size_t>(pt, "explain.max_candidates_per_length", base.max_candidates_per_length);
    base.initial_temperature = detail::get_real(pt, "explain.initial_temperature", base.initial_temperature);
    base.cooling = detail::get_real(pt, "explain.cooling", base.cooling);
    base.proposals_per_temperature =
        detail::get<std::size_t>(pt, "explain.proposals_per_temperature", base.proposals_per_temperature);
    base.seed = detail::get<std::uint64_t>(pt, "explain.seed", base.seed);
    auto algos = detail::get_list(pt, "explain.algorithms");
    if (algos.empty()) algos = {"exhaustive"};
    for (const auto& a : algos) {
        auto e = base;
        e.algorithm = parse_algorithm(a);
        c.explainers.push_back(e);
    }

    c.select_count = detail::get<std::size_t>(pt, "select.count", c.select_count);
    c.select_seed = detail::get<std::uint64_t>(pt, "select.seed", c.select_seed);
    c.cohort = detail::get<std::size_t>(pt, "select.cohort", c.cohort);
    if (auto hits = detail::get_list(pt, "evaluate.hits"); !hits.empty()) {
        c.hits_k.clear();
        for (const auto& h : hits) {
            try {
                c.hits_k.push_back(std::stoul(h));
            } catch (const std::exception&) {
                throw ConfigError("bad evaluate.hits entry: " + h);
            }
        }
    }
    c.workers = detail::get<std::size_t>(pt, "run.workers", c.workers);

    if (over.seed) {
        c.train.seed = c.post_train.seed = c.select_seed = *over.seed;
        for (auto& e : c.explainers) e.seed = *over.seed;
    }
    if (over.workers) c.workers = *over.workers;
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& over = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    auto c = parse_config(ss.str(), path.parent_path(), over);
    c.source = path;
    return c;
}

} // namespace kgx::experiment

#endif
