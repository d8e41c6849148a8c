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

// kgx: train, select, explain, evaluate, pareto.

#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "kgx/experiment/commands.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation = 2;
constexpr int exit_runtime = 3;

} // namespace

int main(int argc, char** argv) {
    using namespace kgx::experiment;
    CLI::App app{"knowledge graph embedding explanations"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out;
    std::size_t workers = 0;
    std::uint64_t seed = 0;
    std::string format = "json";
    std::string log_level = "info";
    app.add_option("--config", config_path, "experiment INI file")->required()->check(CLI::ExistingFile);
    auto* out_opt = app.add_option("--out", out, "output directory (overrides [output] directory)");
    auto* workers_opt = app.add_option("--workers", workers, "parallel workers")->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed-override", seed, "replace every seed in the config");
    app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

    auto* train = app.add_subcommand("train", "train from scratch, write checkpoint and loss curve");
    auto* select = app.add_subcommand("select", "sample evaluation triples from a rank cohort");
    auto* explain = app.add_subcommand("explain", "one run file per (triple, algorithm)");
    auto* evaluate = app.add_subcommand("evaluate", "metrics reports and comparison table");
    auto* pareto = app.add_subcommand("pareto", "export the Pareto fronts of all runs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? exit_ok : exit_validation;
    }
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        Overrides over;
        if (*out_opt) over.output = out;
        if (*workers_opt) over.workers = workers;
        if (*seed_opt) over.seed = seed;
        auto config = load_config(config_path, over);
        config.validate();
        const auto fmt = format == "csv" ? Format::csv : Format::json;
        if (*train) {
            std::cout << cmd_train(config).string() << '\n';
        } else if (*select) {
            std::cout << cmd_select(config).string() << '\n';
        } else if (*explain) {
            auto s = cmd_explain(config);
            std::cout << "written " << s.written << ", resumed " << s.skipped << ", failed " << s.failures.size()
                      << '\n';
        } else if (*evaluate) {
            std::cout << cmd_evaluate(config, fmt).string() << '\n';
        } else if (*pareto) {
            std::cout << cmd_pareto(config, fmt).string() << '\n';
        }
    } catch (const kgx::ConfigError& e) {
        spdlog::error("{}", e.what());
        return exit_validation;
    } catch (const kgx::ParseError& e) {
        spdlog::error("{}", e.what());
        return exit_validation;
    } catch (const MissingRunsError& e) {
        spdlog::error("{}", e.what());
        return exit_validation;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return exit_runtime;
    }
    return exit_ok;
}
