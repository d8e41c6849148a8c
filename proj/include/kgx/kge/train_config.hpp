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

#ifndef KGX_KGE_TRAIN_CONFIG_HPP
#define KGX_KGE_TRAIN_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "kgx/errors.hpp"

namespace kgx {

enum class OptimizerKind { adagrad };
enum class NegativeMode { full_softmax };

struct TrainConfig {
    std::size_t dimension = 32;
    std::size_t epochs = 100;
    double learning_rate = 0.1;
    double regularization = 1e-3;  // N3 weight
    std::size_t batch_size = 512;
    std::uint64_t seed = 42;
    double init_scale = 1.0;  // embeddings ~ N(0, init_scale^2 / d)
    double adagrad_initial_accumulator = 0.0;
    double adagrad_epsilon = 1e-10;
    OptimizerKind optimizer = OptimizerKind::adagrad;
    NegativeMode negatives = NegativeMode::full_softmax;

    // Zero epochs and a zero learning rate are accepted: both make training an identity map.
    void validate() const {
        auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
        if (dimension < 1) throw ConfigError("dimension must be >= 1");
        if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
        if (!finite_nonneg(learning_rate)) throw ConfigError("learning_rate must be finite and >= 0");
        if (!finite_nonneg(regularization)) throw ConfigError("regularization must be finite and >= 0");
        if (!(std::isfinite(init_scale) && init_scale > 0.0)) throw ConfigError("init_scale must be > 0");
        if (!finite_nonneg(adagrad_initial_accumulator)) throw ConfigError("adagrad_initial_accumulator must be >= 0");
        if (!(std::isfinite(adagrad_epsilon) && adagrad_epsilon > 0.0)) throw ConfigError("adagrad_epsilon must be > 0");
    }
};

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
    j = {{"dimension", c.dimension},
         {"epochs", c.epochs},
         {"learning_rate", c.learning_rate},
         {"regularization", c.regularization},
         {"batch_size", c.batch_size},
         {"seed", c.seed},
         {"init_scale", c.init_scale},
         {"adagrad_initial_accumulator", c.adagrad_initial_accumulator},
         {"optimizer", "adagrad"},
         {"negatives", "full-softmax"}};
}

} // namespace kgx

#endif
