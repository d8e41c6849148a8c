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

#ifndef KGX_EXPLAINERS_HPP
#define KGX_EXPLAINERS_HPP

#include "kgx/explainers/builder.hpp"
#include "kgx/explainers/exhaustive.hpp"
#include "kgx/explainers/gradient_heuristics.hpp"
#include "kgx/explainers/run.hpp"

#endif
