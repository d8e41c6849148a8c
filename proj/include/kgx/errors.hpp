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

#ifndef KGX_ERRORS_HPP
#define KGX_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kgx {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed dataset or config text. Carries the 1-based line number when known.
struct ParseError : Error {
    ParseError(std::string file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), file_(std::move(file)), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

// An argument lies outside the domain of an operation (unknown id, X not a subset of the train set, ...).
struct DomainError : Error {
    using Error::Error;
};

// Invalid or inconsistent configuration; detected before any compute.
struct ConfigError : Error {
    using Error::Error;
};

// A definition's precondition on ranks does not hold for the prediction.
struct PreconditionError : Error {
    using Error::Error;
};

struct TrainingError : Error {
    TrainingError(std::size_t epoch, const std::string& what)
        : Error("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}
    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

struct IoError : Error {
    using Error::Error;
};

} // namespace kgx

#endif
