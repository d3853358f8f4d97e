/* Copyright 2026 The BASGD Simulator Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace basgd {

/// Dense real vector: model parameters, gradients, buffer contents.
using Vector = std::vector<double>;

/// Pseudo-random engine used everywhere; fixed algorithm so runs replay exactly.
using Rng = std::mt19937_64;

// -------------------------------------------------------------------------- //
// Error types

/// Malformed data (empty candidate set, dimension mismatch, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numeric parameter outside its admissible range (q >= B/2, K > M/2, ...).
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Startup-time configuration problem; carries every violation found.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations);

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

// -------------------------------------------------------------------------- //
// Small vector helpers

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline bool all_finite(std::span<const double> a) {
    for (double x : a)
        if (!std::isfinite(x)) return false;
    return true;
}

/// Derives an independent engine for (seed, stream, index); stable across runs.
Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

}  // namespace basgd
