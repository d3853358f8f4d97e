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

/**
 * Run configuration: a flat `key = value` text format.
 *
 *   file    := { line }
 *   line    := [ key ws* "=" ws* value ] [ "#" comment ] "\n"
 *   key     := [a-z0-9_.]+
 *   list    := item { "," item }          (worker ids, milestones, intervals)
 *   interval:= begin "-" end              (half-open, in parameter versions)
 *
 * Every key is optional except `workers` and `buffers`; unknown keys are
 * errors. See README.md for the key reference.
**/

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "basgd/aggregation.hpp"
#include "basgd/sim_engine.hpp"
#include "basgd/worker.hpp"

namespace basgd {

struct TaskSpec {
    Objective::Kind kind = Objective::Kind::Quadratic;
    std::size_t n = 1000;
    std::size_t d = 20;
    double separation = 5.0;
    double l2 = 0.0;
    double heterogeneity = 0.0;
    std::size_t batch = 1;
    std::uint64_t seed = 1;  ///< data and partition seed
    std::string dataset;     ///< optional CSV to load instead of generating

    friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

struct LearningRateSpec {
    enum class Kind { Constant, StepDecay, InverseSqrt };

    Kind kind = Kind::Constant;
    double eta = 0.1;
    std::vector<double> decay_at = {0.5, 0.75};  ///< fractions of the step budget
    double decay_factor = 0.1;
    std::optional<double> smoothness;           ///< inverse_sqrt; task L when unset
};

struct AttackSpec {
    WorkerBehavior behavior;
    std::vector<std::size_t> workers;
};

struct Expectations {
    std::optional<double> final_grad_norm_sq_max;
    std::optional<double> final_loss_max;
    std::optional<bool> diverges;
    bool r_accounting = false;
};

struct RunConfig {
    std::string name = "run";
    TaskSpec task;
    std::size_t workers = 0;
    std::size_t buffers = 0;
    AggregationRule rule = AggregationRule::mean();
    std::optional<std::size_t> q;
    std::size_t r = 0;
    std::uint64_t tau_max = 100;
    LearningRateSpec lr;
    AttackSpec attack;
    DelayModel delay;
    StopCriterion stop;
    std::uint64_t seed = 1;
    double init = 0.0;
    bool robustness_checks = true;
    bool task_seed_explicit = false;
    Expectations expect;
    std::string out;

    /// Robustness order used for checks and bounds (0 for mean).
    std::size_t effective_q() const;
};

/// Parses and validates; throws ConfigError with one entry per violation.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Applies a seed override: the run seed and, unless set explicitly, the task seed.
void override_seed(RunConfig& cfg, std::uint64_t seed);

/// Builds the objective, partition, behaviours and server for one run.
SimulationSetup make_setup(const RunConfig& cfg);

/// Buffers fed exclusively by configured-Byzantine workers.
std::vector<std::size_t> byzantine_only_buffers(const RunConfig& cfg);

}  // namespace basgd
