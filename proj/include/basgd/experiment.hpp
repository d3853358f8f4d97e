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

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "basgd/config.hpp"
#include "basgd/sim_engine.hpp"

namespace basgd {

/// metrics.csv header; one column per MetricsRecord field, in this order.
extern const char* const kMetricsColumns;

/// Version of the summary.json layout.
inline constexpr int kSummarySchemaVersion = 1;

/// Loss non-finite or above this multiple of the initial loss counts as divergence.
inline constexpr double kDivergenceFactor = 1e3;

struct RunSummary {
    std::string name;
    std::string status;
    std::string diagnostic;
    std::uint64_t steps = 0;
    double sim_time = 0.0;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    double final_grad_norm_sq = 0.0;
    std::optional<double> final_accuracy;
    double mean_tau = 0.0;
    std::uint64_t max_tau = 0;
    double tau_exceed_fraction = 0.0;
    std::uint64_t sends = 0;
    std::uint64_t deliveries = 0;
    double empirical_d = 0.0;
    double empirical_d_rms = 0.0;
    std::optional<double> lemma1_rhs;
    std::size_t max_byzantine_senders = 0;
    std::vector<std::string> warnings;

    bool diverged = false;
    bool conserved = false;
    bool r_accounting_ok = false;
    bool starved = false;
    /// Expectation name -> pass.
    std::vector<std::pair<std::string, bool>> expectations;
    bool passed = false;
};

struct ExperimentOutcome {
    RunConfig config;
    RunResult result;
    RunSummary summary;
};

void write_metrics_csv(std::span<const MetricsRecord> steps, std::ostream& out);
std::string summary_to_json(const RunSummary& summary);

/// Runs one configuration and evaluates its summary; writes nothing.
ExperimentOutcome execute(const RunConfig& cfg);

/// execute(), then writes metrics.csv and summary.json into `out_dir` (created if needed).
ExperimentOutcome run_experiment(const RunConfig& cfg, const std::string& out_dir);

// -------------------------------------------------------------------------- //
// Paired comparisons

struct PairSpec {
    std::string a;
    std::string b;
    std::optional<double> max_ratio;  ///< final_loss(b) / final_loss(a) <= max_ratio
    std::optional<double> min_ratio;  ///< final_loss(b) / final_loss(a) >= min_ratio
    std::optional<double> max_abs_delta;
};

struct PairRow {
    std::string a;
    std::string b;
    double loss_a = 0.0;
    double loss_b = 0.0;
    double delta = 0.0;
    double ratio = 0.0;
    std::optional<double> accuracy_delta;
    bool passed = true;
    std::string note;
};

struct SuiteReport {
    std::vector<PairRow> rows;
    bool passed = true;
};

/// Thrown when a pair names unknown runs or runs on different task specs.
class InvalidPairing : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

SuiteReport compare_suite(std::span<const ExperimentOutcome> outcomes, std::span<const PairSpec> pairs);

/// Parses "a b [max_ratio=x] [min_ratio=y] [max_abs_delta=z]" lines ('#' comments).
std::vector<PairSpec> parse_pairs(const std::string& text);

void write_report_csv(const SuiteReport& report, std::ostream& out);

/// Runs configurations concurrently (each run single-threaded); output order matches input.
std::vector<ExperimentOutcome> execute_all(std::span<const RunConfig> configs, std::size_t threads = 0);

}  // namespace basgd
