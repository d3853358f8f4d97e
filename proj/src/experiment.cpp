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

#include "basgd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "basgd/bounds.hpp"

namespace basgd {

const char* const kMetricsColumns =
    "step,time,loss,grad_norm_sq,aggregate_norm_sq,eta,tau_mean,tau_max,messages,byzantine_messages,"
    "byzantine_senders,accuracy";

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::optional<double> lemma1_rhs(const RunConfig& cfg, double empirical_d, std::size_t d) {
    auto const q = cfg.effective_q();
    bool const robust_rule = cfg.rule.kind() != RuleKind::Mean || cfg.buffers == 1;
    if (!robust_rule || cfg.r > q || 2 * q >= cfg.buffers) return std::nullopt;
    BoundInputs in;
    in.D = empirical_d;
    in.d = d;
    return lemma1_bound(in, static_cast<long>(cfg.buffers), static_cast<long>(q), static_cast<long>(cfg.r));
}

RunSummary summarize(const RunConfig& cfg, const RunResult& result, std::size_t dimension) {
    RunSummary s;
    s.name = cfg.name;
    s.starved = result.status == RunStatus::Starved;
    s.status = s.starved ? "starved" : "completed";
    s.diagnostic = result.diagnostic;
    s.steps = result.steps.size();
    s.sim_time = result.end_time;
    s.initial_loss = result.initial_loss;
    s.final_loss = result.steps.empty() ? result.initial_loss : result.steps.back().loss;
    s.final_grad_norm_sq = result.steps.empty() ? result.initial_grad_norm_sq : result.steps.back().grad_norm_sq;
    if (!result.steps.empty() && std::isfinite(result.steps.back().accuracy)) s.final_accuracy = result.steps.back().accuracy;

    auto const hist = tau_histogram(result.deliveries, cfg.tau_max);
    s.mean_tau = hist.mean;
    s.max_tau = hist.max;
    s.tau_exceed_fraction = hist.exceed_fraction;
    s.sends = result.sends;
    s.deliveries = result.delivered;
    s.empirical_d = result.empirical_d_max;
    s.empirical_d_rms = result.empirical_d_rms;
    s.lemma1_rhs = lemma1_rhs(cfg, result.empirical_d_max, dimension);
    for (auto const& rec : result.steps) s.max_byzantine_senders = std::max(s.max_byzantine_senders, rec.byzantine_senders);

    for (auto b : byzantine_only_buffers(cfg))
        s.warnings.push_back("buffer " + std::to_string(b) + " is fed only by configured-Byzantine workers");

    s.diverged = !std::isfinite(s.final_loss) || s.final_loss > kDivergenceFactor * s.initial_loss;
    s.conserved = result.sends == result.delivered;
    s.r_accounting_ok = s.max_byzantine_senders <= cfg.r;

    if (cfg.expect.final_grad_norm_sq_max)
        s.expectations.emplace_back("final_grad_norm_sq_max", s.final_grad_norm_sq <= *cfg.expect.final_grad_norm_sq_max);
    if (cfg.expect.final_loss_max)
        s.expectations.emplace_back("final_loss_max", s.final_loss <= *cfg.expect.final_loss_max);
    if (cfg.expect.diverges) s.expectations.emplace_back("diverges", s.diverged == *cfg.expect.diverges);
    if (cfg.expect.r_accounting) s.expectations.emplace_back("r_accounting", s.r_accounting_ok);
    s.expectations.emplace_back("conservation", s.conserved);

    s.passed = !s.starved && std::all_of(s.expectations.begin(), s.expectations.end(),
                                         [](auto const& e) { return e.second; });
    return s;
}

}  // namespace

void write_metrics_csv(std::span<const MetricsRecord> steps, std::ostream& out) {
    out << kMetricsColumns << "\n";
    for (auto const& r : steps) {
        out << r.step << "," << fmt(r.time) << "," << fmt(r.loss) << "," << fmt(r.grad_norm_sq) << ","
            << fmt(r.aggregate_norm_sq) << "," << fmt(r.eta) << "," << fmt(r.tau_mean) << "," << r.tau_max << ","
            << r.messages << "," << r.byzantine_messages << "," << r.byzantine_senders << "," << fmt(r.accuracy)
            << "\n";
    }
}

std::string summary_to_json(const RunSummary& s) {
    using nlohmann::ordered_json;
    auto num = [](double x) -> ordered_json { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); };
    ordered_json j;
    j["schema_version"] = kSummarySchemaVersion;
    j["name"] = s.name;
    j["status"] = s.status;
    j["diagnostic"] = s.diagnostic;
    j["steps"] = s.steps;
    j["sim_time"] = num(s.sim_time);
    j["initial_loss"] = num(s.initial_loss);
    j["final_loss"] = num(s.final_loss);
    j["final_grad_norm_sq"] = num(s.final_grad_norm_sq);
    j["final_grad_norm"] = num(std::sqrt(s.final_grad_norm_sq));
    j["final_accuracy"] = s.final_accuracy ? num(*s.final_accuracy) : ordered_json(nullptr);
    j["mean_tau"] = num(s.mean_tau);
    j["max_tau"] = s.max_tau;
    j["tau_exceed_fraction"] = num(s.tau_exceed_fraction);
    j["sends"] = s.sends;
    j["deliveries"] = s.deliveries;
    j["empirical_D"] = num(s.empirical_d);
    j["empirical_D_rms"] = num(s.empirical_d_rms);
    j["lemma1_rhs"] = s.lemma1_rhs ? num(*s.lemma1_rhs) : ordered_json(nullptr);
    j["max_byzantine_senders"] = s.max_byzantine_senders;
    j["warnings"] = s.warnings;
    j["flags"] = {{"diverged", s.diverged},
                  {"conserved", s.conserved},
                  {"r_accounting_ok", s.r_accounting_ok},
                  {"starved", s.starved}};
    ordered_json expectations = ordered_json::object();
    for (auto const& [name, ok] : s.expectations) expectations[name] = ok;
    j["expectations"] = expectations;
    j["passed"] = s.passed;
    return j.dump(2) + "\n";
}

ExperimentOutcome execute(const RunConfig& cfg) {
    auto setup = make_setup(cfg);
    auto const dimension = setup.objective->dimension();
    ExperimentOutcome outcome{cfg, run_simulation(setup), {}};
    outcome.summary = summarize(cfg, outcome.result, dimension);
    return outcome;
}

ExperimentOutcome run_experiment(const RunConfig& cfg, const std::string& out_dir) {
    auto outcome = execute(cfg);
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream csv(std::filesystem::path(out_dir) / "metrics.csv", std::ios::binary);
        write_metrics_csv(outcome.result.steps, csv);
    }
    {
        std::ofstream js(std::filesystem::path(out_dir) / "summary.json", std::ios::binary);
        js << summary_to_json(outcome.summary);
    }
    return outcome;
}

// -------------------------------------------------------------------------- //

SuiteReport compare_suite(std::span<const ExperimentOutcome> outcomes, std::span<const PairSpec> pairs) {
    std::map<std::string, const ExperimentOutcome*> by_name;
    for (auto const& o : outcomes) by_name[o.config.name] = &o;
    SuiteReport report;
    for (auto const& p : pairs) {
        auto ia = by_name.find(p.a);
        auto ib = by_name.find(p.b);
        if (ia == by_name.end() || ib == by_name.end())
            throw InvalidPairing("pair " + p.a + " / " + p.b + ": unknown run name");
        auto const& a = *ia->second;
        auto const& b = *ib->second;
        if (!(a.config.task == b.config.task))
            throw InvalidPairing("pair " + p.a + " / " + p.b + ": task specs differ");
        PairRow row;
        row.a = p.a;
        row.b = p.b;
        row.loss_a = a.summary.final_loss;
        row.loss_b = b.summary.final_loss;
        row.delta = row.loss_b - row.loss_a;
        row.ratio = row.loss_a == row.loss_b ? 1.0 : row.loss_b / row.loss_a;
        if (a.summary.final_accuracy && b.summary.final_accuracy)
            row.accuracy_delta = *b.summary.final_accuracy - *a.summary.final_accuracy;
        auto fail = [&](std::string const& why) {
            row.passed = false;
            row.note += (row.note.empty() ? "" : "; ") + why;
        };
        if (!std::isfinite(row.ratio) && (p.max_ratio || p.min_ratio)) fail("non-finite loss ratio");
        if (p.max_ratio && !(row.ratio <= *p.max_ratio)) fail("ratio above " + fmt(*p.max_ratio));
        if (p.min_ratio && !(row.ratio >= *p.min_ratio)) fail("ratio below " + fmt(*p.min_ratio));
        if (p.max_abs_delta && !(std::abs(row.delta) <= *p.max_abs_delta)) fail("|delta| above " + fmt(*p.max_abs_delta));
        report.passed = report.passed && row.passed;
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::vector<PairSpec> parse_pairs(const std::string& text) {
    std::vector<PairSpec> pairs;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto const hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        PairSpec p;
        if (!(fields >> p.a)) continue;
        if (!(fields >> p.b)) throw ConfigError({"pairs line " + std::to_string(line_no) + ": need two run names"});
        std::string opt;
        while (fields >> opt) {
            auto const eq = opt.find('=');
            auto const key = opt.substr(0, eq);
            double value = 0.0;
            try {
                value = std::stod(opt.substr(eq + 1));
            } catch (std::exception const&) {
                throw ConfigError({"pairs line " + std::to_string(line_no) + ": bad option '" + opt + "'"});
            }
            if (eq == std::string::npos) throw ConfigError({"pairs line " + std::to_string(line_no) + ": bad option '" + opt + "'"});
            if (key == "max_ratio") p.max_ratio = value;
            else if (key == "min_ratio") p.min_ratio = value;
            else if (key == "max_abs_delta") p.max_abs_delta = value;
            else throw ConfigError({"pairs line " + std::to_string(line_no) + ": unknown option '" + key + "'"});
        }
        pairs.push_back(std::move(p));
    }
    return pairs;
}

void write_report_csv(const SuiteReport& report, std::ostream& out) {
    out << "a,b,loss_a,loss_b,delta,ratio,accuracy_delta,passed,note\n";
    for (auto const& r : report.rows) {
        out << r.a << "," << r.b << "," << fmt(r.loss_a) << "," << fmt(r.loss_b) << "," << fmt(r.delta) << ","
            << fmt(r.ratio) << "," << (r.accuracy_delta ? fmt(*r.accuracy_delta) : std::string()) << ","
            << (r.passed ? "pass" : "fail") << "," << r.note << "\n";
    }
}

std::vector<ExperimentOutcome> execute_all(std::span<const RunConfig> configs, std::size_t threads) {
    std::vector<std::optional<ExperimentOutcome>> slots(configs.size());
    std::vector<std::exception_ptr> errors(configs.size());
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, std::max<std::size_t>(1, configs.size()));
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (auto i = next++; i < configs.size(); i = next++) {
                    try {
                        slots[i] = execute(configs[i]);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    std::vector<ExperimentOutcome> out;
    out.reserve(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
        out.push_back(std::move(*slots[i]));
    }
    return out;
}

}  // namespace basgd
