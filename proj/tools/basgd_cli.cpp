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

// Command-line front end: run, suite, check-qbr, bounds.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "basgd/aggregation.hpp"
#include "basgd/bounds.hpp"
#include "basgd/config.hpp"
#include "basgd/experiment.hpp"

namespace fs = std::filesystem;
using namespace basgd;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({"cannot open " + path.string()});
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void print_summary(const RunSummary& s, std::ostream& out) {
    out << s.name << ": " << s.status << ", steps=" << s.steps << ", final_loss=" << s.final_loss
        << ", grad_norm_sq=" << s.final_grad_norm_sq << ", mean_tau=" << s.mean_tau;
    if (s.final_accuracy) out << ", accuracy=" << *s.final_accuracy;
    out << (s.passed ? "  [pass]" : "  [FAIL]") << "\n";
    if (!s.diagnostic.empty()) out << "  " << s.diagnostic << "\n";
    for (auto const& w : s.warnings) out << "  warning: " << w << "\n";
    for (auto const& [name, ok] : s.expectations)
        if (!ok) out << "  expectation failed: " << name << "\n";
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, std::string out) {
    auto cfg = load_config(path);
    if (seed) override_seed(cfg, *seed);
    if (out.empty()) out = cfg.out.empty() ? ("out/" + cfg.name) : cfg.out;
    auto const outcome = run_experiment(cfg, out);
    print_summary(outcome.summary, std::cout);
    std::cout << "  wrote " << out << "/metrics.csv, " << out << "/summary.json\n";
    return outcome.summary.passed ? 0 : kExitFailure;
}

int cmd_suite(const std::string& dir, std::optional<std::uint64_t> seed, std::string out, std::size_t threads) {
    std::vector<fs::path> files;
    for (auto const& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".cfg") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ConfigError({"no .cfg files in " + dir});

    std::vector<RunConfig> configs;
    for (auto const& f : files) {
        configs.push_back(load_config(f.string()));
        if (seed) override_seed(configs.back(), *seed);
    }
    std::vector<PairSpec> pairs;
    if (fs::exists(fs::path(dir) / "pairs.txt")) pairs = parse_pairs(read_file(fs::path(dir) / "pairs.txt"));

    auto const outcomes = execute_all(configs, threads);
    if (out.empty()) out = "out/" + fs::path(dir).filename().string();
    bool ok = true;
    for (auto const& o : outcomes) {
        auto const run_dir = fs::path(out) / o.config.name;
        fs::create_directories(run_dir);
        std::ofstream csv(run_dir / "metrics.csv", std::ios::binary);
        write_metrics_csv(o.result.steps, csv);
        std::ofstream js(run_dir / "summary.json", std::ios::binary);
        js << summary_to_json(o.summary);
        print_summary(o.summary, std::cout);
        ok = ok && o.summary.passed;
    }
    auto const report = compare_suite(outcomes, pairs);
    {
        std::ofstream rep(fs::path(out) / "report.csv", std::ios::binary);
        rep << "# losses at final server iteration (iteration-aligned)\n";
        write_report_csv(report, rep);
    }
    for (auto const& r : report.rows)
        std::cout << r.a << " vs " << r.b << ": ratio=" << r.ratio << " delta=" << r.delta
                  << (r.passed ? "  [pass]" : "  [FAIL] " + r.note) << "\n";
    std::cout << "wrote " << out << "/report.csv\n";
    return ok && report.passed ? 0 : kExitFailure;
}

int cmd_check_qbr(const std::string& rule_name, std::size_t B, std::size_t d, std::optional<std::size_t> q_opt,
                  std::size_t trials, std::uint64_t seed) {
    auto const rule = AggregationRule::parse(rule_name, q_opt.value_or(0));
    std::size_t const q = q_opt ? *q_opt : std::max<std::size_t>(1, rule.robustness_order(B));
    Rng rng = make_rng(seed, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::size_t failures = 0;
    double max_residual = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        std::vector<Vector> cs(B, Vector(d));
        for (auto& c : cs)
            for (auto& x : c) x = normal(rng);
        QbrCheckOptions opts;
        opts.seed = seed + t;
        auto const report = check_qbr(rule, cs, q, opts);
        max_residual = std::max(max_residual, report.max_shift_residual);
        if (!report.robust) {
            if (failures == 0)
                for (auto const& v : report.violations) std::cout << "  trial " << t << ": " << v.describe() << "\n";
            ++failures;
        }
    }
    std::cout << rule.name() << " B=" << B << " d=" << d << " q=" << q << ": " << failures << "/" << trials
              << " trials violated; max shift residual " << max_residual << "\n";
    return failures == 0 ? 0 : kExitFailure;
}

int cmd_bounds(long B, long q, long r, double D, double L, std::uint64_t tau_max, std::size_t d) {
    BoundInputs in{D, L, tau_max, d};
    std::cout.precision(10);
    std::cout << "C_{B-r,q-r+1} = " << robust_constant(B, q, r) << "\n"
              << "upper bound   = " << c_upper_bound(B, q, r) << "\n"
              << "lemma1 rhs    = " << lemma1_bound(in, B, q, r) << "\n"
              << "lemma2 rhs    = " << lemma2_bound(in, B, q, r) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Buffered asynchronous SGD simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::uint64_t> seed;
    std::string out;
    app.add_option("--seed", seed, "Override the run seed (and the task seed unless set explicitly)");
    app.add_option("--out", out, "Output directory");

    std::string config_path;
    auto* run = app.add_subcommand("run", "Run one configuration");
    run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);

    std::string suite_dir;
    std::size_t threads = 0;
    auto* suite = app.add_subcommand("suite", "Run every *.cfg in a directory and compare pairs.txt");
    suite->add_option("dir", suite_dir, "Suite directory")->required()->check(CLI::ExistingDirectory);
    suite->add_option("--threads", threads, "Concurrent runs (0 = hardware concurrency)");

    std::string rule_name = "median";
    std::size_t qbr_b = 5, qbr_d = 3, trials = 100;
    std::optional<std::size_t> qbr_q;
    auto* qbr = app.add_subcommand("check-qbr", "Check q-Byzantine robustness on random candidate sets");
    qbr->add_option("--rule", rule_name, "mean | median | trmean")->capture_default_str();
    qbr->add_option("--buffers,-B", qbr_b, "Number of candidates")->capture_default_str();
    qbr->add_option("--dim,-d", qbr_d, "Dimension")->capture_default_str();
    qbr->add_option("-q", qbr_q, "Robustness order (default: the rule's own)");
    qbr->add_option("--trials", trials, "Random candidate sets")->capture_default_str();

    long bB = 0, bq = 0, br = 0;
    double bD = 0, bL = 0;
    std::uint64_t btau = 0;
    std::size_t bd = 1;
    auto* bounds = app.add_subcommand("bounds", "Print the robustness constant and lemma bounds");
    bounds->add_option("B", bB)->required();
    bounds->add_option("q", bq)->required();
    bounds->add_option("r", br)->required();
    bounds->add_option("D", bD)->required();
    bounds->add_option("L", bL)->required();
    bounds->add_option("tau_max", btau)->required();
    bounds->add_option("d", bd)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, seed, out);
        if (*suite) return cmd_suite(suite_dir, seed, out, threads);
        if (*qbr) return cmd_check_qbr(rule_name, qbr_b, qbr_d, qbr_q, trials, seed.value_or(0));
        if (*bounds) return cmd_bounds(bB, bq, br, bD, bL, btau, bd);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InvalidPairing& e) {
        std::cerr << "invalid pairing: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return 0;
}
