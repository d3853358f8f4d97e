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

// Acceptance suite. Prints one PASS/FAIL line per criterion; `--only N`
// runs a single criterion. Exit status is non-zero if any selected
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "basgd/aggregation.hpp"
#include "basgd/bounds.hpp"
#include "basgd/experiment.hpp"

using namespace basgd;

namespace {

struct Outcome {
    bool passed = true;
    std::vector<std::string> details;

    void check(bool ok, std::string const& what) {
        details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
        passed = passed && ok;
    }
};

std::string fmt(char const* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end(), robust_less);
    auto const n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

std::vector<Vector> random_candidates(std::size_t B, std::size_t d, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Vector> cs(B, Vector(d));
    for (auto& c : cs)
        for (auto& x : c) x = normal(rng);
    return cs;
}

// -------------------------------------------------------------------------- //

Outcome qbr_suite() {
    Outcome out;
    std::size_t violations = 0, checks = 0;
    double residual = 0.0;
    for (std::size_t B = 3; B <= 10; ++B) {
        for (std::size_t d : {1u, 3u, 16u}) {
            Rng rng = make_rng(B * 100 + d, 1);
            for (std::size_t trial = 0; trial < 1000; ++trial) {
                auto const cs = random_candidates(B, d, rng);
                QbrCheckOptions opts;
                opts.seed = trial;
                auto tally = [&](QbrReport const& r) {
                    ++checks;
                    violations += r.violations.size();
                    residual = std::max(residual, r.max_shift_residual);
                };
                tally(check_qbr(AggregationRule::median(), cs, (B - 1) / 2, opts));
                for (std::size_t q = 1; 2 * q < B; ++q) tally(check_qbr(AggregationRule::trimmed_mean(q), cs, q, opts));
            }
        }
    }
    out.check(violations == 0, fmt("%.0f checks, %.0f violations", double(checks), double(violations)));
    out.check(residual <= 1e-9, fmt("max shift residual %.3g <= 1e-9", residual));
    return out;
}

Outcome mean_counterexample() {
    Outcome out;
    for (std::size_t B = 3; B <= 10; ++B) {
        Rng rng = make_rng(B, 2);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<Vector> cs;
        for (std::size_t b = 0; b + 1 < B; ++b) cs.push_back({unit(rng)});
        cs.push_back({10.0 * static_cast<double>(B)});
        auto const rep = check_qbr(AggregationRule::mean(), cs, 1);
        auto const m = mean_aggregate(cs)[0];
        out.check(rep.has_violation(QbrViolation::Property::Bracketing) && m > 10.0,
                  fmt("B=%.0f: bracketing violation reported, mean %.4g > 10", double(B), m));
    }
    return out;
}

Outcome constants() {
    Outcome out;
    bool k1 = true;
    for (long M = 2; M <= 40; ++M) k1 = k1 && c_constant(M, 1) == static_cast<double>(M);
    out.check(k1, "C(M,1) == M exactly for 2 <= M <= 40");

    double worst = 0.0;
    for (long M = 2; M <= 20; ++M)
        for (long K = 1; 2 * K <= M; ++K) {
            auto const exact = c_constant_exact(M, K);
            worst = std::max(worst, std::abs(c_constant(M, K) - exact) / exact);
        }
    out.check(worst <= 1e-9, fmt("log-space vs exact max relative error %.3g <= 1e-9", worst));

    std::size_t points = 0, bad = 0, equal_bad = 0;
    for (long B = 2; B <= 40; ++B)
        for (long q = 0; 2 * q < B; ++q)
            for (long r = 0; r <= q; ++r) {
                ++points;
                auto const c = robust_constant(B, q, r);
                auto const ub = c_upper_bound(B, q, r);
                if (!(c <= ub * (1 + 1e-12))) ++bad;
                if (r == q && !(c == static_cast<double>(B - q) && ub == static_cast<double>(B - q))) ++equal_bad;
            }
    out.check(bad == 0, fmt("C <= upper bound at %.0f grid points (%.0f failures)", double(points), double(bad)));
    out.check(equal_bad == 0, "C == upper bound == B - q whenever r == q");
    return out;
}

std::string quadratic_text(std::size_t m, std::size_t B, char const* rule, std::uint64_t steps, std::uint64_t seed) {
    std::ostringstream os;
    os << "task = quadratic\ntask.n = 1000\ntask.d = 20\nworkers = " << m << "\nbuffers = " << B
       << "\naggregator = " << rule << "\nlr = constant\nlr.eta = 0.1\nstop.steps = " << steps << "\nseed = " << seed
       << "\ntask.seed = " << seed << "\n";
    return os.str();
}

Outcome asgd_equivalence() {
    Outcome out;
    std::size_t identical = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto setup = make_setup(parse_config(quadratic_text(8, 1, "mean", 2000, seed)));
        setup.record_messages = true;
        setup.record_trajectory = true;
        setup.compute_metrics = false;
        auto const res = run_simulation(setup);
        auto const ref = run_asgd_reference(setup.server, res.messages);
        bool const same = res.trajectory.size() == 2001 && res.trajectory == ref;
        identical += same;
        if (!same) out.details.push_back(fmt("FAIL seed %.0f trajectories differ", double(seed)));
    }
    out.check(identical == 10, fmt("%.0f/10 seeds bit-identical over 2000 steps", double(identical)));
    return out;
}

Outcome no_attack_convergence() {
    Outcome out;
    struct Arm {
        std::size_t B;
        char const* rule;
        double threshold;
    };
    std::vector<Arm> const arms{{1, "mean", 1e-6}, {2, "median", 1e-4}, {5, "median", 1e-4}};
    std::vector<RunConfig> cfgs;
    for (auto const& arm : arms)
        for (std::uint64_t seed = 1; seed <= 5; ++seed) cfgs.push_back(parse_config(quadratic_text(10, arm.B, arm.rule, 10000, seed)));
    auto const outcomes = execute_all(cfgs);
    std::vector<double> median_loss;
    for (std::size_t a = 0; a < arms.size(); ++a) {
        std::vector<double> grads, losses;
        for (std::size_t s = 0; s < 5; ++s) {
            grads.push_back(outcomes[a * 5 + s].summary.final_grad_norm_sq);
            losses.push_back(outcomes[a * 5 + s].summary.final_loss);
        }
        auto const worst = *std::max_element(grads.begin(), grads.end(), robust_less);
        out.check(worst <= arms[a].threshold,
                  fmt("B=%.0f: max over 5 seeds of final |grad F|^2 = %.4g <= %.0e", double(arms[a].B), worst,
                      arms[a].threshold));
        median_loss.push_back(median_of(losses));
    }
    bool const monotone = median_loss[0] <= median_loss[1] && median_loss[1] <= median_loss[2];
    out.check(monotone, fmt("5-seed median final loss B=1,2,5: %.6g, %.6g, %.6g non-decreasing", median_loss[0],
                            median_loss[1], median_loss[2]));
    return out;
}

// Logistic attack-resilience setup; the task itself is identical across arms.
std::string logistic_text(char const* rule, char const* attack, std::uint64_t seed) {
    std::ostringstream os;
    os << "task = logistic\ntask.n = 3000\ntask.d = 20\ntask.separation = 10\ntask.seed = 1\n"
       << "workers = 15\nbuffers = 10\naggregator = " << rule << "\n"
       << (std::strcmp(rule, "trmean") == 0 ? "q = 3\n" : "") << "r = 3\nrobustness_checks = false\n"
       << "lr = constant\nlr.eta = 0.5\nstop.steps = 3000\nseed = " << seed << "\n";
    if (std::strcmp(attack, "ng") == 0) os << "attack = neg_grad\nattack.k = 10\nattack.workers = 0-2\n";
    if (std::strcmp(attack, "rd") == 0) os << "attack = rand_disturb\nattack.scale = 0.2\nattack.workers = 0-2\n";
    return os.str();
}

Outcome attack_resilience() {
    Outcome out;
    char const* const rules[] = {"mean", "median", "trmean"};
    char const* const attacks[] = {"none", "ng", "rd"};
    std::vector<RunConfig> cfgs;
    for (auto rule : rules)
        for (auto attack : attacks)
            for (std::uint64_t seed = 1; seed <= 5; ++seed) cfgs.push_back(parse_config(logistic_text(rule, attack, seed)));
    auto const outcomes = execute_all(cfgs);
    auto loss = [&](int rule, int attack) {
        std::vector<double> v;
        for (std::size_t s = 0; s < 5; ++s) v.push_back(outcomes[(rule * 3 + attack) * 5 + s].summary.final_loss);
        return median_of(v);
    };
    for (int r = 0; r < 3; ++r) {
        out.details.push_back(fmt("     median final loss: none %.5g, ng %.5g, rd %.5g", loss(r, 0), loss(r, 1), loss(r, 2)) +
                              " (" + rules[r] + ")");
    }
    for (int r : {1, 2}) {
        auto const ratio = loss(r, 1) / loss(r, 0);
        out.check(ratio <= 1.2, std::string("NG: ") + rules[r] + fmt(" loss ratio %.4g <= 1.2", ratio));
    }
    auto const mean_ng = loss(0, 1);
    out.check(!std::isfinite(mean_ng) || mean_ng >= 5.0 * loss(0, 0),
              fmt("NG: mean loss ratio %.4g >= 5 or non-finite", mean_ng / loss(0, 0)));
    auto const tr_rd = loss(2, 2) / loss(2, 0);
    out.check(tr_rd <= 1.2, fmt("RD: trmean loss ratio %.4g <= 1.2", tr_rd));
    auto const mean_rd = loss(0, 2);
    out.check(std::isfinite(mean_rd) && mean_rd >= 1.5 * loss(0, 0),
              fmt("RD: mean converges with loss ratio %.4g >= 1.5", mean_rd / loss(0, 0)));
    return out;
}

Outcome lemma1_check() {
    Outcome out;
    struct Arm {
        AggregationRule rule;
        std::size_t B, q;
    };
    std::vector<Arm> const arms{{AggregationRule::trimmed_mean(3), 10, 3}, {AggregationRule::median(), 9, 4}};
    auto const obj = make_quadratic(1000, 20, 1);
    Vector const w(20, 0.5);
    std::vector<std::size_t> all(obj.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    for (auto const& arm : arms) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            Rng rng = make_rng(seed, 7);
            double second = 0.0;
            for (int k = 0; k < 100000; ++k) second += squared_norm(compute_loyal_gradient(obj, w, all, rng));
            double const D = std::sqrt(second / 100000.0);
            double sum = 0.0;
            std::vector<Vector> cs(arm.B);
            for (int round = 0; round < 10000; ++round) {
                for (std::size_t b = 0; b < arm.B; ++b) {
                    cs[b] = compute_loyal_gradient(obj, w, all, rng);
                    if (b < arm.q)
                        for (auto& x : cs[b]) x *= -10.0;
                }
                sum += squared_norm(arm.rule(cs));
            }
            double const estimate = sum / 10000.0;
            BoundInputs in;
            in.D = D;
            in.d = 20;
            auto const bound = lemma1_bound(in, static_cast<long>(arm.B), static_cast<long>(arm.q), static_cast<long>(arm.q));
            out.check(estimate <= bound, arm.rule.name() + fmt(" B=%.0f seed %.0f: E|G|^2 ~ %.4g", double(arm.B),
                                                                double(seed), estimate) +
                                             fmt(" <= bound %.4g", bound));
        }
    }
    return out;
}

Outcome determinism_and_conservation() {
    Outcome out;
    std::vector<std::string> texts{
        quadratic_text(10, 5, "median", 2000, 3),
        logistic_text("trmean", "ng", 2),
        logistic_text("mean", "rd", 4),
        quadratic_text(8, 4, "trmean\nq = 1", 1500, 5) + "delay.network = 0.7\nattack = neg_grad\nattack.workers = 1\n"
                                                           "attack.flood = 3\nr = 1\n",
        quadratic_text(6, 3, "median", 1000, 6) + "attack = bit_flip\nattack.flip_prob = 0.5\nattack.workers = 2\nr = 1\n"
                                                   "attack.schedule = probability\nattack.probability = 0.5\n",
    };
    for (std::size_t i = 0; i < texts.size(); ++i) {
        auto const cfg = parse_config(texts[i]);
        auto const a = execute(cfg);
        auto const b = execute(cfg);
        std::ostringstream ca, cb;
        write_metrics_csv(a.result.steps, ca);
        write_metrics_csv(b.result.steps, cb);
        out.check(ca.str() == cb.str() && !ca.str().empty(), fmt("config %.0f: metrics.csv byte-identical on re-run", double(i)));
        out.check(a.result.sends == a.result.delivered,
                  fmt("config %.0f: sends %.0f == deliveries %.0f", double(i), double(a.result.sends), double(a.result.delivered)));
    }
    return out;
}

struct Criterion {
    int id;
    char const* title;
    double budget_s;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);

    std::vector<Criterion> const criteria{
        {1, "q-BR property suite", 30, qbr_suite},
        {2, "mean non-robustness counterexample", 1, mean_counterexample},
        {3, "robustness constants and upper bound", 5, constants},
        {4, "ASGD equivalence (B=1, mean)", 60, asgd_equivalence},
        {5, "no-attack convergence on the quadratic task", 300, no_attack_convergence},
        {6, "attack resilience on logistic regression", 600, attack_resilience},
        {7, "second-moment bound, Monte-Carlo check", 120, lemma1_check},
        {8, "determinism and conservation", 120, determinism_and_conservation},
    };
    bool all = true;
    for (auto const& c : criteria) {
        if (only != 0 && c.id != only) continue;
        auto const t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (std::exception const& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.check(secs < c.budget_s, fmt("runtime %.2f s < %.0f s", secs, c.budget_s));
        for (auto const& d : o.details) std::printf("    %s\n", d.c_str());
        std::printf("[%s] criterion %d: %s\n", o.passed ? "PASS" : "FAIL", c.id, c.title);
        all = all && o.passed;
    }
    return all ? 0 : 1;
}
