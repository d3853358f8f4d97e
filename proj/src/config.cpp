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

#include "basgd/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "basgd/buffer.hpp"

namespace basgd {

namespace {

std::string trim(std::string const& s) {
    auto const first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    auto const last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string const& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

struct ParseError {
    std::string message;
};

double to_double(std::string const& v) {
    try {
        std::size_t used = 0;
        auto const x = std::stod(v, &used);
        if (used == v.size()) return x;
    } catch (std::exception const&) {
    }
    throw ParseError{"expected a number, got '" + v + "'"};
}

std::uint64_t to_uint(std::string const& v) {
    auto const x = to_double(v);
    if (!(x >= 0.0) || x != std::floor(x) || x > 1.8e19) throw ParseError{"expected a non-negative integer, got '" + v + "'"};
    return static_cast<std::uint64_t>(x);
}

bool to_bool(std::string const& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ParseError{"expected true/false, got '" + v + "'"};
}

std::vector<std::size_t> to_id_list(std::string const& v) {
    std::vector<std::size_t> ids;
    for (auto const& item : split(v, ',')) {
        auto const dash = item.find('-');
        if (dash == std::string::npos) {
            ids.push_back(to_uint(item));
        } else {
            auto const lo = to_uint(trim(item.substr(0, dash)));
            auto const hi = to_uint(trim(item.substr(dash + 1)));
            if (lo > hi) throw ParseError{"bad id range '" + item + "'"};
            for (auto i = lo; i <= hi; ++i) ids.push_back(i);
        }
    }
    return ids;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> to_intervals(std::string const& v) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    for (auto const& item : split(v, ',')) {
        auto const dash = item.find('-');
        if (dash == std::string::npos) throw ParseError{"interval '" + item + "' must look like begin-end"};
        out.emplace_back(to_uint(trim(item.substr(0, dash))), to_uint(trim(item.substr(dash + 1))));
    }
    return out;
}

struct ParsedState {
    bool task_seed_set = false;
    std::optional<bool> robustness;
    std::string attack_kind = "none";
    std::string schedule_kind = "always";
};

using Setter = std::function<void(RunConfig&, ParsedState&, std::string const&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"name", [](RunConfig& c, ParsedState&, std::string const& v) { c.name = v; }},
        {"task",
         [](RunConfig& c, ParsedState&, std::string const& v) {
             if (v == "quadratic") c.task.kind = Objective::Kind::Quadratic;
             else if (v == "logistic") c.task.kind = Objective::Kind::Logistic;
             else throw ParseError{"task must be quadratic or logistic"};
         }},
        {"task.n", [](RunConfig& c, ParsedState&, std::string const& v) { c.task.n = to_uint(v); }},
        {"task.d", [](RunConfig& c, ParsedState&, std::string const& v) { c.task.d = to_uint(v); }},
        {"task.separation", [](RunConfig& c, ParsedState&, std::string const& v) { c.task.separation = to_double(v); }},
        {"task.l2", [](RunConfig& c, ParsedState&, std::string const& v) { c.task.l2 = to_double(v); }},
        {"task.heterogeneity", [](RunConfig& c, ParsedState&, std::string const& v) { c.task.heterogeneity = to_double(v); }},
        {"task.batch", [](RunConfig& c, ParsedState&, std::string const& v) { c.task.batch = to_uint(v); }},
        {"task.seed",
         [](RunConfig& c, ParsedState& s, std::string const& v) {
             c.task.seed = to_uint(v);
             s.task_seed_set = true;
         }},
        {"task.dataset", [](RunConfig& c, ParsedState&, std::string const& v) { c.task.dataset = v; }},
        {"workers", [](RunConfig& c, ParsedState&, std::string const& v) { c.workers = to_uint(v); }},
        {"buffers", [](RunConfig& c, ParsedState&, std::string const& v) { c.buffers = to_uint(v); }},
        {"aggregator",
         [](RunConfig& c, ParsedState&, std::string const& v) {
             if (v != "mean" && v != "median" && v != "trmean") throw ParseError{"aggregator must be mean, median or trmean"};
             c.rule = AggregationRule::parse(v, c.rule.trim());
         }},
        {"q", [](RunConfig& c, ParsedState&, std::string const& v) { c.q = to_uint(v); }},
        {"r", [](RunConfig& c, ParsedState&, std::string const& v) { c.r = to_uint(v); }},
        {"tau_max", [](RunConfig& c, ParsedState&, std::string const& v) { c.tau_max = to_uint(v); }},
        {"lr",
         [](RunConfig& c, ParsedState&, std::string const& v) {
             if (v == "constant") c.lr.kind = LearningRateSpec::Kind::Constant;
             else if (v == "step_decay") c.lr.kind = LearningRateSpec::Kind::StepDecay;
             else if (v == "inverse_sqrt") c.lr.kind = LearningRateSpec::Kind::InverseSqrt;
             else throw ParseError{"lr must be constant, step_decay or inverse_sqrt"};
         }},
        {"lr.eta", [](RunConfig& c, ParsedState&, std::string const& v) { c.lr.eta = to_double(v); }},
        {"lr.decay_at",
         [](RunConfig& c, ParsedState&, std::string const& v) {
             c.lr.decay_at.clear();
             for (auto const& item : split(v, ',')) c.lr.decay_at.push_back(to_double(item));
         }},
        {"lr.decay_factor", [](RunConfig& c, ParsedState&, std::string const& v) { c.lr.decay_factor = to_double(v); }},
        {"lr.L", [](RunConfig& c, ParsedState&, std::string const& v) { c.lr.smoothness = to_double(v); }},
        {"attack",
         [](RunConfig&, ParsedState& s, std::string const& v) {
             static const std::set<std::string> kinds = {"none", "neg_grad", "rand_disturb", "bit_flip", "stale"};
             if (!kinds.contains(v)) throw ParseError{"attack must be none, neg_grad, rand_disturb, bit_flip or stale"};
             s.attack_kind = v;
         }},
        {"attack.workers", [](RunConfig& c, ParsedState&, std::string const& v) { c.attack.workers = to_id_list(v); }},
        {"attack.k", [](RunConfig& c, ParsedState&, std::string const& v) { c.attack.behavior.k_atk = to_double(v); }},
        {"attack.scale", [](RunConfig& c, ParsedState&, std::string const& v) { c.attack.behavior.scale = to_double(v); }},
        {"attack.noise_norm",
         [](RunConfig& c, ParsedState&, std::string const& v) {
             if (v == "per_message") c.attack.behavior.noise_norm = NoiseNorm::PerMessage;
             else if (v == "initial") c.attack.behavior.noise_norm = NoiseNorm::Initial;
             else throw ParseError{"attack.noise_norm must be per_message or initial"};
         }},
        {"attack.flip_prob", [](RunConfig& c, ParsedState&, std::string const& v) { c.attack.behavior.flip_prob = to_double(v); }},
        {"attack.stale_delay", [](RunConfig& c, ParsedState&, std::string const& v) { c.attack.behavior.stale_delay = to_double(v); }},
        {"attack.stale_jitter", [](RunConfig& c, ParsedState&, std::string const& v) { c.attack.behavior.stale_jitter = to_double(v); }},
        {"attack.flood", [](RunConfig& c, ParsedState&, std::string const& v) { c.attack.behavior.flood = to_uint(v); }},
        {"attack.schedule",
         [](RunConfig&, ParsedState& s, std::string const& v) {
             if (v != "always" && v != "intervals" && v != "probability")
                 throw ParseError{"attack.schedule must be always, intervals or probability"};
             s.schedule_kind = v;
         }},
        {"attack.intervals",
         [](RunConfig& c, ParsedState&, std::string const& v) { c.attack.behavior.schedule.intervals = to_intervals(v); }},
        {"attack.probability",
         [](RunConfig& c, ParsedState&, std::string const& v) { c.attack.behavior.schedule.probability = to_double(v); }},
        {"delay.base_compute", [](RunConfig& c, ParsedState&, std::string const& v) { c.delay.base_compute = to_double(v); }},
        {"delay.spread", [](RunConfig& c, ParsedState&, std::string const& v) { c.delay.spread = to_double(v); }},
        {"delay.network", [](RunConfig& c, ParsedState&, std::string const& v) { c.delay.network_mean = to_double(v); }},
        {"stop.steps", [](RunConfig& c, ParsedState&, std::string const& v) { c.stop.max_steps = to_uint(v); }},
        {"stop.time", [](RunConfig& c, ParsedState&, std::string const& v) { c.stop.max_time = to_double(v); }},
        {"stop.starvation_window",
         [](RunConfig& c, ParsedState&, std::string const& v) { c.stop.starvation_window = to_double(v); }},
        {"seed", [](RunConfig& c, ParsedState&, std::string const& v) { c.seed = to_uint(v); }},
        {"init", [](RunConfig& c, ParsedState&, std::string const& v) { c.init = to_double(v); }},
        {"robustness_checks",
         [](RunConfig&, ParsedState& s, std::string const& v) {
             if (v == "auto") s.robustness.reset();
             else s.robustness = to_bool(v);
         }},
        {"out", [](RunConfig& c, ParsedState&, std::string const& v) { c.out = v; }},
        {"expect.final_grad_norm_sq_max",
         [](RunConfig& c, ParsedState&, std::string const& v) { c.expect.final_grad_norm_sq_max = to_double(v); }},
        {"expect.final_loss_max",
         [](RunConfig& c, ParsedState&, std::string const& v) { c.expect.final_loss_max = to_double(v); }},
        {"expect.diverges", [](RunConfig& c, ParsedState&, std::string const& v) { c.expect.diverges = to_bool(v); }},
        {"expect.r_accounting", [](RunConfig& c, ParsedState&, std::string const& v) { c.expect.r_accounting = to_bool(v); }},
    };
    return table;
}

void finalize(RunConfig& c, ParsedState const& s, std::vector<std::string>& problems) {
    c.task_seed_explicit = s.task_seed_set;
    if (!s.task_seed_set) c.task.seed = c.seed;

    auto& b = c.attack.behavior;
    if (s.attack_kind == "none") b.kind = AttackKind::Loyal;
    else if (s.attack_kind == "neg_grad") b.kind = AttackKind::NegGrad;
    else if (s.attack_kind == "rand_disturb") b.kind = AttackKind::RandDisturb;
    else if (s.attack_kind == "bit_flip") b.kind = AttackKind::BitFlip;
    else if (s.attack_kind == "stale") b.kind = AttackKind::Stale;
    if (s.schedule_kind == "always") b.schedule.kind = AttackSchedule::Kind::Always;
    else if (s.schedule_kind == "intervals") b.schedule.kind = AttackSchedule::Kind::Intervals;
    else b.schedule.kind = AttackSchedule::Kind::Probability;

    if (c.rule.kind() == RuleKind::TrimmedMean) {
        if (!c.q) problems.emplace_back("aggregator trmean needs q");
        else c.rule = AggregationRule::trimmed_mean(*c.q);
    }
    c.robustness_checks = s.robustness.value_or(c.rule.kind() != RuleKind::Mean);

    if (c.workers == 0) problems.emplace_back("worker count must be >= 1");
    if (c.buffers == 0 || c.buffers > c.workers) problems.emplace_back("buffer count must satisfy 0 < B ≤ m");
    if (c.q && c.buffers > 0 && 2 * *c.q >= c.buffers) problems.emplace_back("q < B/2 required");
    if (c.q && c.rule.kind() == RuleKind::Median && c.buffers > 0 && *c.q > (c.buffers - 1) / 2)
        problems.emplace_back("median is only floor((B-1)/2)-robust; q too large");
    if (c.robustness_checks && c.buffers > 0 && c.r > c.effective_q())
        problems.emplace_back("r <= q required (declared Byzantine count exceeds the rule's robustness order)");
    if (c.robustness_checks && b.kind != AttackKind::Loyal && c.attack.workers.size() > c.r)
        problems.emplace_back("more attacking workers than the declared r");

    std::set<std::size_t> seen;
    for (auto id : c.attack.workers) {
        if (id >= c.workers) problems.push_back("attack.workers: id " + std::to_string(id) + " >= m");
        if (!seen.insert(id).second) problems.push_back("attack.workers: duplicate id " + std::to_string(id));
    }
    if (b.kind != AttackKind::Loyal && c.attack.workers.empty())
        problems.emplace_back("attack configured but attack.workers is empty");
    try {
        b.validate();
    } catch (InvalidParameter const& e) {
        problems.emplace_back(e.what());
    }

    if (c.task.dataset.empty()) {
        if (c.task.d == 0) problems.emplace_back("task.d must be >= 1");
        if (c.task.n < c.workers) problems.emplace_back("task.n >= m required (each worker needs an instance)");
        if (c.task.kind == Objective::Kind::Logistic && c.task.n < 2) problems.emplace_back("logistic task needs n >= 2");
    }
    if (!(c.task.l2 >= 0.0)) problems.emplace_back("task.l2 must be >= 0");
    if (!(c.task.heterogeneity >= 0.0 && c.task.heterogeneity <= 1.0))
        problems.emplace_back("task.heterogeneity must lie in [0, 1]");
    if (c.task.batch == 0) problems.emplace_back("task.batch must be >= 1");

    if (!(c.lr.eta > 0.0) || !std::isfinite(c.lr.eta)) problems.emplace_back("lr.eta must be positive");
    if (!(c.lr.decay_factor > 0.0)) problems.emplace_back("lr.decay_factor must be positive");
    for (double f : c.lr.decay_at)
        if (!(f >= 0.0 && f <= 1.0)) problems.emplace_back("lr.decay_at entries are fractions in [0, 1]");
    if (c.lr.smoothness && !(*c.lr.smoothness > 0.0)) problems.emplace_back("lr.L must be positive");
    if (c.lr.kind != LearningRateSpec::Kind::Constant && c.stop.max_steps == 0)
        problems.emplace_back("lr schedules other than constant need stop.steps");

    try {
        c.delay.validate();
    } catch (ConfigError const& e) {
        problems.insert(problems.end(), e.violations().begin(), e.violations().end());
    }
    if (c.stop.max_steps == 0 && !std::isfinite(c.stop.max_time))
        problems.emplace_back("need stop.steps or a finite stop.time");
    if (!(c.stop.starvation_window > 0.0)) problems.emplace_back("stop.starvation_window must be > 0");
    if (!std::isfinite(c.init)) problems.emplace_back("init must be finite");
}

}  // namespace

std::size_t RunConfig::effective_q() const {
    if (q) return *q;
    return rule.robustness_order(buffers);
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    ParsedState state;
    std::vector<std::string> problems;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto const hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto const eq = line.find('=');
        auto const where = "line " + std::to_string(line_no) + ": ";
        if (eq == std::string::npos) {
            problems.push_back(where + "expected key = value");
            continue;
        }
        auto const key = trim(line.substr(0, eq));
        auto const value = trim(line.substr(eq + 1));
        auto const it = setters().find(key);
        if (it == setters().end()) {
            problems.push_back(where + "unknown key '" + key + "'");
            continue;
        }
        if (!seen.insert(key).second) problems.push_back(where + "duplicate key '" + key + "'");
        try {
            it->second(cfg, state, value);
        } catch (ParseError const& e) {
            problems.push_back(where + key + ": " + e.message);
        } catch (std::invalid_argument const& e) {
            problems.push_back(where + key + ": " + e.what());
        }
    }
    finalize(cfg, state, problems);
    if (!problems.empty()) throw ConfigError(std::move(problems));
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
    std::stringstream ss;
    ss << in.rdbuf();
    auto cfg = parse_config(ss.str());
    if (cfg.name == "run") {
        auto base = path.substr(path.find_last_of('/') + 1);
        if (auto const dot = base.rfind('.'); dot != std::string::npos) base.erase(dot);
        cfg.name = base;
    }
    return cfg;
}

void override_seed(RunConfig& cfg, std::uint64_t seed) {
    cfg.seed = seed;
    if (!cfg.task_seed_explicit) cfg.task.seed = seed;
}

SimulationSetup make_setup(const RunConfig& cfg) {
    std::shared_ptr<Objective> objective;
    if (!cfg.task.dataset.empty()) {
        std::ifstream in(cfg.task.dataset);
        if (!in) throw ConfigError({"cannot open dataset '" + cfg.task.dataset + "'"});
        objective = std::make_shared<Objective>(read_dataset_csv(in, cfg.task.l2));
    } else if (cfg.task.kind == Objective::Kind::Quadratic) {
        objective = std::make_shared<Objective>(make_quadratic(cfg.task.n, cfg.task.d, cfg.task.seed));
    } else {
        objective = std::make_shared<Objective>(
            make_logistic(cfg.task.n, cfg.task.d, cfg.task.separation, cfg.task.l2, cfg.task.seed));
    }

    SimulationSetup setup;
    setup.partition = partition_skewed(*objective, cfg.workers, cfg.task.heterogeneity, cfg.task.seed);
    setup.behaviors.assign(cfg.workers, WorkerBehavior::loyal());
    if (cfg.attack.behavior.kind != AttackKind::Loyal)
        for (auto id : cfg.attack.workers) setup.behaviors.at(id) = cfg.attack.behavior;

    setup.server.initial = Vector(objective->dimension(), cfg.init);
    setup.server.num_buffers = cfg.buffers;
    setup.server.rule = cfg.rule;
    switch (cfg.lr.kind) {
        case LearningRateSpec::Kind::Constant: setup.server.learning_rate = LearningRate::constant(cfg.lr.eta); break;
        case LearningRateSpec::Kind::StepDecay: {
            std::vector<std::uint64_t> milestones;
            for (double f : cfg.lr.decay_at)
                milestones.push_back(static_cast<std::uint64_t>(std::llround(f * static_cast<double>(cfg.stop.max_steps))));
            setup.server.learning_rate = LearningRate::step_decay(cfg.lr.eta, milestones, cfg.lr.decay_factor);
            break;
        }
        case LearningRateSpec::Kind::InverseSqrt:
            setup.server.learning_rate =
                LearningRate::inverse_sqrt(cfg.lr.smoothness.value_or(objective->smoothness()), cfg.stop.max_steps);
            break;
    }
    setup.objective = std::move(objective);
    setup.delay = cfg.delay;
    setup.stop = cfg.stop;
    setup.tau_max = cfg.tau_max;
    setup.seed = cfg.seed;
    setup.batch = cfg.task.batch;
    return setup;
}

std::vector<std::size_t> byzantine_only_buffers(const RunConfig& cfg) {
    std::vector<std::size_t> out;
    if (cfg.attack.behavior.kind == AttackKind::Loyal || cfg.buffers == 0) return out;
    std::set<std::size_t> attackers(cfg.attack.workers.begin(), cfg.attack.workers.end());
    for (std::size_t b = 0; b < cfg.buffers; ++b) {
        bool any_loyal = false;
        for (std::size_t k = b; k < cfg.workers; k += cfg.buffers)
            if (!attackers.contains(k)) any_loyal = true;
        if (!any_loyal) out.push_back(b);
    }
    return out;
}

}  // namespace basgd
