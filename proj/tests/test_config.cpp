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

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "basgd/config.hpp"

using namespace basgd;

namespace {

bool has_violation(const std::string& text, const std::string& needle) {
    try {
        parse_config(text);
    } catch (ConfigError const& e) {
        return std::any_of(e.violations().begin(), e.violations().end(),
                           [&](auto const& v) { return v.find(needle) != std::string::npos; });
    }
    return false;
}

}  // namespace

TEST_CASE("three-Byzantine setup is valid") {
    auto cfg = parse_config(R"(
        task = logistic
        task.n = 3000      # instances
        workers = 15
        buffers = 10
        aggregator = trmean
        q = 3
        r = 3
        attack = neg_grad
        attack.workers = 0-2
        attack.k = 10
    )");
    CHECK(cfg.workers == 15);
    CHECK(cfg.buffers == 10);
    CHECK(cfg.rule == AggregationRule::trimmed_mean(3));
    CHECK(cfg.effective_q() == 3);
    CHECK(cfg.attack.workers == std::vector<std::size_t>{0, 1, 2});
    CHECK(cfg.attack.behavior.kind == AttackKind::NegGrad);
    CHECK(cfg.attack.behavior.k_atk == 10.0);
    CHECK(cfg.robustness_checks);
}

TEST_CASE("buffer count constraint") {
    CHECK(has_violation("workers = 4\nbuffers = 0\n", "buffer count must satisfy 0 < B ≤ m"));
    CHECK(has_violation("workers = 4\nbuffers = 5\n", "buffer count must satisfy 0 < B ≤ m"));
}

TEST_CASE("q < B/2") {
    CHECK(has_violation("workers = 10\nbuffers = 10\naggregator = trmean\nq = 5\n", "q < B/2 required"));
}

TEST_CASE("r accounting") {
    CHECK(has_violation("workers = 10\nbuffers = 10\naggregator = trmean\nq = 2\nr = 3\n", "r <= q required"));
    CHECK(has_violation("workers = 10\nbuffers = 10\naggregator = median\nr = 1\nattack = neg_grad\nattack.workers = 0,1\n",
                        "more attacking workers than the declared r"));
    // Mean disables robustness checks by default, so attacks beyond r are allowed.
    CHECK_NOTHROW(parse_config("workers = 10\nbuffers = 10\nattack = neg_grad\nattack.workers = 0,1\n"));
    CHECK(has_violation("workers = 10\nbuffers = 10\nrobustness_checks = true\nattack = neg_grad\nattack.workers = 0\n",
                        "more attacking workers than the declared r"));
    CHECK(has_violation("workers = 10\nbuffers = 10\nrobustness_checks = true\nr = 1\n", "r <= q required"));
}

TEST_CASE("unknown, duplicate and malformed keys") {
    CHECK(has_violation("workers = 2\nbuffers = 1\nfoo = 3\n", "unknown key 'foo'"));
    CHECK(has_violation("workers = 2\nworkers = 3\nbuffers = 1\n", "duplicate key 'workers'"));
    CHECK(has_violation("workers = 2\nbuffers\n", "expected key = value"));
    CHECK(has_violation("workers = two\nbuffers = 1\n", "workers"));
    CHECK(has_violation("workers = 2\nbuffers = 1\naggregator = krum\n", "aggregator"));
    CHECK(has_violation("workers = 2\nbuffers = 2\naggregator = trmean\n", "aggregator trmean needs q"));
}

TEST_CASE("every violation is reported at once") {
    try {
        parse_config("workers = 4\nbuffers = 9\nbogus = 1\nlr.eta = -1\n");
        FAIL("expected ConfigError");
    } catch (ConfigError const& e) {
        CHECK(e.violations().size() >= 3);
    }
}

TEST_CASE("attack worker ids are checked") {
    CHECK(has_violation("workers = 3\nbuffers = 1\nattack = neg_grad\nattack.workers = 5\n", "id 5 >= m"));
    CHECK(has_violation("workers = 3\nbuffers = 1\nattack = neg_grad\n", "attack.workers is empty"));
}

TEST_CASE("schedules and learning rates parse") {
    auto cfg = parse_config(R"(
        workers = 4
        buffers = 2
        attack = rand_disturb
        attack.workers = 1
        attack.scale = 0.2
        attack.noise_norm = initial
        attack.schedule = intervals
        attack.intervals = 0-100,200-300
        lr = step_decay
        lr.eta = 0.5
        lr.decay_at = 0.5,0.75
        stop.steps = 400
    )");
    CHECK(cfg.attack.behavior.schedule.kind == AttackSchedule::Kind::Intervals);
    CHECK(cfg.attack.behavior.schedule.intervals.size() == 2);
    CHECK(cfg.attack.behavior.noise_norm == NoiseNorm::Initial);
    auto const setup = make_setup(cfg);
    CHECK(setup.server.learning_rate(0) == 0.5);
    CHECK(setup.server.learning_rate(200) == doctest::Approx(0.05));
    CHECK(setup.server.learning_rate(300) == doctest::Approx(0.005));
    CHECK(setup.behaviors[1].kind == AttackKind::RandDisturb);
    CHECK(setup.behaviors[0].is_loyal());
}

TEST_CASE("make_setup builds a consistent simulation setup") {
    auto cfg = parse_config("workers = 6\nbuffers = 3\ntask.n = 60\ntask.d = 4\ninit = 0.5\n");
    auto const setup = make_setup(cfg);
    CHECK(setup.partition.size() == 6);
    CHECK(setup.objective->dimension() == 4);
    CHECK(setup.server.initial == Vector(4, 0.5));
    CHECK(setup.server.num_buffers == 3);
    CHECK_NOTHROW(validate_setup(setup));
}

TEST_CASE("seed override leaves an explicit task seed alone") {
    auto cfg = parse_config("workers = 2\nbuffers = 1\n");
    override_seed(cfg, 42);
    CHECK(cfg.seed == 42);
    CHECK(cfg.task.seed == 42);
    auto pinned = parse_config("workers = 2\nbuffers = 1\ntask.seed = 7\n");
    override_seed(pinned, 42);
    CHECK(pinned.seed == 42);
    CHECK(pinned.task.seed == 7);
}

TEST_CASE("byzantine-only buffers are detected") {
    auto cfg = parse_config("workers = 6\nbuffers = 3\nattack = neg_grad\nattack.workers = 1,4\n");
    CHECK(byzantine_only_buffers(cfg) == std::vector<std::size_t>{1});
    auto ok = parse_config("workers = 6\nbuffers = 3\nattack = neg_grad\nattack.workers = 1\n");
    CHECK(byzantine_only_buffers(ok).empty());
}

TEST_CASE("load_config names the run after the file") {
    auto const path = std::filesystem::temp_directory_path() / "basgd_cfg_test_name.cfg";
    {
        std::ofstream out(path);
        out << "workers = 2\nbuffers = 1\n";
    }
    CHECK(load_config(path.string()).name == "basgd_cfg_test_name");
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_config(path.string()), ConfigError);
}
