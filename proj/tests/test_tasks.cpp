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

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "basgd/tasks.hpp"

using namespace basgd;

namespace {

// Central finite-difference oracle for the full gradient.
Vector numeric_gradient(const Objective& obj, Vector w, double h = 1e-6) {
    Vector g(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
        auto const orig = w[j];
        w[j] = orig + h;
        auto const up = obj.full_loss(w);
        w[j] = orig - h;
        auto const down = obj.full_loss(w);
        w[j] = orig;
        g[j] = (up - down) / (2 * h);
    }
    return g;
}

}  // namespace

TEST_CASE("quadratic: loss, gradient and minimiser") {
    auto obj = Objective::quadratic({{1.0, 2.0}, {3.0, 6.0}});
    Vector w{0.0, 0.0};
    CHECK(obj.instance_loss(w, 0) == doctest::Approx(2.5));
    CHECK(obj.instance_gradient(w, 1) == Vector{-3.0, -6.0});
    CHECK(obj.full_loss(w) == doctest::Approx((2.5 + 22.5) / 2));
    CHECK(obj.full_gradient(w) == Vector{-2.0, -4.0});
    auto const star = obj.minimizer();
    REQUIRE(star);
    CHECK(*star == Vector{2.0, 4.0});
    CHECK(squared_norm(obj.full_gradient(*star)) == doctest::Approx(0.0));
    CHECK(obj.smoothness() == 1.0);
}

TEST_CASE("quadratic with identical targets has zero optimum loss") {
    auto obj = Objective::quadratic({{1.5, -2.0}, {1.5, -2.0}, {1.5, -2.0}});
    auto const star = *obj.minimizer();
    CHECK(star == Vector{1.5, -2.0});
    CHECK(obj.full_loss(star) == 0.0);
}

TEST_CASE("quadratic suboptimality is half the squared distance to the minimiser") {
    auto obj = make_quadratic(50, 6, 12);
    auto const star = *obj.minimizer();
    CHECK(squared_norm(obj.full_gradient(star)) < 1e-28);
    Rng rng = make_rng(2, 0);
    std::normal_distribution<double> normal(0.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        Vector w(6), diff(6);
        for (std::size_t j = 0; j < 6; ++j) w[j] = normal(rng), diff[j] = w[j] - star[j];
        CHECK(obj.full_loss(w) - obj.full_loss(star) == doctest::Approx(0.5 * squared_norm(diff)).epsilon(1e-10));
    }
}

TEST_CASE("logistic at zero weights costs ln 2 per instance") {
    auto obj = make_logistic(50, 4, 3.0, 0.0, 7);
    Vector w(4, 0.0);
    for (std::size_t i = 0; i < obj.size(); ++i) CHECK(obj.instance_loss(w, i) == doctest::Approx(std::numbers::ln2));
    CHECK(obj.full_loss(w) == doctest::Approx(std::numbers::ln2));
}

TEST_CASE("zero data gives zero logistic gradient at w = 0") {
    auto obj = Objective::logistic({{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}, {1.0, -1.0}, 0.0);
    CHECK(obj.full_gradient(Vector(3, 0.0)) == Vector(3, 0.0));
}

TEST_CASE("analytic gradients match finite differences") {
    auto q = make_quadratic(30, 5, 3);
    auto lg = make_logistic(40, 5, 4.0, 0.05, 3);
    Rng rng = make_rng(1, 0);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 100; ++trial) {
        Vector w(5);
        for (auto& x : w) x = normal(rng);
        for (auto const* obj : {&q, &lg}) {
            auto const g = obj->full_gradient(w);
            auto const n = numeric_gradient(*obj, w);
            for (std::size_t j = 0; j < 5; ++j) CHECK(g[j] == doctest::Approx(n[j]).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("logistic loss is stable for large margins") {
    auto obj = Objective::logistic({{1000.0}}, {1.0}, 0.0);
    CHECK(obj.instance_loss(Vector{-10.0}, 0) == doctest::Approx(10000.0));
    CHECK(std::isfinite(obj.instance_loss(Vector{10.0}, 0)));
    CHECK(all_finite(obj.instance_gradient(Vector{-10.0}, 0)));
}

TEST_CASE("full-batch gradient descent converges on a strongly convex logistic task") {
    auto obj = make_logistic(200, 3, 2.0, 0.1, 5);
    Vector w(3, 0.0);
    double const eta = 1.0 / obj.smoothness();
    double prev = obj.full_loss(w);
    for (int k = 0; k < 2000; ++k) {
        auto const g = obj.full_gradient(w);
        for (std::size_t j = 0; j < 3; ++j) w[j] -= eta * g[j];
        auto const cur = obj.full_loss(w);
        CHECK(cur <= prev + 1e-12);
        prev = cur;
    }
    CHECK(squared_norm(obj.full_gradient(w)) < 1e-12);
}

TEST_CASE("logistic holdout accuracy") {
    auto obj = make_logistic(400, 5, 10.0, 0.0, 1);
    CHECK(obj.holdout_size() == 100);
    auto const acc = obj.holdout_accuracy(Vector(5, 0.0));
    REQUIRE(acc);
    CHECK(*acc >= 0.0);
    CHECK(*acc <= 1.0);
    CHECK_FALSE(make_quadratic(5, 2, 1).holdout_accuracy(Vector(2, 0.0)));
    CHECK_FALSE(obj.minimizer());
}

TEST_CASE("generators are deterministic in the seed") {
    auto a = make_quadratic(20, 3, 9);
    auto b = make_quadratic(20, 3, 9);
    auto c = make_quadratic(20, 3, 10);
    bool differs = false;
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(std::equal(a.row(i).begin(), a.row(i).end(), b.row(i).begin()));
        differs = differs || !std::equal(a.row(i).begin(), a.row(i).end(), c.row(i).begin());
    }
    CHECK(differs);
}

TEST_CASE("objective construction errors") {
    CHECK_THROWS_AS(Objective::quadratic({}), InvalidInput);
    CHECK_THROWS_AS(Objective::quadratic({{1.0}, {1.0, 2.0}}), InvalidInput);
    CHECK_THROWS_AS(Objective::quadratic({{NAN}}), InvalidInput);
    CHECK_THROWS_AS(Objective::logistic({{1.0}}, {0.0}, 0.0), InvalidInput);
    CHECK_THROWS_AS(Objective::logistic({{1.0}}, {1.0, 1.0}, 0.0), InvalidInput);
    CHECK_THROWS_AS(Objective::logistic({{1.0}}, {1.0}, -1.0), InvalidInput);
    CHECK_THROWS_AS(make_quadratic(0, 3, 1), InvalidParameter);
    CHECK_THROWS_AS(make_logistic(10, 3, -1.0, 0.0, 1), InvalidParameter);
}

TEST_CASE("uniform partition") {
    auto p = partition_uniform(10, 5, 1);
    REQUIRE(p.size() == 5);
    for (auto const& s : p.shards) CHECK(s.size() == 2);
    CHECK_NOTHROW(validate_partition(p, 10));

    auto p2 = partition_uniform(10, 5, 1);
    CHECK(p.shards == p2.shards);

    auto p3 = partition_uniform(1003, 7, 2);
    std::set<std::size_t> all;
    for (auto const& s : p3.shards) {
        CHECK(s.size() >= 143);
        CHECK(s.size() <= 144);
        all.insert(s.begin(), s.end());
    }
    CHECK(all.size() == 1003);
    CHECK_THROWS_AS(partition_uniform(3, 5, 1), ConfigError);
    CHECK_THROWS_AS(partition_uniform(3, 0, 1), ConfigError);
}

TEST_CASE("skewed partition covers the data and orders by label when fully skewed") {
    auto obj = make_logistic(100, 2, 3.0, 0.0, 4);
    auto p = partition_skewed(obj, 4, 1.0, 4);
    CHECK_NOTHROW(validate_partition(p, 100));
    CHECK(partition_skewed(obj, 4, 0.0, 4).shards == partition_uniform(100, 4, 4).shards);
    double first = 0.0, last = 0.0;
    for (auto i : p.shards.front()) first += obj.label(i);
    for (auto i : p.shards.back()) last += obj.label(i);
    CHECK(first < last);
    CHECK_THROWS_AS(partition_skewed(obj, 4, 1.5, 4), ConfigError);
}

TEST_CASE("validate_partition rejects overlaps and gaps") {
    Partition overlap{{{0, 1}, {1, 2}}};
    CHECK_THROWS_AS(validate_partition(overlap, 3), ConfigError);
    Partition gap{{{0}, {2}}};
    CHECK_THROWS_AS(validate_partition(gap, 3), ConfigError);
    Partition empty{{{0, 1, 2}, {}}};
    CHECK_THROWS_AS(validate_partition(empty, 3), ConfigError);
}

TEST_CASE("dataset csv round trip") {
    for (auto const& obj : {make_quadratic(7, 3, 2), make_logistic(8, 3, 2.0, 0.0, 2)}) {
        std::stringstream ss;
        write_dataset_csv(obj, ss);
        auto back = read_dataset_csv(ss, obj.l2());
        REQUIRE(back.size() == obj.size());
        CHECK(back.kind() == obj.kind());
        CHECK(back.holdout_size() == obj.holdout_size());
        for (std::size_t i = 0; i < obj.size(); ++i)
            CHECK(std::equal(obj.row(i).begin(), obj.row(i).end(), back.row(i).begin()));
    }
    std::stringstream bad("z0,z1\n1,2\n3\n");
    CHECK_THROWS_AS(read_dataset_csv(bad), InvalidInput);
    std::stringstream empty("");
    CHECK_THROWS_AS(read_dataset_csv(empty), InvalidInput);
}
