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

#include "basgd/common.hpp"
#include "basgd/learning_rate.hpp"

using namespace basgd;

TEST_CASE("constant schedule") {
    auto lr = LearningRate::constant(0.1);
    CHECK(lr(0) == 0.1);
    CHECK(lr(123456) == 0.1);
    CHECK_THROWS_AS(LearningRate::constant(0.0), InvalidParameter);
    CHECK_THROWS_AS(LearningRate::constant(-1.0), InvalidParameter);
    CHECK_THROWS_AS(LearningRate::constant(INFINITY), InvalidParameter);
}

TEST_CASE("step decay multiplies at each milestone") {
    auto lr = LearningRate::step_decay(1.0, {750, 500}, 0.1);
    CHECK(lr(0) == 1.0);
    CHECK(lr(499) == 1.0);
    CHECK(lr(500) == doctest::Approx(0.1));
    CHECK(lr(749) == doctest::Approx(0.1));
    CHECK(lr(750) == doctest::Approx(0.01));
    CHECK(lr(100000) == doctest::Approx(0.01));
    CHECK_THROWS_AS(LearningRate::step_decay(1.0, {1}, 0.0), InvalidParameter);
}

TEST_CASE("inverse sqrt schedule") {
    auto lr = LearningRate::inverse_sqrt(2.0, 100);
    CHECK(lr(0) == doctest::Approx(1.0 / 20.0));
    CHECK(lr(99) == lr(0));
    CHECK_THROWS_AS(LearningRate::inverse_sqrt(0.0, 10), InvalidParameter);
    CHECK_THROWS_AS(LearningRate::inverse_sqrt(1.0, 0), InvalidParameter);
}

TEST_CASE("describe names the schedule") {
    CHECK(LearningRate::constant(0.5).describe().find("constant") != std::string::npos);
    CHECK(LearningRate::step_decay(1.0, {5}, 0.5).describe().find("milestones=5") != std::string::npos);
}
