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

#include <cstdint>
#include <string>
#include <vector>

namespace basgd {

/// Learning rate as a function of the server iteration t.
class LearningRate {
public:
    static LearningRate constant(double eta);
    /// eta0, multiplied by `factor` once each milestone iteration is reached.
    static LearningRate step_decay(double eta0, std::vector<std::uint64_t> milestones, double factor);
    /// 1 / (L sqrt(T)), constant over a budget of T iterations.
    static LearningRate inverse_sqrt(double smoothness, std::uint64_t budget);

    double operator()(std::uint64_t t) const noexcept;
    std::string describe() const;

private:
    LearningRate(double eta0, std::vector<std::uint64_t> milestones, double factor, std::string label)
        : eta0_(eta0), milestones_(std::move(milestones)), factor_(factor), label_(std::move(label)) {}

    double eta0_;
    std::vector<std::uint64_t> milestones_;
    double factor_;
    std::string label_;
};

}  // namespace basgd
