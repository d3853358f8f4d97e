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

#include "basgd/learning_rate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "basgd/common.hpp"

namespace basgd {

LearningRate LearningRate::constant(double eta) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidParameter("learning rate must be positive and finite");
    return LearningRate(eta, {}, 1.0, "constant");
}

LearningRate LearningRate::step_decay(double eta0, std::vector<std::uint64_t> milestones, double factor) {
    if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw InvalidParameter("learning rate must be positive and finite");
    if (!(factor > 0.0) || !std::isfinite(factor)) throw InvalidParameter("decay factor must be positive and finite");
    std::sort(milestones.begin(), milestones.end());
    return LearningRate(eta0, std::move(milestones), factor, "step_decay");
}

LearningRate LearningRate::inverse_sqrt(double smoothness, std::uint64_t budget) {
    if (!(smoothness > 0.0) || !std::isfinite(smoothness) || budget == 0)
        throw InvalidParameter("inverse_sqrt learning rate needs L > 0 and T > 0");
    auto const eta = 1.0 / (smoothness * std::sqrt(static_cast<double>(budget)));
    return LearningRate(eta, {}, 1.0, "inverse_sqrt");
}

double LearningRate::operator()(std::uint64_t t) const noexcept {
    double eta = eta0_;
    for (auto m : milestones_) {
        if (t < m) break;
        eta *= factor_;
    }
    return eta;
}

std::string LearningRate::describe() const {
    std::ostringstream os;
    os << label_ << "(eta0=" << eta0_;
    if (!milestones_.empty()) {
        os << ", milestones=";
        for (std::size_t i = 0; i < milestones_.size(); ++i) os << (i ? ";" : "") << milestones_[i];
        os << ", factor=" << factor_;
    }
    os << ")";
    return os.str();
}

}  // namespace basgd
