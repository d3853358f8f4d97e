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

#include "basgd/server.hpp"

#include <cmath>

namespace basgd {

namespace {

std::size_t checked_dimension(ServerConfig const& config) {
    if (config.initial.empty()) throw InvalidParameter("server: initial parameters must have dimension >= 1");
    if (config.num_buffers == 0) throw InvalidParameter("server: buffer count must be positive");
    if (config.rule.kind() == RuleKind::TrimmedMean && 2 * config.rule.trim() >= config.num_buffers)
        throw InvalidParameter("server: trmean needs q < B/2");
    return config.initial.size();
}

}  // namespace

Server::Server(ServerConfig config)
    : config_(std::move(config)),
      w_(config_.initial),
      bank_(config_.num_buffers, checked_dimension(config_)) {}

Server::Reply Server::on_gradient(const GradientMessage& msg) {
    // Non-finite values are let through; the aggregation rule decides.
    bank_.accumulate(assign_buffer(msg.sender, bank_.size()), msg.g);
    bool stepped = false;
    if (bank_.all_ready()) {
        step(msg.arrive_time);
        stepped = true;
    }
    return Reply{w_, t_, stepped};
}

void Server::step(double time) {
    if (!bank_.all_ready()) throw std::logic_error("server: SGD step requested before all buffers are ready");
    auto const candidates = bank_.candidates();
    last_aggregate_ = config_.rule(candidates);
    auto const eta = config_.learning_rate(t_);
    for (std::size_t j = 0; j < w_.size(); ++j) w_[j] -= eta * last_aggregate_[j];

    if (sink_) {
        StepEvent ev;
        ev.t = t_;
        ev.aggregate_norm = std::sqrt(squared_norm(last_aggregate_));
        ev.eta = eta;
        ev.time = time;
        ev.buffer_counts.reserve(bank_.size());
        for (std::size_t b = 0; b < bank_.size(); ++b) ev.buffer_counts.push_back(bank_.slot(b).count);
        sink_(ev);
    }
    bank_.zero_out();
    ++t_;
}

std::vector<Vector> run_asgd_reference(const ServerConfig& config, std::span<const GradientMessage> messages) {
    if (config.num_buffers != 1 || config.rule.kind() != RuleKind::Mean)
        throw InvalidParameter("asgd reference: requires B = 1 and the mean rule");
    std::vector<Vector> trajectory;
    trajectory.reserve(messages.size() + 1);
    Vector w = config.initial;
    trajectory.push_back(w);
    std::uint64_t t = 0;
    for (auto const& msg : messages) {
        if (msg.g.size() != w.size()) throw InvalidInput("asgd reference: gradient dimension mismatch");
        auto const eta = config.learning_rate(t);
        for (std::size_t j = 0; j < w.size(); ++j) w[j] -= eta * msg.g[j];
        ++t;
        trajectory.push_back(w);
    }
    return trajectory;
}

}  // namespace basgd
