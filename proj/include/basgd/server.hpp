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

#include <functional>
#include <span>
#include <vector>

#include "basgd/aggregation.hpp"
#include "basgd/buffer.hpp"
#include "basgd/learning_rate.hpp"
#include "basgd/worker.hpp"

namespace basgd {

/// Emitted once per SGD step.
struct StepEvent {
    std::uint64_t t = 0;  ///< iteration index of the step (w^t -> w^{t+1})
    double aggregate_norm = 0.0;
    double eta = 0.0;
    double time = 0.0;
    std::vector<std::size_t> buffer_counts;
};

struct ServerConfig {
    Vector initial;
    std::size_t num_buffers = 1;
    AggregationRule rule = AggregationRule::mean();
    LearningRate learning_rate = LearningRate::constant(0.1);
};

/**
 * Buffered asynchronous SGD server. Every incoming gradient is folded into
 * buffer (sender mod B); once all B buffers are non-empty one SGD step runs
 * on Aggr(h_1..h_B) and the buffers are cleared. Each call is answered with
 * the latest parameters. B = 1 with the mean rule is plain ASGD.
**/
class Server {
public:
    explicit Server(ServerConfig config);

    struct Reply {
        Vector w;
        std::uint64_t version = 0;
        bool stepped = false;
    };

    Reply on_gradient(const GradientMessage& msg);

    /// Runs the SGD step on the current buffers; throws std::logic_error unless all are ready.
    void step(double time = 0.0);

    std::uint64_t iteration() const noexcept { return t_; }
    const Vector& weights() const noexcept { return w_; }
    const BufferBank& bank() const noexcept { return bank_; }
    const Vector& last_aggregate() const noexcept { return last_aggregate_; }
    const ServerConfig& config() const noexcept { return config_; }

    void set_step_sink(std::function<void(const StepEvent&)> sink) { sink_ = std::move(sink); }

private:
    ServerConfig config_;
    Vector w_;
    std::uint64_t t_ = 0;
    BufferBank bank_;
    Vector last_aggregate_;
    std::function<void(const StepEvent&)> sink_;
};

/**
 * Plain ASGD server loop: every message is one step w <- w - eta(t) g.
 * Returns [w^0, w^1, ...]. Requires B = 1 and the mean rule in `config`.
**/
std::vector<Vector> run_asgd_reference(const ServerConfig& config, std::span<const GradientMessage> messages);

}  // namespace basgd
