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

/**
 * Deterministic discrete-event simulation of one parameter server and m
 * workers running buffered asynchronous SGD.
 *
 * Events are processed in (time, seq) order, seq being assigned when the
 * event is scheduled, so a run is a pure function of its setup and seed.
 * A worker receives parameters, computes for base_compute * (1 + spread *
 * k_del) simulated seconds (k_del half-normal, drawn once per worker), sends,
 * and waits for the server's reply before computing again. Server handling
 * is instantaneous.
**/

#pragma once

#include <limits>
#include <map>
#include <memory>
#include <queue>
#include <string>
#include <variant>
#include <vector>

#include "basgd/server.hpp"
#include "basgd/tasks.hpp"
#include "basgd/worker.hpp"

namespace basgd {

/// Standard normal draw, resampled until non-negative.
double sample_worker_delay(Rng& rng);

struct DelayModel {
    double base_compute = 1.0;
    /// Multiplies k_del; 0 gives identical workers.
    double spread = 1.0;
    /// Mean of the exponential per-message latency in each direction; 0 disables it.
    double network_mean = 0.0;

    void validate() const;
};

struct StopCriterion {
    std::uint64_t max_steps = 1000;
    double max_time = std::numeric_limits<double>::infinity();
    /// Abort when no SGD step happened for this many simulated seconds.
    double starvation_window = 1e4;
};

struct SimulationSetup {
    std::shared_ptr<const Objective> objective;
    Partition partition;
    std::vector<WorkerBehavior> behaviors;  ///< one per worker
    ServerConfig server;
    DelayModel delay;
    StopCriterion stop;
    std::uint64_t tau_max = 100;
    std::uint64_t seed = 1;
    std::size_t batch = 1;
    bool compute_metrics = true;
    bool record_messages = false;    ///< keep every applied message, in delivery order
    bool record_trajectory = false;  ///< keep w^0, w^1, ...
};

/// Per-message bookkeeping at the server.
struct DeliveryRecord {
    std::size_t sender = 0;
    std::uint64_t base_version = 0;
    std::uint64_t arrival_iteration = 0;
    std::uint64_t tau = 0;
    double time = 0.0;
    bool attacked = false;
    Classification classification = Classification::Loyal;
    bool applied = true;  ///< false for messages that arrived after the stop
};

/// One row per SGD step; loss and gradient are evaluated at the new w^t.
struct MetricsRecord {
    std::uint64_t step = 0;
    double time = 0.0;
    double loss = 0.0;
    double grad_norm_sq = 0.0;
    double aggregate_norm_sq = 0.0;
    double eta = 0.0;
    double tau_mean = 0.0;
    std::uint64_t tau_max = 0;
    std::size_t messages = 0;
    std::size_t byzantine_messages = 0;
    std::size_t byzantine_senders = 0;
    double accuracy = std::numeric_limits<double>::quiet_NaN();
};

enum class RunStatus { Completed, Starved };

struct RunResult {
    RunStatus status = RunStatus::Completed;
    std::string diagnostic;
    std::vector<MetricsRecord> steps;
    std::vector<DeliveryRecord> deliveries;
    std::vector<GradientMessage> messages;
    std::vector<Vector> trajectory;
    Vector final_w;
    std::vector<double> k_del;
    std::uint64_t sends = 0;
    std::uint64_t delivered = 0;
    std::uint64_t applied = 0;
    double end_time = 0.0;
    double initial_loss = 0.0;
    double initial_grad_norm_sq = 0.0;
    /// Largest and root-mean-square norm of the honest gradients computed.
    double empirical_d_max = 0.0;
    double empirical_d_rms = 0.0;
};

// -------------------------------------------------------------------------- //

struct WorkerReceive {
    std::size_t worker;
    Vector w;
    std::uint64_t version;
};
struct WorkerSend {
    std::size_t worker;
    GradientMessage msg;
    std::size_t copies;
};
struct ServerDeliver {
    GradientMessage msg;
};

struct Event {
    double time = 0.0;
    std::uint64_t seq = 0;
    std::variant<WorkerSend, ServerDeliver, WorkerReceive> payload;
};

/// Min-queue on (time, seq); seq is assigned at scheduling and never reused.
class EventQueue {
public:
    void push(double time, decltype(Event::payload) payload);
    Event pop();
    const Event& top() const { return heap_.top(); }
    bool empty() const noexcept { return heap_.empty(); }
    std::size_t size() const noexcept { return heap_.size(); }

private:
    struct Later {
        bool operator()(Event const& a, Event const& b) const noexcept {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };
    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    std::uint64_t next_seq_ = 0;
};

/// Checks a setup before running; throws ConfigError listing every problem.
void validate_setup(const SimulationSetup& setup);

/// Executes the simulation until the stop criterion or starvation.
RunResult run_simulation(const SimulationSetup& setup);

struct TauHistogram {
    std::map<std::uint64_t, std::size_t> counts;
    std::uint64_t max = 0;
    double mean = 0.0;
    double exceed_fraction = 0.0;  ///< share of messages with tau > tau_max
    std::size_t total = 0;
};

TauHistogram tau_histogram(std::span<const DeliveryRecord> deliveries, std::uint64_t tau_max);

}  // namespace basgd
