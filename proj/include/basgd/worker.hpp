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

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "basgd/common.hpp"
#include "basgd/tasks.hpp"

namespace basgd {

/// A gradient in flight from a worker to the server.
struct GradientMessage {
    std::size_t sender = 0;
    Vector g;
    std::uint64_t base_version = 0;  ///< parameter version the gradient was computed on
    double send_time = 0.0;
    double arrive_time = 0.0;
    /// Ground truth for bookkeeping only; the server never reads it.
    bool attacked = false;
};

// -------------------------------------------------------------------------- //
// Behaviours

/// When a Byzantine behaviour is switched on, keyed by the parameter version.
struct AttackSchedule {
    enum class Kind { Always, Intervals, Probability };

    Kind kind = Kind::Always;
    /// Half-open [begin, end) ranges of base versions (Intervals).
    std::vector<std::pair<std::uint64_t, std::uint64_t>> intervals;
    double probability = 1.0;

    static AttackSchedule always() { return {}; }
    static AttackSchedule during(std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges);
    static AttackSchedule with_probability(double p);

    /// Deterministic given the engine state; Probability consumes one draw.
    bool active(std::uint64_t base_version, Rng& rng) const;
};

enum class AttackKind { Loyal, NegGrad, RandDisturb, BitFlip, Stale };

/// How the random-disturbance variance is anchored.
enum class NoiseNorm {
    PerMessage,  ///< sigma^2 = |scale * g|^2 recomputed for every message
    Initial,     ///< sigma fixed from the worker's first attacked gradient
};

struct WorkerBehavior {
    AttackKind kind = AttackKind::Loyal;
    double k_atk = 10.0;
    double scale = 0.2;
    NoiseNorm noise_norm = NoiseNorm::PerMessage;
    double flip_prob = 0.0;
    double stale_delay = 0.0;   ///< extra simulated seconds per stale send
    double stale_jitter = 0.0;  ///< half-normal scale added on top of stale_delay
    std::size_t flood = 1;      ///< copies sent per computation while active
    AttackSchedule schedule;

    static WorkerBehavior loyal() { return {}; }
    static WorkerBehavior neg_grad(double k_atk);
    static WorkerBehavior rand_disturb(double scale);
    static WorkerBehavior bit_flip(double prob);
    static WorkerBehavior stale(double delay, double jitter = 0.0);

    bool is_loyal() const noexcept { return kind == AttackKind::Loyal; }
    std::string name() const;
    /// Throws InvalidParameter on non-finite or out-of-range parameters.
    void validate() const;
};

/// Mutable per-worker state some attacks need (RD-attack anchored noise).
struct AttackState {
    std::optional<double> anchored_sigma;
};

/**
 * Honest stochastic gradient: mean of `batch` instance gradients at w, each
 * index uniform over the worker's shard (with replacement).
**/
Vector compute_loyal_gradient(const Objective& objective, std::span<const double> w,
                              std::span<const std::size_t> shard, Rng& rng, std::size_t batch = 1);

/**
 * Applies the behaviour's corruption to an honest gradient. The caller has
 * already checked the schedule. Loyal and Stale return g unchanged (Stale
 * only affects timing).
 *   NegGrad:     -k_atk g
 *   RandDisturb: g + xi, xi_j ~ N(0, sigma^2), sigma = |scale g|
 *   BitFlip:     each coordinate with prob. flip_prob becomes -x 2^e, e uniform in [-8, 8]
**/
Vector apply_attack(const WorkerBehavior& behavior, std::span<const double> g, Rng& rng,
                    AttackState* state = nullptr);

enum class Classification { Loyal, Byzantine };

/// Loyal iff honestly computed and delay (arrival iteration - base version) <= tau_max.
Classification classify_iteration(const GradientMessage& msg, std::uint64_t arrival_iteration,
                                  std::uint64_t tau_max);

// -------------------------------------------------------------------------- //

/// One worker: its shard, behaviour and private random streams.
class Worker {
public:
    Worker(std::size_t id, std::vector<std::size_t> shard, WorkerBehavior behavior, std::uint64_t seed,
           std::size_t batch = 1);

    struct Output {
        Vector g;
        bool attacked = false;
        std::size_t copies = 1;
        double extra_delay = 0.0;
    };

    /// Samples an honest gradient at w and applies the behaviour if active.
    Output compute(const Objective& objective, std::span<const double> w, std::uint64_t version);

    std::size_t id() const noexcept { return id_; }
    const WorkerBehavior& behavior() const noexcept { return behavior_; }
    std::span<const std::size_t> shard() const noexcept { return shard_; }

private:
    std::size_t id_;
    std::vector<std::size_t> shard_;
    WorkerBehavior behavior_;
    std::size_t batch_;
    Rng sample_rng_;
    Rng attack_rng_;
    AttackState attack_state_;
};

}  // namespace basgd
