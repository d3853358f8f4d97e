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

#include "basgd/worker.hpp"

#include <cmath>

namespace basgd {

namespace {

constexpr std::uint64_t kSampleStream = 0x3a11;
constexpr std::uint64_t kAttackStream = 0xa77a;

bool finite_non_negative(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

AttackSchedule AttackSchedule::during(std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges) {
    AttackSchedule s;
    s.kind = Kind::Intervals;
    s.intervals = std::move(ranges);
    return s;
}

AttackSchedule AttackSchedule::with_probability(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter("attack schedule: probability must lie in [0, 1]");
    AttackSchedule s;
    s.kind = Kind::Probability;
    s.probability = p;
    return s;
}

bool AttackSchedule::active(std::uint64_t base_version, Rng& rng) const {
    switch (kind) {
        case Kind::Always: return true;
        case Kind::Intervals:
            for (auto const& [begin, end] : intervals)
                if (base_version >= begin && base_version < end) return true;
            return false;
        case Kind::Probability: return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < probability;
    }
    return false;
}

WorkerBehavior WorkerBehavior::neg_grad(double k_atk) {
    WorkerBehavior b;
    b.kind = AttackKind::NegGrad;
    b.k_atk = k_atk;
    return b;
}

WorkerBehavior WorkerBehavior::rand_disturb(double scale) {
    WorkerBehavior b;
    b.kind = AttackKind::RandDisturb;
    b.scale = scale;
    return b;
}

WorkerBehavior WorkerBehavior::bit_flip(double prob) {
    WorkerBehavior b;
    b.kind = AttackKind::BitFlip;
    b.flip_prob = prob;
    return b;
}

WorkerBehavior WorkerBehavior::stale(double delay, double jitter) {
    WorkerBehavior b;
    b.kind = AttackKind::Stale;
    b.stale_delay = delay;
    b.stale_jitter = jitter;
    return b;
}

std::string WorkerBehavior::name() const {
    switch (kind) {
        case AttackKind::Loyal: return "loyal";
        case AttackKind::NegGrad: return "neg_grad";
        case AttackKind::RandDisturb: return "rand_disturb";
        case AttackKind::BitFlip: return "bit_flip";
        case AttackKind::Stale: return "stale";
    }
    return "?";
}

void WorkerBehavior::validate() const {
    if (!(std::isfinite(k_atk) && k_atk > 0.0)) throw InvalidParameter("behavior: k_atk must be positive and finite");
    if (!(std::isfinite(scale) && scale > 0.0)) throw InvalidParameter("behavior: scale must be positive and finite");
    if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) throw InvalidParameter("behavior: flip probability must lie in [0, 1]");
    if (!finite_non_negative(stale_delay) || !finite_non_negative(stale_jitter))
        throw InvalidParameter("behavior: stale delay and jitter must be finite and >= 0");
    if (flood == 0) throw InvalidParameter("behavior: flood factor must be >= 1");
    if (schedule.kind == AttackSchedule::Kind::Probability &&
        !(schedule.probability >= 0.0 && schedule.probability <= 1.0))
        throw InvalidParameter("behavior: schedule probability must lie in [0, 1]");
    for (auto const& [begin, end] : schedule.intervals)
        if (begin > end) throw InvalidParameter("behavior: schedule interval with begin > end");
}

// -------------------------------------------------------------------------- //

Vector compute_loyal_gradient(const Objective& objective, std::span<const double> w,
                              std::span<const std::size_t> shard, Rng& rng, std::size_t batch) {
    if (shard.empty()) throw ConfigError({"worker shard is empty"});
    if (batch == 0) throw ConfigError({"batch size must be >= 1"});
    auto const d = objective.dimension();
    std::uniform_int_distribution<std::size_t> pick(0, shard.size() - 1);
    if (batch == 1) return objective.instance_gradient(w, shard[pick(rng)]);
    Vector total(d, 0.0);
    Vector g(d);
    for (std::size_t k = 0; k < batch; ++k) {
        objective.instance_gradient(w, shard[pick(rng)], g);
        for (std::size_t j = 0; j < d; ++j) total[j] += g[j];
    }
    for (auto& x : total) x /= static_cast<double>(batch);
    return total;
}

Vector apply_attack(const WorkerBehavior& behavior, std::span<const double> g, Rng& rng, AttackState* state) {
    Vector out(g.begin(), g.end());
    switch (behavior.kind) {
        case AttackKind::Loyal:
        case AttackKind::Stale:
            break;
        case AttackKind::NegGrad:
            for (auto& x : out) x *= -behavior.k_atk;
            break;
        case AttackKind::RandDisturb: {
            double sigma = behavior.scale * std::sqrt(squared_norm(g));
            if (behavior.noise_norm == NoiseNorm::Initial && state != nullptr) {
                if (!state->anchored_sigma) state->anchored_sigma = sigma;
                sigma = *state->anchored_sigma;
            }
            std::normal_distribution<double> noise(0.0, 1.0);
            for (auto& x : out) x += sigma * noise(rng);
            break;
        }
        case AttackKind::BitFlip: {
            std::uniform_real_distribution<double> coin(0.0, 1.0);
            std::uniform_int_distribution<int> exponent(-8, 8);
            for (auto& x : out) {
                if (coin(rng) < behavior.flip_prob) x = -std::ldexp(x, exponent(rng));
            }
            break;
        }
    }
    return out;
}

Classification classify_iteration(const GradientMessage& msg, std::uint64_t arrival_iteration,
                                  std::uint64_t tau_max) {
    if (msg.attacked) return Classification::Byzantine;
    auto const tau = arrival_iteration >= msg.base_version ? arrival_iteration - msg.base_version : 0;
    return tau <= tau_max ? Classification::Loyal : Classification::Byzantine;
}

// -------------------------------------------------------------------------- //

Worker::Worker(std::size_t id, std::vector<std::size_t> shard, WorkerBehavior behavior, std::uint64_t seed,
               std::size_t batch)
    : id_(id),
      shard_(std::move(shard)),
      behavior_(std::move(behavior)),
      batch_(batch),
      sample_rng_(make_rng(seed, kSampleStream, id)),
      attack_rng_(make_rng(seed, kAttackStream, id)) {
    if (shard_.empty()) throw ConfigError({"worker " + std::to_string(id) + " has an empty shard"});
    behavior_.validate();
}

Worker::Output Worker::compute(const Objective& objective, std::span<const double> w, std::uint64_t version) {
    Output out;
    out.g = compute_loyal_gradient(objective, w, shard_, sample_rng_, batch_);
    if (behavior_.is_loyal() || !behavior_.schedule.active(version, attack_rng_)) return out;
    out.attacked = true;
    out.copies = behavior_.flood;
    if (behavior_.kind == AttackKind::Stale) {
        // The gradient itself is honest; only its delay decides the classification.
        out.attacked = false;
        out.extra_delay = behavior_.stale_delay;
        if (behavior_.stale_jitter > 0.0) {
            std::normal_distribution<double> normal;
            double z = normal(attack_rng_);
            while (z < 0.0) z = normal(attack_rng_);
            out.extra_delay += behavior_.stale_jitter * z;
        }
        return out;
    }
    out.g = apply_attack(behavior_, out.g, attack_rng_, &attack_state_);
    return out;
}

}  // namespace basgd
