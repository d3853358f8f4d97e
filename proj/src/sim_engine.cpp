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

#include "basgd/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace basgd {

namespace {

constexpr std::uint64_t kDelayStream = 0xde1a;
constexpr std::uint64_t kNetworkStream = 0x4e70;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

double sample_worker_delay(Rng& rng) {
    std::normal_distribution<double> normal;
    double x = normal(rng);
    while (x < 0.0) x = normal(rng);
    return x;
}

void DelayModel::validate() const {
    std::vector<std::string> problems;
    if (!(std::isfinite(base_compute) && base_compute > 0.0)) problems.emplace_back("delay.base_compute must be > 0");
    if (!(std::isfinite(spread) && spread >= 0.0)) problems.emplace_back("delay.spread must be >= 0");
    if (!(std::isfinite(network_mean) && network_mean >= 0.0)) problems.emplace_back("delay.network must be >= 0");
    if (!problems.empty()) throw ConfigError(std::move(problems));
}

void EventQueue::push(double time, decltype(Event::payload) payload) {
    heap_.push(Event{time, next_seq_++, std::move(payload)});
}

Event EventQueue::pop() {
    // priority_queue::top is const; the copy is cheap relative to event handling.
    Event ev = heap_.top();
    heap_.pop();
    return ev;
}

void validate_setup(const SimulationSetup& setup) {
    std::vector<std::string> problems;
    if (!setup.objective) {
        throw ConfigError({"simulation: no objective"});
    }
    auto const m = setup.partition.size();
    if (m == 0) problems.emplace_back("simulation: at least one worker required");
    if (setup.behaviors.size() != m) problems.emplace_back("simulation: one behaviour per worker required");
    if (setup.server.num_buffers == 0 || setup.server.num_buffers > m)
        problems.emplace_back("buffer count must satisfy 0 < B <= m");
    if (setup.server.initial.size() != setup.objective->dimension())
        problems.emplace_back("simulation: initial parameters do not match the task dimension");
    if (setup.batch == 0) problems.emplace_back("simulation: batch size must be >= 1");
    if (setup.stop.max_steps == 0 && !std::isfinite(setup.stop.max_time))
        problems.emplace_back("simulation: need a step budget or a finite time budget");
    if (!(setup.stop.starvation_window > 0.0)) problems.emplace_back("simulation: starvation window must be > 0");
    try {
        validate_partition(setup.partition, setup.objective->size());
    } catch (ConfigError const& e) {
        problems.insert(problems.end(), e.violations().begin(), e.violations().end());
    }
    try {
        setup.delay.validate();
    } catch (ConfigError const& e) {
        problems.insert(problems.end(), e.violations().begin(), e.violations().end());
    }
    for (std::size_t k = 0; k < setup.behaviors.size(); ++k) {
        try {
            setup.behaviors[k].validate();
        } catch (InvalidParameter const& e) {
            problems.push_back("worker " + std::to_string(k) + ": " + e.what());
        }
    }
    if (!problems.empty()) throw ConfigError(std::move(problems));
}

namespace {

struct PendingContribution {
    std::size_t sender;
    std::uint64_t tau;
    Classification classification;
};

class Simulation {
public:
    explicit Simulation(const SimulationSetup& setup)
        : setup_(setup),
          objective_(*setup.objective),
          server_(setup.server),
          network_rng_(make_rng(setup.seed, kNetworkStream)) {
        auto delay_rng = make_rng(setup.seed, kDelayStream);
        auto const m = setup.partition.size();
        workers_.reserve(m);
        for (std::size_t k = 0; k < m; ++k) {
            workers_.emplace_back(k, setup.partition.shards[k], setup.behaviors[k], setup.seed, setup.batch);
            result_.k_del.push_back(sample_worker_delay(delay_rng));
        }
        outstanding_.assign(m, 0);
        latest_.assign(m, {});
        server_.set_step_sink([this](StepEvent const& ev) { last_step_ = ev; });
    }

    RunResult run() {
        auto const& w0 = server_.weights();
        result_.initial_loss = objective_.full_loss(w0);
        result_.initial_grad_norm_sq = squared_norm(objective_.full_gradient(w0));
        if (setup_.record_trajectory) result_.trajectory.push_back(w0);

        for (std::size_t k = 0; k < workers_.size(); ++k) {
            outstanding_[k] = 1;
            queue_.push(0.0, WorkerReceive{k, w0, 0});
        }

        while (!stopped_) {
            if (queue_.empty()) {
                starve("event queue exhausted before the stop criterion");
                break;
            }
            auto const next_time = queue_.top().time;
            if (next_time > setup_.stop.max_time) {
                stop_reason_ = "time budget";
                stopped_ = true;
                break;
            }
            if (next_time - last_step_time_ > setup_.stop.starvation_window) {
                starve("no SGD step within the starvation window");
                break;
            }
            auto ev = queue_.pop();
            now_ = ev.time;
            std::visit(Overloaded{[&](WorkerReceive& e) { on_receive(e); },
                                  [&](WorkerSend& e) { on_send(e); },
                                  [&](ServerDeliver& e) { on_deliver(e); }},
                       ev.payload);
        }
        drain();
        finish();
        return std::move(result_);
    }

private:
    double compute_time(std::size_t worker) const {
        return setup_.delay.base_compute * (1.0 + setup_.delay.spread * result_.k_del[worker]);
    }

    double latency() {
        if (setup_.delay.network_mean <= 0.0) return 0.0;
        return std::exponential_distribution<double>(1.0 / setup_.delay.network_mean)(network_rng_);
    }

    void on_receive(WorkerReceive& e) {
        auto& latest = latest_[e.worker];
        if (!latest || e.version >= latest->second) latest = std::make_pair(std::move(e.w), e.version);
        if (--outstanding_[e.worker] > 0) return;

        auto const& [w, version] = *latest;
        auto out = workers_[e.worker].compute(objective_, w, version);
        if (!out.attacked) note_honest_gradient(out.g);
        GradientMessage msg;
        msg.sender = e.worker;
        msg.g = std::move(out.g);
        msg.base_version = version;
        msg.attacked = out.attacked;
        queue_.push(now_ + compute_time(e.worker) + out.extra_delay, WorkerSend{e.worker, std::move(msg), out.copies});
    }

    void on_send(WorkerSend& e) {
        outstanding_[e.worker] = e.copies;
        for (std::size_t c = 0; c < e.copies; ++c) {
            GradientMessage msg = e.msg;
            msg.send_time = now_;
            msg.arrive_time = now_ + latency();
            ++result_.sends;
            queue_.push(msg.arrive_time, ServerDeliver{std::move(msg)});
        }
    }

    void on_deliver(ServerDeliver& e) {
        auto const& msg = e.msg;
        auto const t = server_.iteration();
        auto const tau = t - msg.base_version;
        auto const cls = classify_iteration(msg, t, setup_.tau_max);
        ++result_.delivered;
        ++result_.applied;
        result_.deliveries.push_back({msg.sender, msg.base_version, t, tau, now_, msg.attacked, cls, true});
        pending_.push_back({msg.sender, tau, cls});
        if (setup_.record_messages) result_.messages.push_back(msg);

        auto reply = server_.on_gradient(msg);
        if (reply.stepped) record_step();
        auto const sender = msg.sender;
        queue_.push(now_ + latency(), WorkerReceive{sender, std::move(reply.w), reply.version});

        if (server_.iteration() >= setup_.stop.max_steps && setup_.stop.max_steps > 0) {
            stop_reason_ = "step budget";
            stopped_ = true;
        }
    }

    void record_step() {
        last_step_time_ = now_;
        MetricsRecord rec;
        rec.step = server_.iteration();
        rec.time = now_;
        rec.eta = last_step_.eta;
        rec.aggregate_norm_sq = last_step_.aggregate_norm * last_step_.aggregate_norm;
        auto const& w = server_.weights();
        if (setup_.compute_metrics) {
            rec.loss = objective_.full_loss(w);
            rec.grad_norm_sq = squared_norm(objective_.full_gradient(w));
            if (auto acc = objective_.holdout_accuracy(w)) rec.accuracy = *acc;
        } else {
            rec.loss = std::numeric_limits<double>::quiet_NaN();
            rec.grad_norm_sq = std::numeric_limits<double>::quiet_NaN();
        }
        rec.messages = pending_.size();
        std::set<std::size_t> byzantine;
        double tau_sum = 0.0;
        for (auto const& p : pending_) {
            tau_sum += static_cast<double>(p.tau);
            rec.tau_max = std::max(rec.tau_max, p.tau);
            if (p.classification == Classification::Byzantine) {
                ++rec.byzantine_messages;
                byzantine.insert(p.sender);
            }
        }
        rec.byzantine_senders = byzantine.size();
        rec.tau_mean = pending_.empty() ? 0.0 : tau_sum / static_cast<double>(pending_.size());
        pending_.clear();
        result_.steps.push_back(rec);
        if (setup_.record_trajectory) result_.trajectory.push_back(w);
    }

    void note_honest_gradient(Vector const& g) {
        auto const sq = squared_norm(g);
        result_.empirical_d_max = std::max(result_.empirical_d_max, std::sqrt(sq));
        honest_sq_sum_ += sq;
        ++honest_count_;
    }

    void starve(std::string const& why) {
        result_.status = RunStatus::Starved;
        std::ostringstream os;
        os << why << " at simulated time " << now_ << " (last step at " << last_step_time_ << ", t="
           << server_.iteration() << "); buffer counts:";
        for (std::size_t b = 0; b < server_.bank().size(); ++b) os << " " << server_.bank().slot(b).count;
        result_.diagnostic = os.str();
        stopped_ = true;
    }

    // After the stop, gradients already in flight still reach the server
    // (and are counted) but are no longer applied.
    void drain() {
        while (!queue_.empty()) {
            auto ev = queue_.pop();
            if (auto* d = std::get_if<ServerDeliver>(&ev.payload)) {
                auto const t = server_.iteration();
                auto const& msg = d->msg;
                ++result_.delivered;
                result_.deliveries.push_back({msg.sender, msg.base_version, t, t - msg.base_version, ev.time,
                                              msg.attacked, classify_iteration(msg, t, setup_.tau_max), false});
            }
        }
    }

    void finish() {
        result_.final_w = server_.weights();
        result_.end_time = now_;
        result_.empirical_d_rms = honest_count_ ? std::sqrt(honest_sq_sum_ / static_cast<double>(honest_count_)) : 0.0;
        if (result_.status == RunStatus::Completed && result_.diagnostic.empty())
            result_.diagnostic = "stopped on " + (stop_reason_.empty() ? std::string("step budget") : stop_reason_);
    }

    const SimulationSetup& setup_;
    const Objective& objective_;
    Server server_;
    std::vector<Worker> workers_;
    std::vector<std::size_t> outstanding_;
    std::vector<std::optional<std::pair<Vector, std::uint64_t>>> latest_;
    Rng network_rng_;
    EventQueue queue_;
    RunResult result_;
    StepEvent last_step_;
    std::vector<PendingContribution> pending_;
    double now_ = 0.0;
    double last_step_time_ = 0.0;
    bool stopped_ = false;
    std::string stop_reason_;
    double honest_sq_sum_ = 0.0;
    std::uint64_t honest_count_ = 0;
};

}  // namespace

RunResult run_simulation(const SimulationSetup& setup) {
    validate_setup(setup);
    Simulation sim(setup);
    return sim.run();
}

TauHistogram tau_histogram(std::span<const DeliveryRecord> deliveries, std::uint64_t tau_max) {
    TauHistogram h;
    double sum = 0.0;
    std::size_t exceed = 0;
    for (auto const& d : deliveries) {
        if (!d.applied) continue;
        ++h.counts[d.tau];
        h.max = std::max(h.max, d.tau);
        sum += static_cast<double>(d.tau);
        if (d.tau > tau_max) ++exceed;
        ++h.total;
    }
    if (h.total > 0) {
        h.mean = sum / static_cast<double>(h.total);
        h.exceed_fraction = static_cast<double>(exceed) / static_cast<double>(h.total);
    }
    return h;
}

}  // namespace basgd
