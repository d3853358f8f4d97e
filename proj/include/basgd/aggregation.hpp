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
 * Candidate-gradient aggregation rules and the q-Byzantine-robustness checker.
 *
 * All aggregators are coordinate-wise over B candidates of dimension d:
 *   - mean:    O(Bd), not robust to a single outlier when B > 1;
 *   - median:  O(Bd) expected (selection), robust of order floor((B-1)/2);
 *   - trmean:  O(Bd log B) here (sort per coordinate), robust of order q.
 *
 * Non-finite inputs are accepted. Order statistics use the total order
 * -inf < finite < +inf < NaN, so a robust rule whose order is at least the
 * number of poisoned candidates still returns finite output.
**/

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "basgd/common.hpp"

namespace basgd {

/// Checks that the candidate set is non-empty and rectangular; returns d.
std::size_t validate_candidates(std::span<const Vector> candidates);

/// Strict weak order placing -inf < finite < +inf < NaN.
inline bool robust_less(double a, double b) {
    if (std::isnan(a)) return false;
    if (std::isnan(b)) return true;
    return a < b;
}

Vector mean_aggregate(std::span<const Vector> candidates);

/// Coordinate-wise median; even B averages the two middle order statistics.
Vector median_aggregate(std::span<const Vector> candidates);

/// Coordinate-wise q-trimmed mean. q = 0 degenerates to the (non-robust) mean.
Vector trimmed_mean_aggregate(std::span<const Vector> candidates, std::size_t q);

enum class RuleKind { Mean, Median, TrimmedMean };

/// Value type naming one aggregation rule (and its trim order for trmean).
class AggregationRule {
public:
    static AggregationRule mean() { return AggregationRule(RuleKind::Mean, 0); }
    static AggregationRule median() { return AggregationRule(RuleKind::Median, 0); }
    static AggregationRule trimmed_mean(std::size_t q) { return AggregationRule(RuleKind::TrimmedMean, q); }

    /// Parses "mean", "median", "trmean" (with trim order q) or "trmean(q)".
    static AggregationRule parse(const std::string& name, std::size_t q = 0);

    Vector operator()(std::span<const Vector> candidates) const;

    RuleKind kind() const noexcept { return kind_; }
    std::size_t trim() const noexcept { return q_; }
    std::string name() const;

    /// Largest q for which the rule is q-BR over B candidates (0: not robust).
    std::size_t robustness_order(std::size_t num_candidates) const;

    friend bool operator==(const AggregationRule&, const AggregationRule&) = default;

private:
    AggregationRule(RuleKind kind, std::size_t q) : kind_(kind), q_(q) {}

    RuleKind kind_;
    std::size_t q_;
};

using Aggregator = std::function<Vector(std::span<const Vector>)>;

// -------------------------------------------------------------------------- //
// q-Byzantine-robustness checker

struct QbrViolation {
    enum class Property { ShiftEquivariance, Bracketing };

    Property property;
    std::size_t coordinate;
    /// Bracketing: the size-(B-q) subset whose [min, max] excludes the aggregate.
    std::vector<std::size_t> subset;
    double value;
    double lower;
    double upper;

    std::string describe() const;
};

struct QbrReport {
    bool robust = true;
    std::vector<QbrViolation> violations;
    /// Max |Aggr(h + c) - (Aggr(h) + c)| over sampled shifts and coordinates.
    double max_shift_residual = 0.0;
    std::size_t subsets_checked = 0;

    bool has_violation(QbrViolation::Property p) const;
};

struct QbrCheckOptions {
    std::size_t shift_samples = 32;
    std::uint64_t seed = 0;
    /// Shift residual tolerance, scaled by max(1, |expected|).
    double shift_tolerance = 1e-9;
    double shift_scale = 1.0;
};

/**
 * Checks both q-BR properties of `aggr` on one candidate set.
 *
 * Property (a) is sampled over `shift_samples` random shift vectors.
 * Property (b) is exhaustive: for every coordinate and every subset of
 * size B - q the aggregate must lie within the subset's [min, max]. At most
 * one bracketing violation is reported per coordinate.
 *
 * Requires 0 < q < B/2.
**/
QbrReport check_qbr(const Aggregator& aggr, std::span<const Vector> candidates, std::size_t q,
                    const QbrCheckOptions& options = {});

/// Order-statistic form of property (b): [(q+1)-th smallest, (q+1)-th largest].
std::pair<double, double> bracket_bounds(std::span<const double> values, std::size_t q);

}  // namespace basgd
