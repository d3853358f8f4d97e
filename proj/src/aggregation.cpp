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

#include "basgd/aggregation.hpp"

#include <algorithm>
#include <sstream>

namespace basgd {

std::size_t validate_candidates(std::span<const Vector> candidates) {
    if (candidates.empty()) throw InvalidInput("aggregation: empty candidate set");
    auto const d = candidates.front().size();
    if (d == 0) throw InvalidInput("aggregation: candidates must have dimension >= 1");
    for (auto const& h : candidates)
        if (h.size() != d) throw InvalidInput("aggregation: candidates differ in dimension");
    return d;
}

Vector mean_aggregate(std::span<const Vector> candidates) {
    auto const d = validate_candidates(candidates);
    Vector out(d, 0.0);
    for (auto const& h : candidates)
        for (std::size_t j = 0; j < d; ++j) out[j] += h[j];
    auto const count = static_cast<double>(candidates.size());
    for (auto& x : out) x /= count;
    return out;
}

Vector median_aggregate(std::span<const Vector> candidates) {
    auto const d = validate_candidates(candidates);
    auto const n = candidates.size();
    auto const upper = n / 2;
    Vector out(d);
    Vector column(n);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t b = 0; b < n; ++b) column[b] = candidates[b][j];
        std::nth_element(column.begin(), column.begin() + upper, column.end(), robust_less);
        auto const hi = column[upper];
        if (n % 2 == 1) {
            out[j] = hi;
        } else {
            auto const lo = *std::max_element(column.begin(), column.begin() + upper, robust_less);
            out[j] = 0.5 * (lo + hi);
        }
    }
    return out;
}

Vector trimmed_mean_aggregate(std::span<const Vector> candidates, std::size_t q) {
    auto const d = validate_candidates(candidates);
    auto const n = candidates.size();
    if (2 * q >= n) throw InvalidParameter("trimmed mean: q < B/2 required");
    if (q == 0) return mean_aggregate(candidates);
    auto const kept = static_cast<double>(n - 2 * q);
    Vector out(d);
    Vector column(n);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t b = 0; b < n; ++b) column[b] = candidates[b][j];
        std::sort(column.begin(), column.end(), robust_less);
        double sum = 0.0;
        for (std::size_t b = q; b < n - q; ++b) sum += column[b];
        out[j] = sum / kept;
    }
    return out;
}

// -------------------------------------------------------------------------- //

AggregationRule AggregationRule::parse(const std::string& name, std::size_t q) {
    if (name == "mean") return mean();
    if (name == "median") return median();
    if (name == "trmean") return trimmed_mean(q);
    if (name.starts_with("trmean(") && name.ends_with(")")) {
        auto const inner = name.substr(7, name.size() - 8);
        std::size_t used = 0;
        unsigned long value = 0;
        try {
            value = std::stoul(inner, &used);
        } catch (std::exception const&) {
            used = 0;
        }
        if (used != inner.size() || inner.empty())
            throw InvalidParameter("aggregation rule: bad trim order in '" + name + "'");
        return trimmed_mean(value);
    }
    throw InvalidParameter("aggregation rule: unknown rule '" + name + "' (expected mean, median or trmean)");
}

Vector AggregationRule::operator()(std::span<const Vector> candidates) const {
    switch (kind_) {
        case RuleKind::Mean: return mean_aggregate(candidates);
        case RuleKind::Median: return median_aggregate(candidates);
        case RuleKind::TrimmedMean: return trimmed_mean_aggregate(candidates, q_);
    }
    throw std::logic_error("unreachable aggregation kind");
}

std::string AggregationRule::name() const {
    switch (kind_) {
        case RuleKind::Mean: return "mean";
        case RuleKind::Median: return "median";
        case RuleKind::TrimmedMean: return "trmean(" + std::to_string(q_) + ")";
    }
    return "?";
}

std::size_t AggregationRule::robustness_order(std::size_t num_candidates) const {
    switch (kind_) {
        case RuleKind::Mean: return 0;
        case RuleKind::Median: return num_candidates == 0 ? 0 : (num_candidates - 1) / 2;
        case RuleKind::TrimmedMean: return q_;
    }
    return 0;
}

// -------------------------------------------------------------------------- //

std::string QbrViolation::describe() const {
    std::ostringstream os;
    os.precision(17);
    if (property == Property::ShiftEquivariance) {
        os << "property (a) shift-equivariance: coordinate " << coordinate << " residual " << value;
    } else {
        os << "property (b) bracketing: coordinate " << coordinate << " aggregate " << value
           << " outside [" << lower << ", " << upper << "] of subset {";
        for (std::size_t i = 0; i < subset.size(); ++i) os << (i ? "," : "") << subset[i];
        os << "}";
    }
    return os.str();
}

bool QbrReport::has_violation(QbrViolation::Property p) const {
    return std::any_of(violations.begin(), violations.end(),
                       [p](QbrViolation const& v) { return v.property == p; });
}

std::pair<double, double> bracket_bounds(std::span<const double> values, std::size_t q) {
    if (2 * q >= values.size()) throw InvalidParameter("bracket_bounds: q < B/2 required");
    Vector sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end(), robust_less);
    return {sorted[q], sorted[sorted.size() - 1 - q]};
}

namespace {

void check_shift_equivariance(const Aggregator& aggr, std::span<const Vector> candidates,
                              Vector const& base, const QbrCheckOptions& options, QbrReport& report) {
    auto const d = base.size();
    auto rng = make_rng(options.seed, 0x5417);
    std::normal_distribution<double> normal(0.0, options.shift_scale);
    std::vector<Vector> shifted(candidates.begin(), candidates.end());
    Vector shift(d);
    std::vector<bool> flagged(d, false);
    for (std::size_t s = 0; s < options.shift_samples; ++s) {
        for (auto& c : shift) c = normal(rng);
        for (std::size_t b = 0; b < candidates.size(); ++b)
            for (std::size_t j = 0; j < d; ++j) shifted[b][j] = candidates[b][j] + shift[j];
        auto const moved = aggr(shifted);
        for (std::size_t j = 0; j < d; ++j) {
            auto const expected = base[j] + shift[j];
            auto const residual = std::abs(moved[j] - expected);
            report.max_shift_residual = std::max(report.max_shift_residual, residual);
            auto const tolerance = options.shift_tolerance * std::max(1.0, std::abs(expected));
            if (!(residual <= tolerance) && !flagged[j]) {
                flagged[j] = true;
                report.violations.push_back({QbrViolation::Property::ShiftEquivariance, j, {}, residual,
                                             -tolerance, tolerance});
            }
        }
    }
}

void check_bracketing(std::span<const Vector> candidates, Vector const& aggregate, std::size_t q,
                      QbrReport& report) {
    auto const n = candidates.size();
    auto const d = aggregate.size();
    auto const size = n - q;
    // Selection mask enumerates every size-(B-q) subset in lexicographic order.
    std::vector<char> mask(n, 0);
    std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(size), 1);
    std::vector<bool> flagged(d, false);
    std::vector<std::size_t> members;
    do {
        ++report.subsets_checked;
        members.clear();
        for (std::size_t b = 0; b < n; ++b)
            if (mask[b]) members.push_back(b);
        for (std::size_t j = 0; j < d; ++j) {
            if (flagged[j]) continue;
            double lo = candidates[members.front()][j];
            double hi = lo;
            for (auto b : members) {
                auto const x = candidates[b][j];
                if (robust_less(x, lo)) lo = x;
                if (robust_less(hi, x)) hi = x;
            }
            auto const g = aggregate[j];
            bool const inside = !robust_less(g, lo) && !robust_less(hi, g);
            if (!inside) {
                flagged[j] = true;
                report.violations.push_back({QbrViolation::Property::Bracketing, j, members, g, lo, hi});
            }
        }
    } while (std::prev_permutation(mask.begin(), mask.end()));
}

}  // namespace

QbrReport check_qbr(const Aggregator& aggr, std::span<const Vector> candidates, std::size_t q,
                    const QbrCheckOptions& options) {
    validate_candidates(candidates);
    if (q == 0 || 2 * q >= candidates.size())
        throw InvalidParameter("check_qbr: 0 < q < B/2 required");
    QbrReport report;
    auto const base = aggr(candidates);
    check_shift_equivariance(aggr, candidates, base, options, report);
    check_bracketing(candidates, base, q, report);
    report.robust = report.violations.empty();
    return report;
}

}  // namespace basgd
