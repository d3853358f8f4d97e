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
 * Desk-scale finite-sum objectives F(w) = (1/n) sum_i f(w; z_i):
 *
 *   quadratic  f(w; z) = 1/2 |w - z|^2, L = 1, minimiser mean(z_i);
 *   logistic   f(w; (x, y)) = log(1 + exp(-y x.w)) + l2/2 |w|^2, y in {-1, +1}.
 *
 * Objectives are immutable once built.
**/

#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "basgd/common.hpp"

namespace basgd {

class Objective {
public:
    enum class Kind { Quadratic, Logistic };

    /// Quadratic objective over the given targets (all of one dimension).
    static Objective quadratic(std::vector<Vector> targets);
    /// Logistic objective; labels must be +1 or -1. The holdout may be empty.
    static Objective logistic(std::vector<Vector> features, std::vector<double> labels, double l2,
                              std::vector<Vector> holdout_features = {}, std::vector<double> holdout_labels = {});

    Kind kind() const noexcept { return kind_; }
    std::size_t size() const noexcept { return rows_.size(); }
    std::size_t dimension() const noexcept { return dimension_; }
    double l2() const noexcept { return l2_; }

    std::span<const double> row(std::size_t i) const { return rows_.at(i); }
    double label(std::size_t i) const { return labels_.at(i); }
    std::size_t holdout_size() const noexcept { return holdout_rows_.size(); }
    std::span<const double> holdout_row(std::size_t i) const { return holdout_rows_.at(i); }
    double holdout_label(std::size_t i) const { return holdout_labels_.at(i); }

    double instance_loss(std::span<const double> w, std::size_t i) const;
    /// Writes grad f(w; z_i) into `out` (size d).
    void instance_gradient(std::span<const double> w, std::size_t i, std::span<double> out) const;
    Vector instance_gradient(std::span<const double> w, std::size_t i) const;

    double full_loss(std::span<const double> w) const;
    Vector full_gradient(std::span<const double> w) const;

    /// L for the quadratic (exactly 1); the bound max|x|^2/4 + l2 for logistic.
    double smoothness() const;
    /// Closed-form minimiser (quadratic only).
    std::optional<Vector> minimizer() const;
    /// 0/1 accuracy on the holdout set (logistic with a non-empty holdout only).
    std::optional<double> holdout_accuracy(std::span<const double> w) const;

private:
    Objective() = default;

    Kind kind_ = Kind::Quadratic;
    std::size_t dimension_ = 0;
    double l2_ = 0.0;
    std::vector<Vector> rows_;
    std::vector<double> labels_;
    std::vector<Vector> holdout_rows_;
    std::vector<double> holdout_labels_;
};

/// Quadratic task with targets drawn i.i.d. from a standard normal.
Objective make_quadratic(std::size_t n, std::size_t d, std::uint64_t seed);

/**
 * Logistic task: features ~ N(0, I), a hidden direction of norm `separation`,
 * labels drawn from the logistic model on that direction. A holdout of
 * max(1, n/4) instances from the same generator is attached.
**/
Objective make_logistic(std::size_t n, std::size_t d, double separation, double l2, std::uint64_t seed);

// -------------------------------------------------------------------------- //
// Data partitioning

struct Partition {
    std::vector<std::vector<std::size_t>> shards;

    std::size_t size() const noexcept { return shards.size(); }
};

/// Random permutation of {0..n-1} cut into m shards whose sizes differ by at most 1.
Partition partition_uniform(std::size_t n, std::size_t m, std::uint64_t seed);

/**
 * Heterogeneous split for exploratory runs. Each instance gets the sort key
 * h * rank(feature) / n + (1 - h) * U(0, 1), where the feature is the first
 * coordinate of the target (quadratic) or the label (logistic); shards are
 * contiguous runs of the sorted order. heterogeneity = 0 is partition_uniform.
**/
Partition partition_skewed(const Objective& objective, std::size_t m, double heterogeneity, std::uint64_t seed);

/// Throws ConfigError unless the shards are non-empty, disjoint and cover {0..n-1}.
void validate_partition(const Partition& partition, std::size_t n);

// -------------------------------------------------------------------------- //
// CSV dump/load (one instance per row)
//
// quadratic:  header "z0,z1,...", rows of targets
// logistic:   header "split,y,x0,x1,...", split is "train" or "holdout"

void write_dataset_csv(const Objective& objective, std::ostream& out);
Objective read_dataset_csv(std::istream& in, double l2 = 0.0);

}  // namespace basgd
