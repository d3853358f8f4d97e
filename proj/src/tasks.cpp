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

#include "basgd/tasks.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace basgd {

namespace {

constexpr std::uint64_t kQuadraticStream = 0x9a1d;
constexpr std::uint64_t kLogisticStream = 0x109c;
constexpr std::uint64_t kPartitionStream = 0x5a4d;

// log(1 + exp(-m)) without overflow.
double softplus_neg(double m) { return m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)); }

// 1 / (1 + exp(m)).
double sigmoid_neg(double m) {
    if (m >= 0.0) {
        auto const e = std::exp(-m);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(m));
}

std::size_t check_rows(std::vector<Vector> const& rows, const char* who) {
    if (rows.empty()) throw InvalidInput(std::string(who) + ": at least one instance required");
    auto const d = rows.front().size();
    if (d == 0) throw InvalidInput(std::string(who) + ": dimension must be positive");
    for (auto const& r : rows) {
        if (r.size() != d) throw InvalidInput(std::string(who) + ": ragged instance matrix");
        if (!all_finite(r)) throw InvalidInput(std::string(who) + ": non-finite data");
    }
    return d;
}

void check_labels(std::vector<double> const& labels, std::size_t n, const char* who) {
    if (labels.size() != n) throw InvalidInput(std::string(who) + ": label count mismatch");
    for (double y : labels)
        if (y != 1.0 && y != -1.0) throw InvalidInput(std::string(who) + ": labels must be +1 or -1");
}

}  // namespace

Objective Objective::quadratic(std::vector<Vector> targets) {
    Objective obj;
    obj.kind_ = Kind::Quadratic;
    obj.dimension_ = check_rows(targets, "quadratic objective");
    obj.rows_ = std::move(targets);
    return obj;
}

Objective Objective::logistic(std::vector<Vector> features, std::vector<double> labels, double l2,
                              std::vector<Vector> holdout_features, std::vector<double> holdout_labels) {
    if (!(l2 >= 0.0) || !std::isfinite(l2)) throw InvalidInput("logistic objective: l2 must be finite and >= 0");
    Objective obj;
    obj.kind_ = Kind::Logistic;
    obj.dimension_ = check_rows(features, "logistic objective");
    check_labels(labels, features.size(), "logistic objective");
    if (!holdout_features.empty()) {
        if (check_rows(holdout_features, "logistic holdout") != obj.dimension_)
            throw InvalidInput("logistic holdout: dimension mismatch");
    }
    check_labels(holdout_labels, holdout_features.size(), "logistic holdout");
    obj.l2_ = l2;
    obj.rows_ = std::move(features);
    obj.labels_ = std::move(labels);
    obj.holdout_rows_ = std::move(holdout_features);
    obj.holdout_labels_ = std::move(holdout_labels);
    return obj;
}

double Objective::instance_loss(std::span<const double> w, std::size_t i) const {
    auto const& z = rows_.at(i);
    if (kind_ == Kind::Quadratic) {
        double s = 0.0;
        for (std::size_t j = 0; j < dimension_; ++j) {
            auto const diff = w[j] - z[j];
            s += diff * diff;
        }
        return 0.5 * s;
    }
    auto const margin = labels_[i] * dot(z, w);
    return softplus_neg(margin) + 0.5 * l2_ * squared_norm(w);
}

void Objective::instance_gradient(std::span<const double> w, std::size_t i, std::span<double> out) const {
    auto const& z = rows_.at(i);
    if (kind_ == Kind::Quadratic) {
        for (std::size_t j = 0; j < dimension_; ++j) out[j] = w[j] - z[j];
        return;
    }
    auto const y = labels_[i];
    auto const coeff = -y * sigmoid_neg(y * dot(z, w));
    for (std::size_t j = 0; j < dimension_; ++j) out[j] = coeff * z[j] + l2_ * w[j];
}

Vector Objective::instance_gradient(std::span<const double> w, std::size_t i) const {
    Vector g(dimension_);
    instance_gradient(w, i, g);
    return g;
}

double Objective::full_loss(std::span<const double> w) const {
    double s = 0.0;
    for (std::size_t i = 0; i < rows_.size(); ++i) s += instance_loss(w, i);
    return s / static_cast<double>(rows_.size());
}

Vector Objective::full_gradient(std::span<const double> w) const {
    Vector total(dimension_, 0.0);
    Vector g(dimension_);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        instance_gradient(w, i, g);
        for (std::size_t j = 0; j < dimension_; ++j) total[j] += g[j];
    }
    for (auto& x : total) x /= static_cast<double>(rows_.size());
    return total;
}

double Objective::smoothness() const {
    if (kind_ == Kind::Quadratic) return 1.0;
    double max_sq = 0.0;
    for (auto const& x : rows_) max_sq = std::max(max_sq, squared_norm(x));
    return 0.25 * max_sq + l2_;
}

std::optional<Vector> Objective::minimizer() const {
    if (kind_ != Kind::Quadratic) return std::nullopt;
    Vector mean(dimension_, 0.0);
    for (auto const& z : rows_)
        for (std::size_t j = 0; j < dimension_; ++j) mean[j] += z[j];
    for (auto& x : mean) x /= static_cast<double>(rows_.size());
    return mean;
}

std::optional<double> Objective::holdout_accuracy(std::span<const double> w) const {
    if (kind_ != Kind::Logistic || holdout_rows_.empty()) return std::nullopt;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < holdout_rows_.size(); ++i) {
        auto const predicted = dot(holdout_rows_[i], w) >= 0.0 ? 1.0 : -1.0;
        if (predicted == holdout_labels_[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(holdout_rows_.size());
}

// -------------------------------------------------------------------------- //

Objective make_quadratic(std::size_t n, std::size_t d, std::uint64_t seed) {
    if (n == 0 || d == 0) throw InvalidParameter("make_quadratic: n, d >= 1 required");
    auto rng = make_rng(seed, kQuadraticStream);
    std::normal_distribution<double> normal;
    std::vector<Vector> targets(n, Vector(d));
    for (auto& z : targets)
        for (auto& x : z) x = normal(rng);
    return Objective::quadratic(std::move(targets));
}

Objective make_logistic(std::size_t n, std::size_t d, double separation, double l2, std::uint64_t seed) {
    if (n < 2 || d == 0) throw InvalidParameter("make_logistic: n >= 2, d >= 1 required");
    if (!(separation >= 0.0) || !std::isfinite(separation))
        throw InvalidParameter("make_logistic: separation must be finite and >= 0");
    auto rng = make_rng(seed, kLogisticStream);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    Vector direction(d);
    for (auto& x : direction) x = normal(rng);
    auto const norm = std::sqrt(squared_norm(direction));
    for (auto& x : direction) x *= separation / norm;

    auto draw = [&](std::size_t count, std::vector<Vector>& xs, std::vector<double>& ys) {
        xs.assign(count, Vector(d));
        ys.assign(count, 0.0);
        for (std::size_t i = 0; i < count; ++i) {
            for (auto& x : xs[i]) x = normal(rng);
            auto const p_positive = sigmoid_neg(-dot(xs[i], direction));
            ys[i] = uniform(rng) < p_positive ? 1.0 : -1.0;
        }
    };
    std::vector<Vector> xs, holdout_xs;
    std::vector<double> ys, holdout_ys;
    draw(n, xs, ys);
    draw(std::max<std::size_t>(1, n / 4), holdout_xs, holdout_ys);
    return Objective::logistic(std::move(xs), std::move(ys), l2, std::move(holdout_xs), std::move(holdout_ys));
}

// -------------------------------------------------------------------------- //

namespace {

Partition cut_into_shards(std::vector<std::size_t> const& order, std::size_t m) {
    auto const n = order.size();
    Partition p;
    p.shards.resize(m);
    auto const base = n / m;
    auto const extra = n % m;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < m; ++k) {
        auto const count = base + (k < extra ? 1 : 0);
        p.shards[k].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                           order.begin() + static_cast<std::ptrdiff_t>(pos + count));
        pos += count;
    }
    return p;
}

}  // namespace

Partition partition_uniform(std::size_t n, std::size_t m, std::uint64_t seed) {
    if (m == 0) throw ConfigError({"partition: worker count must be positive"});
    if (n < m)
        throw ConfigError({"partition: n >= m required (n=" + std::to_string(n) + ", m=" + std::to_string(m) + ")"});
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto rng = make_rng(seed, kPartitionStream);
    std::shuffle(order.begin(), order.end(), rng);
    return cut_into_shards(order, m);
}

Partition partition_skewed(const Objective& objective, std::size_t m, double heterogeneity, std::uint64_t seed) {
    if (!(heterogeneity >= 0.0 && heterogeneity <= 1.0))
        throw ConfigError({"partition: heterogeneity must lie in [0, 1]"});
    auto const n = objective.size();
    if (heterogeneity == 0.0) return partition_uniform(n, m, seed);
    if (m == 0 || n < m) throw ConfigError({"partition: n >= m >= 1 required"});

    auto feature = [&](std::size_t i) {
        return objective.kind() == Objective::Kind::Logistic ? objective.label(i) : objective.row(i)[0];
    };
    std::vector<std::size_t> by_feature(n);
    std::iota(by_feature.begin(), by_feature.end(), std::size_t{0});
    std::stable_sort(by_feature.begin(), by_feature.end(),
                     [&](std::size_t a, std::size_t b) { return feature(a) < feature(b); });
    Vector key(n);
    auto rng = make_rng(seed, kPartitionStream, 1);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (std::size_t rank = 0; rank < n; ++rank)
        key[by_feature[rank]] = heterogeneity * static_cast<double>(rank) / static_cast<double>(n) +
                                (1.0 - heterogeneity) * uniform(rng);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
    return cut_into_shards(order, m);
}

void validate_partition(const Partition& partition, std::size_t n) {
    std::vector<std::string> problems;
    std::vector<char> seen(n, 0);
    for (std::size_t k = 0; k < partition.shards.size(); ++k) {
        if (partition.shards[k].empty()) problems.push_back("shard " + std::to_string(k) + " is empty");
        for (auto i : partition.shards[k]) {
            if (i >= n) {
                problems.push_back("shard " + std::to_string(k) + " has out-of-range index " + std::to_string(i));
            } else if (seen[i]++) {
                problems.push_back("index " + std::to_string(i) + " appears in more than one shard");
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!seen[i]) {
            problems.push_back("index " + std::to_string(i) + " is not covered by any shard");
            break;
        }
    if (!problems.empty()) throw ConfigError(std::move(problems));
}

// -------------------------------------------------------------------------- //

void write_dataset_csv(const Objective& objective, std::ostream& out) {
    auto const d = objective.dimension();
    auto const old_precision = out.precision(17);
    if (objective.kind() == Objective::Kind::Quadratic) {
        for (std::size_t j = 0; j < d; ++j) out << (j ? "," : "") << "z" << j;
        out << "\n";
        for (std::size_t i = 0; i < objective.size(); ++i) {
            auto const row = objective.row(i);
            for (std::size_t j = 0; j < d; ++j) out << (j ? "," : "") << row[j];
            out << "\n";
        }
    } else {
        out << "split,y";
        for (std::size_t j = 0; j < d; ++j) out << ",x" << j;
        out << "\n";
        auto emit = [&](const char* split, std::span<const double> row, double y) {
            out << split << "," << y;
            for (double x : row) out << "," << x;
            out << "\n";
        };
        for (std::size_t i = 0; i < objective.size(); ++i) emit("train", objective.row(i), objective.label(i));
        for (std::size_t i = 0; i < objective.holdout_size(); ++i)
            emit("holdout", objective.holdout_row(i), objective.holdout_label(i));
    }
    out.precision(old_precision);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no) {
    try {
        std::size_t used = 0;
        auto const v = std::stod(cell, &used);
        if (used == cell.size()) return v;
    } catch (std::exception const&) {
    }
    throw InvalidInput("dataset csv: line " + std::to_string(line_no) + ": bad number '" + cell + "'");
}

}  // namespace

Objective read_dataset_csv(std::istream& in, double l2) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("dataset csv: missing header");
    auto const header = split_csv(line);
    bool const logistic = !header.empty() && header[0] == "split";
    std::vector<Vector> rows, holdout_rows;
    std::vector<double> labels, holdout_labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto const cells = split_csv(line);
        if (cells.size() != header.size())
            throw InvalidInput("dataset csv: line " + std::to_string(line_no) + " has wrong column count");
        if (!logistic) {
            Vector z;
            for (auto const& c : cells) z.push_back(parse_cell(c, line_no));
            rows.push_back(std::move(z));
            continue;
        }
        Vector x;
        for (std::size_t c = 2; c < cells.size(); ++c) x.push_back(parse_cell(cells[c], line_no));
        auto const y = parse_cell(cells[1], line_no);
        if (cells[0] == "train") {
            rows.push_back(std::move(x));
            labels.push_back(y);
        } else if (cells[0] == "holdout") {
            holdout_rows.push_back(std::move(x));
            holdout_labels.push_back(y);
        } else {
            throw InvalidInput("dataset csv: line " + std::to_string(line_no) + ": unknown split '" + cells[0] + "'");
        }
    }
    if (!logistic) return Objective::quadratic(std::move(rows));
    return Objective::logistic(std::move(rows), std::move(labels), l2, std::move(holdout_rows),
                               std::move(holdout_labels));
}

}  // namespace basgd
