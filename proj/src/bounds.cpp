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

#include "basgd/bounds.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "basgd/common.hpp"

namespace basgd {

namespace {

// x log x with the 0 log 0 = 0 convention.
double xlogx(double x) { return x == 0.0 ? 0.0 : x * std::log(x); }

double c_constant_log_space(long M, long K) {
    if (K == 1) return static_cast<double>(M);
    auto const m = static_cast<double>(M);
    auto const k = static_cast<double>(K);
    auto const log_value = std::lgamma(m + 1.0) - std::lgamma(k) - std::lgamma(m - k + 1.0) +
                           xlogx(k - 1.0) + xlogx(m - k) - xlogx(m - 1.0);
    return std::exp(log_value);
}

// Prime factorisation exponents of n! and n^n accumulated with a sign.
using Exponents = std::map<long, long>;

void add_factorised(Exponents& e, long n, long multiplicity) {
    for (long p = 2; p * p <= n; ++p) {
        while (n % p == 0) {
            e[p] += multiplicity;
            n /= p;
        }
    }
    if (n > 1) e[n] += multiplicity;
}

void add_factorial(Exponents& e, long n, long sign) {
    for (long i = 2; i <= n; ++i) add_factorised(e, i, sign);
}

void add_power(Exponents& e, long base, long exponent, long sign) {
    if (base <= 1 || exponent == 0) return;
    add_factorised(e, base, sign * exponent);
}

void check_strict_domain(long M, long K, const char* who) {
    if (K <= 0 || 2 * K > M)
        throw InvalidParameter(std::string(who) + ": 0 < K <= M/2 required (M=" + std::to_string(M) +
                               ", K=" + std::to_string(K) + ")");
}

void check_bound_inputs(const BoundInputs& in) {
    if (!std::isfinite(in.D) || !std::isfinite(in.L) || in.D < 0.0 || in.L < 0.0 || in.d == 0)
        throw InvalidParameter("bound inputs: D, L must be finite and non-negative, d >= 1");
}

}  // namespace

double c_constant(long M, long K) {
    check_strict_domain(M, K, "c_constant");
    return c_constant_log_space(M, K);
}

double c_constant_exact(long M, long K) {
    check_strict_domain(M, K, "c_constant_exact");
    if (K == 1) return static_cast<double>(M);
    Exponents e;
    add_factorial(e, M, +1);
    add_power(e, K - 1, K - 1, +1);
    add_power(e, M - K, M - K, +1);
    add_factorial(e, K - 1, -1);
    add_factorial(e, M - K, -1);
    add_power(e, M - 1, M - 1, -1);
    long double numerator = 1.0L;
    long double denominator = 1.0L;
    for (auto const& [p, k] : e) {
        if (k > 0) numerator *= std::pow(static_cast<long double>(p), k);
        if (k < 0) denominator *= std::pow(static_cast<long double>(p), -k);
    }
    return static_cast<double>(numerator / denominator);
}

double c_constant_extended(long M, long K) {
    if (M < 1 || K < 1 || K > M)
        throw InvalidParameter("c_constant_extended: 1 <= K <= M required (M=" + std::to_string(M) +
                               ", K=" + std::to_string(K) + ")");
    return c_constant_log_space(M, K);
}

void validate_robustness_params(long B, long q, long r) {
    if (B < 1 || r < 0 || r > q || 2 * q >= B)
        throw InvalidParameter("0 <= r <= q < B/2 required (B=" + std::to_string(B) + ", q=" +
                               std::to_string(q) + ", r=" + std::to_string(r) + ")");
}

double robust_constant(long B, long q, long r) {
    validate_robustness_params(B, q, r);
    return c_constant_extended(B - r, q - r + 1);
}

double c_upper_bound(long B, long q, long r) {
    validate_robustness_params(B, q, r);
    if (r == q) return static_cast<double>(B - q);
    auto const b = static_cast<double>(B);
    return b * (std::numbers::e / (2.0 * std::numbers::pi)) * std::sqrt(b - 1.0) /
           std::sqrt(static_cast<double>(B - q - 1) * static_cast<double>(q - r));
}

double lemma1_bound(const BoundInputs& in, long B, long q, long r) {
    check_bound_inputs(in);
    auto const c = robust_constant(B, q, r);
    return c * in.D * in.D * static_cast<double>(in.d);
}

double lemma2_bound(const BoundInputs& in, long B, long q, long r) {
    check_bound_inputs(in);
    auto const c = robust_constant(B, q, r);
    auto const d = static_cast<double>(in.d);
    return c * in.D * d * (static_cast<double>(in.tau_max) * in.L * std::sqrt(c * d) + 1.0);
}

}  // namespace basgd
