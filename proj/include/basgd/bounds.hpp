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

// Variance/bias inflation constants for q-BR aggregation and the derived
// second-moment and bias bounds on the aggregated gradient.

#pragma once

#include <cstddef>
#include <cstdint>

namespace basgd {

/**
 * C_{M,K} for 0 < K <= M/2:
 *   M                                                      if K = 1
 *   M! (K-1)^(K-1) (M-K)^(M-K) / ((K-1)! (M-K)! (M-1)^(M-1))  otherwise
 * Evaluated in log space (log-gamma), so large M does not overflow.
**/
double c_constant(long M, long K);

/// Same value via exact prime-exponent arithmetic; cross-check for small M.
double c_constant_exact(long M, long K);

/**
 * C_{M,K} on the wider domain 1 <= K <= M.
 *
 * The bounds below need C_{B-r, q-r+1}, and for odd B - r with q at its
 * maximum the second index exceeds half the first (e.g. B=5, q=2, r=0 gives
 * C_{5,3}). The closed form is still well defined there.
**/
double c_constant_extended(long M, long K);

/// Checks 0 <= r <= q and 2q < B; throws InvalidParameter otherwise.
void validate_robustness_params(long B, long q, long r);

/// C_{B-r, q-r+1}: the constant entering both aggregate bounds.
double robust_constant(long B, long q, long r);

/// Closed-form upper bound on C_{B-r, q-r+1}: B e/(2 pi) sqrt(B-1)/sqrt((B-q-1)(q-r)), or B-q when r = q.
double c_upper_bound(long B, long q, long r);

struct BoundInputs {
    double D = 0.0;   ///< second-moment bound on loyal gradients
    double L = 0.0;   ///< smoothness constant
    std::uint64_t tau_max = 0;
    std::size_t d = 1;
};

/// Bound on E[|G|^2 | w]: C D^2 d.
double lemma1_bound(const BoundInputs& in, long B, long q, long r);

/// Bound on |E[G - grad F(w) | w]|: C D d (tau_max L sqrt(C d) + 1).
double lemma2_bound(const BoundInputs& in, long B, long q, long r);

}  // namespace basgd
