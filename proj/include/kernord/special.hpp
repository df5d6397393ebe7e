#pragma once

#include <cstdint>

namespace kernord::special {

/// Digamma function psi(x) = Gamma'(x) / Gamma(x) for x > 0.
///
/// Shifts the argument upward with psi(x) = psi(x + 1) - 1/x until x >= 8,
/// then sums the Bernoulli asymptotic series. Absolute error is below 1e-12
/// on [1e-3, 1e6]. Throws std::domain_error for x <= 0 or NaN.
double digamma(double x);

/// log Gamma(x) for x > 0. Throws std::domain_error otherwise.
double log_gamma(double x);

/// log of the rising factorial (a)_k = a (a+1) ... (a+k-1), with (a)_0 = 1.
double log_pochhammer(double a, std::int64_t k);

/// log k!, exact cumulative sums for k <= 10^4 and log-gamma beyond.
double log_factorial(std::int64_t k);

/// log of the binomial coefficient C(n, k); -inf outside 0 <= k <= n.
double log_binomial(std::int64_t n, std::int64_t k);

}  // namespace kernord::special
