#include "kernord/special.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace kernord::special {

namespace {

constexpr double kAsymptoticThreshold = 8.0;
constexpr std::int64_t kFactorialTableSize = 10000;
constexpr std::int64_t kPochhammerDirectSum = 32;

// B_{2j} / (2j) for j = 1..8.
constexpr std::array<double, 8> kBernoulliOverIndex = {
    1.0 / 12.0,         -1.0 / 120.0,        1.0 / 252.0,       -1.0 / 240.0,
    1.0 / 132.0,        -691.0 / 32760.0,    1.0 / 12.0,        -3617.0 / 8160.0,
};

const std::vector<double>& factorial_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t(kFactorialTableSize + 1, 0.0);
    for (std::int64_t k = 2; k <= kFactorialTableSize; ++k) {
      t[k] = t[k - 1] + std::log(static_cast<double>(k));
    }
    return t;
  }();
  return table;
}

}  // namespace

double digamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("digamma: argument must be positive, got " + std::to_string(x));
  }
  double shift = 0.0;
  while (x < kAsymptoticThreshold) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  // psi(x) ~ log x - 1/(2x) - sum_j B_{2j} / (2j x^{2j})
  const double inv2 = 1.0 / (x * x);
  double series = 0.0;
  for (auto it = kBernoulliOverIndex.rbegin(); it != kBernoulliOverIndex.rend(); ++it) {
    series = (series + *it) * inv2;
  }
  return shift + std::log(x) - 0.5 / x - series;
}

double log_gamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("log_gamma: argument must be positive, got " + std::to_string(x));
  }
  return std::lgamma(x);
}

double log_pochhammer(double a, std::int64_t k) {
  if (!(a > 0.0)) {
    throw std::domain_error("log_pochhammer: base must be positive, got " + std::to_string(a));
  }
  if (k < 0) {
    throw std::domain_error("log_pochhammer: negative length");
  }
  if (k <= kPochhammerDirectSum) {
    double s = 0.0;
    for (std::int64_t j = 0; j < k; ++j) {
      s += std::log(a + static_cast<double>(j));
    }
    return s;
  }
  return std::lgamma(a + static_cast<double>(k)) - std::lgamma(a);
}

double log_factorial(std::int64_t k) {
  if (k < 0) {
    throw std::domain_error("log_factorial: negative argument");
  }
  if (k <= kFactorialTableSize) {
    return factorial_table()[static_cast<std::size_t>(k)];
  }
  return std::lgamma(static_cast<double>(k) + 1.0);
}

double log_binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) {
    return -std::numeric_limits<double>::infinity();
  }
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

}  // namespace kernord::special
