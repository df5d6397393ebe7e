#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kernord/catalog.hpp"
#include "kernord/verdict.hpp"

namespace kernord {

/// Summand law F on N = {1, 2, ...}. `masses[j]` is P(J = j); masses[0] = 0.
/// The vector is truncated at some j_max with the rest in `tail_mass`.
struct SummandLaw {
  std::string label;
  std::vector<double> masses;
  double tail_mass = 0.0;

  /// Explicit pmf on {0, 1, ..., j_max}; index 0 must carry no mass.
  static SummandLaw from_masses(std::vector<double> masses, std::string label = "custom");
};

/// Summand spec strings: `geometric:p=P` (P(J=j) = p(1-p)^(j-1)), `dirac`
/// (J = 1), `two-point:p=P` (P(J=2) = p, P(J=1) = 1-p), and
/// `shifted-poisson:lambda=L` (J = 1 + Poisson(L)). The pmf is stored up to
/// j_max. Throws SpecError.
SummandLaw make_summand(std::string_view spec, std::int64_t j_max);

/// F^{*n} on {0..k_max}; F^{*0} is the point mass at 0. Throws
/// std::invalid_argument for n < 0.
std::vector<double> convolution_power(const SummandLaw& F, std::int64_t n, std::int64_t k_max);

/// Counting law plus summand law, with the compound pmf kept on {0..k_max}.
/// Because summands are at least 1, P(X = k) only involves n <= k, so the
/// n-sum on {0..k_max} is exact.
class CompoundModel {
 public:
  CompoundModel(DensityFamily counting, SummandLaw summand, std::int64_t k_max, GridOptions opts = {});

  const DensityFamily& counting() const { return counting_; }
  const SummandLaw& summand() const { return summand_; }
  std::int64_t k_max() const { return k_max_; }
  /// Largest count n that can contribute on {0..k_max}.
  std::int64_t n_max() const { return n_max_; }
  const std::vector<double>& power(std::int64_t n) const { return powers_.at(static_cast<std::size_t>(n)); }
  const GridOptions& grid_options() const { return opts_; }

  /// q_nu(n) for n = 0..n_max (zero outside the counting support).
  std::vector<double> counting_pmf(double nu) const;

  /// Unnormalised-by-truncation compound masses P(X = k), k = 0..k_max.
  std::vector<double> raw_pmf(double nu) const;

 private:
  DensityFamily counting_;
  SummandLaw summand_;
  std::int64_t k_max_;
  std::int64_t n_max_;
  GridOptions opts_;
  std::vector<std::vector<double>> powers_;
};

/// The compound law on {0..k_max}, renormalised there; `tail_mass` records
/// P(X > k_max).
Distribution compound_pmf(const CompoundModel& m, double nu);

/// Posterior P(N = n | X = k): rows n = 0..n_max, columns k = 0..k_max.
/// Columns where P(X = k) = 0 are left at zero and flagged.
struct PosteriorMatrix {
  std::vector<std::vector<double>> entries;  // [n][k]
  std::vector<bool> column_defined;
};

PosteriorMatrix posterior_matrix(const CompoundModel& m, double nu);

/// E[N | X = k] for k = 0..k_max (NaN where P(X = k) = 0).
std::vector<double> posterior_mean(const CompoundModel& m, double nu);

/// Compound kernel E[G_nu(N) | X = k], G_nu the counting-family kernel.
double compound_kernel(const CompoundModel& m, double nu, std::int64_t k);
std::vector<double> compound_kernel_values(const CompoundModel& m, double nu);

/// Compound score E[G_nu(N) - E G_nu(N) | X = k] for k = 0..k_max.
std::vector<double> compound_score(const CompoundModel& m, double nu);

/// (a, b) with G_nu(n) = a + b n, for counting families with an affine kernel.
std::optional<std::pair<double, double>> affine_coefficients(const DensityFamily& counting, double nu);

/// Result of a PF2 or TP2 certification.
struct ShapeCertificate {
  bool ok = true;
  std::optional<Witness> witness;
  std::string reason;
};

/// Nonnegative entries, interval support, Delta^2 log <= tol on the support.
ShapeCertificate is_pf2(std::span<const double> pmf, double tol = 1e-10);

/// All 2x2 minors M(i,j)M(i',j') - M(i,j')M(i',j) >= -tol for i < i', j < j'.
/// Adjacent minors when every entry is positive, all pairs otherwise.
ShapeCertificate is_tp2(const std::vector<std::vector<double>>& M, double tol = 1e-12);

/// Compound lr criterion over [nu1, nu2]: the summand must be PF2 (otherwise
/// inconclusive) and G_nu monotone in n for every scanned nu. The direction
/// is read off the monotonicity; a kernel that is monotone in neither
/// direction gives inconclusive.
OrderVerdict check_compound_lr(const CompoundModel& m, double nu1, double nu2, std::size_t nu_count = 17,
                               const Tolerances& tol = {});

/// Exact Poisson-binomial pmf on {0..n} by iterated Bernoulli convolution.
Distribution poisson_binomial_pmf(std::span<const double> p);

/// One row of the compound direction table.
struct CompoundTableRow {
  std::string law;
  std::string counting_spec;
  std::string parameter;
  std::string kernel_text;
  std::string slope_text;
  int slope_sign = 0;  // +1 or -1
  Direction direction = Direction::up;
  double nu1 = 0.0;
  double nu2 = 0.0;
};

const std::vector<CompoundTableRow>& compound_table_rows();

struct CompoundRowCheck {
  std::string law;
  int observed_slope_sign = 0;
  bool summand_pf2 = false;
  OrderVerdict criterion;
  OrderVerdict oracle;  // on the truncated compound pmfs, in the asserted direction
  double max_tail_mass = 0.0;

  bool pass(const CompoundTableRow& row) const;
};

CompoundRowCheck check_compound_row(const CompoundTableRow& row, const SummandLaw& summand, std::int64_t k_max,
                                    const Tolerances& tol = {});

}  // namespace kernord
