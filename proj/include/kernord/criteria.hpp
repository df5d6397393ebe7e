#pragma once

#include <span>
#include <vector>

#include "kernord/catalog.hpp"
#include "kernord/verdict.hpp"

namespace kernord {

/// Kernel values and tail-conditional kernel means for one parameter value.
///
/// `tail_mean[i]` is E[K(X) | X >= x_i], defined where `survival[i] > 0`
/// (NaN elsewhere). `grand_mean` is E[K(X)], equal to tail_mean[0].
struct TailMeanProfile {
  double nu = 0.0;
  std::vector<double> points;
  std::vector<double> kernel;
  std::vector<double> survival;
  std::vector<double> tail_mean;
  double grand_mean = 0.0;

  bool defined(std::size_t i) const { return survival[i] > 0.0; }
};

/// One backward cumulative pass over K*mass and mass.
TailMeanProfile tail_mean_profile(const DensityFamily& f, double nu, const SupportGrid& grid,
                                  const GridOptions& opts = {});

/// d/dnu log sum(u * f_nu) computed as E_u[K] - E[K], where E_u is the law
/// reweighted by u. Throws std::domain_error when the weighted mass is zero.
double weighted_log_derivative(const DensityFamily& f, double nu, const SupportGrid& grid,
                               std::span<const double> u, const GridOptions& opts = {});

/// Shared inputs for the scanning criteria.
struct ScanSetup {
  const DensityFamily& family;
  std::span<const double> nu_grid;  // scanned parameter values, in order
  const SupportGrid& grid;
  Tolerances tol{};
  GridOptions grid_opts{};
};

// The four kernel criteria. Each returns holds/fails for the requested
// direction: `up` claims P(nu) <= P(nu') for nu <= nu' in the scanned range.
//   lr: Delta K >= -tol (up) or <= tol (down) on adjacent grid points.
//   lc: Delta^2 K <= tol (down, concave kernel) or >= -tol (up, convex kernel).
//   st: E[K | X >= x] - E[K] >= -tol_tail (up) or <= tol_tail (down).
//   hr: K(x) - E[K | X >= x] <= tol_tail (up) or >= -tol_tail (down).
// The tail criteria scan only points whose survival exceeds eps_tail.
// Witness: first offending point in grid order, at the first offending nu.
OrderVerdict check_lr(const ScanSetup& s, Direction dir);
OrderVerdict check_lc(const ScanSetup& s, Direction dir);
OrderVerdict check_st(const ScanSetup& s, Direction dir);
OrderVerdict check_hr(const ScanSetup& s, Direction dir);
OrderVerdict check_order(const ScanSetup& s, Order order, Direction dir);

/// Superlevel criterion. Verifies that {s >= 0} is a nonempty initial run of
/// grid points for every scanned nu and, when `want_hr`, that s is
/// nonincreasing beyond that run. Holds => P(nu') <= P(nu) (st, or hr when
/// `want_hr`), i.e. the decreasing direction. An unmet hypothesis yields
/// `inconclusive` with a witness. Throws std::invalid_argument for a support
/// without a finite left endpoint.
OrderVerdict check_superlevel(const ScanSetup& s, bool want_hr);

/// Concave-kernel endpoint criterion: K concave and s(x0) >= 0 for every
/// scanned nu gives hr (hence st) in the decreasing direction.
OrderVerdict check_concave_endpoint(const ScanSetup& s);

/// Unimodal-kernel endpoint criterion with a nu-independent mode c: K
/// nondecreasing up to c, nonincreasing from c, and s(x0) >= 0. Holds gives hr
/// (hence st) in the decreasing direction; an unmet hypothesis is
/// `inconclusive`.
OrderVerdict check_unimodal_endpoint(const ScanSetup& s, double mode_c);

/// Human-readable claim for a one-parameter comparison over [nu1, nu2].
std::string family_claim(Order order, Direction dir, double nu1, double nu2);

}  // namespace kernord
