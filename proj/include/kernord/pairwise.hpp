#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kernord/catalog.hpp"
#include "kernord/verdict.hpp"

namespace kernord {

/// A discrete law given by an unnormalised factor w(k) on an integer interval.
struct FactorLaw {
  std::string spec;  // canonical `name:key=val,...`
  std::int64_t lower = 0;
  std::optional<std::int64_t> upper;  // empty: unbounded
  std::function<double(std::int64_t k)> log_factor;
  /// lim w(k+1)/w(k) for unbounded supports, when known. The term ratio of
  /// every built-in law is monotone in k, so max(current ratio, limit)
  /// bounds all later ratios. NaN: only trust ratios once they decrease.
  double ratio_limit = std::numeric_limits<double>::quiet_NaN();
};

/// Factor-law specs:
///   binomial:n=N,p=P            C(n,k) p^k (1-p)^(n-k)
///   poisson:lambda=L            L^k / k!
///   negbinomial:r=R,p=P         (r)_k / k! (1-p)^k       (P = success probability)
///   geometric:p=P               (1-p)^k
///   cmp:lambda=L,nu=V           L^k / (k!)^V
///   betabinomial:n=N,r=R,s=S    C(n,k) (r)_k (s)_(n-k)
///   hypergeometric:B=B,W=W,n=N  C(B,k) C(W,n-k)
/// Throws SpecError.
FactorLaw make_factor_law(std::string_view spec);

/// Upper end of the support actually used: the finite upper end, or the
/// smallest k whose right tail, bounded geometrically through the term
/// ratio, is below eps_tail relative to the mass kept.
/// Throws TruncationError when the cap is hit first.
std::int64_t factor_truncation(const FactorLaw& law, const GridOptions& opts = {});

/// The law normalised on {lower..factor_truncation}.
Distribution factor_distribution(const FactorLaw& law, const GridOptions& opts = {});

/// The law normalised on {lower..upper}, with `upper` clamped to a finite
/// support end. `upper` must not lie below factor_truncation.
Distribution factor_distribution(const FactorLaw& law, std::int64_t upper, const GridOptions& opts = {});

/// Both laws cut at a shared point: unbounded laws run to the larger of the
/// two truncation points, so neither grid ends early relative to the other.
std::pair<Distribution, Distribution> factor_distributions(const FactorLaw& P, const FactorLaw& Q,
                                                           const GridOptions& opts = {});

/// K(k) = log(w^P(k) / w^Q(k)) on the common integer support J, with its
/// first and second forward differences.
struct PairwiseKernel {
  SupportGrid grid;
  std::vector<double> values;
  std::vector<double> d1;  // size - 1
  std::vector<double> d2;  // size - 2
  std::string p_spec;
  std::string q_spec;
  std::int64_t p_lower = 0, q_lower = 0;
  std::optional<std::int64_t> p_upper, q_upper;
};

/// Builds K on J; if both supports are unbounded J is cut at the larger of
/// the two truncation points. Throws std::invalid_argument if J is empty.
PairwiseKernel pairwise_kernel(const FactorLaw& P, const FactorLaw& Q, const GridOptions& opts = {});

/// Order::lr claims Q <=lr P (K nondecreasing on J, and the supports are
/// placed so that the ratio conventions keep f_Q/f_P nonincreasing).
/// Order::lc claims P <=lc Q (K concave on J = supp(P), which must lie inside
/// supp(Q); otherwise inconclusive). Other orders throw std::invalid_argument.
OrderVerdict check_pairwise(const PairwiseKernel& pk, Order order, const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Katz-class closed forms.

enum class KatzPair { bin_poi, bin_nb, poi_nb };

std::string to_string(KatzPair p);
KatzPair parse_katz_pair(std::string_view s);

/// Keys: bin-poi {n, p, lambda}; bin-nb {n, p, r, pi}; poi-nb {lambda, r, p}.
struct KatzCondition {
  bool lr = false;  // first law <=lr second law
  bool st = false;  // first law <=st second law
  double lr_lhs = 0.0, lr_rhs = 0.0;
  double st_lhs = 0.0, st_rhs = 0.0;
  std::string lr_text;
  std::string st_text;
};

/// Evaluates the closed-form inequalities; equality counts as holding
/// (relative slack 1e-12).
KatzCondition katz_threshold(KatzPair pair, const ParamMap& params);

/// Factor-law specs of the two laws in the pair, first law first.
std::pair<std::string, std::string> katz_laws(KatzPair pair, const ParamMap& params);

/// 5x5 sweep straddling the lr (or st) boundary: five base parameter
/// settings times the boundary-scaling factors {0.8, 0.9, 1, 1.1, 1.2}.
struct KatzCell {
  ParamMap params;
  double factor = 1.0;  // 1 is the exact boundary
};
std::vector<KatzCell> katz_sweep(KatzPair pair, Order boundary);

// ---------------------------------------------------------------------------
// Beta-binomial versus hypergeometric.

/// Delta K(k) = log[(B-k)(s+n-k-1) / ((W-n+k+1)(r+k))] for
/// K = log(w^Hyp / w^BetaBin).
double betabin_hyp_delta(double B, double W, std::int64_t n, double r, double s, std::int64_t k);

struct BetaBinHypCheck {
  bool condition = false;  // W(r+n-1) <= s(B-n+1)
  double lhs = 0.0;
  double rhs = 0.0;
  OrderVerdict kernel;  // BetaBin <=lr Hyp from the pairwise kernel
  OrderVerdict oracle;  // the same claim decided from the masses
  double max_formula_error = 0.0;
};

/// Requires B, W >= n >= 1 and r, s > 0 (std::invalid_argument otherwise).
BetaBinHypCheck betabin_hyp_condition(double B, double W, std::int64_t n, double r, double s,
                                      const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Chain-rule paths.

using ThetaVec = std::vector<double>;

/// A one-parameter path t -> theta(t) in a d-parameter family, with the
/// per-parameter kernels K^(i) and the joint log factor.
struct ParamPath {
  std::string name;
  std::size_t dim = 1;
  std::function<ThetaVec(double t)> theta;
  std::function<ThetaVec(double t)> theta_dot;
  double t_lo = 0.0;
  double t_hi = 1.0;
  std::vector<std::function<double(const ThetaVec& theta, double x)>> component_kernels;
  std::function<double(const ThetaVec& theta, double x)> log_factor;
  std::function<double(const ThetaVec& theta)> log_normalizer;  // empty: numeric
  std::function<bool(const ThetaVec& theta)> valid;
  SupportKind kind = SupportKind::discrete;
  double support_lower = 0.0;
  double support_upper = kInf;
  std::function<std::pair<double, double>(const ThetaVec& theta, double q)> effective_range;
};

/// K_t(x) = sum_i theta_i'(t) K^(i)_{theta(t)}(x).
double path_kernel(const ParamPath& path, double t, double x);

/// Checks that theta(t) is valid and theta_dot matches central differences of
/// theta (to 1e-6) at `samples` points of [t_lo, t_hi]. Throws
/// std::invalid_argument naming the first bad t.
void validate_path(const ParamPath& path, std::size_t samples = 33);

/// The path as a one-parameter family in t, whose kernel is path_kernel.
DensityFamily path_family(const ParamPath& path);

// Named paths.
ParamPath nb_linear_path(double r1, double r2, double q1, double q2);
ParamPath betabinomial_linear_path(std::int64_t n, double r1, double r2, double s1, double s2);
/// theta(c) = (r + c p, s + c(1-p)) on [0, c_max]: beta-binomial towards Bin(n, p).
ParamPath betabinomial_binomial_path(std::int64_t n, double r, double s, double p, double c_max);
ParamPath gamma_shape_scale_path(double r0, double r1, double beta0, double beta1);
ParamPath gamma_shape_rate_path(double r0, double r1, double rho0, double rho1);
/// w_t = (w^P)^t (w^Q)^(1-t) on the common support: its kernel is K = log(w^P/w^Q).
ParamPath geometric_interpolation_path(const FactorLaw& P, const FactorLaw& Q, const GridOptions& opts = {});

/// Named path from a spec string:
///   nb-linear:r1=,r2=,q1=,q2=
///   betabinomial-linear:n=,r1=,r2=,s1=,s2=
///   betabinomial-binomial:n=,r=,s=,p=,cmax=
///   gamma-shape-scale:r0=,r1=,beta0=,beta1=
///   gamma-shape-rate:r0=,r1=,rho0=,rho1=
/// Throws SpecError.
ParamPath make_path(std::string_view spec);

struct PathOrderCheck {
  OrderVerdict criterion;  // shape test of K_t on the t-scan
  OrderVerdict oracle;     // endpoint laws compared directly, same claim
};

/// Runs the kernel criterion for `order` along the path (t-scan of
/// `t_points`, default 33) and compares the endpoint laws with the oracle.
PathOrderCheck check_path_order(const ParamPath& path, Order order, Direction dir, std::size_t t_points = 33,
                                const Tolerances& tol = {}, const GridOptions& opts = {});

// ---------------------------------------------------------------------------
// Beta-binomial to binomial interpolation.

struct InterpolationCheck {
  bool condition = false;  // p >= (r+n-1)/(r+s+n-1)
  double threshold = 0.0;
  std::vector<std::pair<double, double>> min_delta;  // (c, min_k Delta K_c(k))
  OrderVerdict oracle;                                // BetaBin(n,r,s) <=lr Bin(n,p)
  double tv_at_large_c = 0.0;                         // TV(P_c, Bin(n,p)) at c_large
  double c_large = 1e4;
};

/// K_c(k) = p[psi(r+cp+k) - psi(r+cp)] + (1-p)[psi(s+c(1-p)+n-k) - psi(s+c(1-p))].
double interpolation_kernel(std::int64_t n, double r, double s, double p, double c, std::int64_t k);

InterpolationCheck betabin_bin_interpolation(std::int64_t n, double r, double s, double p,
                                             const std::vector<double>& cs = {0.0, 1.0, 10.0, 100.0},
                                             double c_large = 1e4, const Tolerances& tol = {});

}  // namespace kernord
