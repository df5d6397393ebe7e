#pragma once

#include <vector>

#include "kernord/support.hpp"
#include "kernord/verdict.hpp"

namespace kernord {

/// Two laws on a common list of points. Discrete laws are aligned on the
/// union integer range, padding with zero mass; continuous and mixed laws
/// must already share their grid.
struct AlignedPair {
  SupportKind kind = SupportKind::discrete;
  std::vector<double> points;
  std::vector<double> p;
  std::vector<double> q;
  bool truncated = false;  // either law dropped tail mass
};

/// Throws std::invalid_argument when the grids cannot be aligned.
AlignedPair align(const Distribution& P, const Distribution& Q);

/// l(x) = f_P(x) / f_Q(x) with a/0 = +inf (a > 0) and 0/0 = 0, on the union
/// of the supports.
struct LikelihoodRatioSeq {
  std::vector<double> points;
  std::vector<double> values;
};

LikelihoodRatioSeq likelihood_ratio(const Distribution& P, const Distribution& Q);

// Kernel-free decisions of P <= Q straight from the definitions. The verdict
// direction is `up` (first argument below the second). Continuous and mixed
// laws are judged on their grid and labelled "grid-certified".
//   lr: l = f_P/f_Q nonincreasing on supp(P) u supp(Q), relative tolerance
//       oracle_rel in log space; points where both masses are below eps_tail
//       are skipped.
//   st: survival_P <= survival_Q + oracle_abs everywhere; witness is the worst
//       violation.
//   hr: survival_P / survival_Q nonincreasing where survival_Q > eps_tail.
//   lc: log l concave on supp(P), which must be an interval inside supp(Q)
//       (otherwise inconclusive).
OrderVerdict oracle_lr(const Distribution& P, const Distribution& Q, const Tolerances& tol = {});
OrderVerdict oracle_st(const Distribution& P, const Distribution& Q, const Tolerances& tol = {});
OrderVerdict oracle_hr(const Distribution& P, const Distribution& Q, const Tolerances& tol = {});
OrderVerdict oracle_lc(const Distribution& P, const Distribution& Q, const Tolerances& tol = {});
OrderVerdict oracle(Order order, const Distribution& P, const Distribution& Q, const Tolerances& tol = {});

}  // namespace kernord
