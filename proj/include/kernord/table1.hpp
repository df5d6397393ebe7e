#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kernord/catalog.hpp"

namespace kernord {

/// Sign stated explicitly in a kernel-table column, if any.
enum class SignClaim { positive, negative, zero, none };

std::string to_string(SignClaim s);

/// One difference column of the kernel table: the closed form of K' (or
/// Delta K) or K'' (or Delta^2 K), plus the sign the table states for it.
struct DifferenceColumn {
  std::string text;
  std::function<double(double nu, double x)> formula;
  SignClaim claim = SignClaim::none;
};

/// A row of the common-kernel table, organised by parameter role.
///
/// Every row is backed by one or more concrete families. For the discrete
/// translate row the parameter is an integer shift and the score is the unit
/// backward difference in the shift rather than a derivative.
struct KernelTableRow {
  std::string id;
  std::string role;            // natural, power-rate-scale, shape, location
  std::string representation;  // human-readable description
  std::string kernel_text;
  std::vector<DensityFamily> families;
  std::vector<double> nus;  // parameter samples (shared by all backing families)
  std::vector<double> xs;   // support samples; discrete rows use integers
  DifferenceColumn d1;
  DifferenceColumn d2;
  bool unit_step_score = false;
};

/// All rows, in table order.
const std::vector<KernelTableRow>& kernel_table_rows();

/// Observed sign symbol over a list of values: "+", "-", "0" or "mixed".
std::string sign_symbol(const std::vector<double>& values, double tol);

struct KernelTableCheck {
  std::string id;
  std::size_t samples = 0;
  double max_kernel_score_variance = 0.0;  // variance over the grid of K - score
  double max_d1_error = 0.0;               // relative deviation from the closed form
  double max_d2_error = 0.0;
  std::string d1_sign;  // observed
  std::string d2_sign;
  bool kernel_matches_score = false;
  bool formulas_match = false;
  bool signs_match = false;

  bool pass() const { return kernel_matches_score && formulas_match && signs_match; }
};

/// Verifies a row: kernel against the finite-difference score (variance
/// bound `variance_tol`), and first/second differences (discrete) or
/// derivatives (continuous, by central differences) against the closed forms
/// and stated signs at every (nu, x) sample.
KernelTableCheck check_kernel_table_row(const KernelTableRow& row, double variance_tol = 1e-8,
                                        const GridOptions& opts = {});

}  // namespace kernord
