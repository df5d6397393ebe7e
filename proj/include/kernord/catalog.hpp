#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kernord/support.hpp"

namespace kernord {

using ParamMap = std::map<std::string, double>;

/// Malformed `name:key=val,...` string. `token()` is the offending piece.
class SpecError : public std::invalid_argument {
 public:
  SpecError(const std::string& message, std::string token)
      : std::invalid_argument(message + " (offending token: '" + token + "')"),
        token_(std::move(token)) {}
  const std::string& token() const { return token_; }

 private:
  std::string token_;
};

/// Requested tail mass could not be reached inside the truncation cap.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParsedSpec {
  std::string name;
  std::vector<std::pair<std::string, double>> params;

  ParamMap as_map() const;
};

/// Parses `name[:key=val[,key=val]*]`. Throws SpecError.
ParsedSpec parse_spec(std::string_view text);

/// Open interval (lo, hi); either end may be infinite.
struct ParamInterval {
  double lo = -kInf;
  double hi = kInf;
  bool contains(double nu) const { return nu > lo && nu < hi; }
};

struct ShapeHints {
  bool nondecreasing = false;
  bool nonincreasing = false;
  bool concave = false;
  bool convex = false;
  bool affine_in_x = false;  // K(x) = a(nu) + b(nu) x
};

/// Truncation and discretisation settings.
struct GridOptions {
  double eps_tail = 1e-12;
  std::int64_t k_max_cap = 10000;
  std::size_t grid_points = 4000;
  std::size_t grid_cap = 100000;
  double quantile = 1e-9;
};

/// One-parameter density family f_nu = w_nu / A(nu) on a fixed support.
///
/// `log_factor` is log w_nu(x) and `kernel` is d/dnu log w_nu(x). For the
/// mixed support the point x = 0 means the atom.
struct DensityFamily {
  std::string name;
  std::string varying;  // name of the parameter nu
  ParamMap fixed;
  ParamInterval param;
  SupportKind kind = SupportKind::discrete;
  double support_lower = 0.0;
  double support_upper = kInf;
  std::function<double(double nu, double x)> log_factor;
  std::function<double(double nu, double x)> kernel;
  std::function<double(double nu)> log_normalizer;  // empty: computed numerically
  std::function<std::pair<double, double>(double nu, double q)> effective_range;
  ShapeHints hints;

  bool in_support(double x) const { return x >= support_lower && x <= support_upper; }
  std::string spec_string() const;
};

/// Names accepted by make_family.
const std::vector<std::string>& family_names();

/// Catalogue factory. Throws SpecError for unknown names, unknown or missing
/// keys, and fixed parameters outside their validity range.
DensityFamily make_family(std::string_view name, const ParamMap& fixed);

/// make_family from a spec string such as "negbinomial-in-shape:p=0.3".
DensityFamily make_family(std::string_view spec);

/// log A(nu): closed form if the family has one, else summed over the
/// truncated support.
double log_normalizer(const DensityFamily& f, double nu, const GridOptions& opts = {});

/// log f_nu(x) = log w_nu(x) - log A(nu).
double log_density(const DensityFamily& f, double nu, double x, const GridOptions& opts = {});

/// Smallest integer upper end whose right tail is at most eps_tail at nu.
std::int64_t discrete_truncation(const DensityFamily& f, double nu, const GridOptions& opts = {});

/// Evaluation grid shared by every nu in `nus`: integer run up to the largest
/// truncation point, or uniform midpoint cells covering the union of
/// effective ranges.
SupportGrid default_grid(const DensityFamily& f, std::span<const double> nus,
                         const GridOptions& opts = {});

/// The law P_nu restricted to `grid` and renormalised there. For discrete
/// grids on unbounded support a TruncationError is thrown when the mass
/// beyond the grid exceeds eps_tail.
Distribution density(const DensityFamily& f, double nu, const SupportGrid& grid,
                     const GridOptions& opts = {});

/// Kernel values K_nu(x) over the grid.
std::vector<double> kernel_values(const DensityFamily& f, double nu, const SupportGrid& grid);

/// Evenly spaced parameter values from lo to hi inclusive. Log spacing when
/// both ends are positive and their ratio exceeds 4.
std::vector<double> nu_scan(double lo, double hi, std::size_t count);

}  // namespace kernord
