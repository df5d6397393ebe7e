#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace kernord {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class SupportKind { discrete, continuous, mixed_atom };

std::string to_string(SupportKind kind);

/// Finite evaluation support.
///
/// Discrete grids are runs of consecutive integers with unit weights.
/// Continuous grids are midpoint cells of a uniform partition, so each point
/// carries weight `step`. A mixed grid puts the atom 0 first (weight 1) and
/// then midpoint cells on (0, upper], which is the measure delta_0 + dx.
struct SupportGrid {
  SupportKind kind = SupportKind::discrete;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> points;
  std::vector<double> weights;
  double step = 1.0;
  double truncation_tail_mass = 0.0;

  static SupportGrid integers(std::int64_t lo, std::int64_t hi);
  static SupportGrid uniform(double lo, double hi, double step);
  static SupportGrid atom_and_uniform(double hi, double step);

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  /// Index of the grid point equal to x (within half a cell for continuous grids).
  std::optional<std::size_t> index_of(double x) const;

  /// True when both grids carry the same points and weights.
  bool same_points(const SupportGrid& other) const;
};

/// A law restricted to a SupportGrid. `masses[i]` is the probability of the
/// cell around `support.points[i]` (density times measure weight); masses
/// sum to one over the grid. `tail_mass` records what was cut off before
/// renormalisation.
struct Distribution {
  SupportGrid support;
  std::vector<double> masses;
  double tail_mass = 0.0;
  std::string label;

  std::size_t size() const { return masses.size(); }

  /// Density with respect to the dominating measure at grid index i.
  double density_at(std::size_t i) const { return masses[i] / support.weights[i]; }
};

/// Builds a Distribution from unnormalised log masses on a grid: masses are
/// exp(log_mass) rescaled to sum to one. Points with log mass -inf get 0.
Distribution normalise_log_masses(SupportGrid grid, const std::vector<double>& log_masses,
                                  double tail_mass, std::string label = {});

/// Right-tail mass P(X >= x_i) for every grid index, by one backward pass.
std::vector<double> survival_profile(const Distribution& d);

/// P(X >= x) at grid point x. Throws std::out_of_range if x is not a grid point.
double survival(const Distribution& d, double x);

/// density(x) / P(X >= x) at grid point x. Throws std::domain_error when the
/// survival function vanishes there.
double hazard(const Distribution& d, double x);

/// Shortest of %.15g, %.16g, %.17g that reads back to exactly v; used for
/// parameter values inside labels and spec strings.
std::string format_shortest(double v);

/// Indices with strictly positive mass; empty if none.
std::vector<std::size_t> positive_support(const Distribution& d);

}  // namespace kernord
