#include "kernord/support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace kernord {

std::string to_string(SupportKind kind) {
  switch (kind) {
    case SupportKind::discrete:
      return "discrete";
    case SupportKind::continuous:
      return "continuous";
    case SupportKind::mixed_atom:
      return "mixed-atom-at-zero";
  }
  return "unknown";
}

SupportGrid SupportGrid::integers(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) {
    throw std::invalid_argument("SupportGrid::integers: empty range");
  }
  SupportGrid g;
  g.kind = SupportKind::discrete;
  g.lower = static_cast<double>(lo);
  g.upper = static_cast<double>(hi);
  const auto n = static_cast<std::size_t>(hi - lo + 1);
  g.points.resize(n);
  g.weights.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    g.points[i] = static_cast<double>(lo + static_cast<std::int64_t>(i));
  }
  return g;
}

SupportGrid SupportGrid::uniform(double lo, double hi, double step) {
  if (!(hi > lo) || !(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("SupportGrid::uniform: need finite lo < hi and step > 0");
  }
  SupportGrid g;
  g.kind = SupportKind::continuous;
  g.lower = lo;
  g.upper = hi;
  const auto n = static_cast<std::size_t>(std::llround(std::ceil((hi - lo) / step - 1e-9)));
  g.step = (hi - lo) / static_cast<double>(n);
  g.points.resize(n);
  g.weights.assign(n, g.step);
  for (std::size_t i = 0; i < n; ++i) {
    g.points[i] = lo + (static_cast<double>(i) + 0.5) * g.step;
  }
  return g;
}

SupportGrid SupportGrid::atom_and_uniform(double hi, double step) {
  SupportGrid cells = uniform(0.0, hi, step);
  SupportGrid g;
  g.kind = SupportKind::mixed_atom;
  g.lower = 0.0;
  g.upper = hi;
  g.step = cells.step;
  g.points.reserve(cells.size() + 1);
  g.weights.reserve(cells.size() + 1);
  g.points.push_back(0.0);
  g.weights.push_back(1.0);
  g.points.insert(g.points.end(), cells.points.begin(), cells.points.end());
  g.weights.insert(g.weights.end(), cells.weights.begin(), cells.weights.end());
  return g;
}

std::optional<std::size_t> SupportGrid::index_of(double x) const {
  if (points.empty()) {
    return std::nullopt;
  }
  if (kind == SupportKind::mixed_atom && x == 0.0) {
    return 0;
  }
  const double tol = kind == SupportKind::discrete ? 1e-9 : 0.5 * step;
  auto it = std::lower_bound(points.begin(), points.end(), x - tol);
  if (it == points.end() || std::abs(*it - x) > tol) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - points.begin());
}

bool SupportGrid::same_points(const SupportGrid& other) const {
  if (kind != other.kind || points.size() != other.points.size()) {
    return false;
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double scale = std::max(1.0, std::abs(points[i]));
    if (std::abs(points[i] - other.points[i]) > 1e-12 * scale ||
        std::abs(weights[i] - other.weights[i]) > 1e-12 * std::max(1.0, weights[i])) {
      return false;
    }
  }
  return true;
}

Distribution normalise_log_masses(SupportGrid grid, const std::vector<double>& log_masses,
                                  double tail_mass, std::string label) {
  if (log_masses.size() != grid.size()) {
    throw std::invalid_argument("normalise_log_masses: size mismatch");
  }
  double top = -kInf;
  for (double v : log_masses) {
    top = std::max(top, v);
  }
  if (!std::isfinite(top)) {
    throw std::domain_error("normalise_log_masses: no positive mass on the grid");
  }
  Distribution d;
  d.masses.resize(log_masses.size());
  double total = 0.0;
  for (std::size_t i = 0; i < log_masses.size(); ++i) {
    d.masses[i] = std::exp(log_masses[i] - top);
    total += d.masses[i];
  }
  for (double& m : d.masses) {
    m /= total;
  }
  d.support = std::move(grid);
  d.tail_mass = tail_mass;
  d.label = std::move(label);
  return d;
}

std::vector<double> survival_profile(const Distribution& d) {
  std::vector<double> tail(d.masses.size());
  double acc = 0.0;
  for (std::size_t i = d.masses.size(); i-- > 0;) {
    acc += d.masses[i];
    tail[i] = acc;
  }
  return tail;
}

double survival(const Distribution& d, double x) {
  const auto idx = d.support.index_of(x);
  if (!idx) {
    throw std::out_of_range("survival: point is not on the grid");
  }
  double acc = 0.0;
  for (std::size_t i = d.masses.size(); i-- > *idx;) {
    acc += d.masses[i];
  }
  return acc;
}

double hazard(const Distribution& d, double x) {
  const auto idx = d.support.index_of(x);
  if (!idx) {
    throw std::out_of_range("hazard: point is not on the grid");
  }
  const double tail = survival(d, x);
  if (!(tail > 0.0)) {
    throw std::domain_error("hazard: survival function vanishes at this point");
  }
  return d.density_at(*idx) / tail;
}

std::vector<std::size_t> positive_support(const Distribution& d) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < d.masses.size(); ++i) {
    if (d.masses[i] > 0.0) {
      idx.push_back(i);
    }
  }
  return idx;
}

std::string format_shortest(double v) {
  char buf[40];
  for (int digits : {15, 16, 17}) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    if (std::strtod(buf, nullptr) == v) {
      break;
    }
  }
  return buf;
}

}  // namespace kernord
