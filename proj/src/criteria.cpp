#include "kernord/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace kernord {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void require_nus(const ScanSetup& s) {
  if (s.nu_grid.empty()) {
    throw std::invalid_argument("criteria: empty parameter grid");
  }
}

OrderVerdict make_verdict(const ScanSetup& s, Order order, Direction dir, Method method) {
  OrderVerdict v;
  v.order = order;
  v.direction = dir;
  v.method = method;
  v.tolerances = s.tol;
  v.certification = "scanned";
  v.claim = family_claim(order, dir, s.nu_grid.front(), s.nu_grid.back());
  v.note = "scanned " + std::to_string(s.nu_grid.size()) + " parameter values over " +
           std::to_string(s.grid.size()) + " grid points";
  return v;
}

// Indices of grid points inside the family support, in grid order.
std::vector<std::size_t> support_indices(const DensityFamily& f, const SupportGrid& grid) {
  std::vector<std::size_t> idx;
  idx.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (f.in_support(grid.points[i])) {
      idx.push_back(i);
    }
  }
  return idx;
}

void record_failure(OrderVerdict& v, std::vector<double> points, double nu, double margin) {
  v.status = Status::fails;
  v.witness = Witness{std::move(points), nu, margin};
}

}  // namespace

std::string family_claim(Order order, Direction dir, double nu1, double nu2) {
  const std::string lhs = dir == Direction::up ? "P(nu)" : "P(nu')";
  const std::string rhs = dir == Direction::up ? "P(nu')" : "P(nu)";
  return lhs + " " + order_symbol(order) + " " + rhs + " for nu <= nu' in [" + fmt(nu1) + ", " + fmt(nu2) + "]";
}

TailMeanProfile tail_mean_profile(const DensityFamily& f, double nu, const SupportGrid& grid,
                                  const GridOptions& opts) {
  const Distribution d = density(f, nu, grid, opts);
  TailMeanProfile p;
  p.nu = nu;
  p.points = grid.points;
  const std::size_t n = grid.size();
  p.kernel.assign(n, 0.0);
  p.survival.assign(n, 0.0);
  p.tail_mean.assign(n, kNaN);
  for (std::size_t i = 0; i < n; ++i) {
    if (f.in_support(grid.points[i])) {
      p.kernel[i] = f.kernel(nu, grid.points[i]);
    }
  }
  double mass = 0.0;
  double weighted = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    if (d.masses[i] > 0.0) {
      mass += d.masses[i];
      weighted += p.kernel[i] * d.masses[i];
    }
    p.survival[i] = mass;
    if (mass > 0.0) {
      p.tail_mean[i] = weighted / mass;
    }
  }
  p.grand_mean = weighted / mass;
  return p;
}

double weighted_log_derivative(const DensityFamily& f, double nu, const SupportGrid& grid,
                               std::span<const double> u, const GridOptions& opts) {
  if (u.size() != grid.size()) {
    throw std::invalid_argument("weighted_log_derivative: weight size does not match the grid");
  }
  const Distribution d = density(f, nu, grid, opts);
  double mass = 0.0;
  double grand = 0.0;
  double wmass = 0.0;
  double wk = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (d.masses[i] <= 0.0) {
      continue;
    }
    if (u[i] < 0.0) {
      throw std::invalid_argument("weighted_log_derivative: negative weight");
    }
    const double k = f.kernel(nu, grid.points[i]);
    mass += d.masses[i];
    grand += k * d.masses[i];
    wmass += u[i] * d.masses[i];
    wk += u[i] * k * d.masses[i];
  }
  if (!(wmass > 0.0)) {
    throw std::domain_error("weighted_log_derivative: zero weighted mass");
  }
  return wk / wmass - grand / mass;
}

OrderVerdict check_lr(const ScanSetup& s, Direction dir) {
  require_nus(s);
  OrderVerdict v = make_verdict(s, Order::lr, dir, Method::kernel_criterion);
  v.status = Status::holds;
  const auto idx = support_indices(s.family, s.grid);
  for (double nu : s.nu_grid) {
    double prev = 0.0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const double k = s.family.kernel(nu, s.grid.points[idx[j]]);
      if (j > 0) {
        const double delta = k - prev;
        const double margin = dir == Direction::up ? delta : -delta;
        if (margin < -s.tol.shape) {
          record_failure(v, {s.grid.points[idx[j - 1]], s.grid.points[idx[j]]}, nu, margin);
          return v;
        }
      }
      prev = k;
    }
  }
  return v;
}

OrderVerdict check_lc(const ScanSetup& s, Direction dir) {
  require_nus(s);
  OrderVerdict v = make_verdict(s, Order::lc, dir, Method::kernel_criterion);
  v.status = Status::holds;
  const auto idx = support_indices(s.family, s.grid);
  for (double nu : s.nu_grid) {
    for (std::size_t j = 0; j + 2 < idx.size(); ++j) {
      const double k0 = s.family.kernel(nu, s.grid.points[idx[j]]);
      const double k1 = s.family.kernel(nu, s.grid.points[idx[j + 1]]);
      const double k2 = s.family.kernel(nu, s.grid.points[idx[j + 2]]);
      const double d2 = k2 - 2.0 * k1 + k0;
      const double margin = dir == Direction::down ? -d2 : d2;
      if (margin < -s.tol.shape) {
        record_failure(
            v, {s.grid.points[idx[j]], s.grid.points[idx[j + 1]], s.grid.points[idx[j + 2]]}, nu, margin);
        return v;
      }
    }
  }
  return v;
}

OrderVerdict check_st(const ScanSetup& s, Direction dir) {
  require_nus(s);
  OrderVerdict v = make_verdict(s, Order::st, dir, Method::kernel_criterion);
  v.status = Status::holds;
  for (double nu : s.nu_grid) {
    const TailMeanProfile p = tail_mean_profile(s.family, nu, s.grid, s.grid_opts);
    for (std::size_t i = 0; i < p.points.size(); ++i) {
      if (!(p.survival[i] > s.tol.eps_tail)) {
        continue;
      }
      const double diff = p.tail_mean[i] - p.grand_mean;
      const double margin = dir == Direction::up ? diff : -diff;
      if (margin < -s.tol.tail) {
        record_failure(v, {p.points[i]}, nu, margin);
        return v;
      }
    }
  }
  return v;
}

OrderVerdict check_hr(const ScanSetup& s, Direction dir) {
  require_nus(s);
  OrderVerdict v = make_verdict(s, Order::hr, dir, Method::kernel_criterion);
  v.status = Status::holds;
  for (double nu : s.nu_grid) {
    const TailMeanProfile p = tail_mean_profile(s.family, nu, s.grid, s.grid_opts);
    for (std::size_t i = 0; i < p.points.size(); ++i) {
      if (!(p.survival[i] > s.tol.eps_tail) || !s.family.in_support(p.points[i])) {
        continue;
      }
      const double diff = p.kernel[i] - p.tail_mean[i];
      const double margin = dir == Direction::up ? -diff : diff;
      if (margin < -s.tol.tail) {
        record_failure(v, {p.points[i]}, nu, margin);
        return v;
      }
    }
  }
  return v;
}

OrderVerdict check_order(const ScanSetup& s, Order order, Direction dir) {
  switch (order) {
    case Order::lr:
      return check_lr(s, dir);
    case Order::lc:
      return check_lc(s, dir);
    case Order::st:
      return check_st(s, dir);
    case Order::hr:
      return check_hr(s, dir);
  }
  throw std::logic_error("check_order: unknown order");
}

namespace {

void require_left_endpoint(const ScanSetup& s) {
  if (!std::isfinite(s.family.support_lower)) {
    throw std::invalid_argument(s.family.name + ": support has no finite left endpoint");
  }
}

// Returns false and fills the verdict when s(x0) < -tol at this nu.
bool left_score_nonnegative(const ScanSetup& s, const TailMeanProfile& p, const std::vector<std::size_t>& idx,
                            OrderVerdict& v) {
  const double s0 = p.kernel[idx.front()] - p.grand_mean;
  if (s0 < -s.tol.tail) {
    v.status = Status::inconclusive;
    v.witness = Witness{{p.points[idx.front()]}, p.nu, s0};
    v.note = "hypothesis unmet: score at the left endpoint is negative";
    return false;
  }
  return true;
}

}  // namespace

OrderVerdict check_superlevel(const ScanSetup& s, bool want_hr) {
  require_nus(s);
  require_left_endpoint(s);
  OrderVerdict v = make_verdict(s, want_hr ? Order::hr : Order::st, Direction::down, Method::superlevel);
  v.status = Status::holds;
  const auto idx = support_indices(s.family, s.grid);
  for (double nu : s.nu_grid) {
    const TailMeanProfile p = tail_mean_profile(s.family, nu, s.grid, s.grid_opts);
    if (!left_score_nonnegative(s, p, idx, v)) {
      return v;
    }
    // After the first clearly negative score, no clearly positive one may follow.
    std::size_t first_negative = idx.size();
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const double score = p.kernel[idx[j]] - p.grand_mean;
      if (first_negative == idx.size()) {
        if (score < -s.tol.tail) {
          first_negative = j;
        }
      } else if (score > s.tol.tail) {
        v.status = Status::inconclusive;
        v.witness = Witness{{p.points[idx[first_negative]], p.points[idx[j]]}, nu, -score};
        v.note = "hypothesis unmet: {s >= 0} is not an initial interval";
        return v;
      }
    }
    if (want_hr) {
      for (std::size_t j = first_negative; j + 1 < idx.size(); ++j) {
        const double delta = p.kernel[idx[j + 1]] - p.kernel[idx[j]];
        if (delta > s.tol.shape) {
          v.status = Status::inconclusive;
          v.witness = Witness{{p.points[idx[j]], p.points[idx[j + 1]]}, nu, -delta};
          v.note = "hypothesis unmet: score increases beyond its nonnegative run";
          return v;
        }
      }
    }
  }
  return v;
}

OrderVerdict check_concave_endpoint(const ScanSetup& s) {
  require_nus(s);
  require_left_endpoint(s);
  OrderVerdict v = make_verdict(s, Order::hr, Direction::down, Method::concave_endpoint);
  const OrderVerdict concave = check_lc(s, Direction::down);
  if (!concave.holds()) {
    v.status = Status::inconclusive;
    v.witness = concave.witness;
    v.note = "hypothesis unmet: kernel is not concave";
    return v;
  }
  v.status = Status::holds;
  const auto idx = support_indices(s.family, s.grid);
  for (double nu : s.nu_grid) {
    const TailMeanProfile p = tail_mean_profile(s.family, nu, s.grid, s.grid_opts);
    if (!left_score_nonnegative(s, p, idx, v)) {
      return v;
    }
  }
  return v;
}

OrderVerdict check_unimodal_endpoint(const ScanSetup& s, double mode_c) {
  require_nus(s);
  require_left_endpoint(s);
  OrderVerdict v = make_verdict(s, Order::hr, Direction::down, Method::unimodal_endpoint);
  v.status = Status::holds;
  v.note += "; mode c=" + fmt(mode_c);
  const auto idx = support_indices(s.family, s.grid);
  for (double nu : s.nu_grid) {
    for (std::size_t j = 0; j + 1 < idx.size(); ++j) {
      const double x0 = s.grid.points[idx[j]];
      const double x1 = s.grid.points[idx[j + 1]];
      const double delta = s.family.kernel(nu, x1) - s.family.kernel(nu, x0);
      double margin = 0.0;
      if (x1 <= mode_c) {
        margin = delta;  // nondecreasing before the mode
      } else if (x0 >= mode_c) {
        margin = -delta;  // nonincreasing after the mode
      } else {
        continue;  // the pair straddles c
      }
      if (margin < -s.tol.shape) {
        v.status = Status::inconclusive;
        v.witness = Witness{{x0, x1}, nu, margin};
        v.note = "hypothesis unmet: kernel is not unimodal with mode " + fmt(mode_c) + " at this parameter";
        return v;
      }
    }
    const TailMeanProfile p = tail_mean_profile(s.family, nu, s.grid, s.grid_opts);
    if (!left_score_nonnegative(s, p, idx, v)) {
      return v;
    }
  }
  return v;
}

}  // namespace kernord
