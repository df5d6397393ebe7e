#include "kernord/compound.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "kernord/oracle.hpp"
#include "kernord/special.hpp"

namespace kernord {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

double take_probability(const ParsedSpec& spec, const std::string& key) {
  const auto m = spec.as_map();
  for (const auto& [k, v] : m) {
    if (k != key) {
      throw SpecError(spec.name + ": unknown parameter '" + k + "'", k);
    }
  }
  auto it = m.find(key);
  if (it == m.end()) {
    throw SpecError(spec.name + ": missing parameter '" + key + "'", key);
  }
  return it->second;
}

}  // namespace

SummandLaw SummandLaw::from_masses(std::vector<double> masses, std::string label) {
  if (masses.empty() || masses[0] != 0.0) {
    throw std::invalid_argument("summand law: J must live on {1, 2, ...}");
  }
  double total = 0.0;
  for (double m : masses) {
    if (!(m >= 0.0)) {
      throw std::invalid_argument("summand law: negative mass");
    }
    total += m;
  }
  if (!(total > 0.0) || total > 1.0 + 1e-12) {
    throw std::invalid_argument("summand law: masses must sum to at most one");
  }
  SummandLaw f;
  f.label = std::move(label);
  f.masses = std::move(masses);
  f.tail_mass = std::max(0.0, 1.0 - total);
  return f;
}

SummandLaw make_summand(std::string_view text, std::int64_t j_max) {
  if (j_max < 1) {
    throw std::invalid_argument("make_summand: j_max must be at least 1");
  }
  const ParsedSpec spec = parse_spec(text);
  const auto n = static_cast<std::size_t>(j_max + 1);
  std::vector<double> m(n, 0.0);
  if (spec.name == "geometric") {
    const double p = take_probability(spec, "p");
    if (!(p > 0.0 && p < 1.0)) {
      throw SpecError("geometric summand: p must lie in (0, 1)", "p=" + fmt(p));
    }
    for (std::size_t j = 1; j < n; ++j) {
      m[j] = p * std::exp(static_cast<double>(j - 1) * std::log1p(-p));
    }
  } else if (spec.name == "dirac") {
    if (!spec.params.empty()) {
      throw SpecError("dirac summand takes no parameters", spec.params.front().first);
    }
    m[1] = 1.0;
  } else if (spec.name == "two-point") {
    const double p = take_probability(spec, "p");
    if (!(p >= 0.0 && p <= 1.0)) {
      throw SpecError("two-point summand: p must lie in [0, 1]", "p=" + fmt(p));
    }
    m[1] = 1.0 - p;
    if (n > 2) {
      m[2] = p;
    }
  } else if (spec.name == "shifted-poisson") {
    const double lambda = take_probability(spec, "lambda");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw SpecError("shifted-poisson summand: lambda must be positive", "lambda=" + fmt(lambda));
    }
    for (std::size_t j = 1; j < n; ++j) {
      const auto i = static_cast<std::int64_t>(j - 1);
      m[j] = std::exp(static_cast<double>(i) * std::log(lambda) - lambda - special::log_factorial(i));
    }
  } else {
    throw SpecError("unknown summand law", spec.name);
  }
  return SummandLaw::from_masses(std::move(m), std::string(text));
}

std::vector<double> convolution_power(const SummandLaw& F, std::int64_t n, std::int64_t k_max) {
  if (n < 0) {
    throw std::invalid_argument("convolution_power: n must be nonnegative");
  }
  if (k_max < 0) {
    throw std::invalid_argument("convolution_power: k_max must be nonnegative");
  }
  const auto size = static_cast<std::size_t>(k_max + 1);
  std::vector<double> cur(size, 0.0);
  cur[0] = 1.0;
  for (std::int64_t step = 0; step < n; ++step) {
    std::vector<double> next(size, 0.0);
    for (std::size_t k = 0; k < size; ++k) {
      if (cur[k] == 0.0) {
        continue;
      }
      for (std::size_t j = 1; j < F.masses.size() && k + j < size; ++j) {
        next[k + j] += cur[k] * F.masses[j];
      }
    }
    cur = std::move(next);
  }
  return cur;
}

CompoundModel::CompoundModel(DensityFamily counting, SummandLaw summand, std::int64_t k_max, GridOptions opts)
    : counting_(std::move(counting)), summand_(std::move(summand)), k_max_(k_max), opts_(opts) {
  if (counting_.kind != SupportKind::discrete || counting_.support_lower < 0.0) {
    throw std::invalid_argument("compound: counting law must live on the nonnegative integers");
  }
  if (k_max_ < 1) {
    throw std::invalid_argument("compound: k_max must be at least 1");
  }
  n_max_ = std::isfinite(counting_.support_upper)
               ? std::min<std::int64_t>(k_max_, static_cast<std::int64_t>(counting_.support_upper))
               : k_max_;
  const auto size = static_cast<std::size_t>(k_max_ + 1);
  powers_.reserve(static_cast<std::size_t>(n_max_ + 1));
  std::vector<double> cur(size, 0.0);
  cur[0] = 1.0;
  powers_.push_back(cur);
  for (std::int64_t n = 1; n <= n_max_; ++n) {
    std::vector<double> next(size, 0.0);
    for (std::size_t k = 0; k < size; ++k) {
      if (cur[k] == 0.0) {
        continue;
      }
      for (std::size_t j = 1; j < summand_.masses.size() && k + j < size; ++j) {
        next[k + j] += cur[k] * summand_.masses[j];
      }
    }
    cur = std::move(next);
    powers_.push_back(cur);
  }
}

std::vector<double> CompoundModel::counting_pmf(double nu) const {
  std::vector<double> q(static_cast<std::size_t>(n_max_ + 1), 0.0);
  const double log_a = log_normalizer(counting_, nu, opts_);
  for (std::int64_t n = 0; n <= n_max_; ++n) {
    const double x = static_cast<double>(n);
    if (counting_.in_support(x)) {
      q[static_cast<std::size_t>(n)] = std::exp(counting_.log_factor(nu, x) - log_a);
    }
  }
  return q;
}

std::vector<double> CompoundModel::raw_pmf(double nu) const {
  const auto q = counting_pmf(nu);
  std::vector<double> f(static_cast<std::size_t>(k_max_ + 1), 0.0);
  for (std::size_t k = 0; k < f.size(); ++k) {
    double s = 0.0;
    for (std::size_t n = 0; n <= std::min<std::size_t>(k, static_cast<std::size_t>(n_max_)); ++n) {
      s += q[n] * powers_[n][k];
    }
    f[k] = s;
  }
  return f;
}

Distribution compound_pmf(const CompoundModel& m, double nu) {
  const auto raw = m.raw_pmf(nu);
  double total = 0.0;
  for (double v : raw) total += v;
  Distribution d;
  d.support = SupportGrid::integers(0, m.k_max());
  d.tail_mass = std::max(0.0, 1.0 - total);
  d.support.truncation_tail_mass = d.tail_mass;
  d.masses.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    d.masses[i] = raw[i] / total;
  }
  d.label = "compound[" + m.counting().spec_string() + " (" + m.counting().varying + "=" + fmt(nu) + "), " +
            m.summand().label + "]";
  return d;
}

PosteriorMatrix posterior_matrix(const CompoundModel& m, double nu) {
  const auto q = m.counting_pmf(nu);
  const auto f = m.raw_pmf(nu);
  PosteriorMatrix pm;
  const auto rows = static_cast<std::size_t>(m.n_max() + 1);
  const auto cols = static_cast<std::size_t>(m.k_max() + 1);
  pm.entries.assign(rows, std::vector<double>(cols, 0.0));
  pm.column_defined.assign(cols, false);
  for (std::size_t k = 0; k < cols; ++k) {
    if (!(f[k] > 0.0)) {
      continue;
    }
    pm.column_defined[k] = true;
    for (std::size_t n = 0; n < rows && n <= k; ++n) {
      pm.entries[n][k] = q[n] * m.power(static_cast<std::int64_t>(n))[k] / f[k];
    }
  }
  return pm;
}

std::vector<double> posterior_mean(const CompoundModel& m, double nu) {
  const PosteriorMatrix pm = posterior_matrix(m, nu);
  std::vector<double> mean(pm.column_defined.size(), kNaN);
  for (std::size_t k = 0; k < mean.size(); ++k) {
    if (!pm.column_defined[k]) {
      continue;
    }
    double s = 0.0;
    for (std::size_t n = 0; n < pm.entries.size(); ++n) {
      s += static_cast<double>(n) * pm.entries[n][k];
    }
    mean[k] = s;
  }
  return mean;
}

std::vector<double> compound_kernel_values(const CompoundModel& m, double nu) {
  const PosteriorMatrix pm = posterior_matrix(m, nu);
  std::vector<double> g(pm.entries.size(), 0.0);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double x = static_cast<double>(n);
    if (m.counting().in_support(x)) {
      g[n] = m.counting().kernel(nu, x);
    }
  }
  std::vector<double> out(pm.column_defined.size(), kNaN);
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!pm.column_defined[k]) {
      continue;
    }
    double s = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
      if (pm.entries[n][k] > 0.0) {
        s += g[n] * pm.entries[n][k];
      }
    }
    out[k] = s;
  }
  return out;
}

double compound_kernel(const CompoundModel& m, double nu, std::int64_t k) {
  if (k < 0 || k > m.k_max()) {
    throw std::out_of_range("compound_kernel: k outside {0..k_max}");
  }
  return compound_kernel_values(m, nu)[static_cast<std::size_t>(k)];
}

std::vector<double> compound_score(const CompoundModel& m, double nu) {
  const DensityFamily& c = m.counting();
  const std::int64_t top = discrete_truncation(c, nu, m.grid_options());
  const double log_a = log_normalizer(c, nu, m.grid_options());
  double mean = 0.0;
  for (auto n = static_cast<std::int64_t>(c.support_lower); n <= top; ++n) {
    const double x = static_cast<double>(n);
    mean += c.kernel(nu, x) * std::exp(c.log_factor(nu, x) - log_a);
  }
  auto out = compound_kernel_values(m, nu);
  for (double& v : out) {
    v -= mean;
  }
  return out;
}

std::optional<std::pair<double, double>> affine_coefficients(const DensityFamily& counting, double nu) {
  if (!counting.hints.affine_in_x) {
    return std::nullopt;
  }
  const double a = counting.kernel(nu, 0.0);
  return std::pair{a, counting.kernel(nu, 1.0) - a};
}

ShapeCertificate is_pf2(std::span<const double> pmf, double tol) {
  ShapeCertificate c;
  std::optional<std::size_t> first;
  std::size_t last = 0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    if (pmf[i] < 0.0 || std::isnan(pmf[i])) {
      c.ok = false;
      c.witness = Witness{{static_cast<double>(i)}, std::nullopt, pmf[i]};
      c.reason = "negative mass";
      return c;
    }
    if (pmf[i] > 0.0) {
      if (first && i != last + 1) {
        c.ok = false;
        c.witness = Witness{{static_cast<double>(last), static_cast<double>(i)}, std::nullopt, 0.0};
        c.reason = "support is not an interval";
        return c;
      }
      if (!first) first = i;
      last = i;
    }
  }
  if (!first) {
    c.ok = false;
    c.reason = "no positive mass";
    return c;
  }
  for (std::size_t i = *first; i + 2 <= last; ++i) {
    const double d2 = std::log(pmf[i + 2]) - 2.0 * std::log(pmf[i + 1]) + std::log(pmf[i]);
    if (d2 > tol) {
      c.ok = false;
      c.witness = Witness{{static_cast<double>(i), static_cast<double>(i + 1), static_cast<double>(i + 2)},
                          std::nullopt, -d2};
      c.reason = "not log-concave";
      return c;
    }
  }
  return c;
}

ShapeCertificate is_tp2(const std::vector<std::vector<double>>& M, double tol) {
  ShapeCertificate c;
  const std::size_t rows = M.size();
  const std::size_t cols = rows ? M[0].size() : 0;
  bool all_positive = true;
  for (std::size_t i = 0; i < rows; ++i) {
    if (M[i].size() != cols) {
      throw std::invalid_argument("is_tp2: ragged matrix");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      if (M[i][j] < 0.0 || std::isnan(M[i][j])) {
        c.ok = false;
        c.witness = Witness{{double(i), double(j)}, std::nullopt, M[i][j]};
        c.reason = "negative entry";
        return c;
      }
      all_positive &= M[i][j] > 0.0;
    }
  }
  auto test = [&](std::size_t i, std::size_t i2, std::size_t j, std::size_t j2) {
    const double minor = M[i][j] * M[i2][j2] - M[i][j2] * M[i2][j];
    if (minor < -tol) {
      c.ok = false;
      c.witness = Witness{{double(i), double(i2), double(j), double(j2)}, std::nullopt, minor};
      c.reason = "negative 2x2 minor";
      return false;
    }
    return true;
  };
  if (all_positive) {
    for (std::size_t i = 0; i + 1 < rows; ++i) {
      for (std::size_t j = 0; j + 1 < cols; ++j) {
        if (!test(i, i + 1, j, j + 1)) return c;
      }
    }
    return c;
  }
  // Zeros present: adjacent minors no longer suffice, so scan every pair.
  // A minor whose off-diagonal product vanishes is automatically nonnegative.
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j2 = 1; j2 < cols; ++j2) {
      if (M[i][j2] == 0.0) continue;
      for (std::size_t i2 = i + 1; i2 < rows; ++i2) {
        for (std::size_t j = 0; j < j2; ++j) {
          if (M[i2][j] == 0.0) continue;
          if (!test(i, i2, j, j2)) return c;
        }
      }
    }
  }
  return c;
}

OrderVerdict check_compound_lr(const CompoundModel& m, double nu1, double nu2, std::size_t nu_count,
                               const Tolerances& tol) {
  if (!(nu1 <= nu2)) {
    throw std::invalid_argument("check_compound_lr: need nu1 <= nu2");
  }
  OrderVerdict v;
  v.order = Order::lr;
  v.method = Method::kernel_criterion;
  v.tolerances = tol;
  v.certification = "scanned";
  auto claim = [&](Direction d) {
    const std::string lhs = d == Direction::up ? "C(nu)" : "C(nu')";
    const std::string rhs = d == Direction::up ? "C(nu')" : "C(nu)";
    return lhs + " <=lr " + rhs + " for nu <= nu' in [" + fmt(nu1) + ", " + fmt(nu2) + "]";
  };
  const ShapeCertificate pf2 = is_pf2(m.summand().masses);
  if (!pf2.ok) {
    v.status = Status::inconclusive;
    v.witness = pf2.witness;
    v.claim = claim(Direction::up);
    v.note = "hypothesis unmet: summand law is not PF2 (" + pf2.reason + ")";
    return v;
  }
  const std::vector<double> nus = nu1 == nu2 ? std::vector<double>{nu1} : nu_scan(nu1, nu2, std::max<std::size_t>(nu_count, 2));
  const DensityFamily& c = m.counting();
  const auto lo = static_cast<std::int64_t>(c.support_lower);
  bool up_ok = true;
  bool down_ok = true;
  std::optional<Witness> up_witness;
  for (double nu : nus) {
    for (std::int64_t n = lo; n < m.n_max(); ++n) {
      const double delta = c.kernel(nu, double(n + 1)) - c.kernel(nu, double(n));
      if (up_ok && delta < -tol.shape) {
        up_ok = false;
        up_witness = Witness{{double(n), double(n + 1)}, nu, delta};
      }
      if (delta > tol.shape) {
        down_ok = false;
      }
    }
  }
  v.note = "summand PF2 certified on {0.." + std::to_string(m.summand().masses.size() - 1) +
           "}; counting kernel scanned at " + std::to_string(nus.size()) + " parameter values";
  if (up_ok) {
    v.direction = Direction::up;
    v.status = Status::holds;
  } else if (down_ok) {
    v.direction = Direction::down;
    v.status = Status::holds;
  } else {
    v.direction = Direction::up;
    v.status = Status::inconclusive;
    v.witness = up_witness;
    v.note += "; counting kernel is not monotone in n";
  }
  v.claim = claim(v.direction);
  return v;
}

Distribution poisson_binomial_pmf(std::span<const double> p) {
  std::vector<double> pmf{1.0};
  for (double pi : p) {
    if (!(pi >= 0.0 && pi <= 1.0)) {
      throw std::invalid_argument("poisson_binomial_pmf: probabilities must lie in [0, 1]");
    }
    std::vector<double> next(pmf.size() + 1, 0.0);
    for (std::size_t k = 0; k < pmf.size(); ++k) {
      next[k] += pmf[k] * (1.0 - pi);
      next[k + 1] += pmf[k] * pi;
    }
    pmf = std::move(next);
  }
  Distribution d;
  d.support = SupportGrid::integers(0, static_cast<std::int64_t>(p.size()));
  d.masses = std::move(pmf);
  d.label = "poisson-binomial";
  return d;
}

const std::vector<CompoundTableRow>& compound_table_rows() {
  static const std::vector<CompoundTableRow> rows = {
      {"Poisson(lambda)", "poisson", "lambda", "n/lambda", "+1/lambda", +1, Direction::up, 0.5, 3.0},
      {"Geometric(p) on N0", "geometric", "p", "-n/(1-p)", "-1/(1-p)", -1, Direction::down, 0.3, 0.7},
      {"NB(alpha,p), alpha fixed", "negbinomial-in-p:r=3", "p", "alpha/p - n/(1-p)", "-1/(1-p)", -1,
       Direction::down, 0.4, 0.8},
      {"Bin(n0,p), n0 fixed", "binomial-in-p:n=5", "p", "n/(p(1-p)) - n0/(1-p)", "+1/(p(1-p))", +1, Direction::up,
       0.2, 0.7},
      {"LogSeries(theta) on N", "logseries", "theta", "n/theta", "+1/theta", +1, Direction::up, 0.2, 0.7},
  };
  return rows;
}

bool CompoundRowCheck::pass(const CompoundTableRow& row) const {
  return observed_slope_sign == row.slope_sign && summand_pf2 && criterion.holds() &&
         criterion.direction == row.direction && oracle.holds();
}

CompoundRowCheck check_compound_row(const CompoundTableRow& row, const SummandLaw& summand, std::int64_t k_max,
                                    const Tolerances& tol) {
  CompoundModel m(make_family(row.counting_spec), summand, k_max);
  CompoundRowCheck out;
  out.law = row.law;
  out.summand_pf2 = is_pf2(summand.masses).ok;
  bool pos = true;
  bool neg = true;
  for (double nu : nu_scan(row.nu1, row.nu2, 9)) {
    const double slope = m.counting().kernel(nu, 1.0) - m.counting().kernel(nu, 0.0);
    pos &= slope > 0.0;
    neg &= slope < 0.0;
  }
  out.observed_slope_sign = pos ? +1 : (neg ? -1 : 0);
  out.criterion = check_compound_lr(m, row.nu1, row.nu2, 17, tol);
  const Distribution c1 = compound_pmf(m, row.nu1);
  const Distribution c2 = compound_pmf(m, row.nu2);
  out.max_tail_mass = std::max(c1.tail_mass, c2.tail_mass);
  out.oracle = row.direction == Direction::up ? oracle_lr(c1, c2, tol) : oracle_lr(c2, c1, tol);
  return out;
}

}  // namespace kernord
