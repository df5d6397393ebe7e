#include "kernord/pairwise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "kernord/criteria.hpp"
#include "kernord/oracle.hpp"
#include "kernord/special.hpp"

namespace kernord {

namespace sf = special;

namespace {

std::string num(double v) { return format_shortest(v); }

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Named lookups with validation; leftovers are rejected by finish().
class Params {
 public:
  Params(std::string owner, const ParamMap& m) : owner_(std::move(owner)), m_(m) {}

  double get(const std::string& key) {
    auto it = m_.find(key);
    if (it == m_.end()) {
      throw SpecError(owner_ + ": missing parameter '" + key + "'", key);
    }
    ++used_;
    return it->second;
  }
  double positive(const std::string& key) {
    const double v = get(key);
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw SpecError(owner_ + ": parameter '" + key + "' must be positive", key + "=" + num(v));
    }
    return v;
  }
  double probability(const std::string& key) {
    const double v = get(key);
    if (!(v > 0.0 && v < 1.0)) {
      throw SpecError(owner_ + ": parameter '" + key + "' must lie in (0, 1)", key + "=" + num(v));
    }
    return v;
  }
  std::int64_t count(const std::string& key, double min = 1.0) {
    const double v = get(key);
    if (!(v >= min) || v != std::floor(v) || v > 1e6) {
      throw SpecError(owner_ + ": parameter '" + key + "' must be an integer >= " + short_num(min),
                      key + "=" + num(v));
    }
    return static_cast<std::int64_t>(v);
  }
  void finish() const {
    if (used_ == m_.size()) {
      return;
    }
    // Report the first key that was never asked for.
    for (const auto& [k, v] : m_) {
      (void)v;
      if (!asked(k)) {
        throw SpecError(owner_ + ": unknown parameter '" + k + "'", k);
      }
    }
  }
  void expect(std::initializer_list<const char*> keys) { expected_.assign(keys.begin(), keys.end()); }

 private:
  bool asked(const std::string& k) const {
    return std::find(expected_.begin(), expected_.end(), k) != expected_.end();
  }

  std::string owner_;
  const ParamMap& m_;
  std::size_t used_ = 0;
  std::vector<std::string> expected_;
};

double log1m(double p) { return std::log1p(-p); }

std::string join_spec(const std::string& name, const std::vector<std::pair<std::string, double>>& kv) {
  std::string s = name;
  char sep = ':';
  for (const auto& [k, v] : kv) {
    s += sep;
    s += k + "=" + num(v);
    sep = ',';
  }
  return s;
}

bool below_or_equal(double lhs, double rhs) {
  return lhs <= rhs + 1e-12 * std::max(std::abs(lhs), std::abs(rhs));
}

std::int64_t upper_or_max(const std::optional<std::int64_t>& u) {
  return u ? *u : std::numeric_limits<std::int64_t>::max();
}

}  // namespace

// --- factor laws -------------------------------------------------------------

FactorLaw make_factor_law(std::string_view spec) {
  const ParsedSpec parsed = parse_spec(spec);
  const ParamMap m = parsed.as_map();
  Params p(parsed.name, m);
  FactorLaw law;
  const std::string& name = parsed.name;
  if (name == "binomial") {
    p.expect({"n", "p"});
    const std::int64_t n = p.count("n");
    const double pr = p.probability("p");
    law.spec = join_spec(name, {{"n", static_cast<double>(n)}, {"p", pr}});
    law.upper = n;
    law.log_factor = [n, pr](std::int64_t k) {
      return sf::log_binomial(n, k) + static_cast<double>(k) * std::log(pr) +
             static_cast<double>(n - k) * log1m(pr);
    };
  } else if (name == "poisson") {
    p.expect({"lambda"});
    const double lambda = p.positive("lambda");
    law.spec = join_spec(name, {{"lambda", lambda}});
    law.ratio_limit = 0.0;
    law.log_factor = [lambda](std::int64_t k) {
      return static_cast<double>(k) * std::log(lambda) - sf::log_factorial(k);
    };
  } else if (name == "negbinomial") {
    p.expect({"r", "p"});
    const double r = p.positive("r");
    const double pr = p.probability("p");
    law.spec = join_spec(name, {{"r", r}, {"p", pr}});
    law.ratio_limit = 1.0 - pr;
    law.log_factor = [r, pr](std::int64_t k) {
      return sf::log_pochhammer(r, k) - sf::log_factorial(k) + static_cast<double>(k) * log1m(pr);
    };
  } else if (name == "geometric") {
    p.expect({"p"});
    const double pr = p.probability("p");
    law.spec = join_spec(name, {{"p", pr}});
    law.ratio_limit = 1.0 - pr;
    law.log_factor = [pr](std::int64_t k) { return static_cast<double>(k) * log1m(pr); };
  } else if (name == "cmp") {
    p.expect({"lambda", "nu"});
    const double lambda = p.positive("lambda");
    const double nu = p.positive("nu");
    law.spec = join_spec(name, {{"lambda", lambda}, {"nu", nu}});
    law.ratio_limit = 0.0;
    law.log_factor = [lambda, nu](std::int64_t k) {
      return static_cast<double>(k) * std::log(lambda) - nu * sf::log_factorial(k);
    };
  } else if (name == "betabinomial") {
    p.expect({"n", "r", "s"});
    const std::int64_t n = p.count("n");
    const double r = p.positive("r");
    const double s = p.positive("s");
    law.spec = join_spec(name, {{"n", static_cast<double>(n)}, {"r", r}, {"s", s}});
    law.upper = n;
    law.log_factor = [n, r, s](std::int64_t k) {
      return sf::log_binomial(n, k) + sf::log_pochhammer(r, k) + sf::log_pochhammer(s, n - k);
    };
  } else if (name == "hypergeometric") {
    p.expect({"B", "W", "n"});
    const std::int64_t B = p.count("B", 0.0);
    const std::int64_t W = p.count("W", 0.0);
    const std::int64_t n = p.count("n");
    if (n > B + W) {
      throw SpecError("hypergeometric: n must not exceed B + W", "n=" + num(static_cast<double>(n)));
    }
    law.spec = join_spec(name, {{"B", static_cast<double>(B)}, {"W", static_cast<double>(W)},
                                {"n", static_cast<double>(n)}});
    law.lower = std::max<std::int64_t>(0, n - W);
    law.upper = std::min(n, B);
    law.log_factor = [B, W, n](std::int64_t k) { return sf::log_binomial(B, k) + sf::log_binomial(W, n - k); };
  } else {
    throw SpecError("unknown factor law", name);
  }
  p.finish();
  return law;
}

std::int64_t factor_truncation(const FactorLaw& law, const GridOptions& opts) {
  if (law.upper) {
    if (*law.upper - law.lower > opts.k_max_cap) {
      throw TruncationError(law.spec + ": finite support longer than the k_max cap");
    }
    return *law.upper;
  }
  const std::int64_t cap = law.lower + opts.k_max_cap;
  const double first = law.log_factor(law.lower);
  double sum = 1.0;
  double prev_log = first;
  double prev_ratio = kInf;
  for (std::int64_t k = law.lower + 1; k <= cap; ++k) {
    const double lw = law.log_factor(k);
    const double term = std::exp(lw - first);
    sum += term;
    const double ratio = std::exp(lw - prev_log);
    double m = kInf;  // bound on every later term ratio
    if (!std::isnan(law.ratio_limit)) {
      m = std::max(ratio, law.ratio_limit);
    } else if (ratio <= prev_ratio * (1.0 + 1e-12)) {
      m = ratio;
    }
    if (m < 1.0 && term * m / (1.0 - m) <= opts.eps_tail * sum) {
      return k;
    }
    prev_ratio = ratio;
    prev_log = lw;
  }
  throw TruncationError(law.spec + ": tail mass target " + short_num(opts.eps_tail) +
                        " unreachable within k_max cap " + std::to_string(opts.k_max_cap));
}

Distribution factor_distribution(const FactorLaw& law, const GridOptions& opts) {
  return factor_distribution(law, factor_truncation(law, opts), opts);
}

Distribution factor_distribution(const FactorLaw& law, std::int64_t upper, const GridOptions& opts) {
  const std::int64_t hi = law.upper ? std::min(upper, *law.upper) : upper;
  if (hi < law.lower || hi - law.lower > opts.k_max_cap) {
    throw std::invalid_argument(law.spec + ": upper end " + std::to_string(upper) + " outside the usable range");
  }
  SupportGrid grid = SupportGrid::integers(law.lower, hi);
  std::vector<double> lw(grid.size());
  double top = -kInf;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    lw[i] = law.log_factor(law.lower + static_cast<std::int64_t>(i));
    top = std::max(top, lw[i]);
  }
  double tail = 0.0;
  if (!law.upper) {
    // Geometric bound on what lies beyond the grid, relative to the kept mass.
    double kept = 0.0;
    for (double v : lw) {
      kept += std::exp(v - top);
    }
    const double last = lw.back();
    const double ratio = std::exp(law.log_factor(hi + 1) - last);
    const double m = std::isnan(law.ratio_limit) ? ratio : std::max(ratio, law.ratio_limit);
    tail = m < 1.0 ? std::exp(last - top) * m / (1.0 - m) / kept : 0.0;
  }
  return normalise_log_masses(std::move(grid), lw, tail, law.spec);
}

std::pair<Distribution, Distribution> factor_distributions(const FactorLaw& P, const FactorLaw& Q,
                                                           const GridOptions& opts) {
  const std::int64_t hi = std::max(factor_truncation(P, opts), factor_truncation(Q, opts));
  return {factor_distribution(P, hi, opts), factor_distribution(Q, hi, opts)};
}

// --- pairwise kernel -----------------------------------------------------------

PairwiseKernel pairwise_kernel(const FactorLaw& P, const FactorLaw& Q, const GridOptions& opts) {
  PairwiseKernel pk;
  pk.p_spec = P.spec;
  pk.q_spec = Q.spec;
  pk.p_lower = P.lower;
  pk.q_lower = Q.lower;
  pk.p_upper = P.upper;
  pk.q_upper = Q.upper;
  const std::int64_t lo = std::max(P.lower, Q.lower);
  std::int64_t hi = 0;
  if (P.upper && Q.upper) {
    hi = std::min(*P.upper, *Q.upper);
  } else if (P.upper) {
    hi = *P.upper;
  } else if (Q.upper) {
    hi = *Q.upper;
  } else {
    hi = std::max(factor_truncation(P, opts), factor_truncation(Q, opts));
  }
  if (hi < lo) {
    throw std::invalid_argument("pairwise_kernel: " + P.spec + " and " + Q.spec + " have disjoint supports");
  }
  pk.grid = SupportGrid::integers(lo, hi);
  pk.values.resize(pk.grid.size());
  for (std::size_t i = 0; i < pk.grid.size(); ++i) {
    const std::int64_t k = lo + static_cast<std::int64_t>(i);
    pk.values[i] = P.log_factor(k) - Q.log_factor(k);
  }
  for (std::size_t i = 0; i + 1 < pk.values.size(); ++i) {
    pk.d1.push_back(pk.values[i + 1] - pk.values[i]);
  }
  for (std::size_t i = 0; i + 1 < pk.d1.size(); ++i) {
    pk.d2.push_back(pk.d1[i + 1] - pk.d1[i]);
  }
  return pk;
}

OrderVerdict check_pairwise(const PairwiseKernel& pk, Order order, const Tolerances& tol) {
  if (order != Order::lr && order != Order::lc) {
    throw std::invalid_argument("check_pairwise: only lr and lc follow from the pairwise kernel");
  }
  OrderVerdict v;
  v.order = order;
  v.direction = Direction::up;
  v.method = Method::kernel_criterion;
  v.tolerances = tol;
  v.status = Status::holds;
  const bool finite = pk.p_upper.has_value() || pk.q_upper.has_value();
  v.certification = finite ? "exact" : "truncated";
  const auto& x = pk.grid.points;
  // Rounding in K grows with |K|, so differences are judged relative to it.
  auto scale = [&](std::size_t i, std::size_t count) {
    double m = 0.0;
    for (std::size_t j = i; j < i + count; ++j) {
      m = std::max(m, std::abs(pk.values[j]));
    }
    return 1.0 + m;
  };

  if (order == Order::lr) {
    v.claim = pk.q_spec + " <=lr " + pk.p_spec;
    v.note = "K = log(w_P/w_Q) nondecreasing on the common support";
    // f_Q/f_P is +inf where only Q lives and 0 where only P lives; those
    // stretches must sit to the left and to the right respectively.
    if (pk.q_lower > pk.p_lower) {
      v.status = Status::fails;
      v.witness = Witness{{static_cast<double>(pk.p_lower), static_cast<double>(pk.q_lower)}, std::nullopt, -kInf};
      v.note = "second law puts mass left of the first law's support";
      return v;
    }
    if (upper_or_max(pk.q_upper) > upper_or_max(pk.p_upper)) {
      const double top = static_cast<double>(*pk.p_upper);
      v.status = Status::fails;
      v.witness = Witness{{top, top + 1.0}, std::nullopt, -kInf};
      v.note = "second law puts mass right of the first law's support";
      return v;
    }
    for (std::size_t i = 0; i < pk.d1.size(); ++i) {
      if (pk.d1[i] < -tol.shape * scale(i, 2)) {
        v.status = Status::fails;
        v.witness = Witness{{x[i], x[i + 1]}, std::nullopt, pk.d1[i]};
        return v;
      }
    }
    return v;
  }

  v.claim = pk.p_spec + " <=lc " + pk.q_spec;
  v.note = "K = log(w_P/w_Q) concave on the support of P";
  if (pk.p_lower < pk.q_lower || upper_or_max(pk.p_upper) > upper_or_max(pk.q_upper)) {
    v.status = Status::inconclusive;
    v.note = "relative log-concavity undefined: support of the first law is not inside the second";
    return v;
  }
  for (std::size_t i = 0; i < pk.d2.size(); ++i) {
    if (pk.d2[i] > tol.shape * scale(i, 3)) {
      v.status = Status::fails;
      v.witness = Witness{{x[i], x[i + 1], x[i + 2]}, std::nullopt, -pk.d2[i]};
      return v;
    }
  }
  return v;
}

// --- Katz-class closed forms -----------------------------------------------------

std::string to_string(KatzPair p) {
  switch (p) {
    case KatzPair::bin_poi:
      return "bin-poi";
    case KatzPair::bin_nb:
      return "bin-nb";
    case KatzPair::poi_nb:
      return "poi-nb";
  }
  throw std::logic_error("unknown Katz pair");
}

KatzPair parse_katz_pair(std::string_view s) {
  for (KatzPair p : {KatzPair::bin_poi, KatzPair::bin_nb, KatzPair::poi_nb}) {
    if (s == to_string(p)) {
      return p;
    }
  }
  throw std::invalid_argument("unknown Katz pair '" + std::string(s) + "' (expected bin-poi, bin-nb or poi-nb)");
}

namespace {

struct KatzValues {
  double n = 0, p = 0, lambda = 0, r = 0, pi = 0;
};

KatzValues katz_values(KatzPair pair, const ParamMap& params) {
  Params g(to_string(pair), params);
  KatzValues v;
  switch (pair) {
    case KatzPair::bin_poi:
      g.expect({"n", "p", "lambda"});
      v.n = static_cast<double>(g.count("n"));
      v.p = g.probability("p");
      v.lambda = g.positive("lambda");
      break;
    case KatzPair::bin_nb:
      g.expect({"n", "p", "r", "pi"});
      v.n = static_cast<double>(g.count("n"));
      v.p = g.probability("p");
      v.r = g.positive("r");
      v.pi = g.probability("pi");
      break;
    case KatzPair::poi_nb:
      g.expect({"lambda", "r", "p"});
      v.lambda = g.positive("lambda");
      v.r = g.positive("r");
      v.p = g.probability("p");
      break;
  }
  g.finish();
  return v;
}

}  // namespace

KatzCondition katz_threshold(KatzPair pair, const ParamMap& params) {
  const KatzValues v = katz_values(pair, params);
  KatzCondition c;
  switch (pair) {
    case KatzPair::bin_poi:
      c.lr_lhs = v.n * v.p;
      c.lr_rhs = (1.0 - v.p) * v.lambda;
      c.st_lhs = -v.lambda;  // log e^{-lambda} <= log (1-p)^n
      c.st_rhs = v.n * log1m(v.p);
      c.lr_text = "n p <= (1-p) lambda";
      c.st_text = "(1-p)^n >= exp(-lambda)";
      break;
    case KatzPair::bin_nb:
      // The likelihood-ratio step at k = 0 is n p / ((1-p) r (1-pi)), and the
      // steps decrease in k, so this single inequality is exact.
      c.lr_lhs = v.n * v.p;
      c.lr_rhs = (1.0 - v.p) * v.r * (1.0 - v.pi);
      c.st_lhs = v.r * std::log(v.pi);
      c.st_rhs = v.n * log1m(v.p);
      c.lr_text = "n p <= (1-p) r (1-pi)";
      c.st_text = "(1-p)^n >= pi^r";
      break;
    case KatzPair::poi_nb:
      c.lr_lhs = v.lambda;
      c.lr_rhs = v.r * (1.0 - v.p);
      c.st_lhs = v.r * std::log(v.p);
      c.st_rhs = -v.lambda;
      c.lr_text = "lambda <= r (1-p)";
      c.st_text = "exp(-lambda) >= p^r";
      break;
  }
  c.lr = below_or_equal(c.lr_lhs, c.lr_rhs);
  c.st = below_or_equal(c.st_lhs, c.st_rhs);
  return c;
}

std::pair<std::string, std::string> katz_laws(KatzPair pair, const ParamMap& params) {
  const KatzValues v = katz_values(pair, params);
  switch (pair) {
    case KatzPair::bin_poi:
      return {join_spec("binomial", {{"n", v.n}, {"p", v.p}}), join_spec("poisson", {{"lambda", v.lambda}})};
    case KatzPair::bin_nb:
      return {join_spec("binomial", {{"n", v.n}, {"p", v.p}}), join_spec("negbinomial", {{"r", v.r}, {"p", v.pi}})};
    case KatzPair::poi_nb:
      return {join_spec("poisson", {{"lambda", v.lambda}}), join_spec("negbinomial", {{"r", v.r}, {"p", v.p}})};
  }
  throw std::logic_error("unknown Katz pair");
}

std::vector<KatzCell> katz_sweep(KatzPair pair, Order boundary) {
  if (boundary != Order::lr && boundary != Order::st) {
    throw std::invalid_argument("katz_sweep: boundary must be lr or st");
  }
  static constexpr double kFactors[] = {0.8, 0.9, 1.0, 1.1, 1.2};
  std::vector<KatzCell> cells;
  const bool lr = boundary == Order::lr;
  switch (pair) {
    case KatzPair::bin_poi: {
      const double n = 10.0;
      for (double p : {0.02, 0.05, 0.1, 0.2, 0.3}) {
        const double star = lr ? n * p / (1.0 - p) : -n * log1m(p);
        for (double f : kFactors) {
          cells.push_back({ParamMap{{"n", n}, {"p", p}, {"lambda", f * star}}, f});
        }
      }
      break;
    }
    case KatzPair::bin_nb: {
      const double n = 10.0;
      const double pi = 0.5;
      for (double p : {0.02, 0.05, 0.1, 0.2, 0.3}) {
        const double star = lr ? n * p / ((1.0 - p) * (1.0 - pi)) : n * log1m(p) / std::log(pi);
        for (double f : kFactors) {
          cells.push_back({ParamMap{{"n", n}, {"p", p}, {"r", f * star}, {"pi", pi}}, f});
        }
      }
      break;
    }
    case KatzPair::poi_nb: {
      const double r = 3.0;
      for (double p : {0.2, 0.35, 0.5, 0.65, 0.8}) {
        const double star = lr ? r * (1.0 - p) : -r * std::log(p);
        for (double f : kFactors) {
          cells.push_back({ParamMap{{"lambda", f * star}, {"r", r}, {"p", p}}, f});
        }
      }
      break;
    }
  }
  return cells;
}

// --- beta-binomial versus hypergeometric ---------------------------------------

double betabin_hyp_delta(double B, double W, std::int64_t n, double r, double s, std::int64_t k) {
  const double kk = static_cast<double>(k);
  const double nn = static_cast<double>(n);
  return std::log((B - kk) * (s + nn - kk - 1.0)) - std::log((W - nn + kk + 1.0) * (r + kk));
}

BetaBinHypCheck betabin_hyp_condition(double B, double W, std::int64_t n, double r, double s,
                                      const Tolerances& tol) {
  const double nn = static_cast<double>(n);
  if (n < 1 || B != std::floor(B) || W != std::floor(W) || B < nn || W < nn || !(r > 0.0) || !(s > 0.0)) {
    throw std::invalid_argument("betabin_hyp_condition: need integers B, W >= n >= 1 and r, s > 0");
  }
  BetaBinHypCheck c;
  c.lhs = W * (r + nn - 1.0);
  c.rhs = s * (B - nn + 1.0);
  c.condition = below_or_equal(c.lhs, c.rhs);

  const FactorLaw hyp = make_factor_law(join_spec("hypergeometric", {{"B", B}, {"W", W}, {"n", nn}}));
  const FactorLaw bb = make_factor_law(join_spec("betabinomial", {{"n", nn}, {"r", r}, {"s", s}}));
  const PairwiseKernel pk = pairwise_kernel(hyp, bb);
  for (std::size_t i = 0; i < pk.d1.size(); ++i) {
    const double formula = betabin_hyp_delta(B, W, n, r, s, static_cast<std::int64_t>(i));
    c.max_formula_error = std::max(c.max_formula_error, std::abs(formula - pk.d1[i]));
  }
  c.kernel = check_pairwise(pk, Order::lr, tol);
  c.oracle = oracle_lr(factor_distribution(bb), factor_distribution(hyp), tol);
  return c;
}

// --- chain-rule paths ----------------------------------------------------------

double path_kernel(const ParamPath& path, double t, double x) {
  const ThetaVec th = path.theta(t);
  const ThetaVec dot = path.theta_dot(t);
  double k = 0.0;
  for (std::size_t i = 0; i < path.dim; ++i) {
    if (dot[i] != 0.0) {
      k += dot[i] * path.component_kernels[i](th, x);
    }
  }
  return k;
}

void validate_path(const ParamPath& path, std::size_t samples) {
  if (path.component_kernels.size() != path.dim || !path.theta || !path.theta_dot || !path.log_factor) {
    throw std::invalid_argument(path.name + ": incomplete path description");
  }
  if (!(path.t_lo < path.t_hi) || samples < 2) {
    throw std::invalid_argument(path.name + ": empty parameter range");
  }
  for (std::size_t j = 0; j < samples; ++j) {
    const double t = path.t_lo + (path.t_hi - path.t_lo) * static_cast<double>(j) / static_cast<double>(samples - 1);
    const ThetaVec th = path.theta(t);
    if (th.size() != path.dim || (path.valid && !path.valid(th))) {
      throw std::invalid_argument(path.name + ": invalid parameter at t=" + short_num(t));
    }
    const double h = 1e-6 * std::max(1.0, std::abs(t));
    const double a = std::max(path.t_lo, t - h);
    const double b = std::min(path.t_hi, t + h);
    const ThetaVec ta = path.theta(a);
    const ThetaVec tb = path.theta(b);
    const ThetaVec dot = path.theta_dot(t);
    for (std::size_t i = 0; i < path.dim; ++i) {
      const double fd = (tb[i] - ta[i]) / (b - a);
      if (std::abs(fd - dot[i]) > 1e-6 * std::max(1.0, std::abs(dot[i]))) {
        throw std::invalid_argument(path.name + ": theta_dot disagrees with theta at t=" + short_num(t));
      }
    }
  }
}

DensityFamily path_family(const ParamPath& path) {
  DensityFamily f;
  f.name = path.name;
  f.varying = "t";
  f.param = ParamInterval{std::nextafter(path.t_lo, -kInf), std::nextafter(path.t_hi, kInf)};
  f.kind = path.kind;
  f.support_lower = path.support_lower;
  f.support_upper = path.support_upper;
  f.log_factor = [path](double t, double x) { return path.log_factor(path.theta(t), x); };
  f.kernel = [path](double t, double x) { return path_kernel(path, t, x); };
  if (path.log_normalizer) {
    f.log_normalizer = [path](double t) { return path.log_normalizer(path.theta(t)); };
  }
  if (path.effective_range) {
    f.effective_range = [path](double t, double q) { return path.effective_range(path.theta(t), q); };
  }
  return f;
}

namespace {

ParamPath linear2(std::string name, double a1, double a2, double b1, double b2) {
  ParamPath p;
  p.name = std::move(name);
  p.dim = 2;
  p.theta = [=](double t) { return ThetaVec{a1 + t * (a2 - a1), b1 + t * (b2 - b1)}; };
  p.theta_dot = [=](double) { return ThetaVec{a2 - a1, b2 - b1}; };
  return p;
}

void set_betabinomial(ParamPath& p, std::int64_t n) {
  const double nn = static_cast<double>(n);
  p.component_kernels = {
      [](const ThetaVec& th, double x) {
        return sf::digamma(th[0] + x) - sf::digamma(th[0]);
      },
      [nn](const ThetaVec& th, double x) { return sf::digamma(th[1] + nn - x) - sf::digamma(th[1]); },
  };
  p.log_factor = [n](const ThetaVec& th, double x) {
    const auto k = static_cast<std::int64_t>(x);
    return sf::log_binomial(n, k) + sf::log_pochhammer(th[0], k) + sf::log_pochhammer(th[1], n - k);
  };
  p.log_normalizer = [n](const ThetaVec& th) { return sf::log_pochhammer(th[0] + th[1], n); };
  p.valid = [](const ThetaVec& th) { return th[0] > 0.0 && th[1] > 0.0; };
  p.kind = SupportKind::discrete;
  p.support_lower = 0.0;
  p.support_upper = nn;
}

void set_gamma(ParamPath& p, bool scale) {
  p.kind = SupportKind::continuous;
  p.support_lower = 0.0;
  p.support_upper = kInf;
  p.valid = [](const ThetaVec& th) { return th[0] > 0.0 && th[1] > 0.0; };
  // theta = (shape, scale) or (shape, rate).
  auto rate = [scale](const ThetaVec& th) { return scale ? 1.0 / th[1] : th[1]; };
  p.log_factor = [rate](const ThetaVec& th, double x) { return (th[0] - 1.0) * std::log(x) - rate(th) * x; };
  p.log_normalizer = [rate](const ThetaVec& th) { return sf::log_gamma(th[0]) - th[0] * std::log(rate(th)); };
  p.effective_range = [rate](const ThetaVec& th, double q) {
    return make_family("gamma-in-shape", ParamMap{{"rate", rate(th)}}).effective_range(th[0], q);
  };
  p.component_kernels.push_back([](const ThetaVec&, double x) { return std::log(x); });
  if (scale) {
    p.component_kernels.push_back([](const ThetaVec& th, double x) { return x / (th[1] * th[1]); });
  } else {
    p.component_kernels.push_back([](const ThetaVec&, double x) { return -x; });
  }
}

}  // namespace

ParamPath nb_linear_path(double r1, double r2, double q1, double q2) {
  ParamPath p = linear2("nb-linear", r1, r2, q1, q2);
  p.component_kernels = {
      [](const ThetaVec& th, double x) { return sf::digamma(th[0] + x) - sf::digamma(th[0]); },
      [](const ThetaVec& th, double x) { return x / th[1]; },
  };
  p.log_factor = [](const ThetaVec& th, double x) {
    const auto k = static_cast<std::int64_t>(x);
    return sf::log_pochhammer(th[0], k) - sf::log_factorial(k) + x * std::log(th[1]);
  };
  p.log_normalizer = [](const ThetaVec& th) { return -th[0] * log1m(th[1]); };
  p.valid = [](const ThetaVec& th) { return th[0] > 0.0 && th[1] > 0.0 && th[1] < 1.0; };
  p.kind = SupportKind::discrete;
  return p;
}

ParamPath betabinomial_linear_path(std::int64_t n, double r1, double r2, double s1, double s2) {
  ParamPath p = linear2("betabinomial-linear", r1, r2, s1, s2);
  set_betabinomial(p, n);
  return p;
}

ParamPath betabinomial_binomial_path(std::int64_t n, double r, double s, double p, double c_max) {
  ParamPath path;
  path.name = "betabinomial-binomial";
  path.dim = 2;
  path.theta = [=](double c) { return ThetaVec{r + c * p, s + c * (1.0 - p)}; };
  path.theta_dot = [=](double) { return ThetaVec{p, 1.0 - p}; };
  path.t_lo = 0.0;
  path.t_hi = c_max;
  set_betabinomial(path, n);
  return path;
}

ParamPath gamma_shape_scale_path(double r0, double r1, double beta0, double beta1) {
  ParamPath p = linear2("gamma-shape-scale", r0, r1, beta0, beta1);
  set_gamma(p, true);
  return p;
}

ParamPath gamma_shape_rate_path(double r0, double r1, double rho0, double rho1) {
  ParamPath p = linear2("gamma-shape-rate", r0, r1, rho0, rho1);
  set_gamma(p, false);
  return p;
}

ParamPath geometric_interpolation_path(const FactorLaw& P, const FactorLaw& Q, const GridOptions& opts) {
  (void)opts;
  ParamPath path;
  path.name = "geometric-interpolation(" + P.spec + ", " + Q.spec + ")";
  path.dim = 1;
  path.theta = [](double t) { return ThetaVec{t}; };
  path.theta_dot = [](double) { return ThetaVec{1.0}; };
  path.t_lo = 0.0;
  path.t_hi = 1.0;
  auto wp = P.log_factor;
  auto wq = Q.log_factor;
  path.component_kernels = {[wp, wq](const ThetaVec&, double x) {
    const auto k = static_cast<std::int64_t>(x);
    return wp(k) - wq(k);
  }};
  path.log_factor = [wp, wq](const ThetaVec& th, double x) {
    const auto k = static_cast<std::int64_t>(x);
    return th[0] * wp(k) + (1.0 - th[0]) * wq(k);
  };
  path.valid = [](const ThetaVec& th) { return th[0] >= 0.0 && th[0] <= 1.0; };
  path.kind = SupportKind::discrete;
  path.support_lower = static_cast<double>(std::max(P.lower, Q.lower));
  if (P.upper || Q.upper) {
    path.support_upper = static_cast<double>(std::min(upper_or_max(P.upper), upper_or_max(Q.upper)));
  }
  return path;
}

ParamPath make_path(std::string_view spec) {
  const ParsedSpec parsed = parse_spec(spec);
  const ParamMap m = parsed.as_map();
  Params g(parsed.name, m);
  ParamPath path;
  const std::string& name = parsed.name;
  if (name == "nb-linear") {
    g.expect({"r1", "r2", "q1", "q2"});
    const double r1 = g.positive("r1"), r2 = g.positive("r2");
    const double q1 = g.probability("q1"), q2 = g.probability("q2");
    path = nb_linear_path(r1, r2, q1, q2);
  } else if (name == "betabinomial-linear") {
    g.expect({"n", "r1", "r2", "s1", "s2"});
    const std::int64_t n = g.count("n");
    const double r1 = g.positive("r1"), r2 = g.positive("r2");
    const double s1 = g.positive("s1"), s2 = g.positive("s2");
    path = betabinomial_linear_path(n, r1, r2, s1, s2);
  } else if (name == "betabinomial-binomial") {
    g.expect({"n", "r", "s", "p", "cmax"});
    const std::int64_t n = g.count("n");
    const double r = g.positive("r"), s = g.positive("s");
    const double p = g.probability("p");
    const double cmax = g.positive("cmax");
    path = betabinomial_binomial_path(n, r, s, p, cmax);
  } else if (name == "gamma-shape-scale") {
    g.expect({"r0", "r1", "beta0", "beta1"});
    const double r0 = g.positive("r0"), r1 = g.positive("r1");
    const double b0 = g.positive("beta0"), b1 = g.positive("beta1");
    path = gamma_shape_scale_path(r0, r1, b0, b1);
  } else if (name == "gamma-shape-rate") {
    g.expect({"r0", "r1", "rho0", "rho1"});
    const double r0 = g.positive("r0"), r1 = g.positive("r1");
    const double h0 = g.positive("rho0"), h1 = g.positive("rho1");
    path = gamma_shape_rate_path(r0, r1, h0, h1);
  } else {
    throw SpecError("unknown path", name);
  }
  g.finish();
  path.name = std::string(spec);
  return path;
}

PathOrderCheck check_path_order(const ParamPath& path, Order order, Direction dir, std::size_t t_points,
                                const Tolerances& tol, const GridOptions& opts) {
  validate_path(path, t_points);
  const DensityFamily fam = path_family(path);
  std::vector<double> ts(t_points);
  for (std::size_t j = 0; j < t_points; ++j) {
    ts[j] = path.t_lo + (path.t_hi - path.t_lo) * static_cast<double>(j) / static_cast<double>(t_points - 1);
  }
  ts.back() = path.t_hi;
  const SupportGrid grid = default_grid(fam, ts, opts);
  const ScanSetup setup{fam, ts, grid, tol, opts};
  PathOrderCheck out;
  out.criterion = check_order(setup, order, dir);
  out.criterion.claim = path.name + ": " + family_claim(order, dir, path.t_lo, path.t_hi);

  Distribution lo = density(fam, path.t_lo, grid, opts);
  Distribution hi = density(fam, path.t_hi, grid, opts);
  lo.label = path.name + "(t=" + short_num(path.t_lo) + ")";
  hi.label = path.name + "(t=" + short_num(path.t_hi) + ")";
  out.oracle = dir == Direction::up ? oracle(order, lo, hi, tol) : oracle(order, hi, lo, tol);
  out.oracle.direction = dir;
  return out;
}

// --- beta-binomial to binomial -----------------------------------------------------

double interpolation_kernel(std::int64_t n, double r, double s, double p, double c, std::int64_t k) {
  const double a = r + c * p;
  const double b = s + c * (1.0 - p);
  const double kk = static_cast<double>(k);
  const double nn = static_cast<double>(n);
  return p * (sf::digamma(a + kk) - sf::digamma(a)) + (1.0 - p) * (sf::digamma(b + nn - kk) - sf::digamma(b));
}

InterpolationCheck betabin_bin_interpolation(std::int64_t n, double r, double s, double p,
                                             const std::vector<double>& cs, double c_large,
                                             const Tolerances& tol) {
  if (n < 1 || !(r > 0.0) || !(s > 0.0) || !(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("betabin_bin_interpolation: need n >= 1, r, s > 0 and p in (0, 1)");
  }
  const double nn = static_cast<double>(n);
  InterpolationCheck out;
  out.threshold = (r + nn - 1.0) / (r + s + nn - 1.0);
  out.condition = below_or_equal(out.threshold, p);
  for (double c : cs) {
    double m = kInf;
    for (std::int64_t k = 0; k < n; ++k) {
      m = std::min(m, interpolation_kernel(n, r, s, p, c, k + 1) - interpolation_kernel(n, r, s, p, c, k));
    }
    out.min_delta.emplace_back(c, m);
  }
  const FactorLaw bb = make_factor_law(join_spec("betabinomial", {{"n", nn}, {"r", r}, {"s", s}}));
  const FactorLaw bin = make_factor_law(join_spec("binomial", {{"n", nn}, {"p", p}}));
  out.oracle = oracle_lr(factor_distribution(bb), factor_distribution(bin), tol);

  out.c_large = c_large;
  const FactorLaw far = make_factor_law(
      join_spec("betabinomial", {{"n", nn}, {"r", r + c_large * p}, {"s", s + c_large * (1.0 - p)}}));
  const Distribution a = factor_distribution(far);
  const Distribution b = factor_distribution(bin);
  double tv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    tv += std::abs(a.masses[i] - b.masses[i]);
  }
  out.tv_at_large_c = 0.5 * tv;
  return out;
}

}  // namespace kernord
