#include "kernord/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "kernord/special.hpp"

namespace kernord {

namespace sf = special;

namespace {

bool valid_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
         c == '_';
}

bool valid_key(std::string_view key) {
  if (key.empty() || !((key[0] >= 'a' && key[0] <= 'z') || (key[0] >= 'A' && key[0] <= 'Z'))) {
    return false;
  }
  return std::all_of(key.begin(), key.end(), [](char c) { return valid_name_char(c) && c != '-'; });
}

std::string format_param(double v) { return format_shortest(v); }

// Pulls named parameters out of a ParamMap and rejects anything left over.
class FixedParams {
 public:
  FixedParams(std::string family, const ParamMap& values) : family_(std::move(family)), values_(values) {}

  double positive(const std::string& key) {
    const double v = take(key);
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw SpecError(family_ + ": parameter '" + key + "' must be positive and finite",
                      key + "=" + format_param(v));
    }
    return v;
  }

  double probability(const std::string& key) {
    const double v = take(key);
    if (!(v > 0.0 && v < 1.0)) {
      throw SpecError(family_ + ": parameter '" + key + "' must lie in (0, 1)", key + "=" + format_param(v));
    }
    return v;
  }

  std::int64_t count(const std::string& key) {
    const double v = take(key);
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e6) {
      throw SpecError(family_ + ": parameter '" + key + "' must be a positive integer",
                      key + "=" + format_param(v));
    }
    return static_cast<std::int64_t>(v);
  }

  double real(const std::string& key) {
    const double v = take(key);
    if (!std::isfinite(v)) {
      throw SpecError(family_ + ": parameter '" + key + "' must be finite", key + "=" + format_param(v));
    }
    return v;
  }

  void finish() const {
    for (const auto& [key, value] : values_) {
      if (!used_.count(key)) {
        throw SpecError(family_ + ": unknown parameter '" + key + "'", key + "=" + format_param(value));
      }
    }
  }

 private:
  double take(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) {
      throw SpecError(family_ + ": missing parameter '" + key + "'", key);
    }
    used_.insert(key);
    return it->second;
  }

  std::string family_;
  const ParamMap& values_;
  std::set<std::string> used_;
};

double log1m(double p) { return std::log1p(-p); }

DensityFamily base(std::string name, std::string varying, ParamMap fixed, ParamInterval interval,
                   SupportKind kind, double lower, double upper) {
  DensityFamily f;
  f.name = std::move(name);
  f.varying = std::move(varying);
  f.fixed = std::move(fixed);
  f.param = interval;
  f.kind = kind;
  f.support_lower = lower;
  f.support_upper = upper;
  return f;
}

constexpr ParamInterval kPositive{0.0, kInf};
constexpr ParamInterval kUnit{0.0, 1.0};
constexpr ParamInterval kReal{-kInf, kInf};

std::int64_t as_count(double x) { return static_cast<std::int64_t>(std::llround(x)); }

// Upper quantile helper: returns hi such that P(X > hi) is about q.
template <class Dist>
double upper_quantile(const Dist& d, double q) {
  try {
    return boost::math::quantile(boost::math::complement(d, q));
  } catch (const std::exception&) {
    return boost::math::quantile(boost::math::complement(d, 1e-6));
  }
}

// Keeps heavy-tailed ranges from swamping the grid resolution.
double cap_span(double lo, double hi, double typical_hi) {
  return std::min(hi, lo + 200.0 * (typical_hi - lo));
}

using Builder = DensityFamily (*)(const ParamMap&);

// --- discrete families -----------------------------------------------------

DensityFamily make_poisson(const ParamMap& m) {
  FixedParams p("poisson", m);
  p.finish();
  auto f = base("poisson", "theta", {}, kPositive, SupportKind::discrete, 0, kInf);
  f.log_factor = [](double th, double k) { return k * std::log(th) - sf::log_factorial(as_count(k)); };
  f.kernel = [](double th, double k) { return k / th; };
  f.log_normalizer = [](double th) { return th; };
  f.hints = {.nondecreasing = true, .concave = true, .convex = true, .affine_in_x = true};
  return f;
}

DensityFamily make_geometric(const ParamMap& m) {
  FixedParams p("geometric", m);
  p.finish();
  auto f = base("geometric", "p", {}, kUnit, SupportKind::discrete, 0, kInf);
  f.log_factor = [](double pr, double k) { return k * log1m(pr); };
  f.kernel = [](double pr, double k) { return -k / (1.0 - pr); };
  f.log_normalizer = [](double pr) { return -std::log(pr); };
  f.hints = {.nonincreasing = true, .concave = true, .convex = true, .affine_in_x = true};
  return f;
}

DensityFamily make_nb_q(const ParamMap& m) {
  FixedParams p("negbinomial-in-q", m);
  const double r = p.positive("r");
  p.finish();
  auto f = base("negbinomial-in-q", "q", {{"r", r}}, kUnit, SupportKind::discrete, 0, kInf);
  f.log_factor = [r](double q, double k) {
    const auto kk = as_count(k);
    return sf::log_pochhammer(r, kk) - sf::log_factorial(kk) + k * std::log(q);
  };
  f.kernel = [](double q, double k) { return k / q; };
  f.log_normalizer = [r](double q) { return -r * log1m(q); };
  f.hints = {.nondecreasing = true, .concave = true, .convex = true, .affine_in_x = true};
  return f;
}

DensityFamily make_nb_p(const ParamMap& m) {
  FixedParams p("negbinomial-in-p", m);
  const double r = p.positive("r");
  p.finish();
  auto f = base("negbinomial-in-p", "p", {{"r", r}}, kUnit, SupportKind::discrete, 0, kInf);
  f.log_factor = [r](double pr, double k) {
    const auto kk = as_count(k);
    return sf::log_pochhammer(r, kk) - sf::log_factorial(kk) + r * std::log(pr) + k * log1m(pr);
  };
  f.kernel = [r](double pr, double k) { return r / pr - k / (1.0 - pr); };
  f.log_normalizer = [](double) { return 0.0; };
  f.hints = {.nonincreasing = true, .concave = true, .convex = true, .affine_in_x = true};
  return f;
}

DensityFamily make_nb_shape(const ParamMap& m) {
  FixedParams p("negbinomial-in-shape", m);
  const double pr = p.probability("p");
  p.finish();
  auto f = base("negbinomial-in-shape", "r", {{"p", pr}}, kPositive, SupportKind::discrete, 0, kInf);
  f.log_factor = [pr](double r, double k) {
    const auto kk = as_count(k);
    return sf::log_pochhammer(r, kk) - sf::log_factorial(kk) + k * log1m(pr);
  };
  f.kernel = [](double r, double k) { return sf::digamma(r + k) - sf::digamma(r); };
  f.log_normalizer = [pr](double r) { return -r * std::log(pr); };
  f.hints = {.nondecreasing = true, .concave = true};
  return f;
}

DensityFamily make_binomial(const ParamMap& m) {
  FixedParams p("binomial-in-p", m);
  const auto n = p.count("n");
  p.finish();
  auto f = base("binomial-in-p", "p", {{"n", static_cast<double>(n)}}, kUnit, SupportKind::discrete, 0,
                static_cast<double>(n));
  f.log_factor = [n](double pr, double k) {
    const auto kk = as_count(k);
    return sf::log_binomial(n, kk) + k * std::log(pr) + static_cast<double>(n - kk) * log1m(pr);
  };
  f.kernel = [n](double pr, double k) { return k / (pr * (1.0 - pr)) - static_cast<double>(n) / (1.0 - pr); };
  f.log_normalizer = [](double) { return 0.0; };
  f.hints = {.nondecreasing = true, .concave = true, .convex = true, .affine_in_x = true};
  return f;
}

DensityFamily make_betabin_r(const ParamMap& m) {
  FixedParams p("betabinomial-in-r", m);
  const auto n = p.count("n");
  const double s = p.positive("s");
  p.finish();
  auto f = base("betabinomial-in-r", "r", {{"n", static_cast<double>(n)}, {"s", s}}, kPositive,
                SupportKind::discrete, 0, static_cast<double>(n));
  f.log_factor = [n, s](double r, double k) {
    const auto kk = as_count(k);
    return sf::log_binomial(n, kk) + sf::log_pochhammer(r, kk) + sf::log_pochhammer(s, n - kk);
  };
  f.kernel = [](double r, double k) { return sf::digamma(r + k) - sf::digamma(r); };
  f.log_normalizer = [n, s](double r) { return sf::log_pochhammer(r + s, n); };
  f.hints = {.nondecreasing = true, .concave = true};
  return f;
}

DensityFamily make_betabin_s(const ParamMap& m) {
  FixedParams p("betabinomial-in-s", m);
  const auto n = p.count("n");
  const double r = p.positive("r");
  p.finish();
  auto f = base("betabinomial-in-s", "s", {{"n", static_cast<double>(n)}, {"r", r}}, kPositive,
                SupportKind::discrete, 0, static_cast<double>(n));
  f.log_factor = [n, r](double s, double k) {
    const auto kk = as_count(k);
    return sf::log_binomial(n, kk) + sf::log_pochhammer(r, kk) + sf::log_pochhammer(s, n - kk);
  };
  const double nd = static_cast<double>(n);
  f.kernel = [nd](double s, double k) { return sf::digamma(s + nd - k) - sf::digamma(s); };
  f.log_normalizer = [n, r](double s) { return sf::log_pochhammer(r + s, n); };
  f.hints = {.nonincreasing = true, .concave = true};
  return f;
}

DensityFamily make_logseries(const ParamMap& m) {
  FixedParams p("logseries", m);
  p.finish();
  auto f = base("logseries", "theta", {}, kUnit, SupportKind::discrete, 1, kInf);
  f.log_factor = [](double th, double k) { return k * std::log(th) - std::log(k); };
  f.kernel = [](double th, double k) { return k / th; };
  f.log_normalizer = [](double th) { return std::log(-log1m(th)); };
  f.hints = {.nondecreasing = true, .concave = true, .convex = true, .affine_in_x = true};
  return f;
}

DensityFamily make_cmp(const ParamMap& m) {
  FixedParams p("cmp-in-dispersion", m);
  const double lambda = p.probability("lambda");
  p.finish();
  auto f = base("cmp-in-dispersion", "nu", {{"lambda", lambda}}, kPositive, SupportKind::discrete, 0, kInf);
  f.log_factor = [lambda](double nu, double k) {
    return k * std::log(lambda) - nu * sf::log_factorial(as_count(k));
  };
  f.kernel = [](double, double k) { return -sf::log_factorial(as_count(k)); };
  f.hints = {.nonincreasing = true, .concave = true};
  return f;
}

DensityFamily make_hyperpoisson(const ParamMap& m) {
  FixedParams p("hyperpoisson-in-shape", m);
  const double lambda = p.positive("lambda");
  p.finish();
  auto f = base("hyperpoisson-in-shape", "nu", {{"lambda", lambda}}, kPositive, SupportKind::discrete, 0,
                kInf);
  f.log_factor = [lambda](double nu, double k) {
    return k * std::log(lambda) - sf::log_pochhammer(nu, as_count(k));
  };
  f.kernel = [](double nu, double k) { return -(sf::digamma(nu + k) - sf::digamma(nu)); };
  f.hints = {.nonincreasing = true, .convex = true};
  return f;
}

DensityFamily make_zip(const ParamMap& m) {
  FixedParams p("zero-inflated-poisson", m);
  const double pi = p.probability("pi");
  p.finish();
  auto f = base("zero-inflated-poisson", "theta", {{"pi", pi}}, kPositive, SupportKind::discrete, 0, kInf);
  // w(0) = (1-pi) e^theta + pi, w(k) = pi theta^k / k!, A(theta) = e^theta.
  f.log_factor = [pi](double th, double k) {
    if (k == 0.0) {
      return th + std::log((1.0 - pi) + pi * std::exp(-th));
    }
    return std::log(pi) + k * std::log(th) - sf::log_factorial(as_count(k));
  };
  f.kernel = [pi](double th, double k) {
    if (k == 0.0) {
      return (1.0 - pi) / ((1.0 - pi) + pi * std::exp(-th));
    }
    return k / th;
  };
  f.log_normalizer = [](double th) { return th; };
  return f;
}

// --- continuous families ---------------------------------------------------

DensityFamily make_gamma_shape(const ParamMap& m) {
  FixedParams p("gamma-in-shape", m);
  const double rate = p.positive("rate");
  p.finish();
  auto f = base("gamma-in-shape", "r", {{"rate", rate}}, kPositive, SupportKind::continuous, 0, kInf);
  f.log_factor = [rate](double r, double x) { return (r - 1.0) * std::log(x) - rate * x; };
  f.kernel = [](double, double x) { return std::log(x); };
  f.log_normalizer = [rate](double r) { return std::lgamma(r) - r * std::log(rate); };
  f.effective_range = [rate](double r, double q) {
    boost::math::gamma_distribution<> g(r, 1.0 / rate);
    return std::pair{0.0, upper_quantile(g, q)};
  };
  f.hints = {.nondecreasing = true, .concave = true};
  return f;
}

DensityFamily make_gamma_rate(const ParamMap& m) {
  FixedParams p("gamma-in-rate", m);
  const double shape = p.positive("shape");
  p.finish();
  auto f = base("gamma-in-rate", "rho", {{"shape", shape}}, kPositive, SupportKind::continuous, 0, kInf);
  f.log_factor = [shape](double rho, double x) { return (shape - 1.0) * std::log(x) - rho * x; };
  f.kernel = [](double, double x) { return -x; };
  f.log_normalizer = [shape](double rho) { return std::lgamma(shape) - shape * std::log(rho); };
  f.effective_range = [shape](double rho, double q) {
    boost::math::gamma_distribution<> g(shape, 1.0 / rho);
    return std::pair{0.0, upper_quantile(g, q)};
  };
  f.hints = {.nonincreasing = true, .concave = true, .convex = true, .affine_in_x = true};
  return f;
}

DensityFamily make_exponential(const ParamMap& m) {
  FixedParams p("exponential-in-rate", m);
  p.finish();
  auto f = base("exponential-in-rate", "theta", {}, kPositive, SupportKind::continuous, 0, kInf);
  f.log_factor = [](double th, double x) { return -th * x; };
  f.kernel = [](double, double x) { return -x; };
  f.log_normalizer = [](double th) { return -std::log(th); };
  f.effective_range = [](double th, double q) { return std::pair{0.0, -std::log(q) / th}; };
  f.hints = {.nonincreasing = true, .concave = true, .convex = true, .affine_in_x = true};
  return f;
}

DensityFamily make_weibull(const ParamMap& m) {
  FixedParams p("weibull-in-rate", m);
  const double shape = p.positive("shape");
  p.finish();
  auto f = base("weibull-in-rate", "lambda", {{"shape", shape}}, kPositive, SupportKind::continuous, 0, kInf);
  f.log_factor = [shape](double lam, double x) { return (shape - 1.0) * std::log(x) - lam * std::pow(x, shape); };
  f.kernel = [shape](double, double x) { return -std::pow(x, shape); };
  f.log_normalizer = [shape](double lam) { return -std::log(lam) - std::log(shape); };
  f.effective_range = [shape](double lam, double q) {
    return std::pair{0.0, std::pow(-std::log(q) / lam, 1.0 / shape)};
  };
  f.hints = {.nonincreasing = true, .concave = shape >= 1.0, .convex = shape <= 1.0};
  return f;
}

DensityFamily make_beta_alpha(const ParamMap& m) {
  FixedParams p("beta-in-alpha", m);
  const double b = p.positive("beta");
  p.finish();
  auto f = base("beta-in-alpha", "alpha", {{"beta", b}}, kPositive, SupportKind::continuous, 0, 1);
  f.log_factor = [b](double a, double x) { return (a - 1.0) * std::log(x) + (b - 1.0) * log1m(x); };
  f.kernel = [](double, double x) { return std::log(x); };
  f.log_normalizer = [b](double a) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); };
  f.effective_range = [](double, double) { return std::pair{0.0, 1.0}; };
  f.hints = {.nondecreasing = true, .concave = true};
  return f;
}

DensityFamily make_beta_beta(const ParamMap& m) {
  FixedParams p("beta-in-beta", m);
  const double a = p.positive("alpha");
  p.finish();
  auto f = base("beta-in-beta", "beta", {{"alpha", a}}, kPositive, SupportKind::continuous, 0, 1);
  f.log_factor = [a](double b, double x) { return (a - 1.0) * std::log(x) + (b - 1.0) * log1m(x); };
  f.kernel = [](double, double x) { return log1m(x); };
  f.log_normalizer = [a](double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); };
  f.effective_range = [](double, double) { return std::pair{0.0, 1.0}; };
  f.hints = {.nonincreasing = true, .concave = true};
  return f;
}

DensityFamily make_pareto(const ParamMap& m) {
  FixedParams p("pareto-in-shape", m);
  const double scale = p.positive("scale");
  p.finish();
  auto f = base("pareto-in-shape", "alpha", {{"scale", scale}}, kPositive, SupportKind::continuous, scale, kInf);
  f.log_factor = [](double a, double x) { return -(a + 1.0) * std::log(x); };
  f.kernel = [](double, double x) { return -std::log(x); };
  f.log_normalizer = [scale](double a) { return -a * std::log(scale) - std::log(a); };
  f.effective_range = [scale](double a, double q) {
    const double hi = scale * std::pow(q, -1.0 / a);
    const double typical = scale * std::pow(0.01, -1.0 / a);
    return std::pair{scale, cap_span(scale, hi, typical)};
  };
  f.hints = {.nonincreasing = true, .convex = true};
  return f;
}

DensityFamily make_halfnormal(const ParamMap& m) {
  FixedParams p("halfnormal-in-scale", m);
  p.finish();
  auto f = base("halfnormal-in-scale", "sigma", {}, kPositive, SupportKind::continuous, 0, kInf);
  f.log_factor = [](double sg, double x) { return -x * x / (2.0 * sg * sg); };
  f.kernel = [](double sg, double x) { return x * x / (sg * sg * sg); };
  f.log_normalizer = [](double sg) { return std::log(sg) + 0.5 * std::log(std::numbers::pi / 2.0); };
  f.effective_range = [](double sg, double q) {
    boost::math::normal_distribution<> nd(0.0, sg);
    return std::pair{0.0, upper_quantile(nd, q / 2.0)};
  };
  f.hints = {.nondecreasing = true, .convex = true};
  return f;
}

DensityFamily make_lognormal(const ParamMap& m) {
  FixedParams p("lognormal-in-mu", m);
  const double sigma = p.positive("sigma");
  p.finish();
  auto f = base("lognormal-in-mu", "mu", {{"sigma", sigma}}, kReal, SupportKind::continuous, 0, kInf);
  f.log_factor = [sigma](double mu, double x) {
    const double z = (std::log(x) - mu) / sigma;
    return -0.5 * z * z - std::log(x);
  };
  f.kernel = [sigma](double mu, double x) { return (std::log(x) - mu) / (sigma * sigma); };
  f.log_normalizer = [sigma](double) { return std::log(sigma) + 0.5 * std::log(2.0 * std::numbers::pi); };
  f.effective_range = [sigma](double mu, double q) {
    boost::math::lognormal_distribution<> ln(mu, sigma);
    const double hi = upper_quantile(ln, q);
    return std::pair{0.0, cap_span(0.0, hi, upper_quantile(ln, 0.01))};
  };
  f.hints = {.nondecreasing = true, .concave = true};
  return f;
}

DensityFamily make_gumbel(const ParamMap& m) {
  FixedParams p("gumbel-in-location", m);
  p.finish();
  auto f = base("gumbel-in-location", "mu", {}, kReal, SupportKind::continuous, -kInf, kInf);
  // w = f0(x - mu) e^{-mu}, so that d/dmu log w = -e^{-(x-mu)}.
  f.log_factor = [](double mu, double x) { return -x - std::exp(-(x - mu)); };
  f.kernel = [](double mu, double x) { return -std::exp(-(x - mu)); };
  f.log_normalizer = [](double mu) { return -mu; };
  f.effective_range = [](double mu, double q) {
    return std::pair{mu - std::log(-std::log(q)), mu - std::log(-log1m(q))};
  };
  f.hints = {.nondecreasing = true, .concave = true};
  return f;
}

DensityFamily make_half_student(const ParamMap& m) {
  FixedParams p("half-student-in-df", m);
  p.finish();
  auto f = base("half-student-in-df", "nu", {}, kPositive, SupportKind::continuous, 0, kInf);
  f.log_factor = [](double nu, double x) { return -0.5 * (nu + 1.0) * std::log1p(x * x / nu); };
  f.kernel = [](double nu, double x) {
    const double x2 = x * x;
    return -0.5 * std::log1p(x2 / nu) + (nu + 1.0) * x2 / (2.0 * nu * (nu + x2));
  };
  f.log_normalizer = [](double nu) {
    return 0.5 * std::log(nu * std::numbers::pi) + std::lgamma(nu / 2.0) - std::log(2.0) -
           std::lgamma((nu + 1.0) / 2.0);
  };
  f.effective_range = [](double nu, double q) {
    boost::math::students_t_distribution<> t(nu);
    const double hi = upper_quantile(t, q / 2.0);
    return std::pair{0.0, cap_span(0.0, hi, upper_quantile(t, 0.005))};
  };
  return f;
}

DensityFamily make_zie(const ParamMap& m) {
  FixedParams p("zero-inflated-exponential", m);
  const double pi = p.probability("pi");
  p.finish();
  auto f = base("zero-inflated-exponential", "theta", {{"pi", pi}}, kPositive, SupportKind::mixed_atom, 0, kInf);
  f.log_factor = [pi](double th, double x) {
    if (x == 0.0) {
      return std::log(1.0 - pi);
    }
    return std::log(pi) + std::log(th) - th * x;
  };
  f.kernel = [](double th, double x) { return x == 0.0 ? 0.0 : 1.0 / th - x; };
  f.log_normalizer = [](double) { return 0.0; };
  f.effective_range = [](double th, double q) { return std::pair{0.0, -std::log(q) / th}; };
  return f;
}

const std::vector<std::pair<std::string, Builder>>& registry() {
  static const std::vector<std::pair<std::string, Builder>> r = {
      {"poisson", make_poisson},
      {"geometric", make_geometric},
      {"negbinomial-in-q", make_nb_q},
      {"negbinomial-in-p", make_nb_p},
      {"negbinomial-in-shape", make_nb_shape},
      {"binomial-in-p", make_binomial},
      {"betabinomial-in-r", make_betabin_r},
      {"betabinomial-in-s", make_betabin_s},
      {"logseries", make_logseries},
      {"cmp-in-dispersion", make_cmp},
      {"hyperpoisson-in-shape", make_hyperpoisson},
      {"zero-inflated-poisson", make_zip},
      {"gamma-in-shape", make_gamma_shape},
      {"gamma-in-rate", make_gamma_rate},
      {"exponential-in-rate", make_exponential},
      {"weibull-in-rate", make_weibull},
      {"beta-in-alpha", make_beta_alpha},
      {"beta-in-beta", make_beta_beta},
      {"pareto-in-shape", make_pareto},
      {"halfnormal-in-scale", make_halfnormal},
      {"lognormal-in-mu", make_lognormal},
      {"gumbel-in-location", make_gumbel},
      {"half-student-in-df", make_half_student},
      {"zero-inflated-exponential", make_zie},
  };
  return r;
}

void check_nu(const DensityFamily& f, double nu) {
  if (!f.param.contains(nu)) {
    throw std::domain_error(f.name + ": parameter " + f.varying + "=" + format_param(nu) +
                            " outside its interval");
  }
}

struct TailScan {
  std::int64_t upper;
  double tail;
};

// Walks k upward from the support's lower end until the right tail is below
// eps. Uses the closed-form normaliser when there is one, otherwise bounds the
// tail geometrically once the term ratio is below one and decreasing.
TailScan scan_discrete_tail(const DensityFamily& f, double nu, const GridOptions& opts) {
  const auto lo = static_cast<std::int64_t>(f.support_lower);
  const std::int64_t cap = std::isfinite(f.support_upper)
                               ? std::min<std::int64_t>(static_cast<std::int64_t>(f.support_upper), lo + opts.k_max_cap)
                               : lo + opts.k_max_cap;
  if (std::isfinite(f.support_upper) && static_cast<double>(cap) >= f.support_upper) {
    return {cap, 0.0};
  }
  if (f.log_normalizer) {
    const double log_a = f.log_normalizer(nu);
    double cumulative = 0.0;
    for (std::int64_t k = lo; k <= cap; ++k) {
      cumulative += std::exp(f.log_factor(nu, static_cast<double>(k)) - log_a);
      const double tail = 1.0 - cumulative;
      if (tail <= opts.eps_tail) {
        return {k, std::max(tail, 0.0)};
      }
    }
    return {cap, std::max(1.0 - cumulative, 0.0)};
  }
  // Numeric normaliser: accumulate relative to the first term.
  const double first = f.log_factor(nu, static_cast<double>(lo));
  double sum = 1.0;
  double prev_log = first;
  double prev_ratio = kInf;
  for (std::int64_t k = lo + 1; k <= cap; ++k) {
    const double lw = f.log_factor(nu, static_cast<double>(k));
    const double term = std::exp(lw - first);
    sum += term;
    const double ratio = std::exp(lw - prev_log);
    if (ratio < 1.0 && ratio <= prev_ratio) {
      const double bound = term * ratio / (1.0 - ratio);
      if (bound <= opts.eps_tail * sum) {
        return {k, bound / sum};
      }
    }
    prev_ratio = ratio;
    prev_log = lw;
  }
  return {cap, kInf};
}

}  // namespace

ParamMap ParsedSpec::as_map() const {
  ParamMap m;
  for (const auto& [k, v] : params) {
    m[k] = v;
  }
  return m;
}

ParsedSpec parse_spec(std::string_view text) {
  ParsedSpec out;
  const std::size_t colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  if (name.empty()) {
    throw SpecError("empty family name", std::string(text));
  }
  if (!std::all_of(name.begin(), name.end(), valid_name_char)) {
    throw SpecError("invalid family name", std::string(name));
  }
  out.name = std::string(name);
  if (colon == std::string_view::npos) {
    return out;
  }
  std::string_view rest = text.substr(colon + 1);
  if (rest.empty()) {
    throw SpecError("empty parameter list after ':'", std::string(text));
  }
  std::set<std::string> seen;
  while (true) {
    const std::size_t comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw SpecError("expected key=value", std::string(item));
    }
    const std::string_view key = item.substr(0, eq);
    const std::string_view val = item.substr(eq + 1);
    if (!valid_key(key)) {
      throw SpecError("invalid parameter key", std::string(item));
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
    if (val.empty() || ec != std::errc() || ptr != val.data() + val.size() || !std::isfinite(v)) {
      throw SpecError("invalid numeric value", std::string(item));
    }
    if (!seen.insert(std::string(key)).second) {
      throw SpecError("duplicate parameter key", std::string(item));
    }
    out.params.emplace_back(std::string(key), v);
    if (comma == std::string_view::npos) {
      break;
    }
    rest = rest.substr(comma + 1);
  }
  return out;
}

std::string DensityFamily::spec_string() const {
  std::string s = name;
  char sep = ':';
  for (const auto& [k, v] : fixed) {
    s += sep;
    s += k + "=" + format_param(v);
    sep = ',';
  }
  return s;
}

const std::vector<std::string>& family_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, _] : registry()) {
      n.push_back(name);
    }
    return n;
  }();
  return names;
}

DensityFamily make_family(std::string_view name, const ParamMap& fixed) {
  for (const auto& [n, build] : registry()) {
    if (n == name) {
      return build(fixed);
    }
  }
  throw SpecError("unknown family", std::string(name));
}

DensityFamily make_family(std::string_view spec) {
  const ParsedSpec parsed = parse_spec(spec);
  return make_family(parsed.name, parsed.as_map());
}

double log_normalizer(const DensityFamily& f, double nu, const GridOptions& opts) {
  check_nu(f, nu);
  if (f.log_normalizer) {
    return f.log_normalizer(nu);
  }
  if (f.kind != SupportKind::discrete) {
    throw std::logic_error(f.name + ": continuous family without closed-form normaliser");
  }
  const TailScan scan = scan_discrete_tail(f, nu, opts);
  if (!(scan.tail <= opts.eps_tail)) {
    throw TruncationError(f.name + ": normaliser did not converge within the truncation cap");
  }
  const auto lo = static_cast<std::int64_t>(f.support_lower);
  double top = -kInf;
  std::vector<double> lw;
  for (std::int64_t k = lo; k <= scan.upper; ++k) {
    lw.push_back(f.log_factor(nu, static_cast<double>(k)));
    top = std::max(top, lw.back());
  }
  double s = 0.0;
  for (double v : lw) {
    s += std::exp(v - top);
  }
  return top + std::log(s) + std::log1p(scan.tail);
}

double log_density(const DensityFamily& f, double nu, double x, const GridOptions& opts) {
  if (!f.in_support(x)) {
    return -kInf;
  }
  return f.log_factor(nu, x) - log_normalizer(f, nu, opts);
}

std::int64_t discrete_truncation(const DensityFamily& f, double nu, const GridOptions& opts) {
  check_nu(f, nu);
  if (f.kind != SupportKind::discrete) {
    throw std::invalid_argument(f.name + ": not a discrete family");
  }
  const TailScan scan = scan_discrete_tail(f, nu, opts);
  if (!(scan.tail <= opts.eps_tail)) {
    throw TruncationError(f.name + ": tail mass target " + format_param(opts.eps_tail) +
                          " unreachable within k_max cap " + std::to_string(opts.k_max_cap) + " at " +
                          f.varying + "=" + format_param(nu));
  }
  return scan.upper;
}

SupportGrid default_grid(const DensityFamily& f, std::span<const double> nus, const GridOptions& opts) {
  if (nus.empty()) {
    throw std::invalid_argument("default_grid: empty parameter list");
  }
  if (f.kind == SupportKind::discrete) {
    std::int64_t hi = static_cast<std::int64_t>(f.support_lower);
    for (double nu : nus) {
      hi = std::max(hi, discrete_truncation(f, nu, opts));
    }
    return SupportGrid::integers(static_cast<std::int64_t>(f.support_lower), hi);
  }
  double lo = kInf;
  double hi = -kInf;
  for (double nu : nus) {
    check_nu(f, nu);
    const auto [a, b] = f.effective_range(nu, opts.quantile);
    lo = std::min(lo, a);
    hi = std::max(hi, b);
  }
  lo = std::max(lo, f.support_lower);
  hi = std::min(hi, f.support_upper);
  const std::size_t points = std::min(std::max<std::size_t>(opts.grid_points, 2), opts.grid_cap);
  const double step = (hi - lo) / static_cast<double>(points);
  if (f.kind == SupportKind::mixed_atom) {
    return SupportGrid::atom_and_uniform(hi, step);
  }
  return SupportGrid::uniform(lo, hi, step);
}

Distribution density(const DensityFamily& f, double nu, const SupportGrid& grid, const GridOptions& opts) {
  check_nu(f, nu);
  if (grid.kind != f.kind) {
    throw std::invalid_argument(f.name + ": grid kind " + to_string(grid.kind) + " does not match family support " +
                                to_string(f.kind));
  }
  if (grid.size() > opts.grid_cap + 1 && f.kind != SupportKind::discrete) {
    throw std::invalid_argument(f.name + ": grid exceeds the configured length cap");
  }
  std::vector<double> lw(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.points[i];
    lw[i] = f.in_support(x) ? f.log_factor(nu, x) + std::log(grid.weights[i]) : -kInf;
  }
  double tail = 0.0;
  if (f.kind == SupportKind::discrete) {
    const bool covers_top = std::isfinite(f.support_upper) && grid.upper >= f.support_upper;
    if (!covers_top) {
      if (f.log_normalizer) {
        const double log_a = f.log_normalizer(nu);
        double s = 0.0;
        for (double v : lw) {
          s += std::exp(v - log_a);
        }
        tail = std::max(1.0 - s, 0.0);
      } else {
        const double last = f.log_factor(nu, grid.upper);
        const double next = f.log_factor(nu, grid.upper + 1.0);
        const double ratio = std::exp(next - last);
        double top = -kInf;
        for (double v : lw) top = std::max(top, v);
        double s = 0.0;
        for (double v : lw) s += std::exp(v - top);
        tail = ratio < 1.0 ? std::exp(next - top) / (1.0 - ratio) / s : kInf;
      }
      if (!(tail <= opts.eps_tail)) {
        throw TruncationError(f.name + ": tail mass beyond k=" + format_param(grid.upper) + " is " +
                              format_param(tail) + " at " + f.varying + "=" + format_param(nu) +
                              ", above eps_tail");
      }
    }
  } else if (f.log_normalizer) {
    const double log_a = f.log_normalizer(nu);
    double s = 0.0;
    for (double v : lw) {
      s += std::exp(v - log_a);
    }
    tail = std::max(1.0 - s, 0.0);
  }
  SupportGrid g = grid;
  g.truncation_tail_mass = tail;
  return normalise_log_masses(std::move(g), lw, tail, f.name + "(" + f.varying + "=" + format_param(nu) + ")");
}

std::vector<double> kernel_values(const DensityFamily& f, double nu, const SupportGrid& grid) {
  std::vector<double> k(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    k[i] = f.kernel(nu, grid.points[i]);
  }
  return k;
}

std::vector<double> nu_scan(double lo, double hi, std::size_t count) {
  if (count < 2 || hi < lo) {
    throw std::invalid_argument("nu_scan: need count >= 2 and lo <= hi");
  }
  std::vector<double> out(count);
  const bool log_space = lo > 0.0 && hi / lo > 4.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = log_space ? lo * std::pow(hi / lo, t) : lo + t * (hi - lo);
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace kernord
