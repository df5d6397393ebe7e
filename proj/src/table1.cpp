#include "kernord/table1.hpp"

#include <algorithm>
#include <cmath>

namespace kernord {

namespace {

// Discrete Gaussian shape on the integers, used for the discrete translate row.
double log_f0_discrete(double j) { return -j * j / 8.0; }

DensityFamily discrete_translate_family() {
  DensityFamily f;
  f.name = "discrete-translate";
  f.varying = "mu";
  f.param = {-kInf, kInf};
  f.kind = SupportKind::discrete;
  f.support_lower = -kInf;
  f.support_upper = kInf;
  f.log_factor = [](double mu, double k) { return log_f0_discrete(k - mu); };
  // Score in an integer shift: log f_mu(k) - log f_{mu-1}(k) = -Delta log f0(k - mu).
  f.kernel = [](double mu, double k) { return -(log_f0_discrete(k - mu + 1.0) - log_f0_discrete(k - mu)); };
  static const double log_norm = [] {
    double s = 0.0;
    for (int j = -200; j <= 200; ++j) {
      s += std::exp(log_f0_discrete(j));
    }
    return std::log(s);
  }();
  f.log_normalizer = [](double) { return log_norm; };
  return f;
}

double sign_of(double v, double tol) { return v > tol ? 1.0 : (v < -tol ? -1.0 : 0.0); }

bool claim_matches(SignClaim c, double sign) {
  switch (c) {
    case SignClaim::positive:
      return sign > 0;
    case SignClaim::negative:
      return sign < 0;
    case SignClaim::zero:
      return sign == 0;
    case SignClaim::none:
      return true;
  }
  return false;
}

}  // namespace

std::string to_string(SignClaim s) {
  switch (s) {
    case SignClaim::positive:
      return "+";
    case SignClaim::negative:
      return "-";
    case SignClaim::zero:
      return "0";
    case SignClaim::none:
      return "formula";
  }
  return "?";
}

std::string sign_symbol(const std::vector<double>& values, double tol) {
  bool pos = false;
  bool neg = false;
  bool zero = false;
  for (double v : values) {
    const double s = sign_of(v, tol);
    pos |= s > 0;
    neg |= s < 0;
    zero |= s == 0;
  }
  const int kinds = int(pos) + int(neg) + int(zero);
  if (kinds != 1) {
    return "mixed";
  }
  return pos ? "+" : (neg ? "-" : "0");
}

const std::vector<KernelTableRow>& kernel_table_rows() {
  static const std::vector<KernelTableRow> rows = [] {
    using P = SignClaim;
    const std::vector<double> cont_x = {0.1, 1.0, 4.0};
    const std::vector<double> unit_x = {0.1, 0.5, 0.9};
    const std::vector<double> disc_x = {0.0, 1.0, 3.0, 7.0};
    const std::vector<double> pos_nu = {0.5, 2.0, 5.0};
    std::vector<KernelTableRow> r;

    r.push_back({"natural-continuous", "natural", "statistic T(x) = log x (gamma shape)", "T(x)",
                 {make_family("gamma-in-shape:rate=1")}, pos_nu, cont_x,
                 {"T'(x)", [](double, double x) { return 1.0 / x; }, P::none},
                 {"T''(x)", [](double, double x) { return -1.0 / (x * x); }, P::none}});
    r.push_back({"natural-discrete", "natural", "statistic T(k) = -log k! (CMP dispersion)", "T(k)",
                 {make_family("cmp-in-dispersion:lambda=0.5")}, pos_nu, disc_x,
                 {"Delta T(k)", [](double, double k) { return -std::log(k + 1.0); }, P::none},
                 {"Delta^2 T(k)", [](double, double k) { return -std::log((k + 2.0) / (k + 1.0)); }, P::none}});
    // Delta K(0) = -log 1 = 0, so the strict sign is sampled from k = 1.
    r.push_back({"cmp-dispersion", "natural", "Conway-Maxwell-Poisson dispersion", "-log k!",
                 {make_family("cmp-in-dispersion:lambda=0.5")}, pos_nu, std::vector<double>{1.0, 2.0, 4.0, 8.0},
                 {"-log(k+1)", [](double, double k) { return -std::log(k + 1.0); }, P::negative},
                 {"-log((k+2)/(k+1))", [](double, double k) { return -std::log((k + 2.0) / (k + 1.0)); },
                  P::negative}});
    r.push_back({"exponential-gamma-rate", "power-rate-scale", "exponential, gamma rate rho", "-x",
                 {make_family("exponential-in-rate"), make_family("gamma-in-rate:shape=2")}, pos_nu, cont_x,
                 {"-1", [](double, double) { return -1.0; }, P::negative},
                 {"0", [](double, double) { return 0.0; }, P::zero}});
    for (double beta : {2.0, 0.5}) {
      r.push_back({beta == 2.0 ? "weibull-rate-shape-2" : "weibull-rate-shape-0.5", "power-rate-scale",
                   "Weibull rate lambda, fixed shape beta", "-x^beta",
                   {make_family("weibull-in-rate", {{"shape", beta}})}, pos_nu, cont_x,
                   {"-beta x^(beta-1)", [beta](double, double x) { return -beta * std::pow(x, beta - 1.0); },
                    P::none},
                   {"-beta(beta-1) x^(beta-2)",
                    [beta](double, double x) { return -beta * (beta - 1.0) * std::pow(x, beta - 2.0); }, P::none}});
    }
    r.push_back({"halfnormal-scale", "power-rate-scale", "half-normal scale sigma", "x^2/sigma^3",
                 {make_family("halfnormal-in-scale")}, pos_nu, cont_x,
                 {"2x/sigma^3", [](double s, double x) { return 2.0 * x / (s * s * s); }, P::none},
                 {"2/sigma^3", [](double s, double) { return 2.0 / (s * s * s); }, P::positive}});
    r.push_back({"power-series", "power-rate-scale", "power-series factor a(k) theta^k", "k/theta",
                 {make_family("poisson"), make_family("negbinomial-in-q:r=3"), make_family("logseries")},
                 {0.2, 0.5, 0.8}, {1.0, 2.0, 5.0, 9.0},
                 {"1/theta", [](double t, double) { return 1.0 / t; }, P::positive},
                 {"0", [](double, double) { return 0.0; }, P::zero}});
    r.push_back({"gamma-shape-beta-first", "shape", "gamma shape, beta first shape", "log x",
                 {make_family("gamma-in-shape:rate=1"), make_family("beta-in-alpha:beta=2")}, pos_nu, unit_x,
                 {"1/x", [](double, double x) { return 1.0 / x; }, P::none},
                 {"-1/x^2", [](double, double x) { return -1.0 / (x * x); }, P::none}});
    r.push_back({"pareto-shape", "shape", "Pareto shape, fixed scale", "-log x",
                 {make_family("pareto-in-shape:scale=1")}, pos_nu, {1.5, 3.0, 10.0},
                 {"-1/x", [](double, double x) { return -1.0 / x; }, P::none},
                 {"1/x^2", [](double, double x) { return 1.0 / (x * x); }, P::none}});
    r.push_back({"beta-second", "shape", "beta second shape", "log(1-x)",
                 {make_family("beta-in-beta:alpha=2")}, pos_nu, unit_x,
                 {"-1/(1-x)", [](double, double x) { return -1.0 / (1.0 - x); }, P::none},
                 {"-1/(1-x)^2", [](double, double x) { return -1.0 / ((1.0 - x) * (1.0 - x)); }, P::none}});
    r.push_back({"upper-pochhammer", "shape", "upper Pochhammer (nu)_k", "psi(nu+k)-psi(nu)",
                 {make_family("negbinomial-in-shape:p=0.3"), make_family("betabinomial-in-r:n=10,s=2")}, pos_nu,
                 disc_x, {"1/(nu+k)", [](double v, double k) { return 1.0 / (v + k); }, P::positive},
                 {"-1/((nu+k)(nu+k+1))", [](double v, double k) { return -1.0 / ((v + k) * (v + k + 1.0)); },
                  P::negative}});
    r.push_back({"lower-pochhammer", "shape", "lower Pochhammer 1/(nu)_k", "-[psi(nu+k)-psi(nu)]",
                 {make_family("hyperpoisson-in-shape:lambda=2")}, pos_nu, disc_x,
                 {"-1/(nu+k)", [](double v, double k) { return -1.0 / (v + k); }, P::negative},
                 {"1/((nu+k)(nu+k+1))", [](double v, double k) { return 1.0 / ((v + k) * (v + k + 1.0)); },
                  P::positive}});
    constexpr double n_fin = 10.0;
    r.push_back({"finite-support-pochhammer", "shape", "finite-support (nu)_{n-k}", "psi(nu+n-k)-psi(nu)",
                 {make_family("betabinomial-in-s:n=10,r=2")}, pos_nu, disc_x,
                 {"-1/(nu+n-k-1)", [](double v, double k) { return -1.0 / (v + n_fin - k - 1.0); }, P::negative},
                 {"-1/((nu+n-k-2)(nu+n-k-1))",
                  [](double v, double k) { return -1.0 / ((v + n_fin - k - 2.0) * (v + n_fin - k - 1.0)); },
                  P::negative}});
    // Continuous translate with the Gumbel shape: log f0(z) = -z - e^{-z}.
    r.push_back({"translate-continuous", "location", "translate f0(x-mu), f0 Gumbel", "-(log f0)'(x-mu)",
                 {make_family("gumbel-in-location")}, {-1.0, 0.0, 2.0}, {-1.0, 0.5, 3.0},
                 {"-(log f0)''(x-mu)", [](double mu, double x) { return std::exp(-(x - mu)); }, P::none},
                 {"-(log f0)'''(x-mu)", [](double mu, double x) { return -std::exp(-(x - mu)); }, P::none}});
    r.push_back({"gumbel-location", "location", "Gumbel, f0(x) = exp(-x - e^{-x})", "-e^{-x}",
                 {make_family("gumbel-in-location")}, {-1.0, 0.0, 2.0}, {-1.0, 0.5, 3.0},
                 {"e^{-x}", [](double mu, double x) { return std::exp(-(x - mu)); }, P::positive},
                 {"-e^{-x}", [](double mu, double x) { return -std::exp(-(x - mu)); }, P::negative}});
    r.push_back({"lognormal-location", "location", "log-normal location mu, fixed sigma", "(log x - mu)/sigma^2",
                 {make_family("lognormal-in-mu:sigma=0.5")}, {-1.0, 0.0, 1.0}, {0.3, 1.0, 3.0},
                 {"1/(sigma^2 x)", [](double, double x) { return 1.0 / (0.25 * x); }, P::none},
                 {"-1/(sigma^2 x^2)", [](double, double x) { return -1.0 / (0.25 * x * x); }, P::none}});
    {
      KernelTableRow t{"translate-discrete", "location", "translate f0(k-mu) on Z, f0 discrete Gaussian",
                       "-Delta log f0(k-mu)", {discrete_translate_family()}, {0.0, 1.0, 3.0}, {-3.0, 0.0, 2.0, 5.0},
                       {"-Delta^2 log f0(k-mu)",
                        [](double mu, double k) {
                          const double z = k - mu;
                          return -(log_f0_discrete(z + 2) - 2 * log_f0_discrete(z + 1) + log_f0_discrete(z));
                        },
                        P::none},
                       {"-Delta^3 log f0(k-mu)",
                        [](double mu, double k) {
                          const double z = k - mu;
                          return -(log_f0_discrete(z + 3) - 3 * log_f0_discrete(z + 2) +
                                   3 * log_f0_discrete(z + 1) - log_f0_discrete(z));
                        },
                        P::none}};
      t.unit_step_score = true;
      r.push_back(std::move(t));
    }
    return r;
  }();
  return rows;
}

KernelTableCheck check_kernel_table_row(const KernelTableRow& row, double variance_tol, const GridOptions& opts) {
  KernelTableCheck out;
  out.id = row.id;
  out.kernel_matches_score = true;
  out.formulas_match = true;
  out.signs_match = true;
  std::vector<double> d1_obs;
  std::vector<double> d2_obs;

  for (const DensityFamily& f : row.families) {
    const bool discrete = f.kind == SupportKind::discrete;
    const double sign_tol = discrete ? 1e-12 : 1e-6;
    const double formula_tol = discrete ? 1e-9 : 1e-5;

    // Kernel against the finite-difference score over a grid.
    SupportGrid grid;
    if (row.unit_step_score) {
      grid = SupportGrid::integers(-20, 20);
    } else {
      GridOptions g = opts;
      g.grid_points = std::min<std::size_t>(opts.grid_points, 400);
      grid = default_grid(f, row.nus, g);
    }
    for (double nu : row.nus) {
      double log_a_plus = 0.0;
      double log_a_minus = 0.0;
      double step = 1.0;
      if (row.unit_step_score) {
        log_a_plus = log_a_minus = log_normalizer(f, nu, opts);
      } else {
        step = 1e-5 * std::max(1.0, std::abs(nu));
        log_a_plus = log_normalizer(f, nu + step, opts);
        log_a_minus = log_normalizer(f, nu - step, opts);
      }
      std::vector<double> diff;
      diff.reserve(grid.size());
      for (double x : grid.points) {
        if (!f.in_support(x)) {
          continue;
        }
        double score = 0.0;
        if (row.unit_step_score) {
          score = (f.log_factor(nu, x) - log_a_plus) - (f.log_factor(nu - 1.0, x) - log_a_minus);
        } else {
          score = ((f.log_factor(nu + step, x) - log_a_plus) - (f.log_factor(nu - step, x) - log_a_minus)) /
                  (2.0 * step);
        }
        diff.push_back(f.kernel(nu, x) - score);
      }
      double mean = 0.0;
      for (double d : diff) mean += d;
      mean /= static_cast<double>(diff.size());
      double var = 0.0;
      for (double d : diff) var += (d - mean) * (d - mean);
      var /= static_cast<double>(diff.size());
      out.max_kernel_score_variance = std::max(out.max_kernel_score_variance, var);
      if (!(var <= variance_tol)) {
        out.kernel_matches_score = false;
      }

      // Differences of the kernel against the closed forms.
      for (double x : row.xs) {
        if (discrete && !(f.in_support(x) && f.in_support(x + 2.0))) {
          continue;
        }
        double d1 = 0.0;
        double d2 = 0.0;
        if (discrete) {
          const double k0 = f.kernel(nu, x);
          const double k1 = f.kernel(nu, x + 1.0);
          const double k2 = f.kernel(nu, x + 2.0);
          d1 = k1 - k0;
          d2 = k2 - 2.0 * k1 + k0;
        } else {
          const double h = 1e-4 * std::max(1.0, std::abs(x));
          const double kp = f.kernel(nu, x + h);
          const double k0 = f.kernel(nu, x);
          const double km = f.kernel(nu, x - h);
          d1 = (kp - km) / (2.0 * h);
          d2 = (kp - 2.0 * k0 + km) / (h * h);
        }
        const double e1 = row.d1.formula(nu, x);
        const double e2 = row.d2.formula(nu, x);
        const double err1 = std::abs(d1 - e1) / std::max(1.0, std::abs(e1));
        const double err2 = std::abs(d2 - e2) / std::max(1.0, std::abs(e2));
        out.max_d1_error = std::max(out.max_d1_error, err1);
        out.max_d2_error = std::max(out.max_d2_error, err2);
        if (!(err1 <= formula_tol) || !(err2 <= formula_tol)) {
          out.formulas_match = false;
        }
        const double s1 = sign_of(d1, sign_tol);
        const double s2 = sign_of(d2, sign_tol);
        if (s1 != sign_of(e1, sign_tol) || s2 != sign_of(e2, sign_tol) || !claim_matches(row.d1.claim, s1) ||
            !claim_matches(row.d2.claim, s2)) {
          out.signs_match = false;
        }
        d1_obs.push_back(sign_of(d1, sign_tol));
        d2_obs.push_back(sign_of(d2, sign_tol));
        ++out.samples;
      }
    }
  }
  out.d1_sign = sign_symbol(d1_obs, 0.5);
  out.d2_sign = sign_symbol(d2_obs, 0.5);
  if (out.samples < 3) {
    out.formulas_match = false;
  }
  return out;
}

}  // namespace kernord
