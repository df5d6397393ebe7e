#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "kernord/catalog.hpp"
#include "sample_pairs.hpp"

using namespace kernord;
using kernord::testing::catalogue_cases;

namespace {

// Five-point finite-difference score d/dnu log f_nu(x) at every grid point,
// with the law renormalised on the grid at each perturbed parameter.
double stencil_step(double nu) { return 1e-3 * std::min(1.0, std::max(0.1, std::abs(nu))); }

// Grid that covers every law touched by the stencil around nu.
SupportGrid stencil_grid(const DensityFamily& f, double nu) {
  const double h = stencil_step(nu);
  const std::vector<double> nus = {nu - 2.0 * h, nu, nu + 2.0 * h};
  return default_grid(f, nus);
}

std::vector<double> fd_score(const DensityFamily& f, double nu, const SupportGrid& grid) {
  const double h = stencil_step(nu);
  std::vector<Distribution> d;
  for (double step : {-2.0, -1.0, 1.0, 2.0}) {
    d.push_back(density(f, nu + step * h, grid));
  }
  std::vector<double> s(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (d[0].masses[i] > 0.0 && d[3].masses[i] > 0.0) {
      s[i] = (std::log(d[0].masses[i]) - 8.0 * std::log(d[1].masses[i]) + 8.0 * std::log(d[2].masses[i]) -
              std::log(d[3].masses[i])) /
             (12.0 * h);
    }
  }
  return s;
}

std::vector<double> three_nus(const testing::FamilyCase& c) {
  return {c.pairs[0].first, c.pairs[1].second, c.pairs[2].first};
}

}  // namespace

TEST_CASE("spec strings parse and reject malformed input with the offending token") {
  const ParsedSpec p = parse_spec("negbinomial-in-shape:p=0.3");
  CHECK(p.name == "negbinomial-in-shape");
  REQUIRE(p.params.size() == 1);
  CHECK(p.params[0].first == "p");
  CHECK(p.params[0].second == 0.3);

  auto token_of = [](const char* text) {
    try {
      (void)make_family(text);
    } catch (const SpecError& e) {
      return e.token();
    }
    return std::string("<no error>");
  };
  CHECK(token_of("nosuchfamily") == "nosuchfamily");
  CHECK(token_of("poisson:foo=1") == "foo=1");
  CHECK(token_of("negbinomial-in-shape:p=abc") == "p=abc");
  CHECK(token_of("negbinomial-in-shape:p") == "p");
  CHECK(token_of("negbinomial-in-shape") == "p");
  CHECK(token_of("negbinomial-in-shape:p=1.5") == "p=1.5");
  CHECK(token_of("binomial-in-p:n=2.5") == "n=2.5");
  CHECK(token_of("cmp-in-dispersion:lambda=2") == "lambda=2");
  CHECK(token_of("poisson:") == "poisson:");
}

TEST_CASE("every listed family name can be built and round-trips through its spec string") {
  for (const auto& c : catalogue_cases()) {
    const DensityFamily f = make_family(c.spec);
    CHECK(make_family(f.spec_string()).spec_string() == f.spec_string());
    CHECK(std::find(family_names().begin(), family_names().end(), f.name) != family_names().end());
  }
  CHECK(catalogue_cases().size() == family_names().size());
}

TEST_CASE("laws are normalised on their grid with an interval of positive mass") {
  for (const auto& c : catalogue_cases()) {
    const DensityFamily f = make_family(c.spec);
    for (double nu : three_nus(c)) {
      CAPTURE(c.spec);
      CAPTURE(nu);
      const std::vector<double> nus = {nu};
      const SupportGrid grid = default_grid(f, nus);
      const Distribution d = density(f, nu, grid);
      const double total = std::accumulate(d.masses.begin(), d.masses.end(), 0.0);
      CHECK(std::abs(total - 1.0) <= 1e-12);
      if (f.kind == SupportKind::discrete) {
        CHECK(d.tail_mass <= 1e-12);
      }
      const auto pos = positive_support(d);
      REQUIRE(!pos.empty());
      CHECK(pos.back() - pos.front() + 1 == pos.size());
      if (f.kind != SupportKind::discrete) {
        CHECK(grid.size() >= 2000);
      }
    }
  }
}

TEST_CASE("the score is centred under the current law") {
  for (const auto& c : catalogue_cases()) {
    const DensityFamily f = make_family(c.spec);
    for (double nu : three_nus(c)) {
      CAPTURE(c.spec);
      CAPTURE(nu);
      const SupportGrid grid = stencil_grid(f, nu);
      const Distribution d = density(f, nu, grid);
      const std::vector<double> s = fd_score(f, nu, grid);
      double centred = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        centred += s[i] * d.masses[i];
      }
      CHECK(std::abs(centred) <= 1e-9);
    }
  }
}

TEST_CASE("kernel minus finite-difference score is constant in x") {
  for (const auto& c : catalogue_cases()) {
    const DensityFamily f = make_family(c.spec);
    for (double nu : three_nus(c)) {
      CAPTURE(c.spec);
      CAPTURE(nu);
      const SupportGrid grid = stencil_grid(f, nu);
      const Distribution d = density(f, nu, grid);
      const std::vector<double> s = fd_score(f, nu, grid);
      const std::vector<double> k = kernel_values(f, nu, grid);
      // Mass-weighted variance of K - s over the positive support.
      double mean = 0.0;
      double second = 0.0;
      double weight = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (d.masses[i] > 1e-300 && std::isfinite(k[i])) {
          const double diff = k[i] - s[i];
          mean += d.masses[i] * diff;
          second += d.masses[i] * diff * diff;
          weight += d.masses[i];
        }
      }
      mean /= weight;
      CHECK(second / weight - mean * mean <= 1e-8);
    }
  }
}

TEST_CASE("geometric survival is (1-p)^k") {
  const DensityFamily f = make_family("geometric");
  for (double p : {0.1, 0.35, 0.8}) {
    const std::vector<double> nus = {p};
    const Distribution d = density(f, p, default_grid(f, nus));
    const auto sv = survival_profile(d);
    for (std::int64_t k = 0; k < 30; ++k) {
      CAPTURE(p);
      CAPTURE(k);
      const double expected = std::pow(1.0 - p, double(k));
      // Near the grid end the renormalised hazard feels the cut; stay clear of it.
      if (expected > 1e-6) {
        CHECK(survival(d, double(k)) == doctest::Approx(expected).epsilon(1e-10));
        CHECK(hazard(d, double(k)) == doctest::Approx(p).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("closed-form and numerical normalisers agree") {
  for (const auto& c : catalogue_cases()) {
    DensityFamily f = make_family(c.spec);
    // The log-series term ratio increases towards theta, so the numeric
    // tail bound (which needs decreasing ratios) does not apply to it.
    if (!f.log_normalizer || f.kind != SupportKind::discrete || !std::isinf(f.support_upper) ||
        f.name == "logseries") {
      continue;
    }
    const double nu = c.pairs[1].first;
    const double closed = log_normalizer(f, nu);
    f.log_normalizer = nullptr;
    CAPTURE(c.spec);
    CHECK(log_normalizer(f, nu) == doctest::Approx(closed).epsilon(1e-11));
  }
}

TEST_CASE("discrete truncation reaches the tail target or throws") {
  const DensityFamily f = make_family("poisson");
  const std::int64_t k = discrete_truncation(f, 5.0);
  CHECK(k > 20);
  CHECK(k < 60);
  GridOptions tight;
  tight.k_max_cap = 10;
  CHECK_THROWS_AS(discrete_truncation(f, 5.0, tight), TruncationError);
}

TEST_CASE("nu_scan endpoints and spacing") {
  const auto lin = nu_scan(1.0, 2.0, 5);
  REQUIRE(lin.size() == 5);
  CHECK(lin.front() == 1.0);
  CHECK(lin.back() == 2.0);
  CHECK(lin[2] == doctest::Approx(1.5));
  const auto lg = nu_scan(0.1, 10.0, 3);
  CHECK(lg.front() == 0.1);
  CHECK(lg.back() == 10.0);
  CHECK(lg[1] == doctest::Approx(1.0));
}
