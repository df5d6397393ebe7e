#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "generators.hpp"
#include "kernord/oracle.hpp"
#include "kernord/pairwise.hpp"
#include "kernord/special.hpp"

using namespace kernord;
using kernord::testing::Gen;

namespace {

std::string num(double v) { return format_shortest(v); }

Distribution law(const std::string& spec) { return factor_distribution(make_factor_law(spec)); }

}  // namespace

TEST_CASE("factor laws: supports and normalisation") {
  const FactorLaw hyp = make_factor_law("hypergeometric:B=5,W=3,n=6");
  CHECK(hyp.lower == 3);
  REQUIRE(hyp.upper.has_value());
  CHECK(*hyp.upper == 5);
  const Distribution d = law("binomial:n=4,p=0.5");
  CHECK(d.size() == 5);
  CHECK(d.masses[2] == doctest::Approx(6.0 / 16.0).epsilon(1e-14));
  const Distribution nb = law("negbinomial:r=0.5,p=0.4");
  CHECK(nb.tail_mass <= 1e-12);
  CHECK_THROWS_AS(make_factor_law("binomial:n=4"), SpecError);
  CHECK_THROWS_AS(make_factor_law("poisson:lambda=1,bogus=2"), SpecError);
  CHECK_THROWS_AS(make_factor_law("hypergeometric:B=2,W=2,n=5"), SpecError);
  CHECK_THROWS_AS(make_factor_law("zeta:s=2"), SpecError);
}

TEST_CASE("pairwise kernel is invariant under reparameterisation up to a constant") {
  // Poisson(lambda) against NB(r, p): power-series factors versus full
  // exponential-family log masses (factor plus natural-parameter cumulant).
  const double lambda = 1.7;
  const double r = 3.0;
  const double p = 0.4;
  const FactorLaw poi = make_factor_law("poisson:lambda=" + num(lambda));
  const FactorLaw nb = make_factor_law("negbinomial:r=" + num(r) + ",p=" + num(p));
  FactorLaw poi_ef = poi;
  poi_ef.log_factor = [=](std::int64_t k) {
    const double eta = std::log(lambda);
    return double(k) * eta - std::exp(eta) - special::log_factorial(k);
  };
  FactorLaw nb_ef = nb;
  nb_ef.log_factor = [=](std::int64_t k) {
    const double eta = std::log1p(-p);
    return double(k) * eta + r * std::log(p) + special::log_pochhammer(r, k) - special::log_factorial(k);
  };
  const PairwiseKernel gps = pairwise_kernel(poi, nb);
  const PairwiseKernel ef = pairwise_kernel(poi_ef, nb_ef);
  REQUIRE(gps.d1.size() == ef.d1.size());
  for (std::size_t i = 0; i < gps.d1.size(); ++i) {
    CHECK(std::abs(gps.d1[i] - ef.d1[i]) <= 1e-12 * std::max(1.0, std::abs(gps.d1[i])));
  }
}

TEST_CASE("pairwise differences are consistent with the values") {
  const PairwiseKernel pk = pairwise_kernel(make_factor_law("binomial:n=10,p=0.3"), make_factor_law("poisson:lambda=2"));
  REQUIRE(pk.values.size() == 11);
  for (std::size_t i = 0; i + 1 < pk.values.size(); ++i) {
    CHECK(pk.d1[i] == doctest::Approx(pk.values[i + 1] - pk.values[i]).epsilon(1e-14));
  }
  for (std::size_t i = 0; i + 2 < pk.values.size(); ++i) {
    CHECK(pk.d2[i] == doctest::Approx(pk.d1[i + 1] - pk.d1[i]).epsilon(1e-14));
  }
  CHECK_THROWS_AS(check_pairwise(pk, Order::st), std::invalid_argument);
  CHECK_THROWS_AS(pairwise_kernel(make_factor_law("hypergeometric:B=3,W=2,n=5"),
                                  make_factor_law("binomial:n=2,p=0.5")),
                  std::invalid_argument);
}

TEST_CASE("support placement is part of the lr verdict") {
  // K on the common support is flat, but Bin(5) reaches further right than Bin(3).
  const PairwiseKernel pk = pairwise_kernel(make_factor_law("binomial:n=3,p=0.5"), make_factor_law("binomial:n=5,p=0.5"));
  const OrderVerdict v = check_pairwise(pk, Order::lr);
  CHECK(v.fails());
  CHECK(oracle_lr(law("binomial:n=5,p=0.5"), law("binomial:n=3,p=0.5")).fails());
}

TEST_CASE("every holding pairwise lr or lc verdict is confirmed by the oracle") {
  Gen gen(2718);
  std::size_t confirmed = 0;
  auto random_law = [&gen]() {
    switch (gen.integer(0, 4)) {
      case 0:
        return "binomial:n=" + num(double(gen.integer(1, 15))) + ",p=" + num(gen.uniform(0.05, 0.9));
      case 1:
        return "poisson:lambda=" + num(gen.uniform(0.2, 6.0));
      case 2:
        return "negbinomial:r=" + num(gen.uniform(0.5, 6.0)) + ",p=" + num(gen.uniform(0.2, 0.9));
      case 3:
        return "geometric:p=" + num(gen.uniform(0.2, 0.9));
      default:
        return "betabinomial:n=" + num(double(gen.integer(1, 12))) + ",r=" + num(gen.uniform(0.5, 5.0)) +
               ",s=" + num(gen.uniform(0.5, 5.0));
    }
  };
  for (int t = 0; t < 200; ++t) {
    const std::string a = random_law();
    const std::string b = random_law();
    CAPTURE(a);
    CAPTURE(b);
    const FactorLaw P = make_factor_law(a);
    const FactorLaw Q = make_factor_law(b);
    // lr: Q <=lr P iff K = log(w^P/w^Q) is nondecreasing (plus placement).
    if (check_pairwise(pairwise_kernel(P, Q), Order::lr).holds()) {
      ++confirmed;
      const auto [dq, dp] = factor_distributions(Q, P);
      CHECK(oracle_lr(dq, dp).holds());
    }
    if (check_pairwise(pairwise_kernel(P, Q), Order::lc).holds()) {
      ++confirmed;
      const auto [dp, dq] = factor_distributions(P, Q);
      CHECK(oracle_lc(dp, dq).holds());
    }
  }
  CHECK(confirmed >= 40);
}

TEST_CASE("Katz-class closed forms") {
  const KatzCondition bp = katz_threshold(KatzPair::bin_poi, {{"n", 10}, {"p", 0.05}, {"lambda", 0.6}});
  CHECK(bp.lr);
  CHECK(bp.st);
  CHECK(bp.lr_lhs == doctest::Approx(0.5));
  CHECK(bp.lr_rhs == doctest::Approx(0.57));
  CHECK(parse_katz_pair("poi-nb") == KatzPair::poi_nb);
  CHECK(to_string(KatzPair::bin_nb) == "bin-nb");
  CHECK_THROWS_AS(parse_katz_pair("nb-poi"), std::invalid_argument);
  CHECK_THROWS_AS(katz_threshold(KatzPair::bin_poi, {{"n", 10}, {"p", 0.05}}), SpecError);
  for (KatzPair pair : {KatzPair::bin_poi, KatzPair::bin_nb, KatzPair::poi_nb}) {
    CHECK(katz_sweep(pair, Order::lr).size() == 25);
    CHECK(katz_sweep(pair, Order::st).size() == 25);
  }
}

TEST_CASE("the bin-nb lr condition needs the (1-p) factor") {
  // n p <= r (1 - pi) holds here, yet the likelihood ratio Bin/NB rises from
  // k = 0 to k = 1 by the factor n p / ((1 - p) r (1 - pi)) = 1.0582...
  const ParamMap params = {{"n", 10}, {"p", 0.1}, {"r", 2.1}, {"pi", 0.5}};
  CHECK(10 * 0.1 <= 2.1 * (1 - 0.5));
  const KatzCondition c = katz_threshold(KatzPair::bin_nb, params);
  CHECK(!c.lr);
  const auto [bin, nb] = katz_laws(KatzPair::bin_nb, params);
  const Distribution B = law(bin);
  const Distribution N = law(nb);
  CHECK((B.masses[1] / N.masses[1]) / (B.masses[0] / N.masses[0]) ==
        doctest::Approx(1.0 / (0.9 * 2.1 * 0.5)).epsilon(1e-12));
  CHECK(oracle_lr(B, N).fails());
}

TEST_CASE("beta-binomial versus hypergeometric") {
  // The kernel steps are nonincreasing in k, so the last step governs.
  for (const auto& [B, W, n, r, s] : std::vector<std::tuple<double, double, std::int64_t, double, double>>{
           {20, 10, 5, 1, 5}, {30, 8, 6, 2, 4}, {12, 12, 4, 1, 6}, {9, 15, 7, 3, 1}}) {
    for (std::int64_t k = 0; k + 2 < n; ++k) {
      CHECK(betabin_hyp_delta(B, W, n, r, s, k + 1) <= betabin_hyp_delta(B, W, n, r, s, k) + 1e-14);
    }
    const BetaBinHypCheck c = betabin_hyp_condition(B, W, n, r, s);
    CHECK(c.max_formula_error <= 1e-12);
    CHECK(c.condition == (W * (r + double(n) - 1) <= s * (B - double(n) + 1)));
    if (c.kernel.holds()) {
      CHECK(c.oracle.holds());
    }
  }
  CHECK_THROWS_AS(betabin_hyp_condition(3, 10, 5, 1, 1), std::invalid_argument);
}

TEST_CASE("named paths validate and their kernels follow the chain rule") {
  const std::vector<std::string> specs = {
      "nb-linear:r1=1,r2=4,q1=0.3,q2=0.5",
      "betabinomial-linear:n=8,r1=1,r2=3,s1=2,s2=1",
      "betabinomial-binomial:n=5,r=1,s=10,p=0.5,cmax=100",
      "gamma-shape-scale:r0=1,r1=3,beta0=1,beta1=2",
      "gamma-shape-rate:r0=1,r1=3,rho0=2,rho1=1",
  };
  for (const auto& spec : specs) {
    CAPTURE(spec);
    const ParamPath path = make_path(spec);
    CHECK(path.name == spec);
    CHECK_NOTHROW(validate_path(path));
    const std::vector<double> xs = path.kind == SupportKind::discrete ? std::vector<double>{0, 1, 2, 4}
                                                                       : std::vector<double>{0.3, 1.0, 2.5, 6.0};
    for (double t : {0.25, 0.5, 0.75}) {
      const double tt = path.t_lo + t * (path.t_hi - path.t_lo);
      const double h = 1e-5 * (path.t_hi - path.t_lo);
      auto log_w = [&](double u, double x) { return path.log_factor(path.theta(u), x); };
      for (std::size_t i = 1; i < xs.size(); ++i) {
        const double fd = ((log_w(tt + h, xs[i]) - log_w(tt + h, xs[0])) -
                           (log_w(tt - h, xs[i]) - log_w(tt - h, xs[0]))) /
                          (2.0 * h);
        const double k = path_kernel(path, tt, xs[i]) - path_kernel(path, tt, xs[0]);
        CHECK(std::abs(fd - k) <= 1e-6 * std::max(1.0, std::abs(k)));
      }
    }
  }
  CHECK_THROWS_AS(make_path("nb-linear:r1=1,r2=4,q1=0.3"), SpecError);
  CHECK_THROWS_AS(make_path("spiral:a=1"), SpecError);
  CHECK_THROWS_AS(validate_path(nb_linear_path(1, 4, 0.3, 1.5)), std::invalid_argument);
}

TEST_CASE("path criteria agree with the endpoint oracle") {
  for (const auto& spec : {"nb-linear:r1=1,r2=4,q1=0.3,q2=0.5", "betabinomial-linear:n=8,r1=1,r2=3,s1=2,s2=1",
                           "gamma-shape-rate:r0=1,r1=3,rho0=2,rho1=1"}) {
    const ParamPath path = make_path(spec);
    for (Order o : {Order::lr, Order::st}) {
      for (Direction d : {Direction::up, Direction::down}) {
        const PathOrderCheck c = check_path_order(path, o, d);
        CAPTURE(spec);
        CAPTURE(to_string(o));
        CAPTURE(to_string(d));
        if (c.criterion.status != Status::inconclusive && c.oracle.status != Status::inconclusive) {
          CHECK(c.criterion.status == c.oracle.status);
        }
      }
    }
  }
}

TEST_CASE("geometric interpolation has the pairwise kernel as its constant path kernel") {
  const FactorLaw P = make_factor_law("binomial:n=10,p=0.05");
  const FactorLaw Q = make_factor_law("poisson:lambda=0.6");
  const ParamPath path = geometric_interpolation_path(P, Q);
  const PairwiseKernel pk = pairwise_kernel(P, Q);
  for (double t : {0.1, 0.5, 0.9}) {
    for (std::size_t i = 0; i < pk.values.size(); ++i) {
      const double x = pk.grid.points[i];
      CHECK(path_kernel(path, t, x) - path_kernel(path, t, 0.0) ==
            doctest::Approx(pk.values[i] - pk.values[0]).epsilon(1e-12));
    }
  }
}

TEST_CASE("beta-binomial to binomial interpolation") {
  const InterpolationCheck c = betabin_bin_interpolation(5, 1.0, 10.0, 0.5);
  CHECK(c.condition);
  CHECK(c.threshold == doctest::Approx(5.0 / 15.0));
  REQUIRE(c.min_delta.size() == 4);
  for (const auto& [cc, d] : c.min_delta) {
    CAPTURE(cc);
    CHECK(d >= 0.0);
  }
  CHECK(c.oracle.holds());
  CHECK(c.tv_at_large_c < 1e-3);
  // Below the threshold the kernel steps turn negative.
  const InterpolationCheck low = betabin_bin_interpolation(5, 1.0, 10.0, 0.2);
  CHECK(!low.condition);
  double lowest = kInf;
  for (const auto& [cc, d] : low.min_delta) {
    lowest = std::min(lowest, d);
  }
  CHECK(lowest < 0.0);
}
