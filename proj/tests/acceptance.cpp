// Acceptance suite: one pass/fail line per criterion, exit status 0 only when
// every criterion passes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "generators.hpp"
#include "kernord/catalog.hpp"
#include "kernord/compound.hpp"
#include "kernord/criteria.hpp"
#include "kernord/oracle.hpp"
#include "kernord/pairwise.hpp"
#include "kernord/table1.hpp"
#include "sample_pairs.hpp"

using namespace kernord;
using kernord::testing::catalogue_cases;
using kernord::testing::Gen;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a = 0, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

Distribution endpoint(const DensityFamily& f, double nu, const SupportGrid& grid) { return density(f, nu, grid); }

// 1. Kernel table: kernel equals the finite-difference score up to an
//    x-constant, and difference signs match the table's sign columns.
Outcome kernel_table() {
  std::size_t pass = 0;
  std::size_t min_samples = 1000;
  double worst_var = 0.0;
  std::string failed;
  for (const auto& row : kernel_table_rows()) {
    const KernelTableCheck c = check_kernel_table_row(row, 1e-8);
    min_samples = std::min(min_samples, c.samples);
    worst_var = std::max(worst_var, c.max_kernel_score_variance);
    if (c.pass() && c.samples >= 3) {
      ++pass;
    } else {
      failed += " " + row.id;
    }
  }
  const std::size_t rows = kernel_table_rows().size();
  return {pass == rows, std::to_string(pass) + "/" + std::to_string(rows) + " rows, min samples " +
                            std::to_string(min_samples) + fmt(", max variance %.2e", worst_var) + failed};
}

// 2. Every kernel criterion verdict in {holds, fails} agrees with the oracle
//    on the endpoint laws, both directions, all four orders.
Outcome criterion_oracle_agreement() {
  std::size_t compared = 0;
  std::size_t disagree = 0;
  std::size_t families = 0;
  std::string first;
  for (const auto& c : catalogue_cases()) {
    const DensityFamily fam = make_family(c.spec);
    ++families;
    for (const auto& [a, b] : c.pairs) {
      const std::vector<double> nus = nu_scan(a, b, 17);
      const SupportGrid grid = default_grid(fam, nus);
      const Distribution lo = endpoint(fam, a, grid);
      const Distribution hi = endpoint(fam, b, grid);
      const ScanSetup s{fam, nus, grid};
      for (Order o : {Order::lr, Order::lc, Order::st, Order::hr}) {
        for (Direction d : {Direction::up, Direction::down}) {
          const OrderVerdict cv = check_order(s, o, d);
          const OrderVerdict ov = d == Direction::up ? oracle(o, lo, hi) : oracle(o, hi, lo);
          if (cv.status == Status::inconclusive || ov.status == Status::inconclusive) {
            continue;
          }
          ++compared;
          if (cv.status != ov.status) {
            ++disagree;
            if (first.empty()) {
              first = " first: " + c.spec + " " + to_string(o) + " " + to_string(d);
            }
          }
        }
      }
    }
  }
  return {disagree == 0 && families >= 24,
          std::to_string(families) + " families x 5 pairs, " + std::to_string(compared) + " verdicts compared, " +
              std::to_string(disagree) + " disagreements" + first};
}

// 3. Closed-form Katz conditions against the oracle on 5x5 sweeps.
Outcome katz_thresholds() {
  std::size_t cells = 0;
  std::size_t agree = 0;
  std::size_t boundary = 0;
  std::size_t boundary_holds = 0;
  for (KatzPair pair : {KatzPair::bin_poi, KatzPair::bin_nb, KatzPair::poi_nb}) {
    for (Order order : {Order::lr, Order::st}) {
      for (const KatzCell& cell : katz_sweep(pair, order)) {
        const KatzCondition cond = katz_threshold(pair, cell.params);
        const auto [a, b] = katz_laws(pair, cell.params);
        const auto [da, db] = factor_distributions(make_factor_law(a), make_factor_law(b));
        const OrderVerdict v = oracle(order, da, db);
        ++cells;
        agree += v.holds() == (order == Order::lr ? cond.lr : cond.st) ? 1 : 0;
        if (cell.factor == 1.0) {
          ++boundary;
          boundary_holds += v.holds() ? 1 : 0;
        }
      }
    }
  }
  return {agree == cells && boundary_holds == boundary && cells == 150,
          std::to_string(agree) + "/" + std::to_string(cells) + " cells agree, " + std::to_string(boundary_holds) +
              "/" + std::to_string(boundary) + " boundary cells hold"};
}

// 4. Zero-inflated Poisson: lr fails near zero, st and hr survive.
Outcome zero_inflated_poisson() {
  const DensityFamily fam = make_family("zero-inflated-poisson:pi=0.5");
  const std::vector<double> nus = nu_scan(3.0, 5.0, 17);
  const SupportGrid grid = default_grid(fam, nus);
  const ScanSetup s{fam, nus, grid};
  const OrderVerdict lr = check_lr(s, Direction::up);
  const OrderVerdict st = check_st(s, Direction::up);
  const OrderVerdict hr = check_hr(s, Direction::up);
  const Distribution p3 = endpoint(fam, 3.0, grid);
  const Distribution p5 = endpoint(fam, 5.0, grid);
  const OrderVerdict olr = oracle_lr(p3, p5);
  const OrderVerdict ost = oracle_st(p3, p5);
  const OrderVerdict ohr = oracle_hr(p3, p5);
  const bool witness_ok = lr.witness && !lr.witness->points.empty() &&
                          *std::max_element(lr.witness->points.begin(), lr.witness->points.end()) <= 1.0;
  const bool pass = lr.fails() && witness_ok && st.holds() && hr.holds() && olr.fails() && ost.holds() && ohr.holds();
  std::string w = lr.witness ? fmt("witness k=(%g,%g)", lr.witness->points.at(0), lr.witness->points.at(1)) : "";
  return {pass, "check_lr " + to_string(lr.status) + " " + w + ", check_st " + to_string(st.status) + ", check_hr " +
                    to_string(hr.status) + "; oracle lr/st/hr " + to_string(olr.status) + "/" +
                    to_string(ost.status) + "/" + to_string(ohr.status)};
}

// 5. Zero-inflated exponential on the mixed grid: lr breaks at the atom,
//    st and hr hold in the decreasing direction.
Outcome zero_inflated_exponential() {
  const DensityFamily fam = make_family("zero-inflated-exponential:pi=0.4");
  const SupportGrid grid = SupportGrid::atom_and_uniform(40.0, 1e-3);
  const Distribution p1 = endpoint(fam, 1.0, grid);
  const Distribution p2 = endpoint(fam, 2.0, grid);
  Tolerances tol;
  tol.oracle_abs = 1e-6;
  tol.oracle_rel = 1e-6;
  const OrderVerdict lr = oracle_lr(p2, p1, tol);
  const OrderVerdict st = oracle_st(p2, p1, tol);
  const OrderVerdict hr = oracle_hr(p2, p1, tol);
  const bool atom_witness = lr.witness && !lr.witness->points.empty() && lr.witness->points.front() == 0.0;
  return {lr.fails() && atom_witness && st.holds() && hr.holds(),
          "oracle lr " + to_string(lr.status) + (atom_witness ? " (witness at the atom 0)" : "") + ", st " +
              to_string(st.status) + ", hr " + to_string(hr.status) + fmt(", %g grid points", double(grid.size()))};
}

// 6. Half-Student: the unimodal-kernel endpoint criterion with mode 1.
Outcome half_student() {
  const DensityFamily fam = make_family("half-student-in-df");
  const SupportGrid grid = SupportGrid::uniform(0.0, 40.0, 1e-3);
  const std::vector<double> nus = nu_scan(2.0, 5.0, 17);
  const ScanSetup s{fam, nus, grid};
  const OrderVerdict v = check_unimodal_endpoint(s, 1.0);
  const Distribution p2 = endpoint(fam, 2.0, grid);
  const Distribution p5 = endpoint(fam, 5.0, grid);
  const auto s2 = survival_profile(p2);
  const auto s5 = survival_profile(p5);
  double worst_st = kInf;
  double worst_hr = kInf;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    worst_st = std::min(worst_st, s2[i] - s5[i]);
    if (s2[i] > 0.0 && s5[i] > 0.0) {
      worst_hr = std::min(worst_hr, p5.density_at(i) / s5[i] - p2.density_at(i) / s2[i]);
    }
  }
  const bool pass = v.holds() && worst_st >= -1e-6 && worst_hr >= -1e-6;
  return {pass, "unimodal-endpoint " + to_string(v.status) +
                    fmt(", min(Fbar_2 - Fbar_5) = %.2e, min(h_5 - h_2) = %.2e", worst_st, worst_hr)};
}

// 7. Compound direction table with a Geom(0.5) summand.
Outcome compound_table() {
  const std::int64_t k_max = 400;
  const SummandLaw summand = make_summand("geometric:p=0.5", k_max);
  std::size_t pass = 0;
  double worst_tail = 0.0;
  std::string signs;
  for (const auto& row : compound_table_rows()) {
    const CompoundRowCheck c = check_compound_row(row, summand, k_max);
    worst_tail = std::max(worst_tail, c.max_tail_mass);
    signs += c.observed_slope_sign > 0 ? "+" : "-";
    pass += (c.pass(row) && c.max_tail_mass <= 1e-10) ? 1 : 0;
  }
  const std::size_t rows = compound_table_rows().size();
  return {pass == rows && rows == 5, std::to_string(pass) + "/" + std::to_string(rows) + " rows, slopes (" + signs +
                                         ")" + fmt(", max tail %.1e", worst_tail)};
}

// 8. Posterior of the count given the sum is TP2, and E[N | X = k] is monotone.
Outcome posterior_tp2() {
  bool ok = true;
  std::string detail;
  const SummandLaw summand = make_summand("geometric:p=0.5", 200);
  const std::vector<std::pair<std::string, double>> models = {{"poisson", 2.0}, {"negbinomial-in-p:r=3", 0.5}};
  for (const auto& [spec, nu] : models) {
    const CompoundModel m(make_family(spec), summand, 200);
    const PosteriorMatrix post = posterior_matrix(m, nu);
    std::vector<std::vector<double>> defined(post.entries.size());
    for (std::size_t n = 0; n < post.entries.size(); ++n) {
      for (std::size_t k = 0; k < post.column_defined.size(); ++k) {
        if (post.column_defined[k]) {
          defined[n].push_back(post.entries[n][k]);
        }
      }
    }
    const ShapeCertificate tp2 = is_tp2(defined, 1e-12);
    const std::vector<double> mean = posterior_mean(m, nu);
    bool monotone = true;
    double prev = -kInf;
    for (std::size_t k = 0; k < mean.size(); ++k) {
      if (!post.column_defined[k]) {
        continue;
      }
      monotone &= mean[k] >= prev - 1e-12;
      prev = mean[k];
    }
    ok &= tp2.ok && monotone;
    detail += spec + ": TP2 " + (tp2.ok ? "yes" : "no") + ", mean monotone " + (monotone ? "yes" : "no") + "; ";
  }
  return {ok, detail};
}

// 9. Finite-difference score of the compound law equals the posterior mean
//    of the counting score.
Outcome compound_score_identity() {
  const std::int64_t k_max = 200;
  const SummandLaw summand = make_summand("geometric:p=0.5", k_max);
  std::size_t samples = 0;
  double worst = 0.0;
  const std::vector<std::int64_t> ks = {0, 1, 3, 8};
  for (const auto& row : compound_table_rows()) {
    const CompoundModel m(make_family(row.counting_spec), summand, k_max);
    const double nu = 0.5 * (row.nu1 + row.nu2);
    const double h = 1e-5 * std::max(1.0, std::abs(nu));
    const auto up = m.raw_pmf(nu + h);
    const auto down = m.raw_pmf(nu - h);
    const auto score = compound_score(m, nu);
    for (std::int64_t k : ks) {
      const auto i = static_cast<std::size_t>(k);
      const double fd = (std::log(up[i]) - std::log(down[i])) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - score[i]));
      ++samples;
    }
  }
  return {samples >= 20 && worst <= 1e-5, std::to_string(samples) + " (nu, k) samples, max error " + fmt("%.2e", worst)};
}

// 10. Beta-binomial below the hypergeometric in lr under the stated inequality.
Outcome betabin_hypergeometric() {
  struct P {
    double B, W;
    std::int64_t n;
    double r, s;
  };
  const std::vector<P> sweep = {{20, 10, 5, 1, 5}, {30, 8, 6, 2, 4}, {12, 12, 4, 1, 6}, {50, 20, 10, 0.5, 5}};
  std::size_t pass = 0;
  double worst = 0.0;
  for (const auto& p : sweep) {
    const BetaBinHypCheck c = betabin_hyp_condition(p.B, p.W, p.n, p.r, p.s);
    worst = std::max(worst, c.max_formula_error);
    pass += (c.condition && c.kernel.holds() && c.oracle.holds() && c.max_formula_error <= 1e-12) ? 1 : 0;
  }
  return {pass == sweep.size(),
          std::to_string(pass) + "/" + std::to_string(sweep.size()) + " settings, max formula error " + fmt("%.1e", worst)};
}

// 11. Beta-binomial to binomial interpolation.
Outcome interpolation() {
  const InterpolationCheck c = betabin_bin_interpolation(5, 1.0, 10.0, 0.5);
  double min_delta = kInf;
  for (const auto& [cc, d] : c.min_delta) {
    min_delta = std::min(min_delta, d);
  }
  const bool pass = c.condition && c.min_delta.size() == 4 && min_delta >= 0.0 && c.oracle.holds() &&
                    c.tv_at_large_c <= 1e-3;
  return {pass, fmt("min Delta K_c = %.3e over c in {0,1,10,100}, ", min_delta) + "oracle " +
                    to_string(c.oracle.status) + fmt(", TV at c=1e4 = %.3e", c.tv_at_large_c)};
}

// 12. lr implies hr implies st on randomly drawn catalogue pairs.
Outcome order_chain() {
  Gen gen(20240612);
  const auto& cases = catalogue_cases();
  std::size_t lr_pairs = 0;
  std::size_t violations = 0;
  std::size_t draws = 0;
  while (lr_pairs < 60 && draws < 2000) {
    ++draws;
    const auto& c = cases[gen.index(cases.size())];
    double lo = kInf;
    double hi = -kInf;
    for (const auto& [a, b] : c.pairs) {
      lo = std::min(lo, a);
      hi = std::max(hi, b);
    }
    const auto [a, b] = gen.ordered_pair(lo, hi, 0.05 * (hi - lo));
    const DensityFamily fam = make_family(c.spec);
    const std::vector<double> nus = {a, b};
    const SupportGrid grid = default_grid(fam, nus);
    Distribution p = endpoint(fam, a, grid);
    Distribution q = endpoint(fam, b, grid);
    if (gen.unit() < 0.5) {
      std::swap(p, q);
    }
    if (!oracle_lr(p, q).holds()) {
      continue;
    }
    ++lr_pairs;
    if (!oracle_hr(p, q).holds() || !oracle_st(p, q).holds()) {
      ++violations;
    }
  }
  return {lr_pairs >= 50 && violations == 0, std::to_string(lr_pairs) + " lr pairs from " + std::to_string(draws) +
                                                  " draws, " + std::to_string(violations) + " hr/st violations"};
}

// 13. Poisson-binomial laws are lr ordered when the success probabilities are.
Outcome poisson_binomial() {
  Gen gen(7);
  std::size_t holds = 0;
  for (int t = 0; t < 10; ++t) {
    std::vector<double> p = gen.probabilities(5, 0.01, 0.9);
    std::vector<double> q(5);
    for (std::size_t i = 0; i < 5; ++i) {
      q[i] = gen.uniform(p[i], 0.99);
    }
    holds += oracle_lr(poisson_binomial_pmf(p), poisson_binomial_pmf(q)).holds() ? 1 : 0;
  }
  return {holds == 10, std::to_string(holds) + "/10 random pairs hold"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Kernel table reproduction", kernel_table},
      {"Criterion-oracle agreement", criterion_oracle_agreement},
      {"Katz-class thresholds", katz_thresholds},
      {"Zero-inflated Poisson", zero_inflated_poisson},
      {"Zero-inflated exponential", zero_inflated_exponential},
      {"Half-Student unimodal endpoint", half_student},
      {"Compound direction table", compound_table},
      {"Posterior TP2", posterior_tp2},
      {"Compound-score identity", compound_score_identity},
      {"Beta-binomial vs hypergeometric", betabin_hypergeometric},
      {"Beta-binomial to binomial interpolation", interpolation},
      {"Chain lr => hr => st", order_chain},
      {"Poisson-binomial lr", poisson_binomial},
  };
  int failures = 0;
  int id = 0;
  for (const auto& [title, run] : criteria) {
    ++id;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s  %2d  %-40s %s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str());
  }
  std::printf("%d/%d acceptance criteria passed\n", id - failures, id);
  return failures == 0 ? 0 : 1;
}
