#include "kernord/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "kernord/compound.hpp"
#include "kernord/criteria.hpp"
#include "kernord/oracle.hpp"
#include "kernord/pairwise.hpp"
#include "kernord/table1.hpp"

#ifndef KERNORD_GOLDEN_DIR
#define KERNORD_GOLDEN_DIR "golden/v1"
#endif

namespace kernord::cli {

namespace {

constexpr std::int64_t kDefaultCompoundKMax = 400;

std::string orders_text(const std::vector<Order>& orders) {
  std::string s;
  for (std::size_t i = 0; i < orders.size(); ++i) {
    s += (i ? "," : "") + to_string(orders[i]);
  }
  return s;
}

GridOptions grid_options(const RunOptions& opts) {
  GridOptions g = opts.grid;
  if (opts.k_max) {
    g.k_max_cap = *opts.k_max;
  }
  return g;
}

Report start(std::string command, const RunOptions& opts) {
  Report r;
  r.command = std::move(command);
  r.tolerances = opts.tol;
  return r;
}

// Oracle verdict for the same claim as `criterion`, on the endpoint laws.
OrderVerdict endpoint_oracle(Order order, Direction dir, const Distribution& lo, const Distribution& hi,
                             const Tolerances& tol) {
  OrderVerdict v = dir == Direction::up ? oracle(order, lo, hi, tol) : oracle(order, hi, lo, tol);
  v.direction = dir;
  return v;
}

OrderVerdict run_kernel(const ScanSetup& s, Order order, DirectionChoice choice) {
  if (choice == DirectionChoice::up) {
    return check_order(s, order, Direction::up);
  }
  if (choice == DirectionChoice::down) {
    return check_order(s, order, Direction::down);
  }
  OrderVerdict up = check_order(s, order, Direction::up);
  if (up.holds()) {
    return up;
  }
  OrderVerdict down = check_order(s, order, Direction::down);
  return down.holds() ? down : up;
}

}  // namespace

Report cmd_check(const std::string& family_spec, double nu1, double nu2, const std::vector<Order>& orders,
                 const CheckOptions& check, const RunOptions& opts) {
  if (orders.empty()) {
    throw std::invalid_argument("check: no orders requested");
  }
  if (!(nu1 <= nu2)) {
    throw std::invalid_argument("check: need nu1 <= nu2");
  }
  const DensityFamily fam = make_family(family_spec);
  const GridOptions g = grid_options(opts);
  Report r = start("check", opts);
  r.inputs = {{"family", fam.spec_string()},
              {"nu1", format_shortest(nu1)},
              {"nu2", format_shortest(nu2)},
              {"orders", orders_text(orders)}};

  const std::vector<double> nus = nu1 == nu2 ? std::vector<double>{nu1} : nu_scan(nu1, nu2, opts.nu_points);
  const SupportGrid grid = default_grid(fam, nus, g);
  Distribution lo = density(fam, nu1, grid, g);
  Distribution hi = density(fam, nu2, grid, g);
  lo.label = fam.name + "(" + fam.varying + "=" + format_shortest(nu1) + ")";
  hi.label = fam.name + "(" + fam.varying + "=" + format_shortest(nu2) + ")";
  const ScanSetup setup{fam, nus, grid, opts.tol, g};

  for (Order order : orders) {
    if (nu1 == nu2) {
      OrderVerdict v = oracle(order, lo, hi, opts.tol);
      v.note = "reflexive comparison";
      r.verdicts.push_back(v);
      continue;
    }
    OrderVerdict v;
    switch (check.method) {
      case CheckMethod::kernel:
        v = run_kernel(setup, order, check.direction);
        break;
      case CheckMethod::superlevel:
      case CheckMethod::concave_endpoint:
      case CheckMethod::unimodal_endpoint:
        if (order != Order::st && order != Order::hr) {
          throw std::invalid_argument("check: the endpoint and superlevel criteria decide st and hr only");
        }
        if (check.method == CheckMethod::superlevel) {
          v = check_superlevel(setup, order == Order::hr);
        } else if (check.method == CheckMethod::concave_endpoint) {
          v = check_concave_endpoint(setup);
        } else {
          v = check_unimodal_endpoint(setup, check.mode);
        }
        v.order = order;
        break;
    }
    r.verdicts.push_back(v);
    r.verdicts.push_back(endpoint_oracle(order, v.direction, lo, hi, opts.tol));
  }
  return r;
}

Report cmd_pairwise(const std::string& p_spec, const std::string& q_spec, const std::vector<Order>& orders,
                    const RunOptions& opts) {
  if (orders.empty()) {
    throw std::invalid_argument("pairwise: no orders requested");
  }
  const FactorLaw P = make_factor_law(p_spec);
  const FactorLaw Q = make_factor_law(q_spec);
  const GridOptions g = grid_options(opts);
  Report r = start("pairwise", opts);
  r.inputs = {{"p", P.spec}, {"q", Q.spec}, {"orders", orders_text(orders)}};
  const auto [dp, dq] = factor_distributions(P, Q, g);
  for (Order order : orders) {
    if (order == Order::lr) {
      // P <=lr Q is "Q's factor over P's is nondecreasing".
      r.verdicts.push_back(check_pairwise(pairwise_kernel(Q, P, g), Order::lr, opts.tol));
    } else if (order == Order::lc) {
      r.verdicts.push_back(check_pairwise(pairwise_kernel(P, Q, g), Order::lc, opts.tol));
    }
    r.verdicts.push_back(oracle(order, dp, dq, opts.tol));
  }
  return r;
}

Report cmd_path(const std::string& path_spec, const std::vector<Order>& orders, DirectionChoice direction,
                const RunOptions& opts) {
  if (orders.empty()) {
    throw std::invalid_argument("path: no orders requested");
  }
  const ParamPath path = make_path(path_spec);
  const GridOptions g = grid_options(opts);
  Report r = start("path", opts);
  r.inputs = {{"path", path.name}, {"orders", orders_text(orders)}};
  const std::size_t t_points = 33;
  for (Order order : orders) {
    PathOrderCheck c;
    if (direction == DirectionChoice::down) {
      c = check_path_order(path, order, Direction::down, t_points, opts.tol, g);
    } else {
      c = check_path_order(path, order, Direction::up, t_points, opts.tol, g);
      if (direction == DirectionChoice::automatic && !c.criterion.holds()) {
        PathOrderCheck d = check_path_order(path, order, Direction::down, t_points, opts.tol, g);
        if (d.criterion.holds()) {
          c = d;
        }
      }
    }
    r.verdicts.push_back(c.criterion);
    r.verdicts.push_back(c.oracle);
  }
  return r;
}

Report cmd_compound(const std::string& counting_spec, const std::string& summand_spec, double nu1, double nu2,
                    const RunOptions& opts) {
  if (!(nu1 < nu2)) {
    throw std::invalid_argument("compound: need nu1 < nu2");
  }
  const DensityFamily counting = make_family(counting_spec);
  const std::int64_t k_max = opts.k_max.value_or(kDefaultCompoundKMax);
  const SummandLaw summand = make_summand(summand_spec, k_max);
  const CompoundModel model(counting, summand, k_max, opts.grid);
  Report r = start("compound", opts);
  r.inputs = {{"counting", counting.spec_string()},
              {"summand", summand.label},
              {"nu1", format_shortest(nu1)},
              {"nu2", format_shortest(nu2)},
              {"kmax", std::to_string(k_max)}};
  const OrderVerdict crit = check_compound_lr(model, nu1, nu2, opts.nu_points, opts.tol);
  r.verdicts.push_back(crit);
  Distribution lo = compound_pmf(model, nu1);
  Distribution hi = compound_pmf(model, nu2);
  lo.label = "C(" + format_shortest(nu1) + ")";
  hi.label = "C(" + format_shortest(nu2) + ")";
  const Direction dir = crit.status == Status::inconclusive ? Direction::up : crit.direction;
  OrderVerdict orc = endpoint_oracle(Order::lr, dir, lo, hi, opts.tol);
  orc.note = "compound tail mass beyond k_max: " + format_double(std::max(lo.tail_mass, hi.tail_mass));
  r.verdicts.push_back(orc);
  return r;
}

namespace {

Json table1_rows(const RunOptions& opts) {
  Json rows = Json::array();
  for (const auto& row : kernel_table_rows()) {
    const KernelTableCheck c = check_kernel_table_row(row, 1e-8, grid_options(opts));
    Json j = Json::object();
    j["id"] = row.id;
    j["role"] = row.role;
    j["representation"] = row.representation;
    j["kernel"] = row.kernel_text;
    j["d1"] = row.d1.text;
    j["d1_claim"] = to_string(row.d1.claim);
    j["d1_observed"] = c.d1_sign;
    j["d2"] = row.d2.text;
    j["d2_claim"] = to_string(row.d2.claim);
    j["d2_observed"] = c.d2_sign;
    j["samples"] = c.samples;
    j["kernel_matches_score"] = c.kernel_matches_score;
    j["formulas_match"] = c.formulas_match;
    j["pass"] = c.pass();
    rows.push_back(j);
  }
  return rows;
}

Json table2_rows(Report& r, const RunOptions& opts) {
  const std::int64_t k_max = opts.k_max.value_or(kDefaultCompoundKMax);
  const SummandLaw summand = make_summand("geometric:p=0.5", k_max);
  Json rows = Json::array();
  for (const auto& row : compound_table_rows()) {
    const CompoundRowCheck c = check_compound_row(row, summand, k_max, opts.tol);
    Json j = Json::object();
    j["law"] = row.law;
    j["counting"] = row.counting_spec;
    j["parameter"] = row.parameter;
    j["kernel"] = row.kernel_text;
    j["slope"] = row.slope_text;
    j["slope_sign"] = row.slope_sign > 0 ? "+" : "-";
    j["direction"] = to_string(row.direction);
    j["observed_slope_sign"] = c.observed_slope_sign > 0 ? "+" : (c.observed_slope_sign < 0 ? "-" : "0");
    j["summand_pf2"] = c.summand_pf2;
    j["criterion"] = to_string(c.criterion.status);
    j["criterion_direction"] = to_string(c.criterion.direction);
    j["oracle"] = to_string(c.oracle.status);
    j["pass"] = c.pass(row);
    rows.push_back(j);
    r.verdicts.push_back(c.criterion);
    r.verdicts.push_back(c.oracle);
  }
  return rows;
}

Json katz_rows(Report& r, const RunOptions& opts) {
  Json rows = Json::array();
  for (KatzPair pair : {KatzPair::bin_poi, KatzPair::bin_nb, KatzPair::poi_nb}) {
    for (Order boundary : {Order::lr, Order::st}) {
      std::size_t cells = 0;
      std::size_t agree = 0;
      std::size_t boundary_cells = 0;
      std::size_t boundary_hold = 0;
      std::string condition;
      for (const KatzCell& cell : katz_sweep(pair, boundary)) {
        const KatzCondition cond = katz_threshold(pair, cell.params);
        condition = boundary == Order::lr ? cond.lr_text : cond.st_text;
        const bool closed = boundary == Order::lr ? cond.lr : cond.st;
        const auto [a, b] = katz_laws(pair, cell.params);
        const auto [da, db] = factor_distributions(make_factor_law(a), make_factor_law(b), grid_options(opts));
        const OrderVerdict v = oracle(boundary, da, db, opts.tol);
        ++cells;
        agree += (v.holds() == closed) ? 1 : 0;
        if (cell.factor == 1.0) {
          ++boundary_cells;
          boundary_hold += v.holds() ? 1 : 0;
        }
      }
      Json j = Json::object();
      j["pair"] = to_string(pair);
      j["order"] = to_string(boundary);
      j["condition"] = condition;
      j["cells"] = cells;
      j["agree"] = agree;
      j["boundary_cells"] = boundary_cells;
      j["boundary_holds"] = boundary_hold;
      j["pass"] = agree == cells && boundary_hold == boundary_cells;
      rows.push_back(j);
    }
  }
  // The worked example: Bin(10, 0.05) against Poi(0.6).
  const ParamMap example{{"n", 10.0}, {"p", 0.05}, {"lambda", 0.6}};
  const KatzCondition cond = katz_threshold(KatzPair::bin_poi, example);
  const auto [a, b] = katz_laws(KatzPair::bin_poi, example);
  for (Order order : {Order::lr, Order::st}) {
    OrderVerdict v;
    v.order = order;
    v.direction = Direction::up;
    v.method = Method::closed_form;
    v.tolerances = opts.tol;
    v.status = (order == Order::lr ? cond.lr : cond.st) ? Status::holds : Status::fails;
    v.claim = a + " " + order_symbol(order) + " " + b;
    v.certification = "exact";
    v.note = order == Order::lr ? cond.lr_text : cond.st_text;
    r.verdicts.push_back(v);
  }
  return rows;
}

}  // namespace

Report cmd_table(const std::string& id, const RunOptions& opts) {
  Report r = start("table", opts);
  r.inputs = {{"id", id}};
  if (id == "table1") {
    r.rows = table1_rows(opts);
  } else if (id == "table2") {
    r.rows = table2_rows(r, opts);
  } else if (id == "katz") {
    r.rows = katz_rows(r, opts);
  } else {
    throw std::invalid_argument("table: unknown id '" + id + "' (expected table1, table2 or katz)");
  }
  return r;
}

std::string default_golden_dir() { return KERNORD_GOLDEN_DIR; }

std::string diff_against_golden(const Json& rows, const std::string& golden_path) {
  std::ifstream in(golden_path);
  if (!in) {
    return "golden file not found: " + golden_path;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  Json golden;
  try {
    golden = Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    return "golden file is not valid JSON: " + std::string(e.what());
  }
  if (!golden.is_array()) {
    return "golden file must hold an array of rows";
  }
  if (golden.size() != rows.size()) {
    return "row count differs: golden " + std::to_string(golden.size()) + ", live " + std::to_string(rows.size());
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (golden[i] != rows[i]) {
      return "row " + std::to_string(i) + " differs:\n  golden: " + golden[i].dump() + "\n  live:   " + rows[i].dump();
    }
  }
  return {};
}

int exit_code_for(const Report& r) {
  for (const auto& v : r.verdicts) {
    if (!v.holds()) {
      return 1;
    }
  }
  for (const auto& row : r.rows) {
    if (row.contains("pass") && !row.at("pass").get<bool>()) {
      return 1;
    }
  }
  return 0;
}

namespace {

std::string render(const Report& r, Format f) {
  switch (f) {
    case Format::json:
      return report_to_json(r);
    case Format::csv:
      return report_to_csv(r);
    case Format::text:
      return report_to_text(r);
  }
  return {};
}

void add_common(CLI::App* app, RunOptions& opts, std::string& format) {
  app->add_option("--kmax", opts.k_max, "Truncation cap for discrete supports (compound: k_max, default 400)")
      ->check(CLI::Range(std::int64_t{1}, std::int64_t{100000000}));
  app->add_option_function<double>(
         "--tail-eps", [&opts](double v) { opts.grid.eps_tail = v; opts.tol.eps_tail = v; },
         "Tail-mass target and negligible-mass cutoff (default 1e-12)")
      ->check(CLI::PositiveNumber);
  app->add_option("--tol-shape", opts.tol.shape, "Tolerance for kernel difference signs (default 1e-9)")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--tol-tail", opts.tol.tail, "Tolerance for tail-mean comparisons (default 1e-8)")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--nu-grid", opts.nu_points, "Number of scanned parameter values (default 17)")
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
  app->add_option("--grid-points", opts.grid.grid_points, "Points on continuous grids (default 4000)")
      ->check(CLI::Range(std::size_t{10}, std::size_t{10000000}));
  app->add_option("--format", format, "Output format: json, csv or text")
      ->check(CLI::IsMember({"json", "csv", "text"}));
  app->add_flag("--timing", opts.timing, "Record wall-clock runtime in runtime_ms");
}

DirectionChoice parse_direction_choice(const std::string& s) {
  if (s == "up") return DirectionChoice::up;
  if (s == "down") return DirectionChoice::down;
  return DirectionChoice::automatic;
}

CheckMethod parse_check_method(const std::string& s) {
  if (s == "superlevel") return CheckMethod::superlevel;
  if (s == "concave-endpoint") return CheckMethod::concave_endpoint;
  if (s == "unimodal-endpoint") return CheckMethod::unimodal_endpoint;
  return CheckMethod::kernel;
}

}  // namespace

CliResult run(const std::vector<std::string>& args) {
  CliResult res;
  CLI::App app{"kernord: likelihood-ratio, relative log-concavity, hazard-rate and usual stochastic orders "
               "decided from kernels and checked by a brute-force oracle"};
  app.require_subcommand(1);

  RunOptions opts;
  std::string format = "json";
  std::string family, p_spec, q_spec, counting, summand, path_spec, table_id;
  std::string orders_str = "lr,lc,st,hr";
  std::string direction = "auto";
  std::string method = "kernel";
  std::string golden_dir = default_golden_dir();
  std::string write_golden;
  double nu1 = 0.0, nu2 = 0.0, mode = 0.0;

  CLI::App* check = app.add_subcommand("check", "Orders within a one-parameter family over [nu1, nu2]");
  check->add_option("--family", family, "Family spec, e.g. negbinomial-in-shape:p=0.3")->required();
  check->add_option("--nu1", nu1, "Lower parameter value")->required();
  check->add_option("--nu2", nu2, "Upper parameter value")->required();
  check->add_option("--orders", orders_str, "Comma-separated orders (lr,lc,st,hr)");
  check->add_option("--direction", direction, "up, down or auto")->check(CLI::IsMember({"up", "down", "auto"}));
  check->add_option("--method", method, "kernel, superlevel, concave-endpoint or unimodal-endpoint")
      ->check(CLI::IsMember({"kernel", "superlevel", "concave-endpoint", "unimodal-endpoint"}));
  check->add_option("--mode", mode, "Kernel mode c for the unimodal-endpoint criterion");
  add_common(check, opts, format);

  CLI::App* pairwise = app.add_subcommand("pairwise", "Orders between two discrete laws, P <= Q");
  pairwise->add_option("--p", p_spec, "First law, e.g. binomial:n=10,p=0.05")->required();
  pairwise->add_option("--q", q_spec, "Second law, e.g. poisson:lambda=0.6")->required();
  pairwise->add_option("--orders", orders_str, "Comma-separated orders (lr,lc,st,hr)");
  add_common(pairwise, opts, format);

  CLI::App* path = app.add_subcommand("path", "Orders along a named parameter path");
  path->add_option("--spec", path_spec, "Path spec, e.g. nb-linear:r1=2,r2=4,q1=0.3,q2=0.5")->required();
  path->add_option("--orders", orders_str, "Comma-separated orders (lr,lc,st,hr)");
  path->add_option("--direction", direction, "up, down or auto")->check(CLI::IsMember({"up", "down", "auto"}));
  add_common(path, opts, format);

  CLI::App* compound = app.add_subcommand("compound", "lr order of a compound law in the counting parameter");
  compound->add_option("--counting", counting, "Counting family spec, e.g. poisson")->required();
  compound->add_option("--summand", summand, "Summand spec, e.g. geometric:p=0.5")->required();
  compound->add_option("--nu1", nu1, "Lower parameter value")->required();
  compound->add_option("--nu2", nu2, "Upper parameter value")->required();
  add_common(compound, opts, format);

  CLI::App* table = app.add_subcommand("table", "Reproduce a table and diff it against its golden file");
  table->add_option("--id", table_id, "table1, table2 or katz")
      ->required()
      ->check(CLI::IsMember({"table1", "table2", "katz"}));
  table->add_option("--golden-dir", golden_dir, "Directory holding <id>.json golden files");
  table->add_option("--write-golden", write_golden, "Write the live rows to this file instead of diffing");
  add_common(table, opts, format);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    res.out = app.help();
    return res;
  } catch (const CLI::CallForAllHelp&) {
    res.out = app.help("", CLI::AppFormatMode::All);
    return res;
  } catch (const CLI::ParseError& e) {
    res.exit_code = 2;
    res.err = std::string("error: ") + e.what() + "\n";
    return res;
  }

  opts.format = format == "csv" ? Format::csv : (format == "text" ? Format::text : Format::json);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Report r;
    std::string diff;
    if (check->parsed()) {
      CheckOptions co;
      co.direction = parse_direction_choice(direction);
      co.method = parse_check_method(method);
      co.mode = mode;
      r = cmd_check(family, nu1, nu2, parse_order_list(orders_str), co, opts);
    } else if (pairwise->parsed()) {
      r = cmd_pairwise(p_spec, q_spec, parse_order_list(orders_str), opts);
    } else if (path->parsed()) {
      r = cmd_path(path_spec, parse_order_list(orders_str), parse_direction_choice(direction), opts);
    } else if (compound->parsed()) {
      r = cmd_compound(counting, summand, nu1, nu2, opts);
    } else {
      r = cmd_table(table_id, opts);
      if (!write_golden.empty()) {
        std::ofstream out(write_golden);
        if (!out) {
          throw std::invalid_argument("cannot write golden file '" + write_golden + "'");
        }
        out << dump_json(r.rows);
      } else {
        diff = diff_against_golden(r.rows, golden_dir + "/" + table_id + ".json");
      }
    }
    if (opts.timing) {
      r.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
                         .count();
    }
    res.out = render(r, opts.format);
    res.exit_code = exit_code_for(r);
    if (!diff.empty()) {
      res.err = "golden mismatch: " + diff + "\n";
      res.exit_code = 1;
    }
  } catch (const std::exception& e) {
    // Spec, parameter, truncation and domain errors are all input errors.
    res.exit_code = 2;
    res.err = std::string("error: ") + e.what() + "\n";
  }
  return res;
}

}  // namespace kernord::cli
