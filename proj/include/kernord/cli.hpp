#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kernord/catalog.hpp"
#include "kernord/report.hpp"
#include "kernord/verdict.hpp"

namespace kernord::cli {

enum class Format { json, csv, text };

/// Flags shared by every subcommand.
struct RunOptions {
  GridOptions grid{};
  Tolerances tol{};
  std::size_t nu_points = 17;         // --nu-grid
  std::optional<std::int64_t> k_max;  // --kmax: discrete cap, or compound k_max (default 400)
  bool timing = false;                // --timing: fill runtime_ms (otherwise 0 for reproducibility)
  Format format = Format::json;
};

/// How `check` and `path` pick the direction: a fixed one, or `auto`, which
/// reports the first of up/down that holds (up's failure if neither does).
enum class DirectionChoice { up, down, automatic };

/// Which criterion `check` runs.
enum class CheckMethod { kernel, superlevel, concave_endpoint, unimodal_endpoint };

struct CheckOptions {
  DirectionChoice direction = DirectionChoice::automatic;
  CheckMethod method = CheckMethod::kernel;
  double mode = 0.0;  // for unimodal_endpoint
};

/// Criteria over [nu1, nu2] plus the oracle on the endpoint laws, one pair of
/// verdicts per order. nu1 == nu2 is the reflexive comparison and is decided
/// by the oracle alone.
Report cmd_check(const std::string& family_spec, double nu1, double nu2, const std::vector<Order>& orders,
                 const CheckOptions& check, const RunOptions& opts);

/// P <= Q: lr and lc from the pairwise kernel plus the oracle, st and hr from
/// the oracle.
Report cmd_pairwise(const std::string& p_spec, const std::string& q_spec, const std::vector<Order>& orders,
                    const RunOptions& opts);

/// Chain-rule criterion along a named path plus the oracle on its endpoints.
Report cmd_path(const std::string& path_spec, const std::vector<Order>& orders, DirectionChoice direction,
                const RunOptions& opts);

/// Compound lr criterion over [nu1, nu2] plus oracle_lr on the compound pmfs.
Report cmd_compound(const std::string& counting_spec, const std::string& summand_spec, double nu1, double nu2,
                    const RunOptions& opts);

/// Live reproduction of "table1", "table2" or "katz". Throws
/// std::invalid_argument for other ids.
Report cmd_table(const std::string& id, const RunOptions& opts);

/// Compares `rows` with the golden file; returns an empty string when equal,
/// otherwise a description of the first difference.
std::string diff_against_golden(const Json& rows, const std::string& golden_path);

/// Directory of the checked-in golden files.
std::string default_golden_dir();

/// 0 when every verdict holds, 1 otherwise.
int exit_code_for(const Report& r);

struct CliResult {
  int exit_code = 0;
  std::string out;
  std::string err;
};

/// Runs the command line (arguments without the program name). Never throws:
/// malformed input gives exit code 2 and a diagnostic in `err`.
CliResult run(const std::vector<std::string>& args);

}  // namespace kernord::cli
