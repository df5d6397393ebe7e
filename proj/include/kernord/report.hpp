#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kernord/verdict.hpp"

namespace kernord {

using Json = nlohmann::ordered_json;

/// Output of one CLI command.
///
/// `inputs` echoes the command's arguments in the order given; `rows` carries
/// table reproductions (empty array for verdict-only commands). The JSON field
/// order is fixed: command, inputs, verdicts, rows, tolerances, runtime_ms.
struct Report {
  std::string command;
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<OrderVerdict> verdicts;
  Json rows = Json::array();
  Tolerances tolerances;
  std::int64_t runtime_ms = 0;

  bool operator==(const Report& other) const;
};

/// Serialises with doubles printed as %.17g and non-finite values as the
/// strings "inf", "-inf" and "nan"; two-space indentation, trailing newline.
std::string dump_json(const Json& j);

Json to_json(const OrderVerdict& v);
OrderVerdict verdict_from_json(const Json& j);
Json to_json(const Tolerances& t);
Tolerances tolerances_from_json(const Json& j);

Json to_json(const Report& r);
std::string report_to_json(const Report& r);

/// Inverse of report_to_json. Throws std::invalid_argument on schema errors.
Report report_from_json(std::string_view text);

/// One line per verdict: `holds  lr  up  kernel-criterion  <claim>  [witness]`.
std::string report_to_text(const Report& r);

/// Header plus one line per verdict, or per table row when `rows` is nonempty
/// (the row's scalar fields in their JSON order).
std::string report_to_csv(const Report& r);

/// %.17g, or "inf" / "-inf" / "nan".
std::string format_double(double v);

/// A double stored by dump_json: a number, or one of the non-finite strings.
double json_double(const Json& j);

}  // namespace kernord
