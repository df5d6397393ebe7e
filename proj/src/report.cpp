#include "kernord/report.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace kernord {

namespace {

void dump_into(const Json& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",\n";
        }
        first = false;
        out += pad;
        out += Json(it.key()).dump();
        out += ": ";
        dump_into(it.value(), out, depth + 1);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) {
          out += ",\n";
        }
        first = false;
        out += pad;
        dump_into(v, out, depth + 1);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "\"" + format_double(v) + "\"";
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

// Non-finite doubles are stored as strings so that a parsed report compares
// equal to the one that was written.
Json jnum(double v) {
  if (std::isfinite(v)) {
    return Json(v);
  }
  return Json(format_double(v));
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw std::invalid_argument(std::string("report: missing field '") + key + "'");
  }
  return j.at(key);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    return s;
  }
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') {
      q += '"';
    }
    q += c;
  }
  return q + "\"";
}

std::string scalar_text(const Json& v) {
  if (v.is_string()) {
    return v.get<std::string>();
  }
  if (v.is_number_float()) {
    return format_double(v.get<double>());
  }
  if (v.is_null()) {
    return "";
  }
  return v.dump();
}

std::string witness_points(const Witness& w) {
  std::string s;
  for (std::size_t i = 0; i < w.points.size(); ++i) {
    s += (i ? " " : "") + format_double(w.points[i]);
  }
  return s;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double json_double(const Json& j) {
  if (j.is_number()) {
    return j.get<double>();
  }
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") {
      return std::numeric_limits<double>::infinity();
    }
    if (s == "-inf") {
      return -std::numeric_limits<double>::infinity();
    }
    if (s == "nan") {
      return std::numeric_limits<double>::quiet_NaN();
    }
  }
  throw std::invalid_argument("report: expected a number, got " + j.dump());
}

std::string dump_json(const Json& j) {
  std::string out;
  dump_into(j, out, 0);
  out += "\n";
  return out;
}

Json to_json(const Tolerances& t) {
  Json j = Json::object();
  j["shape"] = jnum(t.shape);
  j["tail"] = jnum(t.tail);
  j["eps_tail"] = jnum(t.eps_tail);
  j["oracle_rel"] = jnum(t.oracle_rel);
  j["oracle_abs"] = jnum(t.oracle_abs);
  return j;
}

Tolerances tolerances_from_json(const Json& j) {
  Tolerances t;
  t.shape = json_double(field(j, "shape"));
  t.tail = json_double(field(j, "tail"));
  t.eps_tail = json_double(field(j, "eps_tail"));
  t.oracle_rel = json_double(field(j, "oracle_rel"));
  t.oracle_abs = json_double(field(j, "oracle_abs"));
  return t;
}

Json to_json(const OrderVerdict& v) {
  Json j = Json::object();
  j["order"] = to_string(v.order);
  j["direction"] = to_string(v.direction);
  j["status"] = to_string(v.status);
  j["method"] = to_string(v.method);
  j["claim"] = v.claim;
  j["certification"] = v.certification;
  if (v.witness) {
    Json w = Json::object();
    Json pts = Json::array();
    for (double x : v.witness->points) {
      pts.push_back(jnum(x));
    }
    w["points"] = pts;
    w["nu"] = v.witness->nu ? jnum(*v.witness->nu) : Json(nullptr);
    w["margin"] = jnum(v.witness->margin);
    j["witness"] = w;
  } else {
    j["witness"] = nullptr;
  }
  j["tolerances"] = to_json(v.tolerances);
  j["note"] = v.note;
  return j;
}

OrderVerdict verdict_from_json(const Json& j) {
  OrderVerdict v;
  v.order = parse_order(field(j, "order").get<std::string>());
  v.direction = parse_direction(field(j, "direction").get<std::string>());
  v.status = parse_status(field(j, "status").get<std::string>());
  v.method = parse_method(field(j, "method").get<std::string>());
  v.claim = field(j, "claim").get<std::string>();
  v.certification = field(j, "certification").get<std::string>();
  const Json& w = field(j, "witness");
  if (!w.is_null()) {
    Witness wit;
    for (const auto& x : field(w, "points")) {
      wit.points.push_back(json_double(x));
    }
    const Json& nu = field(w, "nu");
    if (!nu.is_null()) {
      wit.nu = json_double(nu);
    }
    wit.margin = json_double(field(w, "margin"));
    v.witness = wit;
  }
  v.tolerances = tolerances_from_json(field(j, "tolerances"));
  v.note = field(j, "note").get<std::string>();
  return v;
}

Json to_json(const Report& r) {
  Json j = Json::object();
  j["command"] = r.command;
  Json inputs = Json::object();
  for (const auto& [k, v] : r.inputs) {
    inputs[k] = v;
  }
  j["inputs"] = inputs;
  Json verdicts = Json::array();
  for (const auto& v : r.verdicts) {
    verdicts.push_back(to_json(v));
  }
  j["verdicts"] = verdicts;
  j["rows"] = r.rows;
  j["tolerances"] = to_json(r.tolerances);
  j["runtime_ms"] = r.runtime_ms;
  return j;
}

std::string report_to_json(const Report& r) { return dump_json(to_json(r)); }

Report report_from_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("report: malformed JSON: ") + e.what());
  }
  Report r;
  try {
    r.command = field(j, "command").get<std::string>();
    for (auto it = field(j, "inputs").begin(); it != field(j, "inputs").end(); ++it) {
      r.inputs.emplace_back(it.key(), it.value().get<std::string>());
    }
    for (const auto& v : field(j, "verdicts")) {
      r.verdicts.push_back(verdict_from_json(v));
    }
    r.rows = field(j, "rows");
    r.tolerances = tolerances_from_json(field(j, "tolerances"));
    r.runtime_ms = field(j, "runtime_ms").get<std::int64_t>();
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("report: unexpected JSON shape: ") + e.what());
  }
  return r;
}

bool Report::operator==(const Report& other) const {
  return command == other.command && inputs == other.inputs && verdicts == other.verdicts &&
         rows == other.rows && tolerances == other.tolerances && runtime_ms == other.runtime_ms;
}

std::string report_to_text(const Report& r) {
  std::string out = r.command;
  for (const auto& [k, v] : r.inputs) {
    out += " --" + k + " " + v;
  }
  out += "\n";
  for (const auto& v : r.verdicts) {
    char head[96];
    std::snprintf(head, sizeof head, "%-12s %-3s %-5s %-18s ", to_string(v.status).c_str(),
                  to_string(v.order).c_str(), to_string(v.direction).c_str(), to_string(v.method).c_str());
    out += head + v.claim;
    if (v.witness) {
      out += "  [witness x=" + witness_points(*v.witness);
      if (v.witness->nu) {
        out += " nu=" + format_double(*v.witness->nu);
      }
      out += " margin=" + format_double(v.witness->margin) + "]";
    }
    if (!v.note.empty()) {
      out += "  (" + v.note + ")";
    }
    out += "\n";
  }
  for (const auto& row : r.rows) {
    out += row.dump() + "\n";
  }
  return out;
}

std::string report_to_csv(const Report& r) {
  std::string out;
  if (!r.rows.empty()) {
    std::vector<std::string> keys;
    for (auto it = r.rows.front().begin(); it != r.rows.front().end(); ++it) {
      if (!it.value().is_structured()) {
        keys.push_back(it.key());
      }
    }
    for (std::size_t i = 0; i < keys.size(); ++i) {
      out += (i ? "," : "") + keys[i];
    }
    out += "\n";
    for (const auto& row : r.rows) {
      for (std::size_t i = 0; i < keys.size(); ++i) {
        out += (i ? "," : "") + csv_field(row.contains(keys[i]) ? scalar_text(row.at(keys[i])) : "");
      }
      out += "\n";
    }
    return out;
  }
  out += "order,direction,status,method,certification,claim,witness_points,witness_nu,witness_margin\n";
  for (const auto& v : r.verdicts) {
    out += to_string(v.order) + "," + to_string(v.direction) + "," + to_string(v.status) + "," +
           to_string(v.method) + "," + csv_field(v.certification) + "," + csv_field(v.claim) + ",";
    if (v.witness) {
      out += witness_points(*v.witness) + "," + (v.witness->nu ? format_double(*v.witness->nu) : "") + "," +
             format_double(v.witness->margin);
    } else {
      out += ",,";
    }
    out += "\n";
  }
  return out;
}

}  // namespace kernord
