#include "kernord/verdict.hpp"

#include <stdexcept>

namespace kernord {

std::string to_string(Order o) {
  switch (o) {
    case Order::lr:
      return "lr";
    case Order::lc:
      return "lc";
    case Order::st:
      return "st";
    case Order::hr:
      return "hr";
  }
  return "?";
}

std::string to_string(Direction d) { return d == Direction::up ? "up" : "down"; }

std::string to_string(Status s) {
  switch (s) {
    case Status::holds:
      return "holds";
    case Status::fails:
      return "fails";
    case Status::inconclusive:
      return "inconclusive";
  }
  return "?";
}

std::string to_string(Method m) {
  switch (m) {
    case Method::kernel_criterion:
      return "kernel-criterion";
    case Method::superlevel:
      return "superlevel";
    case Method::concave_endpoint:
      return "concave-endpoint";
    case Method::unimodal_endpoint:
      return "unimodal-endpoint";
    case Method::oracle:
      return "oracle";
    case Method::closed_form:
      return "closed-form";
  }
  return "?";
}

Order parse_order(std::string_view s) {
  if (s == "lr") return Order::lr;
  if (s == "lc") return Order::lc;
  if (s == "st") return Order::st;
  if (s == "hr") return Order::hr;
  throw std::invalid_argument("unknown order '" + std::string(s) + "'");
}

Direction parse_direction(std::string_view s) {
  if (s == "up") return Direction::up;
  if (s == "down") return Direction::down;
  throw std::invalid_argument("unknown direction '" + std::string(s) + "'");
}

Status parse_status(std::string_view s) {
  if (s == "holds") return Status::holds;
  if (s == "fails") return Status::fails;
  if (s == "inconclusive") return Status::inconclusive;
  throw std::invalid_argument("unknown status '" + std::string(s) + "'");
}

Method parse_method(std::string_view s) {
  for (Method m : {Method::kernel_criterion, Method::superlevel, Method::concave_endpoint,
                   Method::unimodal_endpoint, Method::oracle, Method::closed_form}) {
    if (s == to_string(m)) {
      return m;
    }
  }
  throw std::invalid_argument("unknown method '" + std::string(s) + "'");
}

std::vector<Order> parse_order_list(std::string_view s) {
  std::vector<Order> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string_view tok =
        s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    out.push_back(parse_order(tok));
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return out;
}

Direction opposite(Direction d) { return d == Direction::up ? Direction::down : Direction::up; }

std::string order_symbol(Order o) { return "<=" + to_string(o); }

}  // namespace kernord
