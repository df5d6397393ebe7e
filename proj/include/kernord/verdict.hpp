#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kernord {

enum class Order { lr, lc, st, hr };

/// `up` claims P(nu1) <= P(nu2) for nu1 <= nu2; `down` claims the reverse.
/// For two-law comparisons `up` means "first argument below second".
enum class Direction { up, down };

enum class Status { holds, fails, inconclusive };

enum class Method {
  kernel_criterion,
  superlevel,
  concave_endpoint,
  unimodal_endpoint,
  oracle,
  closed_form,
};

std::string to_string(Order o);
std::string to_string(Direction d);
std::string to_string(Status s);
std::string to_string(Method m);

// Each parser throws std::invalid_argument naming the token.
Order parse_order(std::string_view s);
Direction parse_direction(std::string_view s);
Status parse_status(std::string_view s);
Method parse_method(std::string_view s);

/// Comma-separated order list, e.g. "lr,hr,st".
std::vector<Order> parse_order_list(std::string_view s);

Direction opposite(Direction d);

/// Numerical tolerances used when deciding a verdict.
struct Tolerances {
  double shape = 1e-9;       // sign tests on kernel differences
  double tail = 1e-8;        // tail-conditional mean comparisons
  double eps_tail = 1e-12;   // truncation target and negligible-mass cutoff
  double oracle_rel = 1e-10; // ratio monotonicity in the oracle
  double oracle_abs = 1e-10; // survival comparisons in the oracle

  bool operator==(const Tolerances&) const = default;
};

struct Witness {
  std::vector<double> points;  // x, (x1, x2) or (x1, x2, x3)
  std::optional<double> nu;    // parameter value at which it was found
  double margin = 0.0;         // signed slack, negative when violated

  bool operator==(const Witness&) const = default;
};

struct OrderVerdict {
  Order order = Order::lr;
  Direction direction = Direction::up;
  Status status = Status::inconclusive;
  Method method = Method::kernel_criterion;
  std::optional<Witness> witness;
  Tolerances tolerances;
  std::string claim;          // human-readable statement, e.g. "P(1) <=lr P(2)"
  std::string certification;  // "scanned", "grid-certified", "truncated", "exact"
  std::string note;

  bool holds() const { return status == Status::holds; }
  bool fails() const { return status == Status::fails; }

  bool operator==(const OrderVerdict&) const = default;
};

/// "<=lr", "<=st", ...
std::string order_symbol(Order o);

}  // namespace kernord
