#include "kernord/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kernord {

namespace {

double safe_log(double m) { return m > 0.0 ? std::log(m) : -kInf; }

OrderVerdict base_verdict(Order order, const Distribution& P, const Distribution& Q, const AlignedPair& a,
                          const Tolerances& tol) {
  OrderVerdict v;
  v.order = order;
  v.direction = Direction::up;
  v.method = Method::oracle;
  v.tolerances = tol;
  const std::string lp = P.label.empty() ? "P" : P.label;
  const std::string lq = Q.label.empty() ? "Q" : Q.label;
  v.claim = lp + " " + order_symbol(order) + " " + lq;
  if (a.kind != SupportKind::discrete) {
    v.certification = "grid-certified";
  } else {
    v.certification = a.truncated ? "truncated" : "exact";
  }
  v.status = Status::holds;
  return v;
}

std::vector<double> backward_sums(const std::vector<double>& m) {
  std::vector<double> s(m.size());
  double acc = 0.0;
  for (std::size_t i = m.size(); i-- > 0;) {
    acc += m[i];
    s[i] = acc;
  }
  return s;
}

}  // namespace

AlignedPair align(const Distribution& P, const Distribution& Q) {
  AlignedPair a;
  a.kind = P.support.kind;
  a.truncated = P.tail_mass > 0.0 || Q.tail_mass > 0.0;
  if (P.support.kind != Q.support.kind) {
    throw std::invalid_argument("oracle: laws live on different kinds of support");
  }
  if (P.support.kind == SupportKind::discrete) {
    if (P.support.empty() || Q.support.empty()) {
      throw std::invalid_argument("oracle: empty support");
    }
    const auto lo = static_cast<long long>(std::min(P.support.points.front(), Q.support.points.front()));
    const auto hi = static_cast<long long>(std::max(P.support.points.back(), Q.support.points.back()));
    const auto n = static_cast<std::size_t>(hi - lo + 1);
    a.points.resize(n);
    a.p.assign(n, 0.0);
    a.q.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      a.points[i] = static_cast<double>(lo + static_cast<long long>(i));
    }
    for (std::size_t i = 0; i < P.size(); ++i) {
      a.p[static_cast<std::size_t>(static_cast<long long>(P.support.points[i]) - lo)] = P.masses[i];
    }
    for (std::size_t i = 0; i < Q.size(); ++i) {
      a.q[static_cast<std::size_t>(static_cast<long long>(Q.support.points[i]) - lo)] = Q.masses[i];
    }
    return a;
  }
  if (!P.support.same_points(Q.support)) {
    throw std::invalid_argument("oracle: continuous laws must share one grid");
  }
  a.points = P.support.points;
  a.p = P.masses;
  a.q = Q.masses;
  return a;
}

LikelihoodRatioSeq likelihood_ratio(const Distribution& P, const Distribution& Q) {
  const AlignedPair a = align(P, Q);
  LikelihoodRatioSeq l;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    if (a.p[i] == 0.0 && a.q[i] == 0.0) {
      continue;  // outside both supports
    }
    l.points.push_back(a.points[i]);
    // Weights are common to both laws, so the mass ratio is the density ratio.
    l.values.push_back(a.q[i] == 0.0 ? kInf : a.p[i] / a.q[i]);
  }
  return l;
}

OrderVerdict oracle_lr(const Distribution& P, const Distribution& Q, const Tolerances& tol) {
  const AlignedPair a = align(P, Q);
  OrderVerdict v = base_verdict(Order::lr, P, Q, a, tol);
  bool have_prev = false;
  double prev_log = 0.0;
  double prev_x = 0.0;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    if (a.p[i] < tol.eps_tail && a.q[i] < tol.eps_tail) {
      continue;
    }
    const double log_l = safe_log(a.p[i]) - safe_log(a.q[i]);
    if (have_prev && log_l > prev_log + tol.oracle_rel) {
      v.status = Status::fails;
      const double margin = (std::isinf(log_l) || std::isinf(prev_log)) ? -kInf : prev_log - log_l;
      v.witness = Witness{{prev_x, a.points[i]}, std::nullopt, margin};
      return v;
    }
    have_prev = true;
    prev_log = log_l;
    prev_x = a.points[i];
  }
  return v;
}

OrderVerdict oracle_st(const Distribution& P, const Distribution& Q, const Tolerances& tol) {
  const AlignedPair a = align(P, Q);
  OrderVerdict v = base_verdict(Order::st, P, Q, a, tol);
  const auto sp = backward_sums(a.p);
  const auto sq = backward_sums(a.q);
  double worst = kInf;
  std::size_t worst_i = 0;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const double margin = sq[i] - sp[i];
    if (margin < worst) {
      worst = margin;
      worst_i = i;
    }
  }
  if (worst < -tol.oracle_abs) {
    v.status = Status::fails;
    v.witness = Witness{{a.points[worst_i]}, std::nullopt, worst};
  }
  return v;
}

OrderVerdict oracle_hr(const Distribution& P, const Distribution& Q, const Tolerances& tol) {
  const AlignedPair a = align(P, Q);
  OrderVerdict v = base_verdict(Order::hr, P, Q, a, tol);
  const auto sp = backward_sums(a.p);
  const auto sq = backward_sums(a.q);
  bool have_prev = false;
  double prev_log = 0.0;
  double prev_x = 0.0;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    if (!(sq[i] > tol.eps_tail)) {
      continue;
    }
    const double log_ratio = safe_log(sp[i]) - std::log(sq[i]);
    if (have_prev && log_ratio > prev_log + tol.oracle_rel) {
      v.status = Status::fails;
      const double margin = std::isinf(prev_log) ? -kInf : prev_log - log_ratio;
      v.witness = Witness{{prev_x, a.points[i]}, std::nullopt, margin};
      return v;
    }
    have_prev = true;
    prev_log = log_ratio;
    prev_x = a.points[i];
  }
  return v;
}

OrderVerdict oracle_lc(const Distribution& P, const Distribution& Q, const Tolerances& tol) {
  const AlignedPair a = align(P, Q);
  OrderVerdict v = base_verdict(Order::lc, P, Q, a, tol);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    if (a.p[i] > tol.eps_tail) {
      idx.push_back(i);
    }
  }
  if (idx.empty()) {
    throw std::invalid_argument("oracle_lc: first law has no mass above eps_tail");
  }
  for (std::size_t j = 0; j + 1 < idx.size(); ++j) {
    if (idx[j + 1] != idx[j] + 1) {
      v.status = Status::inconclusive;
      v.witness = Witness{{a.points[idx[j]], a.points[idx[j + 1]]}, std::nullopt, 0.0};
      v.note = "relative log-concavity undefined: support of the first law is not an interval";
      return v;
    }
  }
  for (std::size_t i : idx) {
    if (!(a.q[i] > 0.0)) {
      v.status = Status::inconclusive;
      v.witness = Witness{{a.points[i]}, std::nullopt, 0.0};
      v.note = "relative log-concavity undefined: support of the first law is not inside the second";
      return v;
    }
  }
  for (std::size_t j = 0; j + 2 < idx.size(); ++j) {
    auto log_l = [&](std::size_t i) { return std::log(a.p[i]) - std::log(a.q[i]); };
    const double d2 = log_l(idx[j + 2]) - 2.0 * log_l(idx[j + 1]) + log_l(idx[j]);
    if (d2 > tol.oracle_rel) {
      v.status = Status::fails;
      v.witness = Witness{{a.points[idx[j]], a.points[idx[j + 1]], a.points[idx[j + 2]]}, std::nullopt, -d2};
      return v;
    }
  }
  return v;
}

OrderVerdict oracle(Order order, const Distribution& P, const Distribution& Q, const Tolerances& tol) {
  switch (order) {
    case Order::lr:
      return oracle_lr(P, Q, tol);
    case Order::lc:
      return oracle_lc(P, Q, tol);
    case Order::st:
      return oracle_st(P, Q, tol);
    case Order::hr:
      return oracle_hr(P, Q, tol);
  }
  throw std::logic_error("oracle: unknown order");
}

}  // namespace kernord
