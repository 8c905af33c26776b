#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace pimdp {

/// Closed-form iteration-count upper bounds for policy iteration.
enum class BoundKind {
  GreedyTwoAction,  // 6 * 2^n / n          (two actions, n >= 3)
  GreedyMulti,      // 13 * k^n / n
  RandomTwoAction,  // 2^(0.78 n)           (asymptotic, holds with high probability)
  RandomMulti,      // 17 * ((k/2) (1 + 2/log2 k))^n
  Trivial,          // k^n
};

inline const char* to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::GreedyTwoAction: return "greedy";
    case BoundKind::GreedyMulti: return "greedy-multi";
    case BoundKind::RandomTwoAction: return "random";
    case BoundKind::RandomMulti: return "random-multi";
    case BoundKind::Trivial: return "trivial";
  }
  return "?";
}

inline double eval_bound(BoundKind kind, std::size_t n, std::size_t k) {
  if (n < 1) throw std::invalid_argument("eval_bound: n must be at least 1");
  if (k < 2) throw std::invalid_argument("eval_bound: k must be at least 2");
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  switch (kind) {
    case BoundKind::GreedyTwoAction: return 6.0 * std::pow(2.0, nd) / nd;
    case BoundKind::GreedyMulti: return 13.0 * std::pow(kd, nd) / nd;
    case BoundKind::RandomTwoAction: return std::pow(2.0, 0.78 * nd);
    case BoundKind::RandomMulti: return 17.0 * std::pow(kd / 2.0 * (1.0 + 2.0 / std::log2(kd)), nd);
    case BoundKind::Trivial: return std::pow(kd, nd);
  }
  throw std::invalid_argument("eval_bound: unknown bound");
}

/// Bound matching a strategy family. "greedy" and "random" pick the
/// two-action form when k == 2 and the multi-action form otherwise;
/// "greedy-multi" / "random-multi" / "trivial" force a form; every
/// sequential rule maps to the trivial bound.
inline BoundKind bound_kind_for(const std::string& strategy, std::size_t k) {
  if (strategy == "greedy") return k == 2 ? BoundKind::GreedyTwoAction : BoundKind::GreedyMulti;
  if (strategy == "random") return k == 2 ? BoundKind::RandomTwoAction : BoundKind::RandomMulti;
  if (strategy == "greedy-multi") return BoundKind::GreedyMulti;
  if (strategy == "random-multi") return BoundKind::RandomMulti;
  if (strategy == "trivial" || strategy.rfind("sequential", 0) == 0) return BoundKind::Trivial;
  throw std::invalid_argument("no bound for strategy '" + strategy + "'");
}

inline double eval_bounds(std::size_t n, std::size_t k, const std::string& strategy) {
  return eval_bound(bound_kind_for(strategy, k), n, k);
}

/// Whether the proof behind `kind` covers instances of this size.
inline bool bound_applies(BoundKind kind, std::size_t n, std::size_t k) {
  switch (kind) {
    case BoundKind::GreedyTwoAction:
    case BoundKind::RandomTwoAction: return k == 2 && n >= 3;
    case BoundKind::GreedyMulti:
    case BoundKind::RandomMulti: return k >= 2 && n >= 1;
    case BoundKind::Trivial: return true;
  }
  return false;
}

/// Random-selection bounds only hold with high probability; exceeding them
/// is reported, not treated as an error.
inline bool bound_is_probabilistic(BoundKind kind) {
  return kind == BoundKind::RandomTwoAction || kind == BoundKind::RandomMulti;
}

}  // namespace pimdp
