#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pimdp/linear_solve.hpp"
#include "pimdp/scalar.hpp"

namespace pimdp {

using StateIndex = std::size_t;
using ActionIndex = std::size_t;

/// Finite discounted MDP with dense state and action indices.
/// P is stored row-major as (s, a, s') and R as (s, a).
template <Scalar T>
class Mdp {
 public:
  Mdp(std::size_t num_states, std::size_t num_actions, T gamma)
      : n_(num_states),
        k_(num_actions),
        gamma_(std::move(gamma)),
        p_(num_states * num_actions * num_states, T(0)),
        r_(num_states * num_actions, T(0)) {}

  std::size_t num_states() const noexcept { return n_; }
  std::size_t num_actions() const noexcept { return k_; }

  const T& gamma() const noexcept { return gamma_; }
  void set_gamma(T gamma) { gamma_ = std::move(gamma); }

  T& p(StateIndex s, ActionIndex a, StateIndex next) { return p_[(s * k_ + a) * n_ + next]; }
  const T& p(StateIndex s, ActionIndex a, StateIndex next) const {
    return p_[(s * k_ + a) * n_ + next];
  }

  T& r(StateIndex s, ActionIndex a) { return r_[s * k_ + a]; }
  const T& r(StateIndex s, ActionIndex a) const { return r_[s * k_ + a]; }

  std::span<const T> row(StateIndex s, ActionIndex a) const {
    return {p_.data() + (s * k_ + a) * n_, n_};
  }

  friend bool operator==(const Mdp&, const Mdp&) = default;

 private:
  std::size_t n_;
  std::size_t k_;
  T gamma_;
  std::vector<T> p_;
  std::vector<T> r_;
};

/// Deterministic stationary policy: entry s is the action taken in state s.
struct Policy {
  std::vector<ActionIndex> actions;

  std::size_t size() const noexcept { return actions.size(); }
  ActionIndex operator[](StateIndex s) const { return actions[s]; }
  ActionIndex& operator[](StateIndex s) { return actions[s]; }

  friend auto operator<=>(const Policy&, const Policy&) = default;
  friend bool operator==(const Policy&, const Policy&) = default;
};

inline Policy zero_policy(std::size_t num_states) { return Policy{std::vector<ActionIndex>(num_states, 0)}; }

/// Action-index string, e.g. "0110". Indices are comma separated once any
/// action needs more than one digit.
inline std::string to_string(const Policy& pi) {
  const bool compact = std::all_of(pi.actions.begin(), pi.actions.end(), [](ActionIndex a) { return a < 10; });
  std::string out;
  for (std::size_t s = 0; s < pi.size(); ++s) {
    if (!compact && s > 0) out += ',';
    out += std::to_string(pi[s]);
  }
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const Policy& pi) { return os << to_string(pi); }

template <Scalar T>
using ValueFunction = std::vector<T>;

/// Q^pi(s, a) for every state-action pair, row-major (s, a).
template <Scalar T>
struct QFunction {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<T> q;

  const T& operator()(StateIndex s, ActionIndex a) const { return q[s * num_actions + a]; }
};

struct StateAction {
  StateIndex state;
  ActionIndex action;

  friend auto operator<=>(const StateAction&, const StateAction&) = default;
  friend bool operator==(const StateAction&, const StateAction&) = default;
};

/// A set of single-state action switches, kept sorted by (state, action).
class ModificationSet {
 public:
  ModificationSet() = default;

  explicit ModificationSet(std::vector<StateAction> pairs) : pairs_(std::move(pairs)) {
    std::sort(pairs_.begin(), pairs_.end());
    pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
    well_defined_ = std::adjacent_find(pairs_.begin(), pairs_.end(), [](const auto& x, const auto& y) {
                      return x.state == y.state;
                    }) == pairs_.end();
  }

  const std::vector<StateAction>& pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }

  /// True iff every state occurs in at most one pair.
  bool well_defined() const noexcept { return well_defined_; }

  /// Sorted distinct states.
  std::vector<StateIndex> states() const {
    std::vector<StateIndex> out;
    for (const auto& p : pairs_) {
      if (out.empty() || out.back() != p.state) out.push_back(p.state);
    }
    return out;
  }

  bool contains(const StateAction& p) const { return std::binary_search(pairs_.begin(), pairs_.end(), p); }

  bool is_subset_of(const ModificationSet& other) const {
    return std::includes(other.pairs_.begin(), other.pairs_.end(), pairs_.begin(), pairs_.end());
  }

  friend bool operator==(const ModificationSet& x, const ModificationSet& y) { return x.pairs_ == y.pairs_; }

 private:
  std::vector<StateAction> pairs_;
  bool well_defined_ = true;
};

/// "s:a,s:a" or "-" for the empty set.
inline std::string to_string(const ModificationSet& set) {
  if (set.empty()) return "-";
  std::string out;
  for (const auto& [s, a] : set.pairs()) {
    if (!out.empty()) out += ',';
    out += std::to_string(s) + ":" + std::to_string(a);
  }
  return out;
}

enum class Comparison { Better, Worse, Equivalent, Incomparable };

inline const char* to_string(Comparison c) {
  switch (c) {
    case Comparison::Better: return "Better";
    case Comparison::Worse: return "Worse";
    case Comparison::Equivalent: return "Equivalent";
    case Comparison::Incomparable: return "Incomparable";
  }
  return "?";
}

inline std::ostream& operator<<(std::ostream& os, Comparison c) { return os << to_string(c); }

inline Comparison reverse(Comparison c) {
  switch (c) {
    case Comparison::Better: return Comparison::Worse;
    case Comparison::Worse: return Comparison::Better;
    default: return c;
  }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Lists every violated MDP invariant; an empty result means the MDP is valid.
template <Scalar T>
std::vector<std::string> validate_mdp(const Mdp<T>& mdp) {
  using Traits = ScalarTraits<T>;
  std::vector<std::string> out;
  const std::size_t n = mdp.num_states();
  const std::size_t k = mdp.num_actions();
  if (n == 0) out.emplace_back("state count must be at least 1");
  if (k == 0) out.emplace_back("action count must be at least 1");
  if (mdp.gamma() < T(0) || !(mdp.gamma() < T(1))) {
    out.push_back("gamma " + Traits::to_string(mdp.gamma()) + " outside [0,1)");
  }
  for (StateIndex s = 0; s < n; ++s) {
    for (ActionIndex a = 0; a < k; ++a) {
      T sum(0);
      for (StateIndex t = 0; t < n; ++t) {
        const T& p = mdp.p(s, a, t);
        bool in_range;
        if constexpr (Traits::exact) {
          in_range = p >= T(0) && p <= T(1);
        } else {
          in_range = p >= -kRowSumTolerance && p <= 1.0 + kRowSumTolerance;
        }
        if (!in_range) {
          out.push_back("P(" + std::to_string(t) + "|s=" + std::to_string(s) + ",a=" + std::to_string(a) +
                        ") = " + Traits::to_string(p) + " outside [0,1]");
        }
        sum += p;
      }
      bool ok;
      if constexpr (Traits::exact) {
        ok = sum == T(1);
      } else {
        ok = std::abs(sum - 1.0) <= kRowSumTolerance;
      }
      if (!ok) {
        out.push_back("row sum for (s=" + std::to_string(s) + ",a=" + std::to_string(a) + ") is " +
                      Traits::to_string(sum) + ", expected 1");
      }
    }
  }
  return out;
}

/// Throws std::invalid_argument unless pi is a total policy for mdp.
template <Scalar T>
void check_policy(const Mdp<T>& mdp, const Policy& pi) {
  if (pi.size() != mdp.num_states()) {
    throw std::invalid_argument("policy has " + std::to_string(pi.size()) + " entries, MDP has " +
                                std::to_string(mdp.num_states()) + " states");
  }
  for (StateIndex s = 0; s < pi.size(); ++s) {
    if (pi[s] >= mdp.num_actions()) {
      throw std::invalid_argument("policy action " + std::to_string(pi[s]) + " at state " + std::to_string(s) +
                                  " out of range");
    }
  }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Solves (I - gamma P_pi) V = R_pi.
template <Scalar T>
ValueFunction<T> evaluate_policy(const Mdp<T>& mdp, const Policy& pi) {
  check_policy(mdp, pi);
  const std::size_t n = mdp.num_states();
  std::vector<T> a(n * n, T(0));
  std::vector<T> b(n, T(0));
  for (StateIndex s = 0; s < n; ++s) {
    const ActionIndex act = pi[s];
    for (StateIndex t = 0; t < n; ++t) {
      const T& p = mdp.p(s, act, t);
      if (p != T(0)) a[s * n + t] = -(mdp.gamma() * p);
    }
    a[s * n + s] += T(1);
    b[s] = mdp.r(s, act);
  }
  return solve_linear_system<T>(std::move(a), std::move(b), n);
}

/// R(s,a) + gamma * sum_s' P(s'|s,a) v(s').
template <Scalar T>
T backup(const Mdp<T>& mdp, const ValueFunction<T>& v, StateIndex s, ActionIndex a) {
  T acc(0);
  for (StateIndex t = 0; t < mdp.num_states(); ++t) {
    const T& p = mdp.p(s, a, t);
    if (p != T(0)) acc += p * v[t];
  }
  return T(mdp.r(s, a) + mdp.gamma() * acc);
}

template <Scalar T>
QFunction<T> q_values(const Mdp<T>& mdp, const ValueFunction<T>& v) {
  QFunction<T> out{mdp.num_states(), mdp.num_actions(), {}};
  out.q.reserve(mdp.num_states() * mdp.num_actions());
  for (StateIndex s = 0; s < mdp.num_states(); ++s) {
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) out.q.push_back(backup(mdp, v, s, a));
  }
  return out;
}

/// pi is carried for interface symmetry; Q only depends on V.
template <Scalar T>
QFunction<T> q_values(const Mdp<T>& mdp, const Policy& pi, const ValueFunction<T>& v) {
  check_policy(mdp, pi);
  return q_values(mdp, v);
}

/// Max-norm of V - (R_pi + gamma P_pi V).
template <Scalar T>
T bellman_residual(const Mdp<T>& mdp, const Policy& pi, const ValueFunction<T>& v) {
  using Traits = ScalarTraits<T>;
  T worst(0);
  for (StateIndex s = 0; s < mdp.num_states(); ++s) {
    T diff = Traits::magnitude(T(v[s] - backup(mdp, v, s, pi[s])));
    if (diff > worst) worst = std::move(diff);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Modification sets
// ---------------------------------------------------------------------------

/// {(s,a) : Q(s,a) > V(s)}; strict exactly in exact mode, by more than
/// kFloatTolerance in float mode.
template <Scalar T>
ModificationSet modification_set(const Policy& pi, const ValueFunction<T>& v, const QFunction<T>& q) {
  std::vector<StateAction> pairs;
  for (StateIndex s = 0; s < q.num_states; ++s) {
    for (ActionIndex a = 0; a < q.num_actions; ++a) {
      if (a != pi[s] && ScalarTraits<T>::greater(q(s, a), v[s])) pairs.push_back({s, a});
    }
  }
  return ModificationSet(std::move(pairs));
}

template <Scalar T>
ModificationSet modification_set(const Mdp<T>& mdp, const Policy& pi) {
  const ValueFunction<T> v = evaluate_policy(mdp, pi);
  return modification_set(pi, v, q_values(mdp, v));
}

/// Keeps one pair per state: the largest Q, ties to the lowest action index.
template <Scalar T>
ModificationSet reduce_to_well_defined(const ModificationSet& t, const QFunction<T>& q) {
  std::vector<StateAction> kept;
  for (const StateAction& p : t.pairs()) {
    if (!kept.empty() && kept.back().state == p.state) {
      // pairs are sorted, so a later action only wins on strictly larger Q
      if (ScalarTraits<T>::greater(q(p.state, p.action), q(p.state, kept.back().action))) kept.back() = p;
    } else {
      kept.push_back(p);
    }
  }
  return ModificationSet(std::move(kept));
}

/// Policy equal to pi except pi'(s) = a for every (s, a) in u.
inline Policy modify(const Policy& pi, const ModificationSet& u) {
  if (!u.well_defined()) throw std::invalid_argument("modify: modification set is not well defined");
  Policy out = pi;
  for (const auto& [s, a] : u.pairs()) {
    if (s >= out.size()) throw std::invalid_argument("modify: state " + std::to_string(s) + " out of range");
    out[s] = a;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Partial order
// ---------------------------------------------------------------------------

template <Scalar T>
Comparison compare_values(const ValueFunction<T>& v1, const ValueFunction<T>& v2) {
  using Traits = ScalarTraits<T>;
  bool some_greater = false;
  bool some_less = false;
  for (std::size_t s = 0; s < v1.size(); ++s) {
    if (Traits::greater(v1[s], v2[s])) some_greater = true;
    else if (Traits::greater(v2[s], v1[s])) some_less = true;
  }
  if (some_greater && some_less) return Comparison::Incomparable;
  if (some_greater) return Comparison::Better;
  if (some_less) return Comparison::Worse;
  return Comparison::Equivalent;
}

/// Better means pi1 dominates pi2 componentwise with a strict gap somewhere.
template <Scalar T>
Comparison compare(const Mdp<T>& mdp, const Policy& pi1, const Policy& pi2) {
  return compare_values(evaluate_policy(mdp, pi1), evaluate_policy(mdp, pi2));
}

/// Float copy of an exact MDP.
inline Mdp<double> to_float(const Mdp<Rational>& mdp) {
  Mdp<double> out(mdp.num_states(), mdp.num_actions(), mdp.gamma().get_d());
  for (StateIndex s = 0; s < mdp.num_states(); ++s) {
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      out.r(s, a) = mdp.r(s, a).get_d();
      for (StateIndex t = 0; t < mdp.num_states(); ++t) out.p(s, a, t) = mdp.p(s, a, t).get_d();
    }
  }
  return out;
}

}  // namespace pimdp
