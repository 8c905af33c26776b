#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pimdp/mdp.hpp"
#include "pimdp/policy_iteration.hpp"

namespace pimdp {

/// Brute-force ground truth over all k^n policies. Everything here works on
/// exact arithmetic only: the checked statements are exact, and a float
/// tolerance could invent or hide a violation.

class CapExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultPolicyCap = std::uint64_t(1) << 20;

/// The relation table holds count^2 entries; this bounds its memory.
inline constexpr std::uint64_t kRelationEntryCap = std::uint64_t(1) << 26;

/// Largest modification set whose subset lattice is enumerated.
inline constexpr std::size_t kLatticeCap = 20;

/// k^n, or throws CapExceededError if it exceeds `cap`.
inline std::uint64_t policy_count(std::size_t n, std::size_t k, std::uint64_t cap = kDefaultPolicyCap) {
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (k != 0 && total > cap / k) {
      throw CapExceededError("k^n = " + std::to_string(k) + "^" + std::to_string(n) + " exceeds policy cap " +
                             std::to_string(cap));
    }
    total *= k;
  }
  if (total > cap) throw CapExceededError("policy count exceeds cap " + std::to_string(cap));
  return total;
}

/// Position of pi in the lexicographic enumeration (state 0 most significant).
inline std::size_t policy_index(const Policy& pi, std::size_t k) {
  std::size_t idx = 0;
  for (ActionIndex a : pi.actions) idx = idx * k + a;
  return idx;
}

inline Policy policy_at(std::size_t index, std::size_t n, std::size_t k) {
  Policy pi{std::vector<ActionIndex>(n, 0)};
  for (std::size_t s = n; s-- > 0;) {
    pi[s] = index % k;
    index /= k;
  }
  return pi;
}

/// All k^n policies in lexicographic order.
inline std::vector<Policy> enumerate_policies(std::size_t n, std::size_t k, std::uint64_t cap = kDefaultPolicyCap) {
  const std::uint64_t count = policy_count(n, k, cap);
  std::vector<Policy> out;
  out.reserve(count);
  Policy pi{std::vector<ActionIndex>(n, 0)};
  for (std::uint64_t i = 0; i < count; ++i) {
    out.push_back(pi);
    for (std::size_t s = n; s-- > 0;) {
      if (++pi[s] < k) break;
      pi[s] = 0;
    }
  }
  return out;
}

/// Value of every policy, in enumeration order.
inline std::vector<ValueFunction<Rational>> evaluate_all_policies(const Mdp<Rational>& mdp,
                                                                   std::uint64_t cap = kDefaultPolicyCap) {
  const auto policies = enumerate_policies(mdp.num_states(), mdp.num_actions(), cap);
  std::vector<ValueFunction<Rational>> values;
  values.reserve(policies.size());
  for (const auto& pi : policies) values.push_back(evaluate_policy(mdp, pi));
  return values;
}

/// Componentwise maximum; throws std::logic_error if no single policy attains
/// it at every state (which would contradict existence of an optimal policy).
inline ValueFunction<Rational> optimal_value(const std::vector<ValueFunction<Rational>>& values) {
  if (values.empty()) throw std::invalid_argument("optimal_value: no policies");
  ValueFunction<Rational> best = values.front();
  for (const auto& v : values) {
    for (std::size_t s = 0; s < best.size(); ++s) {
      if (v[s] > best[s]) best[s] = v[s];
    }
  }
  if (std::none_of(values.begin(), values.end(), [&](const auto& v) { return v == best; })) {
    throw std::logic_error("optimal_value: componentwise maximum is not attained by any policy");
  }
  return best;
}

/// All k^n policies, their values, and the full pairwise comparison table.
struct PolicyOrder {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<Policy> policies;
  std::vector<ValueFunction<Rational>> values;
  std::vector<Comparison> relation;  // row-major; entry (i, j) compares policies[i] with policies[j]

  std::size_t size() const noexcept { return policies.size(); }
  Comparison at(std::size_t i, std::size_t j) const { return relation[i * size() + j]; }
  bool better(std::size_t i, std::size_t j) const { return at(i, j) == Comparison::Better; }

  std::size_t index_of(const Policy& pi) const {
    if (pi.size() != num_states) throw std::invalid_argument("policy size does not match the order");
    for (ActionIndex a : pi.actions) {
      if (a >= num_actions) throw std::invalid_argument("policy action out of range for the order");
    }
    return policy_index(pi, num_actions);
  }
};

inline PolicyOrder build_policy_order(const Mdp<Rational>& mdp, std::uint64_t cap = kDefaultPolicyCap) {
  PolicyOrder order;
  order.num_states = mdp.num_states();
  order.num_actions = mdp.num_actions();
  order.policies = enumerate_policies(mdp.num_states(), mdp.num_actions(), cap);
  const std::uint64_t count = order.policies.size();
  if (count > kRelationEntryCap / count) {
    throw CapExceededError("relation table with " + std::to_string(count) + "^2 entries exceeds cap");
  }
  order.values.reserve(count);
  for (const auto& pi : order.policies) order.values.push_back(evaluate_policy(mdp, pi));
  order.relation.assign(count * count, Comparison::Equivalent);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i + 1; j < count; ++j) {
      const Comparison c = compare_values(order.values[i], order.values[j]);
      order.relation[i * count + j] = c;
      order.relation[j * count + i] = reverse(c);
    }
  }
  return order;
}

inline ValueFunction<Rational> optimal_value(const PolicyOrder& order) { return optimal_value(order.values); }

/// Number of policies p with hi >= p (Better or Equivalent) and p > lo.
inline std::size_t count_between(const PolicyOrder& order, const Policy& lo, const Policy& hi) {
  const std::size_t lo_idx = order.index_of(lo);
  const std::size_t hi_idx = order.index_of(hi);
  std::size_t count = 0;
  for (std::size_t p = 0; p < order.size(); ++p) {
    const Comparison hp = order.at(hi_idx, p);
    if ((hp == Comparison::Better || hp == Comparison::Equivalent) && order.better(p, lo_idx)) ++count;
  }
  return count;
}

/// modify(pi, U) for every U subset of l; entry m uses the pairs whose bit is
/// set in m (bit i <-> l.pairs()[i]).
inline std::vector<Policy> modification_lattice(const Policy& pi, const ModificationSet& l) {
  if (!l.well_defined()) throw std::invalid_argument("modification_lattice: set is not well defined");
  if (l.size() > kLatticeCap) {
    throw CapExceededError("modification_lattice: |l| = " + std::to_string(l.size()) + " exceeds " +
                           std::to_string(kLatticeCap));
  }
  const std::size_t count = std::size_t(1) << l.size();
  std::vector<Policy> out;
  out.reserve(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    Policy p = pi;
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (mask >> i & 1) p[l.pairs()[i].state] = l.pairs()[i].action;
    }
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct LemmaReport {
  LemmaReport() = default;
  explicit LemmaReport(std::string id) : lemma_id(std::move(id)) {}

  std::string lemma_id;
  std::size_t checks = 0;
  std::vector<std::string> violations;  // replayable witnesses
  std::vector<std::string> notes;

  bool passed() const noexcept { return violations.empty(); }

  /// Folds `other` in, tagging its witnesses and notes with `prefix`.
  void absorb(const LemmaReport& other, const std::string& prefix = {}) {
    checks += other.checks;
    for (const auto& v : other.violations) violations.push_back(prefix + v);
    for (const auto& n : other.notes) notes.push_back(prefix + n);
  }
};

inline constexpr std::size_t kMaxPrintedWitnesses = 20;

/// Text block:
///   lemma <id> <PASS|FAIL> checks <c> violations <v>
///     violation <witness>      (at most kMaxPrintedWitnesses)
///     note <text>
inline void write_report(std::ostream& os, const LemmaReport& r, std::size_t max_notes = 5) {
  os << "lemma " << r.lemma_id << ' ' << (r.passed() ? "PASS" : "FAIL") << " checks " << r.checks << " violations "
     << r.violations.size() << '\n';
  for (std::size_t i = 0; i < r.violations.size() && i < kMaxPrintedWitnesses; ++i) {
    os << "  violation " << r.violations[i] << '\n';
  }
  if (r.violations.size() > kMaxPrintedWitnesses) {
    os << "  ... " << r.violations.size() - kMaxPrintedWitnesses << " more violations\n";
  }
  for (std::size_t i = 0; i < r.notes.size() && i < max_notes; ++i) os << "  note " << r.notes[i] << '\n';
  if (r.notes.size() > max_notes) os << "  ... " << r.notes.size() - max_notes << " more notes\n";
}

// ---------------------------------------------------------------------------
// Verifiers
// ---------------------------------------------------------------------------

namespace detail {

struct Improvement {
  ModificationSet t_set;
  ModificationSet l_set;
};

inline Improvement improvement_sets(const Mdp<Rational>& mdp, const Policy& pi, const ValueFunction<Rational>& v) {
  const QFunction<Rational> q = q_values(mdp, v);
  ModificationSet t = modification_set(pi, v, q);
  ModificationSet l = reduce_to_well_defined(t, q);
  return {std::move(t), std::move(l)};
}

}  // namespace detail

/// Every nonempty U within L^pi gives modify(pi, U) Better than pi.
inline LemmaReport verify_theorem1(const Mdp<Rational>& mdp, const PolicyOrder& order, const Policy& pi) {
  LemmaReport rep{"theorem1"};
  const std::size_t pi_idx = order.index_of(pi);
  const auto [t_set, l_set] = detail::improvement_sets(mdp, pi, order.values[pi_idx]);
  if (l_set.size() > 12) throw CapExceededError("verify_theorem1: |L| exceeds 12");
  const auto lattice = modification_lattice(pi, l_set);
  for (std::size_t mask = 1; mask < lattice.size(); ++mask) {
    ++rep.checks;
    const Comparison c = order.at(order.index_of(lattice[mask]), pi_idx);
    if (c != Comparison::Better) {
      std::vector<StateAction> picked;
      for (std::size_t i = 0; i < l_set.size(); ++i) {
        if (mask >> i & 1) picked.push_back(l_set.pairs()[i]);
      }
      rep.violations.push_back("pi=" + to_string(pi) + " U=" + to_string(ModificationSet(picked)) + " gives " +
                               to_string(c));
    }
  }
  return rep;
}

inline LemmaReport verify_theorem1(const Mdp<Rational>& mdp, const Policy& pi) {
  return verify_theorem1(mdp, build_policy_order(mdp), pi);
}

/// Every policy that is not optimal at some state has a nonempty T^pi.
inline LemmaReport verify_theorem2(const Mdp<Rational>& mdp, const PolicyOrder& order) {
  LemmaReport rep{"theorem2"};
  const auto best = optimal_value(order);
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order.values[i] == best) continue;
    ++rep.checks;
    const auto t_set = modification_set(order.policies[i], order.values[i], q_values(mdp, order.values[i]));
    if (t_set.empty()) rep.violations.push_back("suboptimal pi=" + to_string(order.policies[i]) + " has empty T");
  }
  return rep;
}

/// Policies that differ in exactly one state are never Incomparable.
inline LemmaReport verify_lemma3(const PolicyOrder& order) {
  LemmaReport rep{"lemma3"};
  const std::size_t k = order.num_actions;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Policy& pi = order.policies[i];
    for (StateIndex s = 0; s < order.num_states; ++s) {
      for (ActionIndex b = 0; b < k; ++b) {
        if (b == pi[s]) continue;
        Policy other = pi;
        other[s] = b;
        ++rep.checks;
        if (order.at(i, order.index_of(other)) == Comparison::Incomparable) {
          rep.violations.push_back("pi=" + to_string(pi) + " pi'=" + to_string(other) + " incomparable");
        }
      }
    }
  }
  return rep;
}

inline LemmaReport verify_lemma3(const Mdp<Rational>& mdp) { return verify_lemma3(build_policy_order(mdp)); }

/// pi is Better than or Equivalent to every policy that agrees with it on
/// states(T^pi).
inline LemmaReport verify_lemma4(const Mdp<Rational>& mdp, const PolicyOrder& order, const Policy& pi,
                                 std::uint64_t cap = kDefaultPolicyCap) {
  LemmaReport rep{"lemma4"};
  const std::size_t pi_idx = order.index_of(pi);
  const auto [t_set, l_set] = detail::improvement_sets(mdp, pi, order.values[pi_idx]);
  const auto fixed = t_set.states();
  std::vector<StateIndex> free_states;
  for (StateIndex s = 0; s < order.num_states; ++s) {
    if (!std::binary_search(fixed.begin(), fixed.end(), s)) free_states.push_back(s);
  }
  const std::uint64_t completions = policy_count(free_states.size(), order.num_actions, cap);
  for (std::uint64_t c = 0; c < completions; ++c) {
    Policy other = pi;
    std::uint64_t code = c;
    for (std::size_t i = free_states.size(); i-- > 0;) {
      other[free_states[i]] = code % order.num_actions;
      code /= order.num_actions;
    }
    ++rep.checks;
    const Comparison cmp = order.at(pi_idx, order.index_of(other));
    if (cmp != Comparison::Better && cmp != Comparison::Equivalent) {
      rep.violations.push_back("pi=" + to_string(pi) + " pi'=" + to_string(other) + " gives " + to_string(cmp));
    }
  }
  return rep;
}

inline LemmaReport verify_lemma4(const Mdp<Rational>& mdp, const Policy& pi) {
  return verify_lemma4(mdp, build_policy_order(mdp), pi);
}

/// Two-action traces never revisit a state set, nor a subset of a later one.
inline LemmaReport verify_lemma5(const Trace<Rational>& trace, std::size_t num_actions) {
  if (num_actions > 2) throw std::invalid_argument("lemma5 applies to two-action MDPs only; use lemma12");
  LemmaReport rep{"lemma5"};
  const auto& recs = trace.records;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    for (std::size_t j = i + 1; j < recs.size(); ++j) {
      ++rep.checks;
      const auto a = recs[i].t_set.states();
      const auto b = recs[j].t_set.states();
      if (std::includes(b.begin(), b.end(), a.begin(), a.end())) {
        rep.violations.push_back("trace " + trace.strategy + " (i,j)=(" + std::to_string(i) + "," +
                                 std::to_string(j) + ")");
      }
    }
  }
  return rep;
}

/// No i < j with states(T_i) within states(T_j) and pi_i = pi_j on states(T_i).
inline LemmaReport verify_lemma12(const Trace<Rational>& trace) {
  LemmaReport rep{"lemma12"};
  const auto& recs = trace.records;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto a = recs[i].t_set.states();
    for (std::size_t j = i + 1; j < recs.size(); ++j) {
      ++rep.checks;
      const auto b = recs[j].t_set.states();
      if (!std::includes(b.begin(), b.end(), a.begin(), a.end())) continue;
      const bool agree = std::all_of(a.begin(), a.end(),
                                     [&](StateIndex s) { return recs[i].policy[s] == recs[j].policy[s]; });
      if (agree) {
        rep.violations.push_back("trace " + trace.strategy + " (i,j)=(" + std::to_string(i) + "," +
                                 std::to_string(j) + ")");
      }
    }
  }
  return rep;
}

/// At least |U| policies p with modify(pi, U) >= p > pi, where U = T^pi when
/// well defined and L^pi otherwise.
inline LemmaReport verify_lemma6(const Mdp<Rational>& mdp, const Policy& pi, const PolicyOrder& order) {
  LemmaReport rep{"lemma6"};
  const auto [t_set, l_set] = detail::improvement_sets(mdp, pi, order.values[order.index_of(pi)]);
  if (t_set.empty()) return rep;
  const ModificationSet& u = t_set.well_defined() ? t_set : l_set;
  ++rep.checks;
  const std::size_t between = count_between(order, pi, modify(pi, u));
  if (between < u.size()) {
    rep.violations.push_back("pi=" + to_string(pi) + " |U|=" + std::to_string(u.size()) + " but only " +
                             std::to_string(between) + " policies in between");
  }
  return rep;
}

struct OrderCounts {
  std::uint64_t sum_above = 0;  // sum over v of |{s : s > v}|
  std::uint64_t sum_below = 0;  // sum over v of |{s : v > s}|
  std::uint64_t size = 0;
};

inline OrderCounts order_counts(const PolicyOrder& order) {
  OrderCounts c;
  c.size = order.size();
  for (std::size_t v = 0; v < order.size(); ++v) {
    for (std::size_t s = 0; s < order.size(); ++s) {
      if (order.better(s, v)) ++c.sum_above;
      if (order.better(v, s)) ++c.sum_below;
    }
  }
  return c;
}

/// Mean number of elements strictly above a uniformly chosen element.
inline Rational mean_above(const PolicyOrder& order) {
  const OrderCounts c = order_counts(order);
  return ratio(c.sum_above, c.size);
}

/// Mean of |{s : s > r}| over uniform r is at most |Pi|/2, and the sums of
/// up-set and down-set sizes agree.
inline LemmaReport verify_lemma9(const PolicyOrder& order) {
  LemmaReport rep{"lemma9"};
  const OrderCounts c = order_counts(order);
  rep.checks = 2;
  if (c.sum_above != c.sum_below) {
    rep.violations.push_back("sum of up-sets " + std::to_string(c.sum_above) + " != sum of down-sets " +
                             std::to_string(c.sum_below));
  }
  if (2 * c.sum_above > c.size * c.size) {
    rep.violations.push_back("mean up-set " + std::to_string(c.sum_above) + "/" + std::to_string(c.size) +
                             " exceeds |Pi|/2");
  }
  return rep;
}

/// Exact mean over the 2^|L| lattice policies r of |{s in lattice : not s > r}|.
inline Rational lattice_not_above_mean(const PolicyOrder& order, const Policy& pi, const ModificationSet& l_set) {
  const auto lattice = modification_lattice(pi, l_set);
  std::vector<std::size_t> idx;
  idx.reserve(lattice.size());
  for (const auto& p : lattice) idx.push_back(order.index_of(p));
  std::uint64_t total = 0;
  for (std::size_t r : idx) {
    for (std::size_t s : idx) {
      if (!order.better(s, r)) ++total;
    }
  }
  return ratio(total, lattice.size());
}

/// Lattice form of the random-selection ruling-out bound: the exact mean of
/// not-above counts over the lattice of L^pi is at least 2^(|L|-1).
inline LemmaReport verify_corollary10(const Mdp<Rational>& mdp, const Policy& pi, const PolicyOrder& order) {
  LemmaReport rep{"corollary10"};
  const auto [t_set, l_set] = detail::improvement_sets(mdp, pi, order.values[order.index_of(pi)]);
  if (l_set.empty()) {
    rep.notes.push_back("pi=" + to_string(pi) + " has empty L; skipped");
    return rep;
  }
  if (l_set.size() > 12) throw CapExceededError("verify_corollary10: |L| exceeds 12");
  ++rep.checks;
  rep.notes.push_back("pi=" + to_string(pi) +
                      ": strictly-between counts are not bounded per step and are not checked; "
                      "the lattice not-above mean is checked instead");
  const Rational mean = lattice_not_above_mean(order, pi, l_set);
  Rational bound(mpz_class(1) << static_cast<mp_bitcnt_t>(l_set.size() - 1));
  if (mean < bound) {
    rep.violations.push_back("pi=" + to_string(pi) + " |L|=" + std::to_string(l_set.size()) + " mean " +
                             mean.get_str() + " < " + bound.get_str());
  }
  return rep;
}

/// count_between(pi_i, pi_{i+1}) for each iteration of the trace.
inline std::vector<std::size_t> ruled_out_per_iteration(const Trace<Rational>& trace, const PolicyOrder& order) {
  for (const auto& r : trace.records) {
    if (order.values[order.index_of(r.policy)] != r.value) {
      throw std::invalid_argument("ruled_out_per_iteration: trace does not belong to this instance");
    }
  }
  const auto visited = trace.visited_policies();
  std::vector<std::size_t> out;
  out.reserve(trace.records.size());
  for (std::size_t i = 0; i + 1 < visited.size(); ++i) out.push_back(count_between(order, visited[i], visited[i + 1]));
  return out;
}

/// Every later policy in a trace is Better than every earlier one.
inline LemmaReport verify_trace_chain(const Trace<Rational>& trace, const PolicyOrder& order) {
  LemmaReport rep{"lemma8"};
  const auto visited = trace.visited_policies();
  std::vector<std::size_t> idx;
  for (const auto& p : visited) idx.push_back(order.index_of(p));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = i + 1; j < idx.size(); ++j) {
      ++rep.checks;
      if (!order.better(idx[j], idx[i])) {
        rep.violations.push_back("trace " + trace.strategy + " pi_" + std::to_string(j) + "=" + to_string(visited[j]) +
                                 " vs pi_" + std::to_string(i) + "=" + to_string(visited[i]) + ": " +
                                 to_string(order.at(idx[j], idx[i])));
      }
    }
  }
  return rep;
}

}  // namespace pimdp
