#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "pimdp/mdp.hpp"
#include "pimdp/rng.hpp"

namespace pimdp {

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

/// Accept every improvement.
struct GreedyStrategy {};

/// Accept each improvement independently with probability 1/2; empty draws
/// are redrawn.
struct RandomStrategy {
  std::uint64_t seed = 0;
};

enum class SequentialRule { LowestState, HighestState, RandomSingleton };

/// Accept exactly one improvement. The seed is only consumed by
/// RandomSingleton. None of the rules is an adversarial (worst-case) choice.
struct SequentialStrategy {
  SequentialRule rule = SequentialRule::LowestState;
  std::uint64_t seed = 0;
};

using Strategy = std::variant<GreedyStrategy, RandomStrategy, SequentialStrategy>;

inline std::string strategy_name(const Strategy& strategy) {
  return std::visit(
      [](const auto& s) -> std::string {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, GreedyStrategy>) {
          return "greedy";
        } else if constexpr (std::is_same_v<S, RandomStrategy>) {
          return "random";
        } else {
          switch (s.rule) {
            case SequentialRule::LowestState: return "sequential-lowest";
            case SequentialRule::HighestState: return "sequential-highest";
            case SequentialRule::RandomSingleton: return "sequential-random";
          }
          return "sequential";
        }
      },
      strategy);
}

/// Parses greedy | random | sequential[-lowest|-highest|-random].
inline Strategy parse_strategy(const std::string& name, std::uint64_t seed) {
  if (name == "greedy") return GreedyStrategy{};
  if (name == "random") return RandomStrategy{seed};
  if (name == "sequential" || name == "sequential-lowest") return SequentialStrategy{SequentialRule::LowestState, seed};
  if (name == "sequential-highest") return SequentialStrategy{SequentialRule::HighestState, seed};
  if (name == "sequential-random") return SequentialStrategy{SequentialRule::RandomSingleton, seed};
  throw std::invalid_argument("unknown strategy '" + name + "'");
}

inline void require_selectable(const ModificationSet& l, const char* who) {
  if (l.empty()) throw std::invalid_argument(std::string(who) + ": empty modification set");
  if (!l.well_defined()) throw std::invalid_argument(std::string(who) + ": modification set is not well defined");
}

inline ModificationSet select_greedy(const ModificationSet& l) {
  require_selectable(l, "select_greedy");
  return l;
}

struct RandomSelection {
  ModificationSet subset;
  std::size_t resamples = 0;  // empty draws thrown away before `subset`
};

/// Uniform over the nonempty subsets of l.
inline RandomSelection select_random(const ModificationSet& l, SplitMix64& rng) {
  require_selectable(l, "select_random");
  RandomSelection out;
  for (;;) {
    std::vector<StateAction> picked;
    for (const StateAction& p : l.pairs()) {
      if (rng.coin()) picked.push_back(p);
    }
    if (!picked.empty()) {
      out.subset = ModificationSet(std::move(picked));
      return out;
    }
    ++out.resamples;
  }
}

inline ModificationSet select_sequential(const ModificationSet& l, SequentialRule rule, SplitMix64& rng) {
  require_selectable(l, "select_sequential");
  const auto& pairs = l.pairs();
  switch (rule) {
    case SequentialRule::LowestState: return ModificationSet({pairs.front()});
    case SequentialRule::HighestState: return ModificationSet({pairs.back()});
    case SequentialRule::RandomSingleton: return ModificationSet({pairs[rng.uniform(pairs.size())]});
  }
  throw std::logic_error("select_sequential: unknown rule");
}

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

template <Scalar T>
struct IterationRecord {
  std::size_t index = 0;
  Policy policy;
  ValueFunction<T> value;
  ModificationSet t_set;
  ModificationSet l_set;
  ModificationSet selected;
  std::size_t resamples = 0;
};

template <Scalar T>
struct Trace {
  std::string strategy;
  std::string rng_algorithm{SplitMix64::kAlgorithm};
  std::vector<IterationRecord<T>> records;
  Policy final_policy;
  ValueFunction<T> final_value;
  bool terminated = false;  // false: iteration cap reached

  std::size_t iterations() const noexcept { return records.size(); }

  /// pi_0, ..., pi_m with pi_m the final policy.
  std::vector<Policy> visited_policies() const {
    std::vector<Policy> out;
    out.reserve(records.size() + 1);
    for (const auto& r : records) out.push_back(r.policy);
    out.push_back(final_policy);
    return out;
  }

  std::size_t total_resamples() const noexcept {
    std::size_t sum = 0;
    for (const auto& r : records) sum += r.resamples;
    return sum;
  }
};

inline constexpr std::size_t kMaxIterationCap = 10'000'000;

/// 2 k^n capped at 10^7.
inline std::size_t default_max_iterations(std::size_t n, std::size_t k) {
  std::size_t total = 2;
  for (std::size_t i = 0; i < n; ++i) {
    if (total > kMaxIterationCap / std::max<std::size_t>(k, 1)) return kMaxIterationCap;
    total *= k;
  }
  return std::min(total, kMaxIterationCap);
}

/// General policy iteration: evaluate, collect T, reduce to L, select U,
/// modify, until T is empty or `max_iterations` improvements were made.
template <Scalar T>
Trace<T> run_policy_iteration(const Mdp<T>& mdp, const Policy& pi0, const Strategy& strategy,
                              std::size_t max_iterations) {
  check_policy(mdp, pi0);
  if (max_iterations == 0) throw std::invalid_argument("run_policy_iteration: max_iterations must be >= 1");

  std::uint64_t seed = 0;
  if (const auto* r = std::get_if<RandomStrategy>(&strategy)) seed = r->seed;
  if (const auto* q = std::get_if<SequentialStrategy>(&strategy)) seed = q->seed;
  SplitMix64 rng(seed);

  Trace<T> trace;
  trace.strategy = strategy_name(strategy);
  Policy pi = pi0;
  for (;;) {
    ValueFunction<T> v = evaluate_policy(mdp, pi);
    const QFunction<T> q = q_values(mdp, v);
    ModificationSet t_set = modification_set(pi, v, q);
    if (t_set.empty() || trace.records.size() == max_iterations) {
      trace.terminated = t_set.empty();
      trace.final_policy = std::move(pi);
      trace.final_value = std::move(v);
      return trace;
    }
    ModificationSet l_set = reduce_to_well_defined(t_set, q);

    IterationRecord<T> rec;
    rec.index = trace.records.size();
    if (std::holds_alternative<GreedyStrategy>(strategy)) {
      rec.selected = select_greedy(l_set);
    } else if (std::holds_alternative<RandomStrategy>(strategy)) {
      RandomSelection sel = select_random(l_set, rng);
      rec.selected = std::move(sel.subset);
      rec.resamples = sel.resamples;
    } else {
      rec.selected = select_sequential(l_set, std::get<SequentialStrategy>(strategy).rule, rng);
    }
    Policy next = modify(pi, rec.selected);
    rec.policy = std::move(pi);
    rec.value = std::move(v);
    rec.t_set = std::move(t_set);
    rec.l_set = std::move(l_set);
    trace.records.push_back(std::move(rec));
    pi = std::move(next);
  }
}

template <Scalar T>
Trace<T> run_policy_iteration(const Mdp<T>& mdp, const Policy& pi0, const Strategy& strategy) {
  return run_policy_iteration(mdp, pi0, strategy, default_max_iterations(mdp.num_states(), mdp.num_actions()));
}

/// Line-oriented trace log:
///
///   pimdp-trace 1
///   strategy <name> rng <algorithm> arith <exact|float>
///   iter <i> policy <actions> T <|T|> L <|L|> U <s:a,...> resamples <r>
///   ...
///   final policy <actions> iterations <m> terminated <0|1> value <v0> <v1> ...
template <Scalar T>
void write_trace(std::ostream& os, const Trace<T>& trace) {
  os << "pimdp-trace 1\n";
  os << "strategy " << trace.strategy << " rng " << trace.rng_algorithm << " arith "
     << ScalarTraits<T>::mode_name << '\n';
  for (const auto& r : trace.records) {
    os << "iter " << r.index << " policy " << to_string(r.policy) << " T " << r.t_set.size() << " L "
       << r.l_set.size() << " U " << to_string(r.selected) << " resamples " << r.resamples << '\n';
  }
  os << "final policy " << to_string(trace.final_policy) << " iterations " << trace.iterations() << " terminated "
     << (trace.terminated ? 1 : 0) << " value";
  for (const T& x : trace.final_value) os << ' ' << ScalarTraits<T>::to_string(x);
  os << '\n';
}

}  // namespace pimdp
