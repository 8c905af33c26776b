#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pimdp/bounds.hpp"
#include "pimdp/instance_gen.hpp"
#include "pimdp/oracle.hpp"
#include "pimdp/policy_iteration.hpp"

namespace pimdp {

/// Seed of an independent stream derived from a base seed. Instance
/// generation uses the base seed itself; selection and start-policy draws
/// use derived streams so they are not correlated with the instance.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return SplitMix64(seed ^ (stream * 0xd1b54a32d192ed03ULL)).next();
}

inline constexpr std::uint64_t kSelectionStream = 1;
inline constexpr std::uint64_t kStartPolicyStream = 2;

inline Policy random_policy(std::size_t n, std::size_t k, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Policy pi{std::vector<ActionIndex>(n, 0)};
  for (auto& a : pi.actions) a = rng.uniform(k);
  return pi;
}

/// "zero" or "random"; explicit policies are handled by the caller.
inline Policy start_policy(const std::string& rule, std::size_t n, std::size_t k, std::uint64_t seed) {
  if (rule == "zero") return zero_policy(n);
  if (rule == "random") return random_policy(n, k, derive_seed(seed, kStartPolicyStream));
  throw std::invalid_argument("unknown start-policy rule '" + rule + "'");
}

// ---------------------------------------------------------------------------
// Iteration-count experiments
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  std::size_t n_lo = 2;
  std::size_t n_hi = 6;
  std::size_t k = 2;
  std::size_t instances = 10;
  std::string strategy = "greedy";
  std::uint64_t seed = 1;
  bool oracle = false;
  std::string start_rule = "zero";
  GenSpec family;  // n, k and seed are overwritten per instance
};

struct ExperimentRow {
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t k = 0;
  std::string gamma;
  std::string strategy;
  std::string start_rule;
  std::size_t iterations = 0;
  std::size_t resamples_total = 0;
  std::size_t max_t_size = 0;
  std::optional<std::size_t> sum_ruled_out;
  double bound = 0.0;
  bool terminated = false;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  std::vector<std::string> warnings;
};

inline ExperimentRow run_experiment_instance(const ExperimentConfig& cfg, std::size_t n, std::uint64_t seed,
                                             std::vector<std::string>& warnings) {
  GenSpec spec = cfg.family;
  spec.n = n;
  spec.k = cfg.k;
  spec.seed = seed;
  const Mdp<Rational> mdp = random_mdp(spec);
  const Strategy strategy = parse_strategy(cfg.strategy, derive_seed(seed, kSelectionStream));
  const Trace<Rational> trace = run_policy_iteration(mdp, start_policy(cfg.start_rule, n, cfg.k, seed), strategy);

  ExperimentRow row;
  row.seed = seed;
  row.n = n;
  row.k = cfg.k;
  row.gamma = rational_text(spec.gamma);
  row.strategy = cfg.strategy;
  row.start_rule = cfg.start_rule;
  row.iterations = trace.iterations();
  row.resamples_total = trace.total_resamples();
  for (const auto& r : trace.records) row.max_t_size = std::max(row.max_t_size, r.t_set.size());
  row.terminated = trace.terminated;

  const BoundKind kind = bound_kind_for(cfg.strategy, cfg.k);
  row.bound = eval_bound(kind, n, cfg.k);
  if (row.terminated && bound_applies(kind, n, cfg.k) && static_cast<double>(row.iterations) > row.bound) {
    warnings.push_back(std::string(bound_is_probabilistic(kind) ? "probabilistic " : "") + "bound " +
                       to_string(kind) + " exceeded: seed=" + std::to_string(seed) + " n=" + std::to_string(n) +
                       " iterations=" + std::to_string(row.iterations));
  }

  if (cfg.oracle) {
    try {
      const PolicyOrder order = build_policy_order(mdp);
      std::size_t sum = 0;
      for (std::size_t c : ruled_out_per_iteration(trace, order)) sum += c;
      row.sum_ruled_out = sum;
    } catch (const CapExceededError& e) {
      warnings.push_back("oracle skipped for seed=" + std::to_string(seed) + " n=" + std::to_string(n) + ": " +
                         e.what());
    }
  }
  return row;
}

/// Rows in (n, seed) order; instance i of every n uses seed `cfg.seed + i`.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.n_lo < 1 || cfg.n_lo > cfg.n_hi) throw std::invalid_argument("experiment: bad n range");
  if (cfg.k < 2) throw std::invalid_argument("experiment: k must be at least 2");
  ExperimentResult result;
  for (std::size_t n = cfg.n_lo; n <= cfg.n_hi; ++n) {
    for (std::size_t i = 0; i < cfg.instances; ++i) {
      result.rows.push_back(run_experiment_instance(cfg, n, cfg.seed + i, result.warnings));
    }
  }
  return result;
}

inline constexpr const char* kExperimentCsvSchema = "# pimdp-experiment-csv 1";
inline constexpr const char* kExperimentCsvHeader =
    "seed,n,k,gamma,strategy,start_policy,iterations,resamples_total,max_t_size,sum_ruled_out,bound_value,"
    "terminated";

inline std::string format_bound(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

inline void write_experiment_csv(std::ostream& os, const std::vector<ExperimentRow>& rows) {
  os << kExperimentCsvSchema << '\n' << kExperimentCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.seed << ',' << r.n << ',' << r.k << ',' << r.gamma << ',' << r.strategy << ',' << r.start_rule << ','
       << r.iterations << ',' << r.resamples_total << ',' << r.max_t_size << ',';
    if (r.sum_ruled_out) os << *r.sum_ruled_out;
    os << ',' << format_bound(r.bound) << ',' << (r.terminated ? 1 : 0) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Verification campaigns
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& known_lemmas() {
  static const std::vector<std::string> ids = {"theorem1", "theorem2", "lemma3", "lemma4",  "lemma5",
                                               "lemma6",   "lemma8",   "lemma9", "lemma12", "corollary10"};
  return ids;
}

struct VerifyConfig {
  std::size_t n = 4;
  std::size_t k = 2;
  std::size_t instances = 10;
  std::uint64_t seed = 1;
  std::vector<std::string> lemmas{"all"};
  std::uint64_t cap = kDefaultPolicyCap;
  GenSpec family;
};

/// Expands "all" and validates names. Throws std::invalid_argument on an
/// unknown id or on lemma5 with more than two actions.
inline std::vector<std::string> resolve_lemmas(const std::vector<std::string>& requested, std::size_t k) {
  std::set<std::string> picked;
  for (const auto& id : requested) {
    if (id == "all") {
      for (const auto& known : known_lemmas()) {
        if (known != "lemma5" || k == 2) picked.insert(known);
      }
      continue;
    }
    if (std::find(known_lemmas().begin(), known_lemmas().end(), id) == known_lemmas().end()) {
      throw std::invalid_argument("unknown lemma '" + id + "'");
    }
    if (id == "lemma5" && k != 2) {
      throw std::invalid_argument("lemma5 only applies to two-action MDPs (k = 2); use lemma12");
    }
    picked.insert(id);
  }
  std::vector<std::string> out;
  for (const auto& known : known_lemmas()) {
    if (picked.contains(known)) out.push_back(known);
  }
  return out;
}

/// The PI runs whose traces feed the trace-level verifiers.
inline std::vector<Trace<Rational>> campaign_traces(const Mdp<Rational>& mdp, std::uint64_t seed) {
  const std::size_t n = mdp.num_states();
  const std::size_t k = mdp.num_actions();
  const std::uint64_t sel = derive_seed(seed, kSelectionStream);
  const Policy zero = zero_policy(n);
  const Policy random_start = start_policy("random", n, k, seed);
  std::vector<Trace<Rational>> traces;
  traces.push_back(run_policy_iteration(mdp, zero, GreedyStrategy{}));
  traces.push_back(run_policy_iteration(mdp, random_start, GreedyStrategy{}));
  traces.push_back(run_policy_iteration(mdp, zero, RandomStrategy{sel}));
  traces.push_back(run_policy_iteration(mdp, random_start, RandomStrategy{sel + 1}));
  traces.push_back(run_policy_iteration(mdp, zero, SequentialStrategy{SequentialRule::LowestState, sel}));
  traces.push_back(run_policy_iteration(mdp, zero, SequentialStrategy{SequentialRule::HighestState, sel}));
  traces.push_back(run_policy_iteration(mdp, random_start, SequentialStrategy{SequentialRule::RandomSingleton, sel}));
  return traces;
}

/// Runs the selected verifiers on one instance. Policy-level verifiers run
/// on every policy; trace-level ones on campaign_traces().
inline std::vector<LemmaReport> verify_instance(const Mdp<Rational>& mdp, std::uint64_t seed,
                                                const std::vector<std::string>& lemmas, std::uint64_t cap) {
  const PolicyOrder order = build_policy_order(mdp, cap);
  const auto traces = campaign_traces(mdp, seed);
  const std::string tag = "seed=" + std::to_string(seed) + " n=" + std::to_string(mdp.num_states()) +
                          " k=" + std::to_string(mdp.num_actions()) + ": ";
  std::vector<LemmaReport> out;
  for (const auto& id : lemmas) {
    LemmaReport agg{id};
    if (id == "theorem1") {
      for (const auto& pi : order.policies) agg.absorb(verify_theorem1(mdp, order, pi), tag);
    } else if (id == "theorem2") {
      agg.absorb(verify_theorem2(mdp, order), tag);
    } else if (id == "lemma3") {
      agg.absorb(verify_lemma3(order), tag);
    } else if (id == "lemma4") {
      for (const auto& pi : order.policies) agg.absorb(verify_lemma4(mdp, order, pi, cap), tag);
    } else if (id == "lemma5") {
      for (const auto& tr : traces) agg.absorb(verify_lemma5(tr, mdp.num_actions()), tag);
    } else if (id == "lemma6") {
      for (const auto& pi : order.policies) agg.absorb(verify_lemma6(mdp, pi, order), tag);
      // along greedy traces every step rules out at least max(1, |U|) policies
      for (const auto& tr : traces) {
        if (tr.strategy != "greedy") continue;
        const auto ruled = ruled_out_per_iteration(tr, order);
        for (std::size_t i = 0; i < ruled.size(); ++i) {
          ++agg.checks;
          const std::size_t need = std::max<std::size_t>(1, tr.records[i].l_set.size());
          if (ruled[i] < need) {
            agg.violations.push_back(tag + "greedy iteration " + std::to_string(i) + " rules out " +
                                     std::to_string(ruled[i]) + " < " + std::to_string(need));
          }
        }
      }
    } else if (id == "lemma8") {
      for (const auto& tr : traces) agg.absorb(verify_trace_chain(tr, order), tag);
    } else if (id == "lemma9") {
      agg.absorb(verify_lemma9(order), tag);
    } else if (id == "lemma12") {
      for (const auto& tr : traces) agg.absorb(verify_lemma12(tr), tag);
    } else if (id == "corollary10") {
      for (const auto& pi : order.policies) {
        LemmaReport one = verify_corollary10(mdp, pi, order);
        one.notes.clear();  // empty-L skips are routine at campaign scale
        agg.absorb(one, tag);
      }
    }
    out.push_back(std::move(agg));
  }
  return out;
}

struct VerifyResult {
  std::vector<LemmaReport> reports;
  std::size_t instances = 0;

  bool passed() const {
    return std::all_of(reports.begin(), reports.end(), [](const LemmaReport& r) { return r.passed(); });
  }
};

/// Instance i uses seed `cfg.seed + i`; witnesses carry that seed so they can
/// be replayed with `--gen seed=...`.
inline VerifyResult run_verify_campaign(const VerifyConfig& cfg) {
  const auto lemmas = resolve_lemmas(cfg.lemmas, cfg.k);
  policy_count(cfg.n, cfg.k, cfg.cap);
  VerifyResult result;
  for (const auto& id : lemmas) result.reports.push_back(LemmaReport{id});
  for (std::size_t i = 0; i < cfg.instances; ++i) {
    GenSpec spec = cfg.family;
    spec.n = cfg.n;
    spec.k = cfg.k;
    spec.seed = cfg.seed + i;
    const auto per = verify_instance(random_mdp(spec), spec.seed, lemmas, cfg.cap);
    for (std::size_t j = 0; j < per.size(); ++j) result.reports[j].absorb(per[j]);
    ++result.instances;
  }
  return result;
}

}  // namespace pimdp
