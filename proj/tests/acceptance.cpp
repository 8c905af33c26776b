// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Runs under ctest as the "acceptance" test.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pimdp/pimdp.hpp"

namespace fs = std::filesystem;
using namespace pimdp;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
  std::vector<std::string> failures;

  void fail(const std::string& why) {
    ok = false;
    if (failures.size() < 10) failures.push_back(why);
  }
};

Policy policy_of(std::initializer_list<ActionIndex> a) { return Policy{std::vector<ActionIndex>(a)}; }

ValueFunction<Rational> values_of(std::initializer_list<long> xs) {
  ValueFunction<Rational> v;
  for (long x : xs) v.emplace_back(x);
  return v;
}

std::vector<Strategy> strategy_set(std::uint64_t seed) {
  return {GreedyStrategy{},
          RandomStrategy{derive_seed(seed, 1)},
          RandomStrategy{derive_seed(seed, 11)},
          RandomStrategy{derive_seed(seed, 21)},
          SequentialStrategy{SequentialRule::LowestState, seed},
          SequentialStrategy{SequentialRule::HighestState, seed},
          SequentialStrategy{SequentialRule::RandomSingleton, derive_seed(seed, 31)}};
}

// The optimality sweep: 240 instances, n in 2..7, k in {2,3}.
struct SweepInstance {
  std::uint64_t seed;
  std::size_t n;
  std::size_t k;
};

std::vector<SweepInstance> sweep_instances() {
  std::vector<SweepInstance> out;
  std::uint64_t seed = 5000;
  for (std::size_t n = 2; n <= 7; ++n) {
    for (std::size_t k = 2; k <= 3; ++k) {
      for (int i = 0; i < 20; ++i) out.push_back({seed++, n, k});
    }
  }
  return out;
}

Mdp<Rational> sweep_mdp(const SweepInstance& inst) {
  GenSpec spec;
  spec.n = inst.n;
  spec.k = inst.k;
  spec.seed = inst.seed;
  return random_mdp(spec);
}

std::string tag(const SweepInstance& inst) {
  return "seed=" + std::to_string(inst.seed) + " n=" + std::to_string(inst.n) + " k=" + std::to_string(inst.k);
}

// Criteria 1 and 2 share their runs.
struct SweepOutcome {
  Outcome optimality;
  Outcome ascent;
};

SweepOutcome run_sweep() {
  SweepOutcome out;
  std::size_t runs = 0;
  std::size_t instances = 0;
  std::size_t steps = 0;
  for (const auto& inst : sweep_instances()) {
    const auto mdp = sweep_mdp(inst);
    const auto vstar = optimal_value(evaluate_all_policies(mdp));
    ++instances;
    for (const auto& strategy : strategy_set(inst.seed)) {
      const auto start = random_policy(inst.n, inst.k, derive_seed(inst.seed, kStartPolicyStream));
      const auto tr = run_policy_iteration(mdp, start, strategy);
      ++runs;
      const std::string where = tag(inst) + " " + strategy_name(strategy);
      if (!tr.terminated) out.optimality.fail(where + ": hit the iteration cap");
      if (tr.final_value != vstar) out.optimality.fail(where + ": final value is not optimal");
      const auto visited = tr.visited_policies();
      for (std::size_t i = 0; i + 1 < visited.size(); ++i) {
        ++steps;
        if (compare(mdp, visited[i + 1], visited[i]) != Comparison::Better) {
          out.ascent.fail(where + ": step " + std::to_string(i) + " is not a strict improvement");
        }
      }
    }
  }
  out.optimality.detail = std::to_string(instances) + " instances, " + std::to_string(runs) + " runs";
  out.ascent.detail = std::to_string(steps) + " steps";
  return out;
}

Outcome lemma_campaigns() {
  Outcome out;
  std::size_t instances = 0;
  struct Batch {
    std::size_t n;
    std::size_t k;
    std::size_t count;
    std::uint64_t seed;
  };
  // 125 two-action instances (n = 2..6) and 102 three-action ones (n = 2..4)
  const std::vector<Batch> batches = {{2, 2, 25, 100}, {3, 2, 25, 200}, {4, 2, 25, 300}, {5, 2, 25, 400},
                                      {6, 2, 25, 500}, {2, 3, 34, 600}, {3, 3, 34, 700}, {4, 3, 34, 800}};
  for (const auto& b : batches) {
    VerifyConfig cfg;
    cfg.n = b.n;
    cfg.k = b.k;
    cfg.instances = b.count;
    cfg.seed = b.seed;
    const auto res = run_verify_campaign(cfg);
    instances += res.instances;
    for (const auto& r : res.reports) {
      if (!r.passed()) {
        std::ostringstream os;
        write_report(os, r);
        out.fail("n=" + std::to_string(b.n) + " k=" + std::to_string(b.k) + " " + os.str());
      }
      if (r.checks == 0) out.fail(r.lemma_id + " made no checks at n=" + std::to_string(b.n));
    }
  }
  out.detail = std::to_string(instances) + " instances";
  return out;
}

Outcome greedy_bounds() {
  Outcome out;
  std::size_t runs = 0;
  std::size_t worst_num = 0;
  double worst_ratio = 0.0;
  for (std::size_t k = 2; k <= 4; ++k) {
    const std::size_t n_hi = k == 2 ? 10 : (k == 3 ? 7 : 5);
    for (std::size_t n = (k == 2 ? 3 : 2); n <= n_hi; ++n) {
      for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        GenSpec spec;
        spec.n = n;
        spec.k = k;
        spec.seed = 9000 + 100 * n + 10 * k + seed;
        const auto mdp = random_mdp(spec);
        const double bound = eval_bound(k == 2 ? BoundKind::GreedyTwoAction : BoundKind::GreedyMulti, n, k);
        for (const auto& start : {zero_policy(n), random_policy(n, k, spec.seed)}) {
          const auto tr = run_policy_iteration(mdp, start, GreedyStrategy{});
          ++runs;
          const double ratio = static_cast<double>(tr.iterations()) / bound;
          if (ratio > worst_ratio) {
            worst_ratio = ratio;
            worst_num = tr.iterations();
          }
          if (!tr.terminated || static_cast<double>(tr.iterations()) > bound) {
            out.fail("seed=" + std::to_string(spec.seed) + " n=" + std::to_string(n) + " k=" + std::to_string(k) +
                     ": " + std::to_string(tr.iterations()) + " iterations > " + format_bound(bound));
          }
        }
      }
    }
  }
  out.detail = std::to_string(runs) + " runs, worst iterations/bound " + format_bound(worst_ratio) + " (" +
               std::to_string(worst_num) + " iterations)";
  return out;
}

// Independent lattice check: every nonempty switch of L improves on pi, and
// the mean number of lattice members not above each member is at least
// 2^(|L|-1). The counts are recomputed here from compare() directly.
Outcome lattice_check() {
  Outcome out;
  std::size_t found = 0;
  std::size_t tried = 0;
  for (std::uint64_t seed = 1; found < 60 && seed <= 2000; ++seed) {
    GenSpec spec;
    spec.n = 3 + seed % 3;
    spec.k = 2 + seed % 2;
    spec.seed = 20000 + seed;
    const auto mdp = random_mdp(spec);
    ++tried;
    const auto tr = run_policy_iteration(mdp, zero_policy(spec.n), GreedyStrategy{});
    const IterationRecord<Rational>* hit = nullptr;
    for (const auto& r : tr.records) {
      if (r.l_set.size() >= 2 && r.l_set.size() <= 4) {
        hit = &r;
        break;
      }
    }
    if (hit == nullptr) continue;
    ++found;
    const std::string where = "seed=" + std::to_string(spec.seed) + " pi=" + to_string(hit->policy);
    const auto lattice = modification_lattice(hit->policy, hit->l_set);
    const std::size_t m = lattice.size();
    if (m != (std::size_t(1) << hit->l_set.size())) out.fail(where + ": lattice has " + std::to_string(m) + " members");
    std::size_t not_above_total = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (i > 0 && compare(mdp, lattice[i], hit->policy) != Comparison::Better) {
        out.fail(where + ": switch " + to_string(lattice[i]) + " does not improve");
      }
      for (std::size_t j = 0; j < m; ++j) {
        if (compare(mdp, lattice[j], lattice[i]) != Comparison::Better) ++not_above_total;
      }
    }
    const Rational mean = ratio(not_above_total, m);
    if (mean < ratio(m, 2)) out.fail(where + ": mean " + mean.get_str() + " below bound");
    const auto order = build_policy_order(mdp);
    if (lattice_not_above_mean(order, hit->policy, hit->l_set) != mean) out.fail(where + ": library mean differs");
    if (!verify_corollary10(mdp, hit->policy, order).passed()) out.fail(where + ": corollary10 verifier failed");
  }
  if (found < 50) out.fail("only " + std::to_string(found) + " instances with 2 <= |L| <= 4");
  out.detail = std::to_string(found) + " lattices from " + std::to_string(tried) + " instances";
  return out;
}

Outcome desk_instances() {
  Outcome out;
  const auto m2 = builtin_instance("M2");
  const auto m2c = builtin_instance("M2c");
  auto expect = [&](bool cond, const std::string& what) {
    if (!cond) out.fail(what);
  };
  expect(evaluate_policy(m2, policy_of({0, 0})) == values_of({0, 2}), "M2 V(a0,a0)");
  expect(evaluate_policy(m2, policy_of({0, 1})) == values_of({0, 0}), "M2 V(a0,a1)");
  expect(evaluate_policy(m2, policy_of({1, 0})) == values_of({1, 2}), "M2 V(a1,a0)");
  expect(evaluate_policy(m2, policy_of({1, 1})) == values_of({0, 0}), "M2 V(a1,a1)");
  expect(evaluate_policy(m2c, policy_of({1, 0})) == values_of({0, 0}), "M2c V(a1,a0)");
  expect(evaluate_policy(m2c, policy_of({0, 0})) == values_of({2, 0}), "M2c V(a0,a0)");
  expect(evaluate_policy(m2c, policy_of({1, 1})) == values_of({0, 2}), "M2c V(a1,a1)");
  expect(evaluate_policy(m2c, policy_of({0, 1})) == values_of({2, 2}), "M2c V(a0,a1)");

  const auto tr = run_policy_iteration(m2, policy_of({0, 1}), GreedyStrategy{});
  expect(tr.visited_policies() == std::vector<Policy>{policy_of({0, 1}), policy_of({0, 0}), policy_of({1, 0})},
         "M2 greedy chain");
  expect(tr.records.size() == 2 && tr.records[0].t_set == ModificationSet({{1, 0}}) &&
             tr.records[1].t_set == ModificationSet({{0, 1}}),
         "M2 greedy T sets");
  const auto o2 = build_policy_order(m2);
  expect(ruled_out_per_iteration(tr, o2) == std::vector<std::size_t>{1, 1}, "M2 ruled-out counts");
  expect(mean_above(o2) == Rational(5, 4), "M2 mean above");
  expect(lattice_not_above_mean(o2, policy_of({0, 1}), ModificationSet({{1, 0}})) == Rational(3, 2),
         "M2 single-switch lattice mean");

  const auto oc = build_policy_order(m2c);
  expect(oc.at(oc.index_of(policy_of({0, 0})), oc.index_of(policy_of({1, 1}))) == Comparison::Incomparable,
         "M2c incomparable pair");
  expect(modification_set(m2c, policy_of({1, 0})) == ModificationSet({{0, 0}, {1, 1}}), "M2c T set");
  const auto trc = run_policy_iteration(m2c, policy_of({1, 0}), GreedyStrategy{});
  expect(trc.iterations() == 1 && trc.final_policy == policy_of({0, 1}), "M2c greedy one step");
  expect(count_between(oc, policy_of({1, 0}), policy_of({0, 1})) == 3, "M2c count between");
  expect(lattice_not_above_mean(oc, policy_of({1, 0}), ModificationSet({{0, 0}, {1, 1}})) == Rational(11, 4),
         "M2c lattice mean");
  for (const auto& m : {m2, m2c}) {
    for (const auto& pi : enumerate_policies(2, 2)) {
      expect(verify_theorem1(m, pi).passed() && verify_lemma4(m, pi).passed(), "desk verifiers on " + to_string(pi));
    }
    expect(verify_lemma3(m).passed(), "desk lemma3");
  }
  out.detail = "M2 and M2c";
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_command(const std::string& cmd) { return std::system(cmd.c_str()); }

Outcome cli_determinism() {
  Outcome out;
  const std::string cli = PIMDP_CLI_PATH;
  const fs::path dir = fs::temp_directory_path() / ("pimdp_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  struct Case {
    std::string name;
    std::string args;
    bool trace;
  };
  const std::vector<Case> cases = {
      {"solve-random", "solve --gen n=6,k=3,seed=77 --strategy random --seed 5 --start-policy random", true},
      {"solve-greedy", "solve --builtin M2 --strategy greedy --start-policy 0,1 --format csv", true},
      {"experiment", "experiment --n-range 3..5 --k 2 --instances 5 --strategy random --seed 9 --oracle on", false},
  };
  for (const auto& c : cases) {
    std::string outputs[2];
    std::string traces[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path stdout_file = dir / (c.name + "_" + std::to_string(rep) + ".out");
      const fs::path trace_file = dir / (c.name + "_" + std::to_string(rep) + ".trace");
      std::string cmd = "\"" + cli + "\" " + c.args;
      if (c.trace) cmd += " --trace \"" + trace_file.string() + "\"";
      cmd += " > \"" + stdout_file.string() + "\"";
      const int rc = run_command(cmd);
      if (rc != 0) out.fail(c.name + ": exit status " + std::to_string(rc));
      outputs[rep] = read_file(stdout_file);
      if (c.trace) traces[rep] = read_file(trace_file);
    }
    if (outputs[0].empty()) out.fail(c.name + ": empty output");
    if (outputs[0] != outputs[1]) out.fail(c.name + ": outputs differ");
    if (c.trace && (traces[0].empty() || traces[0] != traces[1])) out.fail(c.name + ": traces differ or are empty");
  }
  fs::remove_all(dir);
  out.detail = std::to_string(cases.size()) + " commands run twice";
  return out;
}

Outcome float_agreement() {
  Outcome out;
  std::size_t runs = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    GenSpec spec;
    spec.n = 2 + seed % 6;
    spec.k = 2 + seed % 2;
    spec.seed = 30000 + seed;
    const auto exact_mdp = random_mdp(spec);
    const auto float_mdp = to_float(exact_mdp);
    for (const auto& strategy : strategy_set(seed)) {
      const auto start = random_policy(spec.n, spec.k, seed);
      const auto a = run_policy_iteration(exact_mdp, start, strategy);
      const auto b = run_policy_iteration(float_mdp, start, strategy);
      ++runs;
      const std::string where = "seed=" + std::to_string(spec.seed) + " " + strategy_name(strategy);
      if (a.visited_policies() != b.visited_policies()) out.fail(where + ": visited policies differ");
      for (StateIndex s = 0; s < spec.n; ++s) {
        const double diff = std::abs(a.final_value[s].get_d() - b.final_value[s]);
        worst = std::max(worst, diff);
        if (diff > kFloatTolerance) out.fail(where + ": value differs by " + std::to_string(diff));
      }
    }
  }
  out.detail = std::to_string(runs) + " runs, max |diff| " + format_bound(worst);
  return out;
}

void report(int id, const std::string& name, const Outcome& o, double seconds, bool& all_ok) {
  std::printf("criterion %d %-28s %s  (%s; %.1fs)\n", id, name.c_str(), o.ok ? "PASS" : "FAIL", o.detail.c_str(),
              seconds);
  for (const auto& f : o.failures) std::printf("    %s\n", f.c_str());
  std::fflush(stdout);
  all_ok = all_ok && o.ok;
}

template <class F>
auto timed(F&& f, double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  auto r = f();
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

int main() {
  bool all_ok = true;
  double secs = 0;
  try {
    const auto sweep = timed(run_sweep, secs);
    report(1, "optimality", sweep.optimality, secs, all_ok);
    report(2, "strict-ascent", sweep.ascent, secs, all_ok);
    const auto lemmas = timed(lemma_campaigns, secs);
    report(3, "lemma-campaigns", lemmas, secs, all_ok);
    const auto bounds = timed(greedy_bounds, secs);
    report(4, "greedy-bounds", bounds, secs, all_ok);
    const auto lattice = timed(lattice_check, secs);
    report(5, "lattice-mean", lattice, secs, all_ok);
    const auto desk = timed(desk_instances, secs);
    report(6, "desk-instances", desk, secs, all_ok);
    const auto cli = timed(cli_determinism, secs);
    report(7, "cli-determinism", cli, secs, all_ok);
    const auto flt = timed(float_agreement, secs);
    report(8, "float-exact-agreement", flt, secs, all_ok);
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("acceptance %s\n", all_ok ? "PASS" : "FAIL");
  return all_ok ? 0 : 1;
}
