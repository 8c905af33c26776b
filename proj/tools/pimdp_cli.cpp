// pimdp: solve MDP instances with policy iteration, verify the structural
// properties of policy iteration by brute force, and run iteration-count
// experiments against the closed-form bounds.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pimdp/pimdp.hpp"

namespace {

using namespace pimdp;

// Exit codes.
constexpr int kExitOk = 0;
constexpr int kExitInput = 1;      // malformed input / violation found / I/O failure
constexpr int kExitCap = 2;        // iteration cap or enumeration cap reached
constexpr int kExitArith = 3;      // arithmetic failure
constexpr int kExitUsage = 64;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InstanceSource {
  std::string input;
  std::string builtin;
  std::string gen;
};

Mdp<Rational> load_instance(const InstanceSource& src) {
  const int given = !src.input.empty() + !src.builtin.empty() + !src.gen.empty();
  if (given != 1) throw UsageError("exactly one of --input, --builtin, --gen is required");
  if (!src.builtin.empty()) return builtin_instance(src.builtin);
  if (!src.gen.empty()) return random_mdp(parse_gen_spec(src.gen));
  if (src.input == "-") return parse_mdp(std::cin);
  std::ifstream in(src.input);
  if (!in) throw std::runtime_error("cannot open " + src.input);
  return parse_mdp(in);
}

/// Accepts "1 0", "1,0", "(a1,a0)" or "10" (one digit per state).
Policy parse_policy_text(std::string text, std::size_t n, std::size_t k) {
  for (char& c : text) {
    if (c == ',' || c == '(' || c == ')' || c == 'a' || c == '\n' || c == '\t') c = ' ';
  }
  std::istringstream in(text);
  std::vector<std::string> tok;
  for (std::string t; in >> t;) tok.push_back(t);
  if (tok.size() == 1 && tok[0].size() == n && n > 1) {
    std::string digits = tok[0];
    tok.clear();
    for (char c : digits) tok.emplace_back(1, c);
  }
  if (tok.size() != n) {
    throw std::invalid_argument("start policy has " + std::to_string(tok.size()) + " entries, expected " +
                                std::to_string(n));
  }
  Policy pi{std::vector<ActionIndex>(n, 0)};
  for (std::size_t s = 0; s < n; ++s) {
    if (tok[s].find_first_not_of("0123456789") != std::string::npos) {
      throw std::invalid_argument("bad action '" + tok[s] + "' in start policy");
    }
    pi[s] = std::stoull(tok[s]);
    if (pi[s] >= k) throw std::invalid_argument("start policy action " + tok[s] + " out of range");
  }
  return pi;
}

Policy resolve_start(const std::string& rule, std::size_t n, std::size_t k, std::uint64_t seed) {
  if (rule == "zero" || rule == "random") return start_policy(rule, n, k, seed);
  if (std::filesystem::is_regular_file(rule)) {
    std::ifstream in(rule);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_policy_text(buf.str(), n, k);
  }
  return parse_policy_text(rule, n, k);
}

template <Scalar T>
void print_solution(std::ostream& os, const Trace<T>& trace, const std::string& format) {
  if (format == "csv") {
    os << "iterations,terminated,policy,value\n" << trace.iterations() << ',' << (trace.terminated ? 1 : 0) << ','
       << to_string(trace.final_policy) << ',';
    for (std::size_t s = 0; s < trace.final_value.size(); ++s) {
      os << (s ? " " : "") << ScalarTraits<T>::to_string(trace.final_value[s]);
    }
    os << '\n';
    return;
  }
  os << "strategy: " << trace.strategy << "\narith: " << ScalarTraits<T>::mode_name
     << "\niterations: " << trace.iterations() << "\nterminated: " << (trace.terminated ? "yes" : "no")
     << "\npolicy: " << to_string(trace.final_policy) << "\nvalue:";
  for (const T& v : trace.final_value) os << ' ' << ScalarTraits<T>::to_string(v);
  os << '\n';
}

struct SolveOptions {
  InstanceSource source;
  std::string strategy = "greedy";
  std::uint64_t seed = 0;
  std::string arith = "exact";
  std::string start = "zero";
  std::size_t max_iter = 0;
  std::string trace_file;
  std::string format = "human";
};

template <Scalar T>
int solve_with(const Mdp<T>& mdp, const SolveOptions& opt) {
  const Policy pi0 = resolve_start(opt.start, mdp.num_states(), mdp.num_actions(), opt.seed);
  const Strategy strategy = parse_strategy(opt.strategy, opt.seed);
  const std::size_t cap = opt.max_iter ? opt.max_iter : default_max_iterations(mdp.num_states(), mdp.num_actions());
  const Trace<T> trace = run_policy_iteration(mdp, pi0, strategy, cap);
  if (!opt.trace_file.empty()) {
    std::ofstream out(opt.trace_file);
    write_trace(out, trace);
    if (!out) throw std::runtime_error("cannot write " + opt.trace_file);
  }
  print_solution(std::cout, trace, opt.format);
  if (!trace.terminated) {
    std::cerr << "iteration cap " << cap << " reached before convergence\n";
    return kExitCap;
  }
  return kExitOk;
}

int cmd_solve(const SolveOptions& opt) {
  const Mdp<Rational> mdp = load_instance(opt.source);
  if (const auto problems = validate_mdp(mdp); !problems.empty()) {
    for (const auto& p : problems) std::cerr << "invalid MDP: " << p << '\n';
    return kExitInput;
  }
  if (opt.arith == "float") return solve_with(to_float(mdp), opt);
  return solve_with(mdp, opt);
}

int cmd_verify(const VerifyConfig& cfg) {
  const VerifyResult result = run_verify_campaign(cfg);
  for (const auto& r : result.reports) write_report(std::cout, r);
  std::size_t violations = 0;
  for (const auto& r : result.reports) violations += r.violations.size();
  std::cout << "summary instances " << result.instances << " n " << cfg.n << " k " << cfg.k << " seed " << cfg.seed
            << " violations " << violations << '\n';
  return result.passed() ? kExitOk : kExitInput;
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const std::size_t v = std::stoull(text);
      return {v, v};
    }
    return {std::stoull(text.substr(0, dots)), std::stoull(text.substr(dots + 2))};
  } catch (const std::exception&) {
    throw UsageError("bad range '" + text + "', expected A..B");
  }
}

int cmd_experiment(ExperimentConfig cfg, const std::string& range, const std::string& oracle,
                   const std::string& family, const std::string& out_file) {
  std::tie(cfg.n_lo, cfg.n_hi) = parse_range(range);
  cfg.oracle = oracle == "on";
  if (!family.empty()) cfg.family = parse_gen_spec(family);
  const ExperimentResult result = run_experiment(cfg);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  if (out_file.empty() || out_file == "-") {
    write_experiment_csv(std::cout, result.rows);
    return kExitOk;
  }
  std::ofstream out(out_file, std::ios::binary);
  write_experiment_csv(out, result.rows);
  out.flush();
  if (!out) {
    std::cerr << "error: cannot write " << out_file << '\n';
    return kExitInput;
  }
  return kExitOk;
}

int cmd_gen(const InstanceSource& src, const std::string& out_file, bool as_float) {
  const Mdp<Rational> mdp = load_instance(src);
  std::string text;
  if (as_float) {
    // export only; the float layout is not read back
    std::ostringstream os;
    const Mdp<double> f = to_float(mdp);
    os << "# float export\nMDP-float 1\n" << f.num_states() << ' ' << f.num_actions() << "\ngamma "
       << ScalarTraits<double>::to_string(f.gamma()) << '\n';
    for (StateIndex s = 0; s < f.num_states(); ++s) {
      for (ActionIndex a = 0; a < f.num_actions(); ++a) {
        os << "R " << s << ' ' << a << ' ' << ScalarTraits<double>::to_string(f.r(s, a)) << '\n';
      }
    }
    for (StateIndex s = 0; s < f.num_states(); ++s) {
      for (ActionIndex a = 0; a < f.num_actions(); ++a) {
        for (StateIndex t = 0; t < f.num_states(); ++t) {
          if (f.p(s, a, t) != 0.0) {
            os << "P " << s << ' ' << a << ' ' << t << ' ' << ScalarTraits<double>::to_string(f.p(s, a, t)) << '\n';
          }
        }
      }
    }
    text = os.str();
  } else {
    text = serialize_mdp(mdp);
  }
  if (out_file.empty() || out_file == "-") {
    std::cout << text;
    return kExitOk;
  }
  std::ofstream out(out_file, std::ios::binary);
  out << text;
  return out ? kExitOk : kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Policy iteration for finite discounted MDPs, with brute-force verification"};
  app.require_subcommand(1);

  // solve
  SolveOptions solve;
  auto* solve_cmd = app.add_subcommand("solve", "Run policy iteration on one instance");
  solve_cmd->add_option("--input", solve.source.input, "MDP text file ('-' for stdin)");
  solve_cmd->add_option("--builtin", solve.source.builtin, "Builtin instance (M2, M2c)");
  solve_cmd->add_option("--gen", solve.source.gen, "Generator spec, e.g. n=4,k=2,seed=7");
  solve_cmd->add_option("--strategy", solve.strategy,
                        "greedy | random | sequential[-lowest|-highest|-random]");
  solve_cmd->add_option("--seed", solve.seed, "Seed for random selection and random start policy");
  solve_cmd->add_option("--arith", solve.arith, "exact | float")->check(CLI::IsMember({"exact", "float"}));
  solve_cmd->add_option("--start-policy", solve.start, "zero | random | FILE | literal like 1,0");
  solve_cmd->add_option("--max-iter", solve.max_iter, "Iteration cap (default 2*k^n, at most 1e7)");
  solve_cmd->add_option("--trace", solve.trace_file, "Write the iteration trace to FILE");
  solve_cmd->add_option("--format", solve.format, "human | csv")->check(CLI::IsMember({"human", "csv"}));

  // verify
  VerifyConfig verify;
  std::string lemma_list = "all";
  auto* verify_cmd = app.add_subcommand("verify", "Check the policy-iteration lemmas on seeded instances");
  verify_cmd->add_option("--n", verify.n, "States per instance");
  verify_cmd->add_option("--k", verify.k, "Actions per instance");
  verify_cmd->add_option("--instances", verify.instances, "Number of instances");
  verify_cmd->add_option("--seed", verify.seed, "Seed of the first instance");
  verify_cmd->add_option("--lemmas", lemma_list, "Comma-separated ids or 'all'");
  verify_cmd->add_option("--cap", verify.cap, "Policy enumeration cap");

  // experiment
  ExperimentConfig experiment;
  std::string range = "2..6";
  std::string oracle = "off";
  std::string family;
  std::string out_file;
  auto* exp_cmd = app.add_subcommand("experiment", "Iteration counts versus the closed-form bounds, as CSV");
  exp_cmd->add_option("--n-range", range, "State counts A..B");
  exp_cmd->add_option("--k", experiment.k, "Actions per instance");
  exp_cmd->add_option("--instances", experiment.instances, "Instances per n");
  exp_cmd->add_option("--strategy", experiment.strategy, "greedy | random | sequential[-...]");
  exp_cmd->add_option("--seed", experiment.seed, "Seed of the first instance");
  exp_cmd->add_option("--oracle", oracle, "on | off")->check(CLI::IsMember({"on", "off"}));
  exp_cmd->add_option("--start-policy", experiment.start_rule, "zero | random")
      ->check(CLI::IsMember({"zero", "random"}));
  exp_cmd->add_option("--family", family, "Generator defaults, e.g. gamma=9/10,density=0.5,rewards=0..10");
  exp_cmd->add_option("--out", out_file, "CSV output file (default stdout)");

  // gen
  InstanceSource gen_src;
  std::string gen_out;
  bool gen_float = false;
  auto* gen_cmd = app.add_subcommand("gen", "Write an instance in the MDP text format");
  gen_cmd->add_option("--gen", gen_src.gen, "Generator spec, e.g. n=4,k=2,seed=7");
  gen_cmd->add_option("--builtin", gen_src.builtin, "Builtin instance (M2, M2c)");
  gen_cmd->add_option("--input", gen_src.input, "Re-serialize an existing file");
  gen_cmd->add_option("--out", gen_out, "Output file (default stdout)");
  gen_cmd->add_flag("--float", gen_float, "Export with floating-point values");

  // bounds
  std::size_t bound_n = 3;
  std::size_t bound_k = 2;
  std::string bound_strategy = "greedy";
  auto* bounds_cmd = app.add_subcommand("bounds", "Evaluate an iteration-count bound");
  bounds_cmd->add_option("--n", bound_n, "States");
  bounds_cmd->add_option("--k", bound_k, "Actions");
  bounds_cmd->add_option("--strategy", bound_strategy, "greedy | greedy-multi | random | random-multi | trivial");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve);
    if (*verify_cmd) {
      verify.lemmas.clear();
      std::istringstream in(lemma_list);
      for (std::string id; std::getline(in, id, ',');) {
        if (!id.empty()) verify.lemmas.push_back(id);
      }
      try {
        resolve_lemmas(verify.lemmas, verify.k);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      return cmd_verify(verify);
    }
    if (*exp_cmd) return cmd_experiment(experiment, range, oracle, family, out_file);
    if (*gen_cmd) return cmd_gen(gen_src, gen_out, gen_float);
    if (*bounds_cmd) {
      std::printf("%s\n", format_bound(eval_bounds(bound_n, bound_k, bound_strategy)).c_str());
      return kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CapExceededError& e) {
    std::cerr << "cap exceeded: " << e.what() << '\n';
    return kExitCap;
  } catch (const SingularSystemError& e) {
    std::cerr << "arithmetic failure: " << e.what() << '\n';
    return kExitArith;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitUsage;
}
