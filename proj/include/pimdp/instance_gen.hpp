#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "pimdp/mdp.hpp"
#include "pimdp/rng.hpp"

namespace pimdp {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  /// 1-based line number, 0 when the error is not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Parameters of the seeded random instance family.
struct GenSpec {
  std::size_t n = 4;
  std::size_t k = 2;
  Rational gamma{9, 10};
  double density = 0.5;  // chance that a given (s,a,s') transition is nonzero
  long reward_lo = 0;
  long reward_hi = 10;
  long reward_den = 1;
  std::uint64_t seed = 0;
};

/// Nonzero transitions get integer weights in [1, kMaxTransitionWeight].
inline constexpr std::uint64_t kMaxTransitionWeight = 10;

inline void check_gen_spec(const GenSpec& spec) {
  if (spec.n == 0 || spec.k == 0) throw std::invalid_argument("gen: n and k must be at least 1");
  if (spec.gamma < 0 || spec.gamma >= 1) throw std::invalid_argument("gen: gamma must lie in [0,1)");
  if (!(spec.density > 0.0 && spec.density <= 1.0)) throw std::invalid_argument("gen: density must lie in (0,1]");
  if (spec.reward_lo > spec.reward_hi) throw std::invalid_argument("gen: empty reward range");
  if (spec.reward_den <= 0) throw std::invalid_argument("gen: reward denominator must be positive");
}

/// Deterministic in `spec`. Rows are integer weights over their sum, so they
/// sum to exactly 1; each row keeps at least one nonzero entry.
inline Mdp<Rational> random_mdp(const GenSpec& spec) {
  check_gen_spec(spec);
  SplitMix64 rng(spec.seed);
  Mdp<Rational> mdp(spec.n, spec.k, spec.gamma);
  const auto reward_span = static_cast<std::uint64_t>(spec.reward_hi - spec.reward_lo) + 1;
  std::vector<std::uint64_t> weights(spec.n);
  for (StateIndex s = 0; s < spec.n; ++s) {
    for (ActionIndex a = 0; a < spec.k; ++a) {
      std::uint64_t total = 0;
      for (StateIndex t = 0; t < spec.n; ++t) {
        weights[t] = rng.unit() < spec.density ? 1 + rng.uniform(kMaxTransitionWeight) : 0;
        total += weights[t];
      }
      if (total == 0) {
        const StateIndex t = rng.uniform(spec.n);
        weights[t] = 1 + rng.uniform(kMaxTransitionWeight);
        total = weights[t];
      }
      for (StateIndex t = 0; t < spec.n; ++t) {
        if (weights[t] != 0) {
          mdp.p(s, a, t) = ratio(weights[t], total);
        }
      }
      const long numerator = spec.reward_lo + static_cast<long>(rng.uniform(reward_span));
      mdp.r(s, a) = Rational(mpz_class(numerator), mpz_class(spec.reward_den));
      mdp.r(s, a).canonicalize();
    }
  }
  return mdp;
}

/// Named desk-scale instances "M2" and "M2c" (n = 2, k = 2, gamma = 1/2).
///
/// M2:  state 0: a0 self-loop reward 0, a1 moves to 1 reward 0;
///      state 1: a0 self-loop reward 1, a1 moves to 0 reward 0.
/// M2c: every action self-loops; R(0,a0) = R(1,a1) = 1, other rewards 0.
inline Mdp<Rational> builtin_instance(std::string_view name) {
  Mdp<Rational> mdp(2, 2, Rational(1, 2));
  if (name == "M2") {
    mdp.p(0, 0, 0) = 1;
    mdp.p(0, 1, 1) = 1;
    mdp.p(1, 0, 1) = 1;
    mdp.p(1, 1, 0) = 1;
    mdp.r(1, 0) = 1;
    return mdp;
  }
  if (name == "M2c") {
    for (StateIndex s = 0; s < 2; ++s) {
      for (ActionIndex a = 0; a < 2; ++a) mdp.p(s, a, s) = 1;
    }
    mdp.r(0, 0) = 1;
    mdp.r(1, 1) = 1;
    return mdp;
  }
  // Reserved: the worst-case sequential family needs a construction that is
  // not available here.
  if (name == "sequential-lower-bound") {
    throw std::invalid_argument("builtin instance 'sequential-lower-bound' is reserved and not implemented");
  }
  throw std::invalid_argument("unknown builtin instance '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Text format
//
//   MDP 1
//   <n> <k>
//   gamma <num/den>
//   R <s> <a> <num/den>          (all n*k required)
//   P <s> <a> <s'> <num/den>     (sparse; omitted entries are 0)
//
// Whitespace separated, '#' starts a comment.
// ---------------------------------------------------------------------------

namespace detail {

inline Rational parse_rational(const std::string& tok, std::size_t line) {
  const auto slash = tok.find('/');
  const std::string num = tok.substr(0, slash);
  const std::string den = slash == std::string::npos ? "1" : tok.substr(slash + 1);
  auto is_int = [](const std::string& s, bool allow_sign) {
    std::size_t i = (allow_sign && !s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
    if (i >= s.size()) return false;
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') return false;
    }
    return true;
  };
  if (!is_int(num, true) || !is_int(den, false)) throw ParseError(line, "malformed rational '" + tok + "'");
  mpz_class n(num[0] == '+' ? num.substr(1) : num);
  mpz_class d(den);
  if (d == 0) throw ParseError(line, "zero denominator in '" + tok + "'");
  Rational out(n, d);
  out.canonicalize();
  return out;
}

inline std::size_t parse_index(const std::string& tok, std::size_t bound, const char* what, std::size_t line) {
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos || tok.size() > 18) {
    throw ParseError(line, std::string("malformed ") + what + " index '" + tok + "'");
  }
  const std::size_t v = std::stoull(tok);
  if (v >= bound) throw ParseError(line, std::string(what) + " index " + tok + " out of range");
  return v;
}

}  // namespace detail

inline Mdp<Rational> parse_mdp(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  std::size_t header = 0;
  std::size_t n = 0;
  std::size_t k = 0;
  Rational gamma;
  std::optional<Mdp<Rational>> mdp;
  std::set<std::pair<StateIndex, ActionIndex>> seen_r;
  std::set<std::tuple<StateIndex, ActionIndex, StateIndex>> seen_p;

  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    if (header == 0) {
      if (tok.size() != 2 || tok[0] != "MDP") throw ParseError(line_no, "expected 'MDP 1' header");
      if (tok[1] != "1") throw ParseError(line_no, "unsupported format version '" + tok[1] + "'");
      ++header;
      continue;
    }
    if (header == 1) {
      if (tok.size() != 2) throw ParseError(line_no, "expected '<n> <k>'");
      n = detail::parse_index(tok[0], std::size_t(1) << 20, "state count", line_no);
      k = detail::parse_index(tok[1], std::size_t(1) << 20, "action count", line_no);
      if (n == 0 || k == 0) throw ParseError(line_no, "n and k must be at least 1");
      ++header;
      continue;
    }
    if (header == 2) {
      if (tok.size() != 2 || tok[0] != "gamma") throw ParseError(line_no, "expected 'gamma <num/den>'");
      gamma = detail::parse_rational(tok[1], line_no);
      if (gamma < 0 || gamma >= 1) throw ParseError(line_no, "gamma must lie in [0,1)");
      mdp.emplace(n, k, gamma);
      ++header;
      continue;
    }

    if (tok[0] == "R") {
      if (tok.size() != 4) throw ParseError(line_no, "expected 'R <s> <a> <num/den>'");
      const auto s = detail::parse_index(tok[1], n, "state", line_no);
      const auto a = detail::parse_index(tok[2], k, "action", line_no);
      if (!seen_r.insert({s, a}).second) {
        throw ParseError(line_no, "duplicate entry R " + tok[1] + " " + tok[2]);
      }
      mdp->r(s, a) = detail::parse_rational(tok[3], line_no);
    } else if (tok[0] == "P") {
      if (tok.size() != 5) throw ParseError(line_no, "expected 'P <s> <a> <s'> <num/den>'");
      const auto s = detail::parse_index(tok[1], n, "state", line_no);
      const auto a = detail::parse_index(tok[2], k, "action", line_no);
      const auto t = detail::parse_index(tok[3], n, "state", line_no);
      if (!seen_p.insert({s, a, t}).second) {
        throw ParseError(line_no, "duplicate entry P " + tok[1] + " " + tok[2] + " " + tok[3]);
      }
      Rational p = detail::parse_rational(tok[4], line_no);
      if (p < 0 || p > 1) throw ParseError(line_no, "probability " + tok[4] + " outside [0,1]");
      mdp->p(s, a, t) = std::move(p);
    } else {
      throw ParseError(line_no, "unknown directive '" + tok[0] + "'");
    }
  }

  if (header < 3) throw ParseError(line_no, "truncated header");
  for (StateIndex s = 0; s < n; ++s) {
    for (ActionIndex a = 0; a < k; ++a) {
      if (!seen_r.contains({s, a})) {
        throw ParseError(0, "missing reward R " + std::to_string(s) + " " + std::to_string(a));
      }
      Rational sum = 0;
      for (StateIndex t = 0; t < n; ++t) sum += mdp->p(s, a, t);
      if (sum != 1) {
        throw ParseError(0, "row sum for (s=" + std::to_string(s) + ",a=" + std::to_string(a) + ") is " +
                                sum.get_str() + ", expected 1");
      }
    }
  }
  return std::move(*mdp);
}

inline Mdp<Rational> parse_mdp(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_mdp(in);
}

inline std::string serialize_mdp(const Mdp<Rational>& mdp) {
  std::ostringstream out;
  out << "MDP 1\n" << mdp.num_states() << ' ' << mdp.num_actions() << '\n';
  out << "gamma " << rational_text(mdp.gamma()) << '\n';
  for (StateIndex s = 0; s < mdp.num_states(); ++s) {
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      out << "R " << s << ' ' << a << ' ' << rational_text(mdp.r(s, a)) << '\n';
    }
  }
  for (StateIndex s = 0; s < mdp.num_states(); ++s) {
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      for (StateIndex t = 0; t < mdp.num_states(); ++t) {
        if (mdp.p(s, a, t) != 0) out << "P " << s << ' ' << a << ' ' << t << ' ' << rational_text(mdp.p(s, a, t)) << '\n';
      }
    }
  }
  return out.str();
}

/// Parses "key=value,..." with keys n, k, seed, gamma (num/den), density,
/// rewards (lo..hi or lo..hi/den). Unlisted keys keep the GenSpec defaults.
inline GenSpec parse_gen_spec(std::string_view text) {
  GenSpec spec;
  std::string s(text);
  std::istringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("gen spec: expected key=value in '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    try {
      if (key == "n") {
        spec.n = std::stoull(val);
      } else if (key == "k") {
        spec.k = std::stoull(val);
      } else if (key == "seed") {
        spec.seed = std::stoull(val);
      } else if (key == "gamma") {
        spec.gamma = detail::parse_rational(val, 0);
      } else if (key == "density") {
        spec.density = std::stod(val);
      } else if (key == "rewards") {
        const auto dots = val.find("..");
        if (dots == std::string::npos) throw std::invalid_argument("expected lo..hi");
        const auto slash = val.find('/', dots);
        spec.reward_lo = std::stol(val.substr(0, dots));
        spec.reward_hi = std::stol(val.substr(dots + 2, slash == std::string::npos ? std::string::npos : slash - dots - 2));
        spec.reward_den = slash == std::string::npos ? 1 : std::stol(val.substr(slash + 1));
      } else {
        throw std::invalid_argument("unknown key");
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("gen spec: bad entry '" + item + "' (" + e.what() + ")");
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("gen spec: value out of range in '" + item + "'");
    } catch (const ParseError& e) {
      throw std::invalid_argument("gen spec: bad entry '" + item + "' (" + e.what() + ")");
    }
  }
  check_gen_spec(spec);
  return spec;
}

}  // namespace pimdp
