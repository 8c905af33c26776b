#pragma once

#include <gmpxx.h>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstdio>
#include <string>

namespace pimdp {

/// Exact arithmetic mode. gmpxx keeps every value in canonical reduced form
/// with a positive denominator.
using Rational = mpq_class;

/// Float-mode strictness margin: a > b means a - b > kFloatTolerance and
/// a == b means |a - b| <= kFloatTolerance.
inline constexpr double kFloatTolerance = 1e-9;

/// Float-mode slack allowed on transition row sums.
inline constexpr double kRowSumTolerance = 1e-12;

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static constexpr const char* mode_name = "exact";

  static bool greater(const Rational& a, const Rational& b) { return a > b; }
  static bool equal(const Rational& a, const Rational& b) { return a == b; }
  static bool is_zero(const Rational& a) { return sgn(a) == 0; }
  static Rational magnitude(const Rational& a) { return Rational(abs(a)); }
  static double to_double(const Rational& a) { return a.get_d(); }
  static std::string to_string(const Rational& a) { return a.get_str(); }
};

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static constexpr const char* mode_name = "float";

  static bool greater(double a, double b) { return a - b > kFloatTolerance; }
  static bool equal(double a, double b) { return std::abs(a - b) <= kFloatTolerance; }
  static bool is_zero(double a) { return a == 0.0 || !std::isfinite(a); }
  static double magnitude(double a) { return std::abs(a); }
  static double to_double(double a) { return a; }
  static std::string to_string(double a) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", a);
    return buf;
  }
};

/// One of the two arithmetic modes. Every computation is instantiated for
/// exactly one of them, so modes cannot mix.
template <class T>
concept Scalar = std::same_as<T, Rational> || std::same_as<T, double>;

/// num/den in canonical form; den must be nonzero.
inline Rational ratio(std::uint64_t num, std::uint64_t den) {
  static_assert(sizeof(unsigned long) == sizeof(std::uint64_t));
  Rational out{mpz_class(static_cast<unsigned long>(num)), mpz_class(static_cast<unsigned long>(den))};
  out.canonicalize();
  return out;
}

/// Always "num/den", including integers. Used by the instance file format.
inline std::string rational_text(const Rational& x) {
  return x.get_num().get_str() + "/" + x.get_den().get_str();
}

}  // namespace pimdp
