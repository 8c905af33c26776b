#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pimdp/scalar.hpp"

namespace pimdp {

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solves A x = b by Gaussian elimination with partial pivoting.
/// `a` is row-major n x n and is consumed. In exact mode the result is the
/// exact solution; in float mode a zero or non-finite pivot raises
/// SingularSystemError instead of returning garbage.
template <Scalar T>
std::vector<T> solve_linear_system(std::vector<T> a, std::vector<T> b, std::size_t n) {
  using Traits = ScalarTraits<T>;
  if (a.size() != n * n || b.size() != n) {
    throw std::invalid_argument("solve_linear_system: dimension mismatch");
  }
  auto at = [&](std::size_t r, std::size_t c) -> T& { return a[r * n + c]; };

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    T best = Traits::magnitude(at(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      T m = Traits::magnitude(at(r, col));
      if (m > best) {
        best = std::move(m);
        pivot = r;
      }
    }
    if (Traits::is_zero(best)) {
      throw SingularSystemError("singular system at column " + std::to_string(col));
    }
    if (pivot != col) {
      for (std::size_t c = col; c < n; ++c) std::swap(at(col, c), at(pivot, c));
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      if (at(r, col) == T(0)) continue;
      const T factor = at(r, col) / at(col, col);
      at(r, col) = T(0);
      for (std::size_t c = col + 1; c < n; ++c) at(r, c) -= factor * at(col, c);
      b[r] -= factor * b[col];
    }
  }

  std::vector<T> x(n, T(0));
  for (std::size_t i = n; i-- > 0;) {
    T acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= at(i, c) * x[c];
    x[i] = acc / at(i, i);
  }
  if constexpr (!Traits::exact) {
    for (const double& xi : x) {
      if (!std::isfinite(xi)) throw SingularSystemError("non-finite solution component");
    }
  }
  return x;
}

}  // namespace pimdp
