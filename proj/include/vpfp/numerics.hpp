#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "vpfp/error.hpp"

namespace vpfp {

/// Compensated (Neumaier) accumulator. Summation order is the call order,
/// so results are reproducible bit for bit.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline double compensated_sum(std::span<const double> values) noexcept {
  CompensatedSum acc;
  for (double x : values) acc.add(x);
  return acc.value();
}

/// Bernoulli function B(x) = x / (exp(x) - 1), B(0) = 1.
inline double bernoulli(double x) noexcept {
  if (std::abs(x) < 1e-10) return 1.0 - 0.5 * x;
  return x / std::expm1(x);
}

/// s log s extended continuously by 0 at s = 0.
inline double entropy_density(double s) noexcept { return s > 0.0 ? s * std::log(s) : 0.0; }

/**
 * Solves a tridiagonal system with the Thomas algorithm.
 *
 * Row i reads lower[i] * x[i-1] + diag[i] * x[i] + upper[i] * x[i+1] = rhs[i];
 * lower[0] and upper[n-1] are ignored. The systems assembled in this library are
 * M-matrices, so no pivoting is performed; a non-positive pivot is reported
 * with its row index.
 */
inline void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                              std::span<const double> upper, std::span<const double> rhs,
                              std::span<double> x, std::vector<double>& scratch) {
  const std::size_t n = diag.size();
  scratch.resize(n);
  double pivot = diag[0];
  if (!(pivot > 0.0)) throw SolverFailure("tridiagonal solve: non-positive pivot", 0);
  scratch[0] = upper[0] / pivot;
  x[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = diag[i] - lower[i] * scratch[i - 1];
    if (!(pivot > 0.0)) throw SolverFailure("tridiagonal solve: non-positive pivot", i);
    scratch[i] = i + 1 < n ? upper[i] / pivot : 0.0;
    x[i] = (rhs[i] - lower[i] * x[i - 1]) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= scratch[i] * x[i + 1];
}

}  // namespace vpfp
