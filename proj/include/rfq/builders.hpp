#pragma once

// Standard inputs used by the command-line runs and the test suites.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "rfq/model.hpp"

namespace rfq {

/// Normalized Gaussian density centred at (x0, p0) with independent widths.
inline PhaseField gaussian_field(const PhaseGrid& grid, double x0, double p0, double sigma_x,
                                 double sigma_p) {
  std::vector<complex> v(grid.size());
  const double norm = 1.0 / (2.0 * pi * sigma_x * sigma_p);
  for (std::size_t i = 0; i < grid.nx(); ++i) {
    const double ux = (grid.x(i) - x0) / sigma_x;
    for (std::size_t j = 0; j < grid.np(); ++j) {
      const double up = (grid.p(j) - p0) / sigma_p;
      v[grid.index(i, j)] = norm * std::exp(-0.5 * (ux * ux + up * up));
    }
  }
  return PhaseField(grid, std::move(v));
}

/// Uniform samples beta_k on [-beta_max, beta_max].
inline std::vector<double> symmetric_samples(double beta_max, std::size_t n) {
  std::vector<double> b(n);
  const std::size_t mid = n / 2;
  for (std::size_t k = 0; k < n; ++k)
    b[k] = beta_max * (static_cast<double>(k) - static_cast<double>(mid)) / static_cast<double>(mid);
  b[mid] = 0.0;
  return b;
}

/// C(beta) = i cbrt(beta) exp(-beta^2 / (2 sigma^2)): Hermitian, with the same
/// limit i of C / cbrt(beta) from both sides.
inline CoefficientFunction odd_gaussian_coeffs(double beta_max, std::size_t n, double sigma) {
  const auto beta = symmetric_samples(beta_max, n);
  return CoefficientFunction::sample(beta, [&](double b) {
    return complex(0.0, cbrt_odd(b) * std::exp(-b * b / (2.0 * sigma * sigma)));
  });
}

/// c_n standard complex normal for n > 0, c_{-n} = conj(c_n), c_0 = 0.
inline ModeCoefficients random_hermitian_modes(double a, int n_trunc, std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 eng(seq);
  std::normal_distribution<double> normal;
  auto modes = ModeCoefficients::zeros(a, n_trunc);
  for (int n = 1; n <= n_trunc; ++n) {
    const double re = normal(eng);
    const double im = normal(eng);
    modes = modes.with(n, complex(re, im)).with(-n, complex(re, -im));
  }
  return modes;
}

}  // namespace rfq
