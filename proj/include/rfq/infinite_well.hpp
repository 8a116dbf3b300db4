#pragma once

// Infinite potential well of half-width a: the wall condition keeps only the
// Fourier modes beta_n = n pi / a of the free solution.

#include <cmath>
#include <complex>
#include <vector>

#include "rfq/airy.hpp"
#include "rfq/model.hpp"
#include "rfq/scales.hpp"

namespace rfq::well {

struct WellSolution {
  ModelParams params;
  ModeCoefficients modes;
  PhaseGrid grid;
  PhaseField field;
};

inline double quantized_beta(double a, int n) {
  if (!(a > 0.0)) fail(ErrorCode::NonPositiveWidth, "well half-width must be > 0", "a");
  return n * pi / a;
}

/// hbar_eff^2 n^2 pi^2 / (2 m a^2)
inline double qm_level(const ModelParams& params, double a, int n) {
  if (!(a > 0.0)) fail(ErrorCode::NonPositiveWidth, "well half-width must be > 0", "a");
  const double h = params.hbar_eff();
  return h * h * n * n * pi * pi / (2.0 * params.m() * a * a);
}

/// p0(n pi / a)^2 / 2m written in the model constants, (1/2m) n^2 pi^2 / ((2 K m lambda)^2 a^2).
inline double model_level(const ModelParams& params, double a, int n) {
  if (!(a > 0.0)) fail(ErrorCode::NonPositiveWidth, "well half-width must be > 0", "a");
  const double s = 2.0 * params.K() * params.m() * params.lambda();
  return n * n * pi * pi / (2.0 * params.m() * s * s * a * a);
}

/// f(x, p) = sum_n c_n e^{-i n pi x / a} Ai(-N_n (p0_n + i p)) with N~ = 1. The
/// n = 0 term is a p-independent constant c_0 Ai(0) and is dropped unless
/// include_zero is set.
inline WellSolution well_density(const ModeCoefficients& modes, const ModelParams& params,
                                 const PhaseGrid& grid, bool include_zero = false,
                                 const airy::AiryEvalConfig& cfg = {}) {
  const double a = modes.a();
  const double slack = 1e-12 * a;
  if (grid.x_min() < -a - slack || grid.x_max() > a + slack)
    fail(ErrorCode::InvalidArgument, "grid x-range must lie inside [-a, a]", "grid");
  std::vector<complex> values(grid.size());
  for (int n = -modes.n_trunc(); n <= modes.n_trunc(); ++n) {
    if (n == 0 && !include_zero) continue;
    const complex c = modes[n];
    if (c == complex{}) continue;
    const double beta = quantized_beta(a, n);
    std::vector<complex> profile(grid.np());
    for (std::size_t j = 0; j < grid.np(); ++j)
      profile[j] = c * airy::ai_tilde(free::mode_argument(params, beta, grid.p(j)), cfg);
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const complex phase = std::polar(1.0, -beta * grid.x(i));
      for (std::size_t j = 0; j < grid.np(); ++j) values[grid.index(i, j)] += phase * profile[j];
    }
  }
  return WellSolution{params, modes, grid, PhaseField(grid, std::move(values))};
}

namespace detail {

// d f / d p along row i; second-order central inside, one-sided at the ends.
inline std::vector<complex> p_derivative(const PhaseField& field, std::size_t i) {
  const auto& g = field.grid();
  const std::size_t np = g.np();
  const double h = g.dp();
  std::vector<complex> d(np);
  for (std::size_t j = 1; j + 1 < np; ++j) d[j] = (field.at(i, j + 1) - field.at(i, j - 1)) / (2.0 * h);
  d[0] = (-3.0 * field.at(i, 0) + 4.0 * field.at(i, 1) - field.at(i, 2)) / (2.0 * h);
  d[np - 1] = (3.0 * field.at(i, np - 1) - 4.0 * field.at(i, np - 2) + field.at(i, np - 3)) / (2.0 * h);
  return d;
}

}  // namespace detail

/// \int |df/dp(a, p) - df/dp(-a, p)| dp
inline double boundary_residual(const PhaseField& field, double a) {
  const auto& g = field.grid();
  const std::size_t right = g.find_x(a), left = g.find_x(-a);
  if (right == g.nx() || left == g.nx())
    fail(ErrorCode::BoundaryNotOnGrid, "x = +-a must be grid nodes", "a");
  const auto dr = detail::p_derivative(field, right);
  const auto dl = detail::p_derivative(field, left);
  double sum = 0.0;
  for (std::size_t j = 0; j < g.np(); ++j) {
    const double w = (j == 0 || j + 1 == g.np()) ? 0.5 : 1.0;
    sum += w * std::abs(dr[j] - dl[j]);
  }
  return sum * g.dp();
}

/// F~_j(X) = c_j e_j / sum_{n != 0} c_n (j/n)^{1/3} e_n, e_n = exp(-i n X pi / a).
inline complex f_tilde(const ModeCoefficients& modes, double X, int j) {
  if (j == 0 || j < -modes.n_trunc() || j > modes.n_trunc())
    fail(ErrorCode::IndexOutOfRange, "j must be a nonzero mode index within the truncation", "j");
  const double a = modes.a();
  complex den{};
  double scale = 0.0;
  for (int n = -modes.n_trunc(); n <= modes.n_trunc(); ++n) {
    if (n == 0) continue;
    const double ratio = cbrt_odd(static_cast<double>(j) / n);
    den += modes[n] * ratio * std::polar(1.0, -n * X * pi / a);
    scale += std::abs(modes[n]) * std::abs(ratio);
  }
  if (!(std::abs(den) > 1e-12 * scale))
    fail(ErrorCode::ZeroDenominator, "F~ denominator vanishes", "X");
  return modes[j] * std::polar(1.0, -j * X * pi / a) / den;
}

/// <p^2 / 2m | x = X> = sum_n F~_n(X) qm_level(n).
inline complex cond_kinetic_energy(const ModeCoefficients& modes, const ModelParams& params,
                                   double X) {
  complex sum{};
  for (int n = -modes.n_trunc(); n <= modes.n_trunc(); ++n) {
    if (n == 0 || modes[n] == complex{}) continue;
    sum += f_tilde(modes, X, n) * qm_level(params, modes.a(), n);
  }
  return sum;
}

/// Grid quadrature of (p^2 / 2m) f(X, p) / \int f(X, p) dp at the row x = X.
inline complex direct_cond_kinetic_energy(const PhaseField& field, const ModelParams& params,
                                          double X) {
  const auto& g = field.grid();
  const std::size_t i = g.find_x(X);
  if (i == g.nx()) fail(ErrorCode::BoundaryNotOnGrid, "X must be a grid node", "X");
  complex num{}, den{};
  for (std::size_t j = 0; j < g.np(); ++j) {
    const double w = (j == 0 || j + 1 == g.np()) ? 0.5 : 1.0;
    const double p = g.p(j);
    num += w * p * p * field.at(i, j);
    den += w * field.at(i, j);
  }
  if (den == complex{}) fail(ErrorCode::ZeroDenominator, "row integral vanishes", "X");
  return num / (2.0 * params.m() * den);
}

}  // namespace rfq::well
