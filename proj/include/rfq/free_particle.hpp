#pragma once

// Free-particle (E = 0) stationary densities built as superpositions of the
// Fourier modes e^{-i beta x} Ai(-N(beta)(p0(beta) + i p)) weighted by C(beta).

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "rfq/airy.hpp"
#include "rfq/model.hpp"
#include "rfq/scales.hpp"

namespace rfq::free {

struct FreeSolution {
  ModelParams params;
  CoefficientFunction coeffs;
  complex norm;  // N~
  PhaseGrid grid;
  PhaseField field;
};

namespace detail {

// Quadratic through three points, evaluated at 0.
inline complex extrapolate_to_zero(const std::array<double, 3>& b, const std::array<complex, 3>& r) {
  complex sum{};
  for (int i = 0; i < 3; ++i) {
    double l = 1.0;
    for (int j = 0; j < 3; ++j)
      if (j != i) l *= (0.0 - b[j]) / (b[i] - b[j]);
    sum += l * r[i];
  }
  return sum;
}

struct OneSidedLimit {
  complex value;
  // Local power s of |C / cbrt(beta)| ~ beta^{-s} from the sample pairs (1,2)
  // and (2,3) nearest to 0. A power law gives equal values; a smooth ratio
  // gives exponents that shrink towards 0.
  double s12;
  double s23;
  bool available;

  bool grows() const { return s12 > 0.05 && s12 >= 0.8 * s23; }
  bool decays() const { return s12 < -0.05 && s12 <= 0.8 * s23; }
};

// lim C(beta) / cbrt(beta) from one side using the three samples nearest to 0.
inline OneSidedLimit side_limit(const CoefficientFunction& coeffs, bool right) {
  const auto beta = coeffs.beta();
  const auto c = coeffs.values();
  std::array<double, 3> b{};
  std::array<complex, 3> r{};
  int found = 0;
  if (right) {
    for (std::size_t k = 0; k < beta.size() && found < 3; ++k)
      if (beta[k] > 0.0) {
        b[found] = beta[k];
        r[found] = c[k] / cbrt_odd(beta[k]);
        ++found;
      }
  } else {
    for (std::size_t k = beta.size(); k-- > 0 && found < 3;)
      if (beta[k] < 0.0) {
        b[found] = beta[k];
        r[found] = c[k] / cbrt_odd(beta[k]);
        ++found;
      }
  }
  if (found < 3) return {complex{}, 0.0, 0.0, false};
  auto local = [&](int a, int c) {
    const double ma = std::abs(r[a]), mc = std::abs(r[c]);
    if (ma > 0.0 && mc > 0.0) return std::log(ma / mc) / std::log(b[c] / b[a]);
    return ma > 0.0 ? INFINITY : 0.0;
  };
  return {extrapolate_to_zero(b, r), local(0, 1), local(1, 2), true};
}

// C / N at sample k, using the removable limit at beta = 0.
inline complex c_over_n(const CoefficientFunction& coeffs, const ModelParams& params, std::size_t k) {
  const double b = coeffs.beta()[k];
  const complex c = coeffs.values()[k];
  if (b != 0.0) return c / n_beta(params, b);
  double scale = 0.0;
  for (const auto& v : coeffs.values()) scale = std::max(scale, std::abs(v));
  if (std::abs(c) > 1e-12 * scale)
    fail(ErrorCode::BetaZeroNotRemovable, "C(0) != 0 so C/N is singular at beta = 0", "beta=0");
  const auto lim = side_limit(coeffs, true);
  if (!lim.available) return {};
  if (lim.grows())
    fail(ErrorCode::BetaZeroNotRemovable, "C/N grows without bound as beta -> 0", "beta=0");
  return -std::cbrt(params.m() / (2.0 * params.K())) * lim.value;
}

struct SpectralSum {
  complex value;
  double scale;
};

inline SpectralSum weighted_sum(const CoefficientFunction& coeffs, const ModelParams& params,
                                double X, int power) {
  const auto beta = coeffs.beta();
  // A lone sample is a delta mode of unit weight.
  const auto w = beta.size() == 1 ? std::vector<double>{1.0} : trapezoid_weights(beta);
  complex sum{};
  double scale = 0.0;
  for (std::size_t k = 0; k < beta.size(); ++k) {
    if (coeffs.values()[k] == complex{} && beta[k] != 0.0) continue;
    const complex cn = c_over_n(coeffs, params, k);
    const complex term = w[k] * cn * std::polar(1.0, -beta[k] * X);
    sum += power == 0 ? term : term * std::pow(p0_beta(params, beta[k]), power);
    scale += w[k] * std::abs(cn);
  }
  return {sum, scale};
}

}  // namespace detail

/// N~ = -(m / 2K)^{1/3} lim_{beta->0+} C(beta) / beta^{1/3}.
inline complex normalization(const CoefficientFunction& coeffs, const ModelParams& params,
                             double tol = 1e-6) {
  if (coeffs.empty()) fail(ErrorCode::EmptyInput, "no coefficient samples");
  const auto right = detail::side_limit(coeffs, true);
  if (!right.available)
    fail(ErrorCode::InvalidArgument, "need three samples at beta > 0 for the limit");
  if (right.grows())
    fail(ErrorCode::DivergentNorm, "C(beta)/beta^{1/3} grows without bound as beta -> 0+");
  if (right.decays() || std::abs(right.value) == 0.0)
    fail(ErrorCode::DivergentNorm, "C(beta)/beta^{1/3} vanishes at 0+, 1/N~ is unbounded");
  const auto left = detail::side_limit(coeffs, false);
  if (left.available) {
    const double gap = std::abs(left.value - right.value);
    if (left.grows() ||
        gap > tol * std::max(std::abs(left.value), std::abs(right.value)))
      fail(ErrorCode::AsymmetricLimit, "left and right limits of C/beta^{1/3} differ");
  }
  return -std::cbrt(params.m() / (2.0 * params.K())) * right.value;
}

/// One Fourier mode amp * e^{-i beta x} Ai(-N(p0 + i p)) on the grid.
inline PhaseField single_mode_field(const ModelParams& params, double beta, complex amp,
                                    const PhaseGrid& grid, const airy::AiryEvalConfig& cfg = {}) {
  std::vector<complex> profile(grid.np());
  for (std::size_t j = 0; j < grid.np(); ++j)
    profile[j] = amp * airy::ai_tilde(mode_argument(params, beta, grid.p(j)), cfg);
  std::vector<complex> values(grid.size());
  for (std::size_t i = 0; i < grid.nx(); ++i) {
    const complex phase = std::polar(1.0, -beta * grid.x(i));
    for (std::size_t j = 0; j < grid.np(); ++j) values[grid.index(i, j)] = phase * profile[j];
  }
  return PhaseField(grid, std::move(values));
}

/// Unnormalized \int C(beta) e^{-i beta x} Ai(-N(p0 + i p)) d beta with
/// trapezoid weights over the coefficient samples.
inline PhaseField mode_integral(const CoefficientFunction& coeffs, const ModelParams& params,
                                const PhaseGrid& grid, const airy::AiryEvalConfig& cfg = {}) {
  if (coeffs.empty()) fail(ErrorCode::EmptyInput, "no coefficient samples");
  const auto beta = coeffs.beta();
  const auto w = trapezoid_weights(beta);
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < beta.size(); ++k)
    if (coeffs.values()[k] != complex{} && w[k] > 0.0) active.push_back(k);
  if (beta.size() == 1) active = {0};
  const std::size_t nb = active.size();

  // profile[a][j] = w C Ai(...), then a phase matrix product over beta.
  std::vector<complex> profile(nb * grid.np());
  for (std::size_t a = 0; a < nb; ++a) {
    const std::size_t k = active[a];
    const complex amp = (beta.size() == 1 ? 1.0 : w[k]) * coeffs.values()[k];
    for (std::size_t j = 0; j < grid.np(); ++j)
      profile[a * grid.np() + j] = amp * airy::ai_tilde(mode_argument(params, beta[k], grid.p(j)), cfg);
  }
  std::vector<complex> values(grid.size());
  std::vector<complex> phase(nb);
  for (std::size_t i = 0; i < grid.nx(); ++i) {
    for (std::size_t a = 0; a < nb; ++a) phase[a] = std::polar(1.0, -beta[active[a]] * grid.x(i));
    for (std::size_t j = 0; j < grid.np(); ++j) {
      complex s{};
      for (std::size_t a = 0; a < nb; ++a) s += phase[a] * profile[a * grid.np() + j];
      values[grid.index(i, j)] = s;
    }
  }
  return PhaseField(grid, std::move(values));
}

inline FreeSolution assemble_density(const CoefficientFunction& coeffs, const ModelParams& params,
                                     const PhaseGrid& grid, const airy::AiryEvalConfig& cfg = {}) {
  const complex norm = normalization(coeffs, params);
  const PhaseField raw = mode_integral(coeffs, params, grid, cfg);
  std::vector<complex> values(raw.values().begin(), raw.values().end());
  for (auto& v : values) v /= norm;
  return FreeSolution{params, coeffs, norm, grid, PhaseField(grid, std::move(values))};
}

/// Characteristic function of the x marginal, C(beta) / (N~ N(beta)).
inline complex marginal_x_charfn(const CoefficientFunction& coeffs, const ModelParams& params,
                                 double beta) {
  const complex norm = normalization(coeffs, params);
  if (beta != 0.0) return coeffs(beta) / (norm * n_beta(params, beta));
  double scale = 0.0;
  for (const auto& v : coeffs.values()) scale = std::max(scale, std::abs(v));
  if (std::abs(coeffs(0.0)) > 1e-12 * scale)
    fail(ErrorCode::BetaZeroNotRemovable, "C(0) != 0", "beta=0");
  // lim C / N = N~ by definition of the normalization.
  return 1.0;
}

/// F(beta, X) = C(beta) e^{-i beta X} / \int (C/N) e^{-i beta X} d beta.
inline complex conditional_weight(const CoefficientFunction& coeffs, const ModelParams& params,
                                  double beta, double X) {
  const auto den = detail::weighted_sum(coeffs, params, X, 0);
  if (!(std::abs(den.value) > 1e-12 * den.scale))
    fail(ErrorCode::ZeroDenominator, "conditional denominator vanishes", "X");
  return coeffs(beta) * std::polar(1.0, -beta * X) / den.value;
}

/// <p^k | x = X> = \int F(beta, X) / N(beta) p0(beta)^k d beta.
inline complex cond_p_moment(const CoefficientFunction& coeffs, const ModelParams& params, double X,
                             int order) {
  if (order != 1 && order != 2) fail(ErrorCode::InvalidArgument, "order must be 1 or 2");
  if (coeffs.size() == 1) return std::pow(p0_beta(params, coeffs.beta()[0]), order);
  const auto den = detail::weighted_sum(coeffs, params, X, 0);
  if (!(std::abs(den.value) > 1e-12 * den.scale))
    fail(ErrorCode::ZeroDenominator, "conditional denominator vanishes", "X");
  return detail::weighted_sum(coeffs, params, X, order).value / den.value;
}

/// <x^n | p = P> = (-i)^n d^n/d beta^n [C(beta) Ai(-N(p0 + i P))] / (C(0) Ai(0)) at beta = 0,
/// by central differences with one Richardson step.
inline complex cond_x_moment(const CoefficientFunction& coeffs, const ModelParams& params, double P,
                             int order, const airy::AiryEvalConfig& cfg = {}) {
  if (order != 1 && order != 2) fail(ErrorCode::InvalidArgument, "order must be 1 or 2");
  auto g = [&](double b) { return coeffs(b) * airy::ai_tilde(mode_argument(params, b, P), cfg); };
  const complex g0 = g(0.0);
  double scale = 0.0;
  for (const auto& v : coeffs.values()) scale = std::max(scale, std::abs(v));
  if (!(std::abs(g0) > 1e-12 * scale))
    fail(ErrorCode::MarginalPUndefined, "marginal in p vanishes (C(0) Ai(0) = 0)", "P");

  auto diff = [&](double h) {
    if (order == 1) return (g(h) - g(-h)) / (2.0 * h);
    return (g(h) - 2.0 * g0 + g(-h)) / (h * h);
  };
  constexpr double kTol = 1e-6;
  double h = 1e-2;
  complex d_prev = diff(h);
  complex r_prev{};
  for (int level = 0; level < 8; ++level) {
    h *= 0.5;
    const complex d = diff(h);
    const complex r = (4.0 * d - d_prev) / 3.0;
    if (level > 0 && std::abs(r - r_prev) <= kTol * std::max(1.0, std::abs(r))) {
      const complex minus_i_n = order == 1 ? complex(0.0, -1.0) : complex(-1.0, 0.0);
      return minus_i_n * r / g0;
    }
    d_prev = d;
    r_prev = r;
  }
  fail(ErrorCode::DerivativeNotConverged,
       "finite differences do not settle at beta = 0 (non-analytic beta^{1/3} dependence)");
}

}  // namespace rfq::free
