#pragma once

// Evaluation of the modified Airy function
//
//     Ai~(z) = 1/(2 pi i) \int_Gamma exp(t^3/3 - z t) dt
//
// whose defining contour is the imaginary t axis. On that line the integral
// only converges conditionally, so the quadrature route deforms it onto a
// contour through the saddle t0 = sqrt(z) whose two legs end in the valleys at
// arg t = +-pi/3 (standard Ai contour class). A second route sums the
// Maclaurin series in extended precision (|z| <= 10) and the Poincare
// expansion beyond, and serves as the cross-check.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include "rfq/model.hpp"
#include "rfq/scales.hpp"

namespace rfq::airy {

enum class Method { rotated_contour_quadrature, standard_airy_continuation };

struct AiryEvalConfig {
  Method method = Method::rotated_contour_quadrature;
  int quad_points = 256;     // Gauss-Legendre nodes per contour leg, >= 64
  double quad_cutoff = 12.0; // maximal leg length in |t - t0|
  double tol = 1e-10;        // endpoint modulus bound relative to the peak
};

inline constexpr double kMaxModulus = 50.0;

namespace detail {

struct GaussLegendre16 {
  std::array<double, 16> x{};
  std::array<double, 16> w{};
  GaussLegendre16() {
    constexpr int n = 16;
    for (int i = 0; i < n / 2; ++i) {
      double r = std::cos(pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = r;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * r * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (r * p1 - p0) / (r * r - 1.0);
        const double dr = p1 / dp;
        r -= dr;
        if (std::abs(dr) < 1e-16) break;
      }
      x[i] = -r;
      x[n - 1 - i] = r;
      w[i] = w[n - 1 - i] = 2.0 / ((1.0 - r * r) * dp * dp);
    }
  }
};

inline const GaussLegendre16& gl16() {
  static const GaussLegendre16 rule;
  return rule;
}

// \int_0^inf exp(t0 w^2 + w^3/3) dw along w = s e^{i theta}. Both the
// quadratic and cubic real coefficients are <= 0 for the legs chosen below,
// so the integrand modulus decays monotonically from 1 at s = 0.
inline complex leg_integral(complex t0, double theta, const AiryEvalConfig& cfg) {
  const complex dir = std::polar(1.0, theta);
  const complex quad = t0 * dir * dir;
  const double c2 = quad.real();
  const double c3 = std::cos(3.0 * theta) / 3.0;
  auto log_mod = [&](double s) { return c2 * s * s + c3 * s * s * s; };

  // Truncate where the integrand is negligible in double precision.
  constexpr double kNegligible = -41.5;  // log(1e-18)
  double end = cfg.quad_cutoff;
  if (log_mod(end) < kNegligible) {
    double lo = 0.0, hi = end;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (log_mod(mid) < kNegligible ? hi : lo) = mid;
    }
    end = hi;
  }
  if (log_mod(end) > std::log(cfg.tol))
    fail(ErrorCode::ContourNotConverged, "integrand at contour endpoint exceeds tol * peak");

  const double phase_span = std::abs(quad) * end * end + end * end * end / 3.0;
  const int min_panels = std::max(4, cfg.quad_points / 16);
  const int panels = std::max(min_panels, static_cast<int>(std::ceil(phase_span / pi)) + 1);
  const auto& gl = gl16();
  const double h = end / panels;
  complex sum{};
  for (int k = 0; k < panels; ++k) {
    const double mid = (k + 0.5) * h;
    for (int i = 0; i < 16; ++i) {
      const double s = mid + 0.5 * h * gl.x[i];
      const complex w = s * dir;
      sum += gl.w[i] * std::exp(quad * s * s + w * w * w / 3.0);
    }
  }
  return sum * (0.5 * h) * dir;
}

// Saddle-point contour valid for |arg z| <= 2 pi / 3.
inline complex ai_saddle(complex z, const AiryEvalConfig& cfg) {
  const complex t0 = std::sqrt(z);
  const double a = std::arg(t0);
  const double theta_up = std::min(pi / 2.0 - a / 2.0, 5.0 * pi / 12.0);
  const double theta_down = std::max(-pi / 2.0 - a / 2.0, -5.0 * pi / 12.0);
  const complex zeta = (2.0 / 3.0) * t0 * t0 * t0;
  const complex legs = leg_integral(t0, theta_up, cfg) - leg_integral(t0, theta_down, cfg);
  return std::exp(-zeta) * legs / complex(0.0, 2.0 * pi);
}

inline complex ai_contour(complex z, const AiryEvalConfig& cfg) {
  if (std::abs(std::arg(z)) <= 2.0 * pi / 3.0) return ai_saddle(z, cfg);
  // Ai(z) = -w Ai(w z) - w^2 Ai(w^2 z), w = exp(2 pi i / 3); both rotated
  // arguments fall inside the saddle sector.
  const complex w = std::polar(1.0, 2.0 * pi / 3.0);
  return -w * ai_saddle(w * z, cfg) - w * w * ai_saddle(w * w * z, cfg);
}

template <unsigned Digits>
complex ai_maclaurin(complex z) {
  using real_mp = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<Digits>>;
  using complex_mp = boost::multiprecision::number<
      boost::multiprecision::complex_adaptor<boost::multiprecision::cpp_bin_float<Digits>>>;
  const real_mp third = real_mp(1) / 3;
  const real_mp c1 = 1 / (boost::multiprecision::pow(real_mp(3), 2 * third) *
                          boost::multiprecision::tgamma(2 * third));
  const real_mp c2 = 1 / (boost::multiprecision::pow(real_mp(3), third) *
                          boost::multiprecision::tgamma(third));
  const complex_mp zz(real_mp(z.real()), real_mp(z.imag()));
  const complex_mp z3 = zz * zz * zz;
  complex_mp f_term(1), g_term = zz;
  complex_mp f = f_term, g = g_term;
  const real_mp eps = boost::multiprecision::pow(real_mp(10), -static_cast<int>(Digits) + 5);
  for (int k = 1; k < 2000; ++k) {
    f_term *= z3 / real_mp((3 * k - 1) * (3 * k));
    g_term *= z3 / real_mp((3 * k) * (3 * k + 1));
    f += f_term;
    g += g_term;
    if (abs(f_term) + abs(g_term) < eps * (abs(f) + abs(g))) break;
  }
  const complex_mp ai = c1 * f - c2 * g;
  return {static_cast<double>(ai.real()), static_cast<double>(ai.imag())};
}

// Poincare expansion, |arg z| <= 2 pi / 3 and |z| large.
inline complex ai_asymptotic_sector(complex z) {
  const complex zeta = (2.0 / 3.0) * z * std::sqrt(z);
  complex sum = 1.0, term = 1.0;
  double last = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double ratio =
        (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / (216.0 * k * (2.0 * k - 1.0));
    const complex next = -term * ratio / zeta;
    const double mag = std::abs(next);
    if (mag > last) break;  // asymptotic series starts to diverge
    term = next;
    sum += term;
    last = mag;
    if (mag < 1e-17 * std::abs(sum)) break;
  }
  return std::exp(-zeta) / (2.0 * std::sqrt(pi) * std::pow(z, 0.25)) * sum;
}

inline complex ai_continuation(complex z) {
  const double r = std::abs(z);
  if (r <= 10.0) return ai_maclaurin<50>(z);
  if (std::abs(std::arg(z)) <= 2.0 * pi / 3.0) return ai_asymptotic_sector(z);
  const complex w = std::polar(1.0, 2.0 * pi / 3.0);
  return -w * ai_asymptotic_sector(w * z) - w * w * ai_asymptotic_sector(w * w * z);
}

}  // namespace detail

/// Ai~(z) on the complex plane, |z| < 50.
inline complex ai_tilde(complex z, const AiryEvalConfig& cfg = {}) {
  if (!(std::abs(z) < kMaxModulus))
    fail(ErrorCode::OutOfDomain, "|z| must be < 50 for Ai~ evaluation");
  if (cfg.quad_points < 64) fail(ErrorCode::InvalidArgument, "quad_points must be >= 64");
  if (!(cfg.quad_cutoff > 0.0)) fail(ErrorCode::InvalidArgument, "quad_cutoff must be > 0");
  if (cfg.method == Method::standard_airy_continuation) return detail::ai_continuation(z);
  // Exact Schwarz reflection keeps conj symmetry at machine level.
  if (z.imag() < 0.0) return std::conj(detail::ai_contour(std::conj(z), cfg));
  const complex v = detail::ai_contour(z, cfg);
  return z.imag() == 0.0 ? complex(v.real(), 0.0) : v;
}

namespace detail {

// Romberg-refined trapezoid of N * \int_{-L}^{L} p^k Ai~(N(p0 + i p)) dp.
inline complex weighted_line_integral(double N, double p0, int order, double L, double tol,
                                      const AiryEvalConfig& cfg) {
  auto f = [&](double p) { return std::pow(p, order) * ai_tilde(N * complex(p0, p), cfg); };
  constexpr int kLevels = 14;
  std::array<complex, kLevels> prev{}, cur{};
  int n = 64;
  double h = 2.0 * L / n;
  complex trap = 0.5 * (f(-L) + f(L));
  for (int i = 1; i < n; ++i) trap += f(-L + i * h);
  prev[0] = trap * h;
  for (int level = 1; level < kLevels; ++level) {
    complex mids{};
    for (int i = 0; i < n; ++i) mids += f(-L + (i + 0.5) * h);
    trap += mids;
    n *= 2;
    h *= 0.5;
    cur[0] = trap * h;
    double factor = 4.0;
    for (int k = 1; k <= level; ++k, factor *= 4.0)
      cur[k] = cur[k - 1] + (cur[k - 1] - prev[k - 1]) / (factor - 1.0);
    const complex best = cur[level];
    if (level >= 3 && std::abs(best - prev[level - 1]) <= 0.01 * tol * std::max(1.0, std::abs(best)))
      return N * best;
    prev = cur;
  }
  fail(ErrorCode::QuadratureNotConverged, "Romberg refinement did not settle");
}

// Doubles the p span until consecutive estimates agree to tol; the span is
// bounded by the |z| < 50 evaluation domain.
inline complex span_doubling(const ModelParams& params, double beta, int order, double p_span,
                             double tol, const AiryEvalConfig& cfg) {
  if (beta == 0.0) fail(ErrorCode::BetaZero, "N(0) = 0 makes the normalization undefined");
  if (!(p_span > 0.0)) fail(ErrorCode::InvalidArgument, "p_span must be > 0");
  const double N = free::n_beta(params, beta);
  const double p0 = free::p0_beta(params, beta);
  const double lim = 0.9 * kMaxModulus;
  if (std::abs(N * p0) >= lim)
    fail(ErrorCode::OutOfDomain, "Airy argument at p = 0 already outside |z| < 50");
  const double max_span = std::sqrt(lim * lim - N * N * p0 * p0) / std::abs(N);
  double L = std::min(p_span, max_span);
  complex prev = weighted_line_integral(N, p0, order, L, tol, cfg);
  double prev_tail = INFINITY;
  int growing = 0;
  while (2.0 * L <= max_span) {
    L *= 2.0;
    const complex next = weighted_line_integral(N, p0, order, L, tol, cfg);
    const double tail = std::abs(next - prev);
    if (tail < tol) return next;
    growing = tail >= prev_tail ? growing + 1 : 0;
    if (growing >= 2)
      fail(ErrorCode::QuadratureNotConverged,
           "tail of the p-integral grows with the span (last tail " + std::to_string(tail) + ")");
    prev = next;
    prev_tail = tail;
  }
  fail(ErrorCode::QuadratureNotConverged, "p span reached the |z| < 50 domain bound");
}

}  // namespace detail

/// Numeric \int Ai~(N(beta)(p0(beta) + i p)) dp, expected to equal 1/N(beta).
inline complex ai_norm_integral(const ModelParams& params, double beta, double p_span,
                                double tol, const AiryEvalConfig& cfg = {}) {
  return detail::span_doubling(params, beta, 0, p_span, tol, cfg) / free::n_beta(params, beta);
}

/// N(beta) \int p^k Ai~(N(beta)(p0(beta) + i p)) dp for k in {1, 2}; expected
/// to equal p0(beta)^k.
inline complex ai_moment(const ModelParams& params, double beta, int order, double p_span,
                         double tol, const AiryEvalConfig& cfg = {}) {
  if (order != 1 && order != 2) fail(ErrorCode::InvalidArgument, "moment order must be 1 or 2");
  return detail::span_doubling(params, beta, order, p_span, tol, cfg);
}

/// Raw N \int_{-L}^{L} p^k Ai~(N(p0 + i p)) dp over a fixed span; exposes the
/// partial integrals whose behaviour the span-doubling driver judges.
inline complex ai_partial_moment(const ModelParams& params, double beta, int order, double L,
                                 double tol = 1e-10, const AiryEvalConfig& cfg = {}) {
  if (beta == 0.0) fail(ErrorCode::BetaZero, "N(0) = 0");
  return detail::weighted_line_integral(free::n_beta(params, beta), free::p0_beta(params, beta),
                                        order, L, tol, cfg);
}

}  // namespace rfq::airy
