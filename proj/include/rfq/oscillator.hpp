#pragma once

// Harmonic oscillator E0 = -D x. The Fourier transform F(l, k) of the
// stationary density solves a first-order PDE whose characteristics are the
// ellipses mDq k^2 + l^2 = const; in the polar variables
//     k = r sin(phi),  l = sqrt(m D q) r cos(phi)
// the solution is
//     F = exp[alpha r^2 ((phi + B(r))(beta + 1) + sin(2 phi)/2 (beta - 1))].

#include <cmath>
#include <functional>
#include <string>

#include "rfq/model.hpp"

namespace rfq::osc {

class OscParams {
 public:
  const ModelParams& params() const noexcept { return params_; }
  double D() const noexcept { return D_; }
  double Dq() const noexcept { return D_ * params_.q(); }
  double mDq() const noexcept { return params_.m() * Dq(); }

  /// (1/4K) sqrt(m / Dq)
  double alpha() const noexcept { return std::sqrt(params_.m() / Dq()) / (4.0 * params_.K()); }
  /// Dq / (m lambda)
  double beta_ratio() const noexcept { return Dq() / (params_.m() * params_.lambda()); }
  double omega() const noexcept { return std::sqrt(Dq() / params_.m()); }

  friend OscParams make_osc(const ModelParams& params, double D);

 private:
  OscParams(const ModelParams& params, double D) : params_(params), D_(D) {}
  ModelParams params_;
  double D_;
};

inline OscParams make_osc(const ModelParams& params, double D) {
  if (!std::isfinite(D) || !(D * params.q() > 0.0))
    fail(ErrorCode::AttractiveFieldRequired, "D q must be > 0 (attracting field)", "D");
  return OscParams(params, D);
}

/// r-dependent integration constant B(r) with its first two derivatives.
struct GaugeFunction {
  std::function<double(double)> B = [](double) { return 0.0; };
  std::function<double(double)> dB = [](double) { return 0.0; };
  std::function<double(double)> d2B = [](double) { return 0.0; };

  /// |r^2 B(r)| decreasing between r = 1e-3 and 1e-4.
  bool vanishes_at_origin() const {
    const double a = std::abs(1e-6 * B(1e-3)), b = std::abs(1e-8 * B(1e-4));
    return b <= a && b < 1e-6;
  }
};

struct Polar {
  double r;
  double phi;
};

inline Polar polar_map(double l, double k, const OscParams& osc) {
  if (l == 0.0 && k == 0.0) fail(ErrorCode::OriginPhiUndefined, "phi undefined at l = k = 0");
  const double lr = l / std::sqrt(osc.mDq());
  return {std::hypot(lr, k), std::atan2(k, lr)};
}

struct LK {
  double l;
  double k;
};

inline LK polar_inverse(double r, double phi, const OscParams& osc) {
  return {std::sqrt(osc.mDq()) * r * std::cos(phi), r * std::sin(phi)};
}

inline constexpr double kMaxExponent = 700.0;

inline double log_char_fn(double r, double phi, const GaugeFunction& gauge, const OscParams& osc) {
  if (r < 0.0) fail(ErrorCode::InvalidArgument, "r must be >= 0", "r");
  if (r == 0.0) return 0.0;
  const double b = osc.beta_ratio();
  return osc.alpha() * r * r *
         ((phi + gauge.B(r)) * (b + 1.0) + 0.5 * std::sin(2.0 * phi) * (b - 1.0));
}

inline double char_fn(double r, double phi, const GaugeFunction& gauge, const OscParams& osc) {
  const double e = log_char_fn(r, phi, gauge, osc);
  if (e > kMaxExponent) fail(ErrorCode::Overflow, "characteristic-function exponent > 700");
  return std::exp(e);
}

/// F at Cartesian (l, k) on the principal branch phi in (-pi, pi].
inline double char_fn_lk(double l, double k, const GaugeFunction& gauge, const OscParams& osc) {
  if (l == 0.0 && k == 0.0) return 1.0;
  const auto [r, phi] = polar_map(l, k, osc);
  return char_fn(r, phi, gauge, osc);
}

struct ACoeffs {
  double A_r, A_phi, A_rr, A_rphi, A_phir, A_phiphi;
};

inline ACoeffs a_coeffs(double r, double phi, const GaugeFunction& gauge, const OscParams& osc) {
  const double al = osc.alpha(), b = osc.beta_ratio();
  const double B = gauge.B(r), dB = gauge.dB(r), d2B = gauge.d2B(r);
  const double s2 = std::sin(2.0 * phi), c2 = std::cos(2.0 * phi);
  const double bracket = (phi + B) * (b + 1.0) + 0.5 * s2 * (b - 1.0);
  const double ang = (b + 1.0) + c2 * (b - 1.0);
  ACoeffs a{};
  a.A_r = 2.0 * al * r * bracket + al * r * r * dB * (b + 1.0);
  a.A_phi = al * r * ang;
  a.A_rr = 2.0 * al * bracket + 4.0 * al * r * dB * (b + 1.0) + al * r * r * d2B * (b + 1.0);
  a.A_rphi = 2.0 * al * r * ang;
  a.A_phir = al * ang;
  a.A_phiphi = -2.0 * al * r * s2 * (b - 1.0);
  return a;
}

/// (1/2m)(F_kk + mDq F_ll). At r = 0 with B = 0 this takes its limit
/// (1/2m) 4 alpha phi (beta + 1).
inline double energy_operator(double r, double phi, const GaugeFunction& gauge, const OscParams& osc) {
  const double m = osc.params().m();
  if (r < 0.0) fail(ErrorCode::InvalidArgument, "r must be >= 0", "r");
  if (r == 0.0) return 4.0 * osc.alpha() * phi * (osc.beta_ratio() + 1.0) / (2.0 * m);
  const auto a = a_coeffs(r, phi, gauge, osc);
  const double bracket =
      a.A_r / r + a.A_rr + a.A_phiphi / r + a.A_r * a.A_r + a.A_phi * a.A_phi;
  return bracket * char_fn(r, phi, gauge, osc) / (2.0 * m);
}

/// F_kk and F_ll from the separate second-derivative expressions.
struct SecondDerivatives {
  double F_kk;
  double F_ll;
};

inline SecondDerivatives second_derivatives(double r, double phi, const GaugeFunction& gauge,
                                            const OscParams& osc) {
  const auto a = a_coeffs(r, phi, gauge, osc);
  const double s = std::sin(phi), c = std::cos(phi), F = char_fn(r, phi, gauge, osc);
  const double gk = s * a.A_r + c * a.A_phi;
  const double gl = c * a.A_r - s * a.A_phi;
  const double kk = c * c / r * a.A_r + s * s * a.A_rr + s * c / r * a.A_rphi -
                    s * c / r * a.A_phi + s * c * a.A_phir + c * c / r * a.A_phiphi + gk * gk;
  const double ll = s * s / r * a.A_r + c * c * a.A_rr - s * c / r * a.A_rphi +
                    s * c / r * a.A_phi - s * c * a.A_phir + s * s / r * a.A_phiphi + gl * gl;
  return {kk * F, ll * F / osc.mDq()};
}

/// Rectangular (l, k) patch with n x n nodes.
struct LKPatch {
  double l_min, l_max, k_min, k_max;
  int n;
};

struct Residual {
  double max_residual;
  double max_F;
};

/// max |-k^2/(2K) F - l^2/(2 K m^2 lambda) F + (l/m) F_k - k D q F_l| over the
/// patch nodes, with fourth-order central differences of the closed form at
/// the patch spacing.
inline Residual char_pde_residual(const OscParams& osc, const LKPatch& patch,
                                  const GaugeFunction& gauge = {}, double alpha_scale = 1.0) {
  if (patch.n < 8) fail(ErrorCode::InvalidArgument, "patch needs >= 8 nodes per side");
  if (patch.l_min <= 0.0 && patch.l_max >= 0.0 && patch.k_min <= 0.0 && patch.k_max >= 0.0)
    fail(ErrorCode::InvalidArgument, "patch must exclude the origin");
  const auto& p = osc.params();
  const double hl = (patch.l_max - patch.l_min) / (patch.n - 1);
  const double hk = (patch.k_max - patch.k_min) / (patch.n - 1);
  auto F = [&](double l, double k) {
    if (l == 0.0 && k == 0.0) return 1.0;
    const auto [r, phi] = polar_map(l, k, osc);
    return std::exp(alpha_scale * log_char_fn(r, phi, gauge, osc));
  };
  auto d4 = [](double fm2, double fm1, double fp1, double fp2, double h) {
    return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
  };
  Residual out{0.0, 0.0};
  for (int i = 0; i < patch.n; ++i) {
    const double l = patch.l_min + i * hl;
    for (int j = 0; j < patch.n; ++j) {
      const double k = patch.k_min + j * hk;
      const double f = F(l, k);
      const double fk = d4(F(l, k - 2 * hk), F(l, k - hk), F(l, k + hk), F(l, k + 2 * hk), hk);
      const double fl = d4(F(l - 2 * hl, k), F(l - hl, k), F(l + hl, k), F(l + 2 * hl, k), hl);
      const double res = -k * k / (2.0 * p.K()) * f -
                         l * l / (2.0 * p.K() * p.m() * p.m() * p.lambda()) * f +
                         (l / p.m()) * fk - k * osc.Dq() * fl;
      out.max_residual = std::max(out.max_residual, std::abs(res));
      out.max_F = std::max(out.max_F, std::abs(f));
    }
  }
  return out;
}

enum class Branch { k_zero, l_zero };

/// Coefficient of F in the energy at phi = n pi (k_zero) or (n + 1/2) pi (l_zero), B = 0.
inline double level_at(int n, Branch branch, const OscParams& osc) {
  const double shift = branch == Branch::k_zero ? 0.0 : 0.5;
  return osc.alpha() * 4.0 * (n + shift) * pi * (osc.beta_ratio() + 1.0) /
         (2.0 * osc.params().m());
}

struct Spacing {
  double spacing;          // hbar_eff (omega + lambda / omega) pi
  double limit;            // lambda -> 0 at fixed 2 K m lambda: hbar_eff omega pi
  double spacing_no_pi;    // same without the factor pi
  double limit_no_pi;
};

inline Spacing qm_limit_spacing(const OscParams& osc) {
  const auto& p = osc.params();
  const double h = p.hbar_eff(), w = osc.omega();
  const double s = h * (w + p.lambda() / w);
  return {s * pi, h * w * pi, s, h * w};
}

enum class Marginal { x, p };

inline double marginal_charfn(double r, int n, Marginal which, const GaugeFunction& gauge,
                              const OscParams& osc) {
  const double phi = which == Marginal::x ? n * pi : (n + 0.5) * pi;
  return char_fn(r, phi, gauge, osc);
}

}  // namespace rfq::osc
