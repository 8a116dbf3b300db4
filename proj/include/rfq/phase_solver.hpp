#pragma once

// Finite-difference treatment of the phase-space convection-diffusion equation
//
//     df/dt = d_pp f_pp + d_xx f_xx - (p/m) f_x - q E0(x) f_p,
//     d_pp = 1/(2K),  d_xx = 1/(2 lambda K m^2).

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "rfq/model.hpp"

namespace rfq::solver {

struct OperatorCoeffs {
  PhaseGrid grid;
  double d_pp;
  double d_xx;
  double m;
  double q;
  std::vector<double> E0;  // sampled at the x nodes

  double drift_x(std::size_t j) const { return grid.p(j) / m; }
  double drift_p(std::size_t i) const { return q * E0[i]; }
};

inline OperatorCoeffs make_operator(const ModelParams& params, const PhaseGrid& grid,
                                    std::vector<double> E0) {
  if (E0.size() != grid.nx()) fail(ErrorCode::GridMismatch, "E0 needs one sample per x node", "E0");
  const double K = params.K(), m = params.m();
  return {grid, 1.0 / (2.0 * K), 1.0 / (2.0 * params.lambda() * K * m * m), m, params.q(),
          std::move(E0)};
}

inline OperatorCoeffs make_operator(const ModelParams& params, const PhaseGrid& grid,
                                    const std::function<double(double)>& E0) {
  std::vector<double> e(grid.nx());
  for (std::size_t i = 0; i < grid.nx(); ++i) e[i] = E0(grid.x(i));
  return make_operator(params, grid, std::move(e));
}

namespace detail {

// Derivative stencils along a strided line of n values; second order in the
// interior, third-order one-sided at the two ends.
template <class T, class Get>
T first_derivative(Get f, std::size_t k, std::size_t n, double h) {
  if (k == 0) return (-11.0 * f(0) + 18.0 * f(1) - 9.0 * f(2) + 2.0 * f(3)) / (6.0 * h);
  if (k + 1 == n)
    return (11.0 * f(n - 1) - 18.0 * f(n - 2) + 9.0 * f(n - 3) - 2.0 * f(n - 4)) / (6.0 * h);
  return (f(k + 1) - f(k - 1)) / (2.0 * h);
}

template <class T, class Get>
T second_derivative(Get f, std::size_t k, std::size_t n, double h) {
  if (k == 0)
    return (35.0 * f(0) - 104.0 * f(1) + 114.0 * f(2) - 56.0 * f(3) + 11.0 * f(4)) / (12.0 * h * h);
  if (k + 1 == n)
    return (35.0 * f(n - 1) - 104.0 * f(n - 2) + 114.0 * f(n - 3) - 56.0 * f(n - 4) +
            11.0 * f(n - 5)) /
           (12.0 * h * h);
  return (f(k + 1) - 2.0 * f(k) + f(k - 1)) / (h * h);
}

struct Derivs {
  complex fx, fp, fxx, fpp;
};

inline Derivs derivs(const PhaseField& field, std::size_t i, std::size_t j) {
  const auto& g = field.grid();
  auto along_x = [&](std::size_t a) { return field.at(a, j); };
  auto along_p = [&](std::size_t b) { return field.at(i, b); };
  return {first_derivative<complex>(along_x, i, g.nx(), g.dx()),
          first_derivative<complex>(along_p, j, g.np(), g.dp()),
          second_derivative<complex>(along_x, i, g.nx(), g.dx()),
          second_derivative<complex>(along_p, j, g.np(), g.dp())};
}

}  // namespace detail

/// L[f] = d_pp f_pp + d_xx f_xx - (p/m) f_x - q E0 f_p at every node.
inline PhaseField apply_stationary_operator(const PhaseField& field, const OperatorCoeffs& c) {
  const auto& g = field.grid();
  if (!(g == c.grid)) fail(ErrorCode::GridMismatch, "field and operator grids differ");
  std::vector<complex> out(g.size());
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t j = 0; j < g.np(); ++j) {
      const auto d = detail::derivs(field, i, j);
      out[g.index(i, j)] =
          c.d_pp * d.fpp + c.d_xx * d.fxx - c.drift_x(j) * d.fx - c.drift_p(i) * d.fp;
    }
  return PhaseField(g, std::move(out));
}

/// max over nodes of |d(p/m)/dx + d(q E0)/dp|, by the same difference stencils.
inline double drift_divergence(const OperatorCoeffs& c) {
  const auto& g = c.grid;
  double worst = 0.0;
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t j = 0; j < g.np(); ++j) {
      const double dvx = detail::first_derivative<double>(
          [&](std::size_t a) { (void)a; return c.drift_x(j); }, i, g.nx(), g.dx());
      const double dvp = detail::first_derivative<double>(
          [&](std::size_t b) { (void)b; return c.drift_p(i); }, j, g.np(), g.dp());
      worst = std::max(worst, std::abs(dvx + dvp));
    }
  return worst;
}

/// Largest dt accepted by evolve.
inline double stable_step(const OperatorCoeffs& c) {
  const auto& g = c.grid;
  const double vmax = std::max(std::abs(g.p_min()), std::abs(g.p_max())) / c.m;
  double amax = 0.0;
  for (double e : c.E0) amax = std::max(amax, std::abs(c.q * e));
  double bound = std::min(g.dx() * g.dx() / (2.0 * c.d_xx), g.dp() * g.dp() / (2.0 * c.d_pp));
  if (vmax > 0.0) bound = std::min(bound, g.dx() / vmax);
  if (amax > 0.0) bound = std::min(bound, g.dp() / amax);
  return 0.4 * bound;
}

struct Moments {
  double mass;
  double mean_x, mean_p;
  double var_x, var_p, cov_xp;
};

/// Trapezoid moments of the real part of a density field.
inline Moments field_moments(const PhaseField& field) {
  const auto& g = field.grid();
  double m0 = 0, mx = 0, mp = 0, mxx = 0, mpp = 0, mxp = 0;
  for (std::size_t i = 0; i < g.nx(); ++i) {
    const double x = g.x(i);
    for (std::size_t j = 0; j < g.np(); ++j) {
      const double p = g.p(j);
      const double f = g.weight(i, j) * field.at(i, j).real();
      m0 += f;
      mx += f * x;
      mp += f * p;
      mxx += f * x * x;
      mpp += f * p * p;
      mxp += f * x * p;
    }
  }
  const double ex = mx / m0, ep = mp / m0;
  return {m0, ex, ep, mxx / m0 - ex * ex, mpp / m0 - ep * ep, mxp / m0 - ex * ep};
}

namespace detail {

// One explicit step on a real component: centered diffusion plus first-order
// upwind advection. The boundary ring is held at zero.
inline void step(const std::vector<double>& f, std::vector<double>& out, const OperatorCoeffs& c,
                 double dt) {
  const auto& g = c.grid;
  const std::size_t nx = g.nx(), np = g.np();
  const double ax = dt * c.d_xx / (g.dx() * g.dx());
  const double ap = dt * c.d_pp / (g.dp() * g.dp());
  const double bx = dt / g.dx(), bp = dt / g.dp();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 1; i + 1 < nx; ++i) {
    const double a = c.drift_p(i);
    const double a_plus = std::max(a, 0.0), a_minus = std::min(a, 0.0);
    const double* row = f.data() + i * np;
    const double* up = row + np;
    const double* down = row - np;
    double* o = out.data() + i * np;
    for (std::size_t j = 1; j + 1 < np; ++j) {
      const double v = c.drift_x(j);
      const double fc = row[j];
      const double adv_x = v > 0.0 ? v * (fc - down[j]) : v * (up[j] - fc);
      const double adv_p = a_plus * (fc - row[j - 1]) + a_minus * (row[j + 1] - fc);
      o[j] = fc + ax * (up[j] - 2.0 * fc + down[j]) + ap * (row[j + 1] - 2.0 * fc + row[j - 1]) -
             bx * adv_x - bp * adv_p;
    }
  }
}

inline double sum(const std::vector<double>& f) {
  double s = 0.0;
  for (double v : f) s += v;
  return s;
}

}  // namespace detail

/// Time integration of f0 to time T with step dt (shortened so that T is hit
/// exactly).
inline PhaseField evolve(const PhaseField& f0, const OperatorCoeffs& c, double dt, double T) {
  const auto& g = f0.grid();
  if (!(g == c.grid)) fail(ErrorCode::GridMismatch, "field and operator grids differ");
  if (!(dt > 0.0)) fail(ErrorCode::NonPositiveStep, "dt must be > 0", "dt");
  if (!(T >= 0.0)) fail(ErrorCode::NegativeTime, "T must be >= 0", "T");
  if (dt > stable_step(c) * (1.0 + 1e-12))
    fail(ErrorCode::UnstableStep, "dt exceeds the explicit stability bound", "dt");
  const std::size_t steps = T == 0.0 ? 0 : static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  const double h = steps == 0 ? 0.0 : T / static_cast<double>(steps);

  std::vector<double> re(g.size()), im(g.size());
  bool has_im = false;
  for (std::size_t k = 0; k < g.size(); ++k) {
    re[k] = f0.values()[k].real();
    im[k] = f0.values()[k].imag();
    has_im = has_im || im[k] != 0.0;
  }
  // Mass is tracked on the zero-ring sums (equal to the trapezoid integral).
  const double mass0 = std::abs(detail::sum(re)) + std::abs(detail::sum(im));
  std::vector<double> tmp(g.size());
  auto advance = [&](std::vector<double>& f) {
    detail::step(f, tmp, c, h);
    f.swap(tmp);
  };
  for (std::size_t n = 0; n < steps; ++n) {
    advance(re);
    if (has_im) advance(im);
    if (mass0 > 0.0 && (n % 16 == 15 || n + 1 == steps)) {
      const double mass = std::abs(detail::sum(re)) + std::abs(detail::sum(im));
      if (std::abs(mass0 - mass) > 1e-4 * mass0)
        fail(ErrorCode::MassLeak, "boundary flux exceeds 1e-4 of the initial mass");
    }
  }
  std::vector<complex> out(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) out[k] = complex(re[k], im[k]);
  return PhaseField(g, std::move(out));
}

/// Second derivatives as 1/2 D_ij d_i d_j f and drift as -eps_ij dU/dz_i df/dz_j
/// in z = (x, p), U = p^2/2m + Phi(x).
struct CompactForm {
  PhaseGrid grid;
  std::array<std::array<double, 2>, 2> D;
  std::array<std::array<double, 2>, 2> eps;
  std::vector<double> U;  // one value per grid node
};

inline CompactForm compact_form(const ModelParams& params, const PhaseGrid& grid,
                                const std::vector<double>& Phi) {
  if (Phi.size() != grid.nx()) fail(ErrorCode::GridMismatch, "Phi needs one sample per x node", "Phi");
  const double K = params.K(), m = params.m();
  CompactForm cf{grid,
                 {{{1.0 / (params.lambda() * K * m * m), 0.0}, {0.0, 1.0 / K}}},
                 {{{0.0, -1.0}, {1.0, 0.0}}},
                 std::vector<double>(grid.size())};
  for (std::size_t i = 0; i < grid.nx(); ++i)
    for (std::size_t j = 0; j < grid.np(); ++j)
      cf.U[grid.index(i, j)] = grid.p(j) * grid.p(j) / (2.0 * m) + Phi[i];
  return cf;
}

/// Field E0 = -Phi'(x) / q from the same difference stencil the operators use.
inline std::vector<double> field_from_potential(const ModelParams& params, const PhaseGrid& grid,
                                                const std::vector<double>& Phi) {
  std::vector<double> e(grid.nx());
  for (std::size_t i = 0; i < grid.nx(); ++i)
    e[i] = -detail::first_derivative<double>([&](std::size_t a) { return Phi[a]; }, i, grid.nx(),
                                             grid.dx()) /
           params.q();
  return e;
}

inline PhaseField apply_compact_operator(const PhaseField& field, const CompactForm& cf) {
  const auto& g = field.grid();
  if (!(g == cf.grid)) fail(ErrorCode::GridMismatch, "field and compact-form grids differ");
  std::vector<complex> out(g.size());
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t j = 0; j < g.np(); ++j) {
      const auto d = detail::derivs(field, i, j);
      const std::array<double, 2> dU = {
          detail::first_derivative<double>([&](std::size_t a) { return cf.U[g.index(a, j)]; }, i,
                                           g.nx(), g.dx()),
          detail::first_derivative<double>([&](std::size_t b) { return cf.U[g.index(i, b)]; }, j,
                                           g.np(), g.dp())};
      const std::array<complex, 2> df = {d.fx, d.fp};
      // Mixed terms vanish for the diagonal D.
      complex v = 0.5 * (cf.D[0][0] * d.fxx + cf.D[1][1] * d.fpp);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) v -= cf.eps[a][b] * dU[a] * df[b];
      out[g.index(i, j)] = v;
    }
  return PhaseField(g, std::move(out));
}

/// Coefficient of one derivative slot as c0 + cx x + cp p.
struct Linear {
  double c0 = 0.0, cx = 0.0, cp = 0.0;
  friend bool operator==(const Linear&, const Linear&) = default;
};

enum Slot { f_xx, f_pp, f_xp, f_x, f_p, f_0, kSlots };

inline constexpr std::array<const char*, kSlots> kSlotNames = {"f_xx", "f_pp", "f_xp",
                                                               "f_x",  "f_p",  "f"};

struct WignerMap {
  // Damped-oscillator Wigner equation parameters after substitution.
  double friction = 0.0;
  double coupling = 0.0;
  double time_derivative = 0.0;
  double D_pq = 0.0;
  double D_qq = 0.0;
  double D_pp = 0.0;
  double field_gradient = 0.0;  // D with q D = m omega^2
  std::array<Linear, kSlots> wigner{};
  std::array<Linear, kSlots> model{};
  std::array<bool, kSlots> match{};
  bool all_match() const {
    return std::all_of(match.begin(), match.end(), [](bool b) { return b; });
  }
};

namespace detail {

inline bool ulp_close(double a, double b, int ulps = 4) {
  if (a == b) return true;
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= ulps * std::numeric_limits<double>::epsilon() * scale;
}

}  // namespace detail

/// Substitutes friction = coupling = 0, df/dt = 0, D_pq = 0, D_qq = 1/(2Km^2 lambda),
/// D_pp = 1/(2K) into
///     df/dt = -y/m f_x + m w^2 x f_y + (fr - mu) d(x f)/dx + (fr + mu) d(y f)/dy
///             + D_qq f_xx + D_pp f_yy + 2 D_pq f_xy
/// and compares every slot with the oscillator equation
///     0 = 1/(2K) f_pp + 1/(2Km^2 lambda) f_xx - p/m f_x + q D x f_p.
inline WignerMap wigner_map(const ModelParams& params, double omega) {
  const double K = params.K(), m = params.m(), lam = params.lambda();
  WignerMap w;
  w.D_qq = 1.0 / (2.0 * K * m * m * lam);
  w.D_pp = 1.0 / (2.0 * K);
  w.field_gradient = m * omega * omega / params.q();

  const double fr = w.friction, mu = w.coupling;
  w.wigner[f_xx] = {w.D_qq, 0, 0};
  w.wigner[f_pp] = {w.D_pp, 0, 0};
  w.wigner[f_xp] = {2.0 * w.D_pq, 0, 0};
  w.wigner[f_x] = {0, fr - mu, -1.0 / m};
  w.wigner[f_p] = {0, m * omega * omega, fr + mu};
  w.wigner[f_0] = {(fr - mu) + (fr + mu) - w.time_derivative, 0, 0};

  w.model[f_xx] = {1.0 / (2.0 * K * m * m * lam), 0, 0};
  w.model[f_pp] = {1.0 / (2.0 * K), 0, 0};
  w.model[f_xp] = {0, 0, 0};
  w.model[f_x] = {0, 0, -1.0 / m};
  w.model[f_p] = {0, params.q() * w.field_gradient, 0};
  w.model[f_0] = {0, 0, 0};

  for (int s = 0; s < kSlots; ++s) {
    const auto& a = w.wigner[s];
    const auto& b = w.model[s];
    w.match[s] = detail::ulp_close(a.c0, b.c0) && detail::ulp_close(a.cx, b.cx) &&
                 detail::ulp_close(a.cp, b.cp);
  }
  return w;
}

}  // namespace rfq::solver
