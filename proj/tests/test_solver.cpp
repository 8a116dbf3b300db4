#include <gtest/gtest.h>

#include "rfq/builders.hpp"
#include "rfq/phase_solver.hpp"

using namespace rfq;
using namespace rfq::solver;

namespace {

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

std::vector<double> harmonic_potential(const PhaseGrid& g, double Dq) {
  std::vector<double> phi(g.nx());
  for (std::size_t i = 0; i < g.nx(); ++i) phi[i] = 0.5 * Dq * g.x(i) * g.x(i);
  return phi;
}

PhaseField sample(const PhaseGrid& g, const std::function<complex(double, double)>& f) {
  std::vector<complex> v(g.size());
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t j = 0; j < g.np(); ++j) v[g.index(i, j)] = f(g.x(i), g.p(j));
  return PhaseField(g, std::move(v));
}

}  // namespace

TEST(Stationary, ConstantFieldIsAnnihilated) {
  const auto params = make_params(1.3, 0.7, 1.1, 1);
  const PhaseGrid g(-2, 2, 21, -3, 3, 25);
  const auto op = make_operator(params, g, [](double x) { return -2 * x + 0.5; });
  const auto r = apply_stationary_operator(sample(g, [](double, double) { return complex(3, -1); }), op);
  EXPECT_LT(r.max_modulus(), 1e-11);
}

TEST(Stationary, GaussianAtOrigin) {
  const auto params = make_params(0.8, 1.5, 1.2, 1);
  const PhaseGrid g(-1, 1, 401, -1, 1, 401);
  const auto op = make_operator(params, g, [](double x) { return -0.7 * x; });
  const auto r = apply_stationary_operator(
      sample(g, [](double x, double p) { return std::exp(-x * x - p * p); }), op);
  const complex at0 = r.at(200, 200);
  EXPECT_NEAR(at0.real(), -2 * op.d_pp - 2 * op.d_xx, 1e-4);
  EXPECT_DOUBLE_EQ(op.d_pp, 1 / (2 * 0.8));
  EXPECT_DOUBLE_EQ(op.d_xx, 1 / (2 * 1.5 * 0.8 * 1.2 * 1.2));
}

TEST(Stationary, EdgeStencilsAreThirdOrder) {
  // cubic data: one-sided stencils must be exact
  const auto params = make_params(1, 1, 1, 1);
  const PhaseGrid g(0, 1, 11, 0, 1, 11);
  const auto op = make_operator(params, g, [](double) { return 0.0; });
  const auto f = sample(g, [](double x, double p) { return x * x * x + p * p * p; });
  const auto r = apply_stationary_operator(f, op);
  for (std::size_t j = 0; j < g.np(); ++j) {
    const double x = 0, p = g.p(j);
    const double expect = op.d_pp * 6 * p + op.d_xx * 6 * x - p * 3 * x * x;
    EXPECT_NEAR(r.at(0, j).real(), expect, 1e-10);
  }
}

TEST(Stationary, GridMismatch) {
  const auto params = make_params(1, 1, 1, 1);
  const auto op = make_operator(params, PhaseGrid(-1, 1, 9, -1, 1, 9), [](double) { return 0.0; });
  EXPECT_EQ(code_of([&] { apply_stationary_operator(PhaseField::zeros(PhaseGrid(-1, 1, 10, -1, 1, 9)), op); }),
            ErrorCode::GridMismatch);
  EXPECT_EQ(code_of([&] { make_operator(params, PhaseGrid(-1, 1, 9, -1, 1, 9), std::vector<double>(3)); }),
            ErrorCode::GridMismatch);
}

TEST(CompactForm, MatchesOperatorForHarmonicPotential) {
  const auto params = make_params(0.9, 1.4, 1.3, 1.1);
  const PhaseGrid g(-3, 3, 61, -2.5, 2.5, 51);
  const auto phi = harmonic_potential(g, 0.8 * 1.1);
  const auto cf = compact_form(params, g, phi);
  const auto op = make_operator(params, g, field_from_potential(params, g, phi));
  const auto f = sample(g, [](double x, double p) {
    return std::exp(-0.5 * (x - 0.3) * (x - 0.3) - p * p) * complex(1, 0.2 * x);
  });
  const auto a = apply_stationary_operator(f, op);
  const auto b = apply_compact_operator(f, cf);
  double worst = 0;
  for (std::size_t k = 0; k < g.size(); ++k) worst = std::max(worst, std::abs(a.values()[k] - b.values()[k]));
  EXPECT_LE(worst, 1e-10 * a.max_modulus());
  // E0 = -Phi'/q by the shared stencil is exact for the quadratic
  const auto e = field_from_potential(params, g, phi);
  for (std::size_t i = 0; i < g.nx(); ++i) EXPECT_NEAR(e[i], -0.8 * g.x(i), 1e-12);
}

TEST(CompactForm, ZeroPotentialLeavesFreeStreaming) {
  const auto params = make_params(1, 1, 1, 1);
  const PhaseGrid g(-2, 2, 31, -2, 2, 31);
  const auto cf = compact_form(params, g, std::vector<double>(g.nx(), 0.0));
  const auto op = make_operator(params, g, [](double) { return 0.0; });
  const auto f = sample(g, [](double x, double p) { return std::exp(-x * x - 0.5 * p * p + x * p / 3); });
  const auto a = apply_stationary_operator(f, op);
  const auto b = apply_compact_operator(f, cf);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(std::abs(a.values()[k] - b.values()[k]), 0, 1e-12);
}

TEST(CompactForm, EpsilonSquaresToMinusIdentity) {
  const auto cf = compact_form(make_params(1, 1, 1, 1), PhaseGrid(-1, 1, 9, -1, 1, 9), std::vector<double>(9));
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double s = 0;
      for (int c = 0; c < 2; ++c) s += cf.eps[a][c] * cf.eps[c][b];
      EXPECT_EQ(s, a == b ? -1.0 : 0.0);
    }
  EXPECT_DOUBLE_EQ(cf.D[0][0], 1.0);
  EXPECT_DOUBLE_EQ(cf.D[1][1], 1.0);
}

TEST(Drift, DivergenceFree) {
  const auto params = make_params(1, 1, 1, 1);
  const PhaseGrid g(-2, 2, 21, -2, 2, 21);
  EXPECT_LT(drift_divergence(make_operator(params, g, [](double x) { return -3 * x; })), 1e-12);
  EXPECT_LT(drift_divergence(make_operator(params, g, [](double x) { return std::sin(x); })), 1e-12);
}

TEST(Moments, GaussianField) {
  const PhaseGrid g(-10, 10, 201, -8, 8, 161);
  const auto m = field_moments(gaussian_field(g, 0.5, -0.25, 1.2, 0.7));
  EXPECT_NEAR(m.mass, 1, 1e-9);
  EXPECT_NEAR(m.mean_x, 0.5, 1e-9);
  EXPECT_NEAR(m.mean_p, -0.25, 1e-9);
  EXPECT_NEAR(m.var_x, 1.44, 1e-8);
  EXPECT_NEAR(m.var_p, 0.49, 1e-8);
  EXPECT_NEAR(m.cov_xp, 0, 1e-12);
}

TEST(Evolve, MomentumVarianceGrowsLinearly) {
  const auto params = make_params(0.8, 1, 1, 1);
  const PhaseGrid g(-8, 8, 161, -6, 6, 121);
  const auto op = make_operator(params, g, [](double) { return 0.0; });
  const auto f0 = gaussian_field(g, 0, 0, 0.5, 0.5);
  const double T = 0.5;
  const auto f = evolve(f0, op, 0.9 * stable_step(op), T);
  const auto m0 = field_moments(f0), m = field_moments(f);
  EXPECT_NEAR(m.var_p - m0.var_p, T / params.K(), 1e-3 * T / params.K());
  EXPECT_NEAR(m.mass, 1, 1e-6);
  EXPECT_EQ(f.kind(), FieldKind::real);
}

TEST(Evolve, EdgeCases) {
  const auto params = make_params(1, 1, 1, 1);
  const PhaseGrid g(-4, 4, 41, -4, 4, 41);
  const auto op = make_operator(params, g, [](double) { return 0.0; });
  const double dt = stable_step(op);
  const auto zero = evolve(PhaseField::zeros(g), op, dt, 0.3);
  EXPECT_EQ(zero.max_modulus(), 0);
  const auto f0 = gaussian_field(g, 0, 0, 0.6, 0.6);
  const auto same = evolve(f0, op, dt, 0);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(same.values()[k], f0.values()[k]);
  EXPECT_EQ(code_of([&] { evolve(f0, op, 1.01 * dt, 0.1); }), ErrorCode::UnstableStep);
  EXPECT_EQ(code_of([&] { evolve(f0, op, 0, 0.1); }), ErrorCode::NonPositiveStep);
  EXPECT_EQ(code_of([&] { evolve(f0, op, dt, -1); }), ErrorCode::NegativeTime);
}

TEST(Evolve, ComplexFieldEvolvesComponentwise) {
  const auto params = make_params(1, 1, 1, 1);
  const PhaseGrid g(-4, 4, 41, -4, 4, 41);
  const auto op = make_operator(params, g, [](double x) { return -x; });
  const auto f0 = gaussian_field(g, 0, 0, 0.6, 0.6);
  std::vector<complex> v(f0.values().begin(), f0.values().end());
  for (auto& x : v) x *= complex(0.6, -0.8);
  const double dt = 0.5 * stable_step(op);
  const auto a = evolve(f0, op, dt, 0.2), b = evolve(PhaseField(g, v), op, dt, 0.2);
  for (std::size_t k = 0; k < g.size(); ++k)
    EXPECT_NEAR(std::abs(b.values()[k] - a.values()[k] * complex(0.6, -0.8)), 0, 1e-14);
}

TEST(Evolve, BoundaryFluxIsReported) {
  const auto params = make_params(1, 1, 1, 1);
  const PhaseGrid g(-2, 2, 41, -2, 2, 41);
  const auto op = make_operator(params, g, [](double) { return 0.0; });
  const auto f0 = gaussian_field(g, 1.6, 0, 0.3, 0.3);
  EXPECT_EQ(code_of([&] { evolve(f0, op, stable_step(op), 1.0); }), ErrorCode::MassLeak);
}

TEST(Wigner, DiffusionCoefficients) {
  EXPECT_DOUBLE_EQ(wigner_map(make_params(1, 2, 3, 1), 1).D_pp, 0.5);
  EXPECT_DOUBLE_EQ(wigner_map(make_params(1, 1, 1, 1), 1).D_qq, 0.5);
}

TEST(Wigner, AllSlotsMatch) {
  for (auto p : {make_params(1, 1, 1, 1), make_params(0.3, 2.2, 1.7, -0.4)}) {
    const auto w = wigner_map(p, 1.3);
    EXPECT_TRUE(w.all_match());
    EXPECT_NEAR(p.q() * w.field_gradient, p.m() * 1.3 * 1.3, 1e-14);
  }
}
