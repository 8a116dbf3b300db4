#pragma once

// Shared physical parameters, phase-space grids and spectral coefficient
// containers. Everything here is immutable after construction.
//
// Units are SI throughout:
//   K       s^3/(kg^2 m^2)   inverse noise strength of the random field
//   lambda  1/s^2            auxiliary on-shell penalty weight
//   m       kg
//   q       C
//   hbar    J s              derived, 1/(2 K m lambda)

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "rfq/error.hpp"

namespace rfq {

using complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

/// Real cube root extended as an odd function, so cbrt_odd(-x) == -cbrt_odd(x).
inline double cbrt_odd(double x) { return std::cbrt(x); }

class ModelParams {
 public:
  double K() const noexcept { return K_; }
  double lambda() const noexcept { return lambda_; }
  double m() const noexcept { return m_; }
  double q() const noexcept { return q_; }

  /// Effective action constant 1/(2 K m lambda), recomputed on every call.
  double hbar_eff() const noexcept { return 1.0 / (2.0 * K_ * m_ * lambda_); }

  friend ModelParams make_params(double K, double lambda, double m, double q);

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  ModelParams(double K, double lambda, double m, double q)
      : K_(K), lambda_(lambda), m_(m), q_(q) {}

  double K_;
  double lambda_;
  double m_;
  double q_;
};

inline ModelParams make_params(double K, double lambda, double m, double q) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      fail(ErrorCode::NonPositiveParameter, std::string(name) + " must be finite and > 0", name);
  };
  positive(K, "K");
  positive(lambda, "lambda");
  positive(m, "m");
  if (!(q != 0.0) || !std::isfinite(q))
    fail(ErrorCode::NonPositiveParameter, "q must be finite and nonzero", "q");
  return ModelParams(K, lambda, m, q);
}

/// Uniform rectangular grid over (x, p). Node (i, j) sits at x(i), p(j) and is
/// stored at index i * np + j.
class PhaseGrid {
 public:
  PhaseGrid(double x_min, double x_max, std::size_t nx, double p_min, double p_max,
            std::size_t np)
      : x_min_(x_min), x_max_(x_max), p_min_(p_min), p_max_(p_max), nx_(nx), np_(np) {
    if (!(x_min < x_max)) fail(ErrorCode::InvalidArgument, "x_min must be < x_max", "x");
    if (!(p_min < p_max)) fail(ErrorCode::InvalidArgument, "p_min must be < p_max", "p");
    if (nx < 8) fail(ErrorCode::InvalidArgument, "nx must be >= 8", "nx");
    if (np < 8) fail(ErrorCode::InvalidArgument, "np must be >= 8", "np");
  }

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  double p_min() const noexcept { return p_min_; }
  double p_max() const noexcept { return p_max_; }
  std::size_t nx() const noexcept { return nx_; }
  std::size_t np() const noexcept { return np_; }
  std::size_t size() const noexcept { return nx_ * np_; }

  double dx() const noexcept { return (x_max_ - x_min_) / static_cast<double>(nx_ - 1); }
  double dp() const noexcept { return (p_max_ - p_min_) / static_cast<double>(np_ - 1); }

  double x(std::size_t i) const noexcept {
    return i + 1 == nx_ ? x_max_ : x_min_ + static_cast<double>(i) * dx();
  }
  double p(std::size_t j) const noexcept {
    return j + 1 == np_ ? p_max_ : p_min_ + static_cast<double>(j) * dp();
  }

  std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * np_ + j; }

  /// Node index whose x lies within 1e-9 dx of `x`, or nx() if none.
  std::size_t find_x(double x) const noexcept {
    const double s = (x - x_min_) / dx();
    const double r = std::round(s);
    if (r < 0.0 || r > static_cast<double>(nx_ - 1) || std::abs(s - r) > 1e-9) return nx_;
    return static_cast<std::size_t>(r);
  }

  /// Trapezoid weight of node (i, j) for integrals over the rectangle.
  double weight(std::size_t i, std::size_t j) const noexcept {
    const double wx = (i == 0 || i + 1 == nx_) ? 0.5 : 1.0;
    const double wp = (j == 0 || j + 1 == np_) ? 0.5 : 1.0;
    return wx * wp * dx() * dp();
  }

  friend bool operator==(const PhaseGrid&, const PhaseGrid&) = default;

 private:
  double x_min_, x_max_, p_min_, p_max_;
  std::size_t nx_, np_;
};

enum class FieldKind { real, complex };

class PhaseField {
 public:
  static constexpr double kRealTolerance = 1e-10;

  PhaseField(PhaseGrid grid, std::vector<complex> values)
      : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
      fail(ErrorCode::GridMismatch, "value count does not match grid size");
    double max_mod = 0.0, max_im = 0.0;
    for (const auto& v : values_) {
      max_mod = std::max(max_mod, std::abs(v));
      max_im = std::max(max_im, std::abs(v.imag()));
    }
    kind_ = max_im <= kRealTolerance * max_mod ? FieldKind::real : FieldKind::complex;
  }

  static PhaseField zeros(const PhaseGrid& grid) {
    return PhaseField(grid, std::vector<complex>(grid.size()));
  }

  const PhaseGrid& grid() const noexcept { return grid_; }
  FieldKind kind() const noexcept { return kind_; }
  std::span<const complex> values() const noexcept { return values_; }
  const complex& at(std::size_t i, std::size_t j) const { return values_[grid_.index(i, j)]; }

  double max_modulus() const noexcept {
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Trapezoid integral over the whole grid.
  complex integral() const noexcept {
    complex s{};
    for (std::size_t i = 0; i < grid_.nx(); ++i)
      for (std::size_t j = 0; j < grid_.np(); ++j) s += grid_.weight(i, j) * at(i, j);
    return s;
  }

 private:
  PhaseGrid grid_;
  std::vector<complex> values_;
  FieldKind kind_;
};

/// Trapezoid weights for an ascending (possibly nonuniform) abscissa.
inline std::vector<double> trapezoid_weights(std::span<const double> xs) {
  std::vector<double> w(xs.size(), 0.0);
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    const double h = xs[k + 1] - xs[k];
    w[k] += 0.5 * h;
    w[k + 1] += 0.5 * h;
  }
  return w;
}

enum class Interpolation { linear, cubic };

/// Sampled spectral weight C(beta), zero outside the sampled support.
class CoefficientFunction {
 public:
  CoefficientFunction(std::vector<double> beta, std::vector<complex> c,
                      Interpolation interp = Interpolation::cubic)
      : beta_(std::move(beta)), c_(std::move(c)), interp_(interp) {
    if (beta_.size() != c_.size())
      fail(ErrorCode::InvalidArgument, "beta and C sample counts differ");
    for (std::size_t k = 0; k + 1 < beta_.size(); ++k)
      if (!(beta_[k] < beta_[k + 1]))
        fail(ErrorCode::InvalidArgument, "beta samples must be strictly ascending");
    if (interp_ == Interpolation::cubic && beta_.size() >= 3) build_spline();
  }

  template <class Fn>
  static CoefficientFunction sample(std::span<const double> beta, Fn&& fn,
                                    Interpolation interp = Interpolation::cubic) {
    std::vector<complex> c;
    c.reserve(beta.size());
    for (double b : beta) c.push_back(complex(fn(b)));
    return CoefficientFunction(std::vector<double>(beta.begin(), beta.end()), std::move(c),
                               interp);
  }

  std::span<const double> beta() const noexcept { return beta_; }
  std::span<const complex> values() const noexcept { return c_; }
  std::size_t size() const noexcept { return beta_.size(); }
  bool empty() const noexcept { return beta_.empty(); }
  Interpolation interpolation() const noexcept { return interp_; }

  complex operator()(double b) const {
    if (beta_.empty() || b < beta_.front() || b > beta_.back()) return {};
    if (beta_.size() == 1) return c_.front();
    auto it = std::upper_bound(beta_.begin(), beta_.end(), b);
    std::size_t k = it == beta_.end() ? beta_.size() - 2
                                      : static_cast<std::size_t>(it - beta_.begin()) - 1;
    const double h = beta_[k + 1] - beta_[k];
    const double t = (b - beta_[k]) / h;
    if (second_.empty()) return (1.0 - t) * c_[k] + t * c_[k + 1];
    const double a = 1.0 - t;
    return a * c_[k] + t * c_[k + 1] +
           ((a * a * a - a) * second_[k] + (t * t * t - t) * second_[k + 1]) * (h * h / 6.0);
  }

  /// C(-beta) == conj(C(beta)) at every mirrored pair of samples, plus a real
  /// value at beta = 0 when sampled.
  bool is_hermitian(double tol = 1e-12) const {
    double scale = 0.0;
    for (const auto& v : c_) scale = std::max(scale, std::abs(v));
    const double bound = tol * std::max(scale, 1e-300);
    for (std::size_t k = 0, n = beta_.size(); k < n; ++k) {
      const std::size_t mirror = n - 1 - k;
      if (std::abs(beta_[k] + beta_[mirror]) > 1e-12 * std::max(1.0, std::abs(beta_[k])))
        return false;
      if (std::abs(c_[k] - std::conj(c_[mirror])) > bound) return false;
    }
    return true;
  }

 private:
  // Natural cubic spline second derivatives (Thomas algorithm).
  void build_spline() {
    const std::size_t n = beta_.size();
    second_.assign(n, complex{});
    std::vector<double> diag(n, 1.0), upper(n, 0.0);
    std::vector<complex> rhs(n);
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const double h0 = beta_[k] - beta_[k - 1];
      const double h1 = beta_[k + 1] - beta_[k];
      const double lower = h0 / 6.0;
      diag[k] = (h0 + h1) / 3.0;
      upper[k] = h1 / 6.0;
      rhs[k] = (c_[k + 1] - c_[k]) / h1 - (c_[k] - c_[k - 1]) / h0;
      const double w = lower / diag[k - 1];
      diag[k] -= w * upper[k - 1];
      rhs[k] -= w * rhs[k - 1];
    }
    for (std::size_t k = n - 1; k-- > 1;) second_[k] = (rhs[k] - upper[k] * second_[k + 1]) / diag[k];
  }

  std::vector<double> beta_;
  std::vector<complex> c_;
  Interpolation interp_;
  std::vector<complex> second_;
};

/// Mirrors a half-line coefficient function onto beta < 0 with conjugated
/// values. Inputs that already carry negative samples are accepted only if
/// those samples agree with the mirror, which makes the operation idempotent.
inline CoefficientFunction hermitian_extend(const CoefficientFunction& half, double tol = 1e-12) {
  if (half.empty()) fail(ErrorCode::EmptyInput, "no coefficient samples");
  const auto beta = half.beta();
  const auto c = half.values();
  std::vector<double> nb;
  std::vector<complex> nc;
  std::size_t first = 0;
  while (first < beta.size() && beta[first] < 0.0) ++first;
  if (first == beta.size()) fail(ErrorCode::EmptyInput, "no samples at beta >= 0");
  for (std::size_t k = beta.size(); k-- > first;) {
    if (beta[k] == 0.0) continue;
    nb.push_back(-beta[k]);
    nc.push_back(std::conj(c[k]));
  }
  for (std::size_t k = first; k < beta.size(); ++k) {
    if (beta[k] == 0.0 && std::abs(c[k].imag()) > tol * std::max(1.0, std::abs(c[k])))
      fail(ErrorCode::InvalidArgument, "C(0) must be real for a Hermitian extension", "beta=0");
    nb.push_back(beta[k]);
    nc.push_back(c[k]);
  }
  CoefficientFunction out(std::move(nb), std::move(nc), half.interpolation());
  if (first > 0) {
    // Existing negative half must match the mirror exactly in position and value.
    bool same = out.size() == half.size();
    for (std::size_t k = 0; same && k < first; ++k)
      same = std::abs(out.beta()[k] - beta[k]) <= tol * std::max(1.0, std::abs(beta[k])) &&
             std::abs(out.values()[k] - c[k]) <= tol * std::max(1.0, std::abs(c[k]));
    if (!same)
      fail(ErrorCode::InvalidArgument, "negative-beta samples contradict the Hermitian mirror");
  }
  return out;
}

/// Discrete spectral weights c_n for n in [-n_trunc, n_trunc] attached to the
/// quantized wavenumbers n*pi/a of a well of half-width a.
class ModeCoefficients {
 public:
  ModeCoefficients(double a, int n_trunc, std::vector<complex> c)
      : a_(a), n_trunc_(n_trunc), c_(std::move(c)) {
    if (!(a > 0.0)) fail(ErrorCode::NonPositiveWidth, "well half-width must be > 0", "a");
    if (n_trunc < 1) fail(ErrorCode::InvalidArgument, "n_trunc must be >= 1", "n_trunc");
    if (c_.size() != static_cast<std::size_t>(2 * n_trunc + 1))
      fail(ErrorCode::InvalidArgument, "expected 2*n_trunc+1 coefficients");
  }

  static ModeCoefficients zeros(double a, int n_trunc) {
    return ModeCoefficients(a, n_trunc, std::vector<complex>(2 * n_trunc + 1));
  }

  double a() const noexcept { return a_; }
  int n_trunc() const noexcept { return n_trunc_; }

  complex operator[](int n) const {
    if (n < -n_trunc_ || n > n_trunc_) return {};
    return c_[static_cast<std::size_t>(n + n_trunc_)];
  }

  ModeCoefficients with(int n, complex value) const {
    if (n < -n_trunc_ || n > n_trunc_)
      fail(ErrorCode::IndexOutOfRange, "mode index outside truncation");
    auto copy = *this;
    copy.c_[static_cast<std::size_t>(n + n_trunc_)] = value;
    return copy;
  }

  ModeCoefficients scaled(complex factor) const {
    auto copy = *this;
    for (auto& v : copy.c_) v *= factor;
    return copy;
  }

  bool is_hermitian(double tol = 1e-12) const {
    for (int n = 0; n <= n_trunc_; ++n)
      if (std::abs((*this)[-n] - std::conj((*this)[n])) > tol * std::max(1.0, std::abs((*this)[n])))
        return false;
    return true;
  }

 private:
  double a_;
  int n_trunc_;
  std::vector<complex> c_;
};

}  // namespace rfq
