#pragma once

// Stochastic sampling of the diffusion whose forward equation is the
// phase-space convection-diffusion equation:
//     dp = q E0(x) dt + sqrt(1/K) dW1,
//     dx = (p/m) dt + sqrt(1/(lambda K m^2)) dW2.
// The drift (p/m, q E0(x)) is divergence-free, so the Fokker-Planck operator
// of this process is exactly the model operator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "rfq/model.hpp"

namespace rfq::mc {

struct State {
  double x;
  double p;
};

struct SampleOptions {
  std::size_t stride = 1;   // record every stride-th step
  double sigma_x0 = 0.0;    // optional Gaussian spread of the start
  double sigma_p0 = 0.0;
  unsigned threads = 0;     // 0: hardware concurrency
};

class TrajectoryEnsemble {
 public:
  TrajectoryEnsemble(std::size_t n_paths, double dt, std::size_t n_steps, std::size_t stride,
                     std::uint64_t seed)
      : n_paths_(n_paths),
        dt_(dt),
        n_steps_(n_steps),
        stride_(stride),
        seed_(seed),
        n_records_(n_steps / stride + 1),
        states_(n_paths * n_records_) {}

  std::size_t n_paths() const noexcept { return n_paths_; }
  double dt() const noexcept { return dt_; }
  std::size_t n_steps() const noexcept { return n_steps_; }
  std::size_t stride() const noexcept { return stride_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t n_records() const noexcept { return n_records_; }
  double time(std::size_t t_index) const noexcept {
    return static_cast<double>(t_index * stride_) * dt_;
  }

  const State& at(std::size_t path, std::size_t t_index) const {
    return states_[path * n_records_ + t_index];
  }
  State& at(std::size_t path, std::size_t t_index) { return states_[path * n_records_ + t_index]; }

  friend bool operator==(const TrajectoryEnsemble& a, const TrajectoryEnsemble& b) {
    if (a.n_paths_ != b.n_paths_ || a.n_records_ != b.n_records_ || a.dt_ != b.dt_) return false;
    for (std::size_t k = 0; k < a.states_.size(); ++k)
      if (a.states_[k].x != b.states_[k].x || a.states_[k].p != b.states_[k].p) return false;
    return true;
  }

 private:
  std::size_t n_paths_;
  double dt_;
  std::size_t n_steps_;
  std::size_t stride_;
  std::uint64_t seed_;
  std::size_t n_records_;
  std::vector<State> states_;
};

/// Generator for path `id`; independent of scheduling.
inline std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32)};
  return std::mt19937_64(seq);
}

/// Euler-Maruyama paths; T is reached in ceil(T/dt) equal steps.
inline TrajectoryEnsemble sample_paths(const ModelParams& params,
                                       const std::function<double(double)>& E0, double x0,
                                       double p0, double dt, double T, std::size_t n_paths,
                                       std::uint64_t seed, const SampleOptions& opt = {}) {
  if (!(dt > 0.0)) fail(ErrorCode::NonPositiveStep, "dt must be > 0", "dt");
  if (!(T >= 0.0)) fail(ErrorCode::NegativeTime, "T must be >= 0", "T");
  if (n_paths < 1) fail(ErrorCode::InvalidArgument, "n_paths must be >= 1", "n_paths");
  if (opt.stride < 1) fail(ErrorCode::InvalidArgument, "stride must be >= 1", "stride");
  const std::size_t steps = T == 0.0 ? 0 : static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  const double h = steps == 0 ? dt : T / static_cast<double>(steps);
  TrajectoryEnsemble ens(n_paths, h, steps, opt.stride, seed);

  const double K = params.K(), m = params.m(), q = params.q();
  const double sp = std::sqrt(h / K);
  const double sx = std::sqrt(h / (params.lambda() * K * m * m));

  auto run = [&](std::size_t begin, std::size_t end) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t k = begin; k < end; ++k) {
      auto eng = path_engine(seed, k);
      normal.reset();
      double x = x0, p = p0;
      if (opt.sigma_x0 > 0.0) x += opt.sigma_x0 * normal(eng);
      if (opt.sigma_p0 > 0.0) p += opt.sigma_p0 * normal(eng);
      ens.at(k, 0) = {x, p};
      for (std::size_t n = 1; n <= steps; ++n) {
        const double xi1 = normal(eng), xi2 = normal(eng);
        const double pn = p + q * E0(x) * h + sp * xi1;
        x = x + (p / m) * h + sx * xi2;
        p = pn;
        if (n % opt.stride == 0) ens.at(k, n / opt.stride) = {x, p};
      }
    }
  };

  unsigned workers = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_paths));
  if (workers <= 1) {
    run(0, n_paths);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n_paths + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t b = w * chunk, e = std::min(n_paths, b + chunk);
      if (b < e) pool.emplace_back(run, b, e);
    }
    for (auto& t : pool) t.join();
  }
  return ens;
}

struct InitialCovariance {
  double var_x = 0.0;
  double var_p = 0.0;
  double cov_xp = 0.0;
};

struct GaussianMoments {
  double var_p;
  double cov_xp;
  double var_x;
};

/// Covariance of the E0 = 0 process at time t from the given initial covariance.
inline GaussianMoments free_gaussian_moments(const ModelParams& params, double t,
                                             const InitialCovariance& init = {}) {
  if (!(t >= 0.0)) fail(ErrorCode::NegativeTime, "t must be >= 0", "t");
  const double K = params.K(), m = params.m(), lam = params.lambda();
  const double v0 = init.var_p, c0 = init.cov_xp;
  return {v0 + t / K, c0 + v0 * t / m + t * t / (2.0 * K * m),
          init.var_x + 2.0 * c0 * t / m + v0 * t * t / (m * m) + t / (lam * K * m * m) +
              t * t * t / (3.0 * K * m * m)};
}

/// d<p^2/2m + q D x^2/2>/dt for E0 = -D x.
inline double harmonic_energy_slope(const ModelParams& params, double D) {
  const double K = params.K(), m = params.m();
  return 1.0 / (2.0 * m * K) + D * params.q() / (2.0 * params.lambda() * K * m * m);
}

struct EnsembleMoments {
  double mean_x, mean_p;
  double var_x, var_p, cov_xp;
  double se_var_x, se_var_p, se_cov_xp;
  double mean_energy, se_energy;  // only filled by ensemble_energy
  bool se_defined;
};

namespace detail {

template <class Fn>
double pairwise_sum(std::size_t begin, std::size_t end, Fn&& f) {
  if (end - begin <= 16) {
    double s = 0.0;
    for (std::size_t k = begin; k < end; ++k) s += f(k);
    return s;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  return pairwise_sum(begin, mid, f) + pairwise_sum(mid, end, f);
}

}  // namespace detail

inline EnsembleMoments ensemble_moments(const TrajectoryEnsemble& ens, std::size_t t_index) {
  if (t_index >= ens.n_records())
    fail(ErrorCode::IndexOutOfRange, "t_index beyond recorded series", "t_index");
  const std::size_t n = ens.n_paths();
  const double nd = static_cast<double>(n);
  auto X = [&](std::size_t k) { return ens.at(k, t_index).x; };
  auto P = [&](std::size_t k) { return ens.at(k, t_index).p; };
  const double mx = detail::pairwise_sum(0, n, X) / nd;
  const double mp = detail::pairwise_sum(0, n, P) / nd;
  auto central = [&](auto&& g) { return detail::pairwise_sum(0, n, g); };
  const double sxx = central([&](std::size_t k) { const double d = X(k) - mx; return d * d; });
  const double spp = central([&](std::size_t k) { const double d = P(k) - mp; return d * d; });
  const double sxp = central([&](std::size_t k) { return (X(k) - mx) * (P(k) - mp); });
  EnsembleMoments out{};
  out.mean_x = mx;
  out.mean_p = mp;
  out.se_defined = n > 1;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (n == 1) {
    out.se_var_x = out.se_var_p = out.se_cov_xp = out.se_energy = nan;
    return out;
  }
  out.var_x = sxx / (nd - 1.0);
  out.var_p = spp / (nd - 1.0);
  out.cov_xp = sxp / (nd - 1.0);
  const double m4x = central([&](std::size_t k) { const double d = X(k) - mx; return d * d * d * d; }) / nd;
  const double m4p = central([&](std::size_t k) { const double d = P(k) - mp; return d * d * d * d; }) / nd;
  const double m22 = central([&](std::size_t k) {
                       const double d = (X(k) - mx) * (P(k) - mp);
                       return d * d;
                     }) / nd;
  out.se_var_x = std::sqrt(std::max(0.0, m4x - out.var_x * out.var_x) / nd);
  out.se_var_p = std::sqrt(std::max(0.0, m4p - out.var_p * out.var_p) / nd);
  out.se_cov_xp = std::sqrt(std::max(0.0, m22 - out.cov_xp * out.cov_xp) / nd);
  out.se_energy = nan;
  return out;
}

/// Ensemble mean of p^2/2m + q D x^2/2 with its standard error.
inline EnsembleMoments ensemble_energy(const TrajectoryEnsemble& ens, std::size_t t_index,
                                       const ModelParams& params, double D) {
  auto out = ensemble_moments(ens, t_index);
  const std::size_t n = ens.n_paths();
  const double nd = static_cast<double>(n);
  auto H = [&](std::size_t k) {
    const auto& s = ens.at(k, t_index);
    return s.p * s.p / (2.0 * params.m()) + 0.5 * params.q() * D * s.x * s.x;
  };
  const double mean = detail::pairwise_sum(0, n, H) / nd;
  out.mean_energy = mean;
  if (n > 1) {
    const double var = detail::pairwise_sum(0, n, [&](std::size_t k) {
                         const double d = H(k) - mean;
                         return d * d;
                       }) / (nd - 1.0);
    out.se_energy = std::sqrt(var / nd);
  }
  return out;
}

/// Positions of one path at spacing dt.
struct Path {
  double dt;
  std::vector<double> x;
};

inline Path extract_path(const TrajectoryEnsemble& ens, std::size_t k) {
  Path p{ens.dt() * static_cast<double>(ens.stride()), {}};
  for (std::size_t t = 0; t < ens.n_records(); ++t) p.x.push_back(ens.at(k, t).x);
  return p;
}

/// (K/2) \int (m x'' - q E0(x))^2 dt, with x'' by central second differences
/// (end values copied from the nearest interior point) and trapezoid weights.
inline double path_weight_exponent(const Path& path, const std::function<double(double)>& E0,
                                   const ModelParams& params) {
  const std::size_t n = path.x.size();
  if (n < 3) fail(ErrorCode::PathTooShort, "path needs at least 3 points", "path");
  if (!(path.dt > 0.0)) fail(ErrorCode::NonPositiveStep, "dt must be > 0", "dt");
  const double h = path.dt;
  std::vector<double> acc(n);
  for (std::size_t i = 1; i + 1 < n; ++i)
    acc[i] = (path.x[i + 1] - 2.0 * path.x[i] + path.x[i - 1]) / (h * h);
  acc[0] = acc[1];
  acc[n - 1] = acc[n - 2];
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = params.m() * acc[i] - params.q() * E0(path.x[i]);
    const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    sum += w * r * r;
  }
  return 0.5 * params.K() * sum * h;
}

}  // namespace rfq::mc
