// acceptance [N]: runs criterion N (1-9), or all of them, printing one
// PASS/FAIL line each. Exit status is nonzero if any selected criterion fails.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rfq/airy.hpp"
#include "rfq/builders.hpp"
#include "rfq/free_particle.hpp"
#include "rfq/infinite_well.hpp"
#include "rfq/langevin.hpp"
#include "rfq/oscillator.hpp"
#include "rfq/phase_solver.hpp"

using namespace rfq;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass;
  std::string summary;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// ---------------------------------------------------------------- 1

Verdict airy_identities() {
  constexpr double kTol = 1e-6;
  int passed = 0, total = 0, errors = 0;
  double worst = 0;
  std::string first_error;
  for (double s : {0.5, 1.0, 2.0})
    for (double beta : {0.5, 1.0, 2.0, 4.0}) {
      const auto params = make_params(s, s, s, 1);
      const double N = free::n_beta(params, beta), p0 = free::p0_beta(params, beta);
      const std::function<complex()> evals[] = {
          [&] { return N * airy::ai_norm_integral(params, beta, 2, kTol); },
          [&] { return airy::ai_moment(params, beta, 1, 2, kTol); },
          [&] { return airy::ai_moment(params, beta, 2, 2, kTol); }};
      const double expect[] = {1, p0, p0 * p0};
      for (int k = 0; k < 3; ++k) {
        ++total;
        try {
          const double err = std::abs(evals[k]() - expect[k]);
          worst = std::max(worst, err);
          passed += err <= kTol;
        } catch (const Error& e) {
          ++errors;
          if (first_error.empty()) first_error = std::string(to_string(e.code()));
        }
      }
    }
  std::string s = fmt("%d/%d identities within %.0e", passed, total, kTol);
  if (errors) s += fmt(", %d raised %s (p-integral diverges along the line)", errors, first_error.c_str());
  if (total > errors) s += fmt(", worst converged error %.2e", worst);
  return {passed == total, s};
}

// ---------------------------------------------------------------- 2

Verdict free_stationarity() {
  struct Case {
    double K, lambda, m, sigma;
  };
  const Case cases[] = {{1, 1, 1, 0.4}, {0.7, 0.8, 1.3, 0.5}};
  bool ok = true;
  std::string s;
  for (const auto& c : cases) {
    const auto params = make_params(c.K, c.lambda, c.m, 1);
    const auto coeffs = odd_gaussian_coeffs(3, 121, c.sigma);
    double rel[2];
    for (int level = 0; level < 2; ++level) {
      const std::size_t n = level == 0 ? 128 : 256;
      const PhaseGrid grid(-2, 2, n, -1, 1, n);
      const auto sol = free::assemble_density(coeffs, params, grid);
      const auto op = solver::make_operator(params, grid, std::vector<double>(n, 0.0));
      rel[level] = solver::apply_stationary_operator(sol.field, op).max_modulus() / sol.field.max_modulus();
    }
    const bool pass = rel[0] <= 1e-4 && rel[0] / rel[1] >= 3;
    ok = ok && pass;
    s += fmt("%s(K=%g,m=%g,lambda=%g,sigma=%g) 128^2 %.2e, 256^2 %.2e, ratio %.2f", s.empty() ? "" : "; ", c.K,
             c.m, c.lambda, c.sigma, rel[0], rel[1], rel[0] / rel[1]);
  }
  return {ok, s + " [limit 1e-4, ratio >= 3]"};
}

// ---------------------------------------------------------------- 3

Verdict well_spectrum() {
  double worst_level = 0;
  std::mt19937_64 eng(2024);
  std::uniform_real_distribution<double> u(0.3, 3);
  for (int draw = 0; draw < 5; ++draw) {
    const auto p = make_params(u(eng), u(eng), u(eng), 1);
    const double a = u(eng);
    for (int n = 1; n <= 8; ++n) {
      const double e = well::model_level(p, a, n), q = well::qm_level(p, a, n);
      worst_level = std::max(worst_level, std::abs(e - q) / q);
      worst_level = std::max(worst_level, std::abs(e / well::model_level(p, a, 1) - n * n) / (n * n));
    }
  }
  const auto params = make_params(1, 1, 1, 1);
  const double a = pi;
  const PhaseGrid grid(-a, a, 65, -3, 3, 121);
  double worst_q = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto f = well::well_density(random_hermitian_modes(a, 4, seed), params, grid).field;
    worst_q = std::max(worst_q, well::boundary_residual(f, a) / f.max_modulus());
  }
  const auto control = free::single_mode_field(params, 1.3 * pi / a, 1.0, grid);
  const double ctrl = well::boundary_residual(control, a) / control.max_modulus();
  const bool ok = worst_level <= 1e-12 && worst_q <= 1e-6 && ctrl > 100 * 1e-6;
  return {ok, fmt("level rel_err %.1e (<= 1e-12), quantized boundary %.1e (<= 1e-6), control %.2e (> 1e-4)",
                  worst_level, worst_q, ctrl)};
}

// ---------------------------------------------------------------- 4

Verdict well_energy() {
  const auto params = make_params(1, 1, 1, 1);
  const double a = pi;
  const PhaseGrid grid(-a, a, 65, -3, 3, 121);
  const double Xs[] = {-pi / 4, 0.0, pi / 2};
  double worst = 0;
  int passed = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto modes = random_hermitian_modes(a, 4, seed);
    const auto f = well::well_density(modes, params, grid).field;
    for (double X : Xs) {
      ++total;
      const complex spectral = well::cond_kinetic_energy(modes, params, X);
      const complex direct = well::direct_cond_kinetic_energy(f, params, X);
      const double rel = std::abs(spectral - direct) / std::abs(spectral);
      worst = std::max(worst, rel);
      passed += rel <= 1e-4;
    }
  }
  return {passed == total,
          fmt("%d/%d (set, X) pairs agree to 1e-4, worst relative difference %.2e", passed, total, worst)};
}

// ---------------------------------------------------------------- 5

Verdict osc_solution() {
  bool ok = true;
  std::string s;
  const osc::OscParams cases[] = {osc::make_osc(make_params(1, 1, 1, 1), 1),
                                  osc::make_osc(make_params(0.8, 0.6, 1.4, 1.2), 0.9)};
  for (const auto& o : cases) {
    const auto c = osc::char_pde_residual(o, {0.5, 1.5, -0.5, 0.5, 64});
    const auto f = osc::char_pde_residual(o, {0.5, 1.5, -0.5, 0.5, 127});
    const double rel = c.max_residual / c.max_F, ratio = c.max_residual / f.max_residual;
    ok = ok && rel <= 1e-5 && ratio >= 3;
    s += fmt("residual %.2e ratio %.1f; ", rel, ratio);
  }
  std::mt19937_64 eng(77);
  std::uniform_real_distribution<double> ur(0.05, 2), up(-pi, pi);
  double worst = 0;
  for (int n = 0; n < 100; ++n) {
    const auto& o = cases[n % 2];
    const double r = ur(eng), phi = up(eng);
    const auto d = osc::second_derivatives(r, phi, {}, o);
    const double e = osc::energy_operator(r, phi, {}, o);
    worst = std::max(worst, std::abs(e - (d.F_kk + o.mDq() * d.F_ll) / (2 * o.params().m())) /
                                std::max(1.0, std::abs(e)));
  }
  ok = ok && worst <= 1e-8;
  return {ok, s + fmt("energy vs assembly %.1e at 100 points [limits 1e-5, 3, 1e-8]", worst)};
}

// ---------------------------------------------------------------- 6

Verdict osc_levels() {
  std::mt19937_64 eng(6);
  std::uniform_real_distribution<double> u(0.3, 3);
  double worst = 0;
  for (int draw = 0; draw < 10; ++draw) {
    const auto o = osc::make_osc(make_params(u(eng), u(eng), u(eng), u(eng)), u(eng));
    const double s = osc::qm_limit_spacing(o).spacing;
    for (int n = 0; n < 10; ++n) {
      using osc::Branch;
      const double dk = osc::level_at(n + 1, Branch::k_zero, o) - osc::level_at(n, Branch::k_zero, o);
      const double dl = osc::level_at(n + 1, Branch::l_zero, o) - osc::level_at(n, Branch::l_zero, o);
      const double off = osc::level_at(n, Branch::l_zero, o) - osc::level_at(n, Branch::k_zero, o);
      worst = std::max({worst, std::abs(dk - s) / s, std::abs(dl - s) / s, std::abs(off - s / 2) / s});
    }
  }
  // lambda -> 0 at 2 K m lambda = 1, m = 1, q D = 1: hbar omega pi = pi
  double last = 0;
  bool monotone = true;
  double prev = INFINITY;
  for (double lam : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const auto o = osc::make_osc(make_params(0.5 / lam, lam, 1, 1), 1);
    last = std::abs(osc::qm_limit_spacing(o).spacing - pi) / pi;
    monotone = monotone && last < prev;
    prev = last;
  }
  const bool ok = worst <= 1e-12 && monotone && last <= 1e-7;
  return {ok, fmt("spacing/offset rel_err %.1e over 10 draws (<= 1e-12); lambda=1e-8 gap to hbar*omega*pi %.1e",
                  worst, last)};
}

// ---------------------------------------------------------------- 7

struct MomentRow {
  double var_p, cov_xp, var_x;
};

Verdict duality() {
  const auto params = make_params(0.5, 0.25, 1, 1);
  const double times[] = {0.25, 0.5, 1.0};
  const std::size_t record[] = {1, 2, 4};
  const double sx0 = 0.3, sp0 = 0.15;
  const PhaseGrid grid(-16, 16, 457, -8, 8, 533);
  const std::size_t n_paths = 100000;
  const double dt = 1e-3;

  int passed = 0, total = 0;
  std::string worst_name;
  double worst_ratio = 0;
  auto compare = [&](const char* label, double t, const char* what, double mc, double se, double ref) {
    ++total;
    const double tol = std::max(3 * se, 0.02 * std::abs(ref));
    const double ratio = std::abs(mc - ref) / tol;
    passed += ratio <= 1;
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      worst_name = fmt("%s %s t=%g", label, what, t);
    }
  };

  for (double D : {0.0, 0.25}) {
    const auto E0 = [D](double x) { return -D * x; };
    const auto op = solver::make_operator(params, grid, E0);
    auto f = gaussian_field(grid, 0, 0, sx0, sp0);
    std::vector<solver::Moments> pde;
    double t = 0;
    for (double target : times) {
      f = solver::evolve(f, op, 0.9 * solver::stable_step(op), target - t);
      t = target;
      pde.push_back(solver::field_moments(f));
    }
    mc::SampleOptions opt;
    opt.stride = 250;
    opt.sigma_x0 = sx0;
    opt.sigma_p0 = sp0;
    const auto ens = mc::sample_paths(params, E0, 0, 0, dt, 1.0, n_paths, 2024, opt);
    const char* label = D == 0 ? "E0=0 mc/pde" : "E0=-Dx mc/pde";
    for (int k = 0; k < 3; ++k) {
      const auto m = mc::ensemble_moments(ens, record[k]);
      compare(label, times[k], "var_p", m.var_p, m.se_var_p, pde[k].var_p);
      compare(label, times[k], "cov_xp", m.cov_xp, m.se_cov_xp, pde[k].cov_xp);
      compare(label, times[k], "var_x", m.var_x, m.se_var_x, pde[k].var_x);
    }
  }
  // deterministic start against (t/K, t^2/(2Km), t/(lambda K m^2) + t^3/(3 K m^2))
  mc::SampleOptions opt;
  opt.stride = 250;
  const auto ens = mc::sample_paths(params, [](double) { return 0.0; }, 0, 0, dt, 1.0, n_paths, 2025, opt);
  const double K = params.K(), m = params.m(), lam = params.lambda();
  for (int k = 0; k < 3; ++k) {
    const double tt = times[k];
    const auto mm = mc::ensemble_moments(ens, record[k]);
    compare("E0=0 mc/exact", tt, "var_p", mm.var_p, mm.se_var_p, tt / K);
    compare("E0=0 mc/exact", tt, "cov_xp", mm.cov_xp, mm.se_cov_xp, tt * tt / (2 * K * m));
    compare("E0=0 mc/exact", tt, "var_x", mm.var_x, mm.se_var_x,
            tt / (lam * K * m * m) + tt * tt * tt / (3 * K * m * m));
  }
  return {passed == total, fmt("%d/%d moment checks within max(3 se, 2%%), worst %s at %.2f of tolerance", passed,
                               total, worst_name.c_str(), worst_ratio)};
}

// ---------------------------------------------------------------- 8

Verdict wigner() {
  int matched = 0, total = 0;
  for (auto p : {make_params(1, 1, 1, 1), make_params(0.4, 2.5, 1.7, 0.6), make_params(3, 0.2, 0.9, -1.1)})
    for (double omega : {0.5, 1.0, 2.3}) {
      const auto w = solver::wigner_map(p, omega);
      for (bool b : w.match) matched += b;
      total += solver::kSlots;
    }
  return {matched == total, fmt("%d/%d slots match over 9 parameter points", matched, total)};
}

// ---------------------------------------------------------------- 9

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream f(e.path(), std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    out[e.path().filename().string()] = s.str();
  }
  return out;
}

Verdict reproducibility() {
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"airy-check", "--betas '[1]'"},
      {"free", "--nx 32 --np 32"},
      {"residual", "--nx 32 --np 32"},
      {"well", "--n-sets 3"},
      {"osc", ""},
      {"evolve", "--nx 41 --np 41"},
      {"mc", "--n-paths 2000 --seed 99"},
      {"mc-vs-pde", "--nx 41 --np 41 --n-paths 2000"},
      {"wigner-map", ""},
  };
  const fs::path root = fs::temp_directory_path() / "rfq_acceptance_repro";
  int identical = 0;
  std::string bad;
  for (const auto& [cmd, args] : runs) {
    const fs::path out = root / cmd;
    const std::string line = std::string(RFQ_CLI_PATH) + " " + cmd + " " + args + " --out " + out.string() +
                             " > /dev/null 2>&1";
    // exit status and every output byte must repeat; a numerical red still writes its tables
    std::map<std::string, std::string> first;
    int first_rc = 0;
    bool same = true;
    for (int rep = 0; rep < 2; ++rep) {
      fs::remove_all(out);
      const int rc = std::system(line.c_str());
      const auto files = snapshot(out);
      if (files.empty()) same = false;
      if (rep == 0) {
        first = files;
        first_rc = rc;
      } else {
        same = same && files == first && rc == first_rc;
      }
    }
    identical += same;
    if (!same) bad += " " + cmd;
  }
  fs::remove_all(root);
  const int n = static_cast<int>(runs.size());
  return {identical == n,
          fmt("%d/%d subcommands byte-identical on rerun%s%s", identical, n, bad.empty() ? "" : ", differing:",
              bad.c_str())};
}

struct Criterion {
  const char* title;
  double limit_s;  // runtime bound, 0 for none
  Verdict (*run)();
};

const Criterion kCriteria[] = {
    {"Airy identities", 10, airy_identities},
    {"free-particle stationarity", 30, free_stationarity},
    {"well spectrum", 10, well_spectrum},
    {"well conditional energy", 60, well_energy},
    {"oscillator solution", 10, osc_solution},
    {"oscillator levels", 1, osc_levels},
    {"PDE/SDE duality", 120, duality},
    {"Wigner mapping", 1, wigner},
    {"reproducibility", 0, reproducibility},
};

}  // namespace

int main(int argc, char** argv) {
  int first = 1, last = 9;
  if (argc > 1) first = last = std::atoi(argv[1]);
  if (first < 1 || last > 9) {
    std::fprintf(stderr, "usage: acceptance [1-9]\n");
    return 2;
  }
  bool all = true;
  for (int n = first; n <= last; ++n) {
    const auto& c = kCriteria[n - 1];
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const Error& e) {
      v = {false, std::string("raised ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt("%.2f s", secs);
    if (c.limit_s > 0) {
      timing += fmt(" (limit %g s)", c.limit_s);
      if (secs >= c.limit_s) {
        v.pass = false;
        timing += " over time";
      }
    }
    std::printf("criterion %d %s: %s | %s | %s\n", n, v.pass ? "PASS" : "FAIL", c.title, v.summary.c_str(),
                timing.c_str());
    std::fflush(stdout);
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
