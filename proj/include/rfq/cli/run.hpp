#pragma once

// Subcommand dispatch. Each run writes config.resolved.json plus its tables
// into the output directory; failures produce error.json.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "rfq/airy.hpp"
#include "rfq/builders.hpp"
#include "rfq/cli/config.hpp"
#include "rfq/cli/csv.hpp"
#include "rfq/free_particle.hpp"
#include "rfq/infinite_well.hpp"
#include "rfq/langevin.hpp"
#include "rfq/oscillator.hpp"
#include "rfq/phase_solver.hpp"

namespace rfq::cli {

namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kValidation = 1, kNumerical = 2 };

namespace detail {

inline void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::InvalidArgument, "cannot open output file", path.string());
  f << j.dump(2) << "\n";
}

inline std::string code_name(const Error& e) { return std::string(to_string(e.code())); }

inline double relative(double residual, double scale) { return scale > 0.0 ? residual / scale : residual; }

// ---------------------------------------------------------------- airy-check

inline int run_airy_check(const RunConfig& cfg, const fs::path& out) {
  const auto& params = cfg.params();
  airy::AiryEvalConfig ac;
  ac.quad_points = static_cast<int>(cfg.integer("quad_points"));
  const double tol = cfg.num("tol");
  const double span = cfg.num("p_span");
  CsvTable t({"beta", "identity", "expected", "value_re", "value_im", "abs_err", "status", "detail"});
  bool all_pass = true;
  for (double beta : cfg.numbers("betas")) {
    const double N = free::n_beta(params, beta), p0 = free::p0_beta(params, beta);
    struct Row {
      const char* name;
      double expected;
      std::function<complex()> eval;
    };
    const Row rows[] = {
        {"norm", 1.0, [&] { return N * airy::ai_norm_integral(params, beta, span, tol, ac); }},
        {"first_moment", p0, [&] { return airy::ai_moment(params, beta, 1, span, tol, ac); }},
        {"second_moment", p0 * p0, [&] { return airy::ai_moment(params, beta, 2, span, tol, ac); }},
    };
    for (const auto& r : rows) {
      try {
        const complex v = r.eval();
        const double err = std::abs(v - r.expected);
        const bool pass = err <= tol * std::max(1.0, std::abs(r.expected));
        all_pass = all_pass && pass;
        t.add_row({beta, std::string(r.name), r.expected, v.real(), v.imag(), err,
                   std::string(pass ? "pass" : "fail"), std::string()});
      } catch (const Error& e) {
        all_pass = false;
        const double nan = std::nan("");
        t.add_row({beta, std::string(r.name), r.expected, nan, nan, nan, std::string("error"),
                   code_name(e) + ": " + e.message()});
      }
    }
  }
  // Two evaluation methods on a polar lattice |z| <= 10.
  const int n = static_cast<int>(cfg.integer("lattice_points"));
  const int rings = std::max(1, static_cast<int>(std::lround(std::sqrt(n / 2.0))));
  const int per_ring = (n + rings - 1) / rings;
  airy::AiryEvalConfig series = ac;
  series.method = airy::Method::standard_airy_continuation;
  double worst = 0.0;
  for (int k = 0; k < rings * per_ring && k < n; ++k) {
    const double r = 10.0 * (k / per_ring + 1) / rings;
    const double ang = -pi + (k % per_ring + 0.5) * 2.0 * pi / per_ring;
    const complex z = std::polar(r, ang);
    const complex a = airy::ai_tilde(z, ac), b = airy::ai_tilde(z, series);
    worst = std::max(worst, std::abs(a - b) / std::abs(b));
  }
  const bool agree = worst <= 1e-8;
  all_pass = all_pass && agree;
  t.add_row({std::nan(""), std::string("method_agreement"), 0.0, worst, 0.0, worst,
             std::string(agree ? "pass" : "fail"),
             std::to_string(n) + " lattice points, relative difference"});
  t.write((out / "identities.csv").string());
  return all_pass ? kOk : kNumerical;
}

// ---------------------------------------------------------------- free / residual

inline PhaseGrid grid_from(const RunConfig& cfg, long long nx, long long np) {
  return PhaseGrid(cfg.num("x_min"), cfg.num("x_max"), static_cast<std::size_t>(nx),
                   cfg.num("p_min"), cfg.num("p_max"), static_cast<std::size_t>(np));
}

struct FreeRun {
  free::FreeSolution sol;
  double residual;
  double scale;
};

inline FreeRun free_run(const RunConfig& cfg, long long nx, long long np) {
  const auto coeffs = odd_gaussian_coeffs(cfg.num("beta_max"),
                                          static_cast<std::size_t>(cfg.integer("n_beta")),
                                          cfg.num("sigma"));
  const auto grid = grid_from(cfg, nx, np);
  auto sol = free::assemble_density(coeffs, cfg.params(), grid);
  const auto op = solver::make_operator(cfg.params(), grid, std::vector<double>(grid.nx(), 0.0));
  const auto res = solver::apply_stationary_operator(sol.field, op);
  return {std::move(sol), res.max_modulus(), 0.0};
}

inline int run_free(const RunConfig& cfg, const fs::path& out) {
  auto r = free_run(cfg, cfg.integer("nx"), cfg.integer("np"));
  const auto& f = r.sol.field;
  CsvTable t({"x", "p", "f_re", "f_im"});
  for (std::size_t i = 0; i < f.grid().nx(); ++i)
    for (std::size_t j = 0; j < f.grid().np(); ++j)
      t.add_row({f.grid().x(i), f.grid().p(j), f.at(i, j).real(), f.at(i, j).imag()});
  t.write((out / "field.csv").string());
  const double scale = f.max_modulus();
  write_json(out / "summary.json",
             {{"norm_re", r.sol.norm.real()},
              {"norm_im", r.sol.norm.imag()},
              {"field_kind", f.kind() == FieldKind::real ? "real" : "complex"},
              {"max_modulus", scale},
              {"stationary_residual", r.residual},
              {"relative_residual", relative(r.residual, scale)}});
  return kOk;
}

inline int run_residual(const RunConfig& cfg, const fs::path& out) {
  const long long nx = cfg.integer("nx"), np = cfg.integer("np");
  CsvTable t({"nx", "np", "max_residual", "field_scale", "relative_residual"});
  double prev = 0.0, ratio = 0.0;
  for (int level = 0; level < 2; ++level) {
    const long long fx = nx << level, fp = np << level;
    auto r = free_run(cfg, fx, fp);
    const double scale = r.sol.field.max_modulus();
    const double rel = relative(r.residual, scale);
    t.add_row({fx, fp, r.residual, scale, rel});
    if (level == 1) ratio = prev / rel;
    prev = rel;
  }
  t.write((out / "residual.csv").string());
  write_json(out / "summary.json", {{"refinement_ratio", ratio}});
  return kOk;
}

// ---------------------------------------------------------------- well

inline int run_well(const RunConfig& cfg, const fs::path& out) {
  const auto& params = cfg.params();
  const double a = cfg.num("a");
  CsvTable levels({"n", "E_model", "E_qm", "rel_err"});
  for (int n = 1; n <= cfg.integer("n_levels"); ++n) {
    const double em = well::model_level(params, a, n), eq = well::qm_level(params, a, n);
    levels.add_row({static_cast<long long>(n), em, eq, std::abs(em - eq) / eq});
  }
  levels.write((out / "levels.csv").string());

  const PhaseGrid grid(-a, a, static_cast<std::size_t>(cfg.integer("nx")), cfg.num("p_min"),
                       cfg.num("p_max"), static_cast<std::size_t>(cfg.integer("np")));
  CsvTable boundary({"set", "kind", "residual", "field_scale", "relative"});
  CsvTable energy({"set", "X", "spectral_re", "spectral_im", "direct_re", "direct_im", "status"});
  const int n_trunc = static_cast<int>(cfg.integer("n_trunc"));
  for (long long s = 0; s < cfg.integer("n_sets"); ++s) {
    const auto modes = random_hermitian_modes(a, n_trunc, cfg.seed() + static_cast<std::uint64_t>(s));
    const auto sol = well::well_density(modes, params, grid, cfg.flag("include_zero"));
    const double scale = sol.field.max_modulus();
    const double res = well::boundary_residual(sol.field, a);
    boundary.add_row({s, std::string("quantized"), res, scale, relative(res, scale)});
    for (double frac : {-0.5, 0.25, 0.375}) {
      const double X = frac * a;
      const std::size_t i = grid.find_x(X);
      const double Xn = i == grid.nx() ? X : grid.x(i);
      try {
        const complex spec = well::cond_kinetic_energy(modes, params, Xn);
        const complex direct = well::direct_cond_kinetic_energy(sol.field, params, Xn);
        energy.add_row({s, Xn, spec.real(), spec.imag(), direct.real(), direct.imag(),
                        std::string("ok")});
      } catch (const Error& e) {
        const double nan = std::nan("");
        energy.add_row({s, Xn, nan, nan, nan, nan, code_name(e)});
      }
    }
  }
  const auto control = free::single_mode_field(params, 1.3 * pi / a, 1.0, grid);
  const double cscale = control.max_modulus();
  const double cres = well::boundary_residual(control, a);
  boundary.add_row({-1LL, std::string("control_1.3pi/a"), cres, cscale, relative(cres, cscale)});
  boundary.write((out / "boundary.csv").string());
  energy.write((out / "energy.csv").string());
  return kOk;
}

// ---------------------------------------------------------------- osc

inline int run_osc(const RunConfig& cfg, const fs::path& out) {
  const auto osc = osc::make_osc(cfg.params(), cfg.num("D"));
  const auto sp = osc::qm_limit_spacing(osc);
  CsvTable levels({"n", "E_k_zero", "E_l_zero", "spacing_l", "qm_spacing", "qm_spacing_no_pi",
                   "lambda0_spacing", "lambda0_spacing_no_pi"});
  for (int n = 0; n < cfg.integer("n_levels"); ++n) {
    const double ek = osc::level_at(n, osc::Branch::k_zero, osc);
    const double el = osc::level_at(n, osc::Branch::l_zero, osc);
    const double step = osc::level_at(n + 1, osc::Branch::l_zero, osc) - el;
    levels.add_row({static_cast<long long>(n), ek, el, step, sp.spacing, sp.spacing_no_pi, sp.limit,
                    sp.limit_no_pi});
  }
  levels.write((out / "levels.csv").string());

  CsvTable res({"n_patch", "max_residual", "max_F", "relative_residual"});
  const int n = static_cast<int>(cfg.integer("n_patch"));
  for (int level = 0; level < 2; ++level) {
    const int nn = level == 0 ? n : 2 * n - 1;
    const osc::LKPatch patch{cfg.num("l_min"), cfg.num("l_max"), cfg.num("k_min"), cfg.num("k_max"), nn};
    const auto r = osc::char_pde_residual(osc, patch);
    res.add_row({static_cast<long long>(nn), r.max_residual, r.max_F, relative(r.max_residual, r.max_F)});
  }
  res.write((out / "residual.csv").string());
  return kOk;
}

// ---------------------------------------------------------------- evolve / mc

inline std::vector<double> sample_times(const RunConfig& cfg) {
  std::vector<double> t;
  const long long n = cfg.integer("n_times");
  for (long long k = 1; k <= n; ++k) t.push_back(cfg.num("T") * static_cast<double>(k) / n);
  return t;
}

inline std::vector<solver::Moments> pde_moments(const RunConfig& cfg) {
  const auto grid = grid_from(cfg, cfg.integer("nx"), cfg.integer("np"));
  const double D = cfg.num("D");
  const auto op = solver::make_operator(cfg.params(), grid, [D](double x) { return -D * x; });
  double dt = cfg.num("dt_pde");
  if (dt == 0.0) dt = 0.9 * solver::stable_step(op);
  auto f = gaussian_field(grid, cfg.num("x0"), cfg.num("p0"), cfg.num("sigma_x0"), cfg.num("sigma_p0"));
  std::vector<solver::Moments> out;
  double t = 0.0;
  for (double target : sample_times(cfg)) {
    f = solver::evolve(f, op, dt, target - t);
    t = target;
    out.push_back(solver::field_moments(f));
  }
  return out;
}

inline std::vector<mc::EnsembleMoments> mc_moments(const RunConfig& cfg) {
  const long long n_times = cfg.integer("n_times");
  const double T = cfg.num("T");
  const double D = cfg.num("D");
  const auto per = static_cast<std::size_t>(std::ceil(T / (cfg.num("dt") * n_times) - 1e-9));
  const std::size_t per_segment = std::max<std::size_t>(1, per);
  const std::size_t steps = per_segment * static_cast<std::size_t>(n_times);
  const double dt = T > 0.0 ? T / static_cast<double>(steps) : cfg.num("dt");
  mc::SampleOptions opt;
  opt.stride = per_segment;
  opt.sigma_x0 = cfg.num("sigma_x0");
  opt.sigma_p0 = cfg.num("sigma_p0");
  const auto ens = mc::sample_paths(cfg.params(), [D](double x) { return -D * x; }, cfg.num("x0"),
                                    cfg.num("p0"), dt, T, static_cast<std::size_t>(cfg.integer("n_paths")),
                                    cfg.seed(), opt);
  std::vector<mc::EnsembleMoments> out;
  for (std::size_t k = 1; k < ens.n_records(); ++k) out.push_back(mc::ensemble_moments(ens, k));
  return out;
}

inline int run_evolve(const RunConfig& cfg, const fs::path& out) {
  const auto times = sample_times(cfg);
  const auto m = pde_moments(cfg);
  CsvTable t({"t", "mass", "mean_x", "mean_p", "var_x", "var_p", "cov_xp"});
  for (std::size_t k = 0; k < m.size(); ++k)
    t.add_row({times[k], m[k].mass, m[k].mean_x, m[k].mean_p, m[k].var_x, m[k].var_p, m[k].cov_xp});
  t.write((out / "moments.csv").string());
  return kOk;
}

inline int run_mc(const RunConfig& cfg, const fs::path& out) {
  const auto times = sample_times(cfg);
  const auto m = mc_moments(cfg);
  CsvTable t({"t", "mean_x", "mean_p", "var_x", "var_p", "cov_xp", "se_var_x", "se_var_p", "se_cov_xp"});
  for (std::size_t k = 0; k < m.size(); ++k)
    t.add_row({times[k], m[k].mean_x, m[k].mean_p, m[k].var_x, m[k].var_p, m[k].cov_xp, m[k].se_var_x,
               m[k].se_var_p, m[k].se_cov_xp});
  t.write((out / "moments.csv").string());
  return kOk;
}

inline int run_mc_vs_pde(const RunConfig& cfg, const fs::path& out) {
  const auto times = sample_times(cfg);
  const auto pde = pde_moments(cfg);
  const auto mcm = mc_moments(cfg);
  const bool free_case = cfg.num("D") == 0.0;
  const double sx = cfg.num("sigma_x0"), sp = cfg.num("sigma_p0");
  CsvTable t({"t", "var_p_mc", "var_p_pde", "var_p_exact", "se"});
  CsvTable full({"t", "moment", "mc", "pde", "exact", "se", "tolerance", "mc_vs_pde", "mc_vs_exact"});
  auto verdict = [](double a, double b, double tol) {
    return std::string(std::abs(a - b) <= tol ? "pass" : "fail");
  };
  for (std::size_t k = 0; k < times.size(); ++k) {
    mc::InitialCovariance init{sx * sx, sp * sp, 0.0};
    const auto ex = mc::free_gaussian_moments(cfg.params(), times[k], init);
    const double nan = std::nan("");
    t.add_row({times[k], mcm[k].var_p, pde[k].var_p, free_case ? ex.var_p : nan, mcm[k].se_var_p});
    const struct {
      const char* name;
      double mc, pde, exact, se;
    } rows[] = {{"var_p", mcm[k].var_p, pde[k].var_p, ex.var_p, mcm[k].se_var_p},
                {"cov_xp", mcm[k].cov_xp, pde[k].cov_xp, ex.cov_xp, mcm[k].se_cov_xp},
                {"var_x", mcm[k].var_x, pde[k].var_x, ex.var_x, mcm[k].se_var_x}};
    for (const auto& r : rows) {
      const double tol = std::max(3.0 * r.se, 0.02 * std::abs(r.pde));
      full.add_row({times[k], std::string(r.name), r.mc, r.pde, free_case ? r.exact : nan, r.se, tol,
                    verdict(r.mc, r.pde, tol),
                    free_case ? verdict(r.mc, r.exact, std::max(3.0 * r.se, 0.02 * std::abs(r.exact)))
                              : std::string("n/a")});
    }
  }
  t.write((out / "moments.csv").string());
  full.write((out / "moments_full.csv").string());
  return kOk;
}

// ---------------------------------------------------------------- wigner-map

inline int run_wigner_map(const RunConfig& cfg, const fs::path& out) {
  const auto w = solver::wigner_map(cfg.params(), cfg.num("omega"));
  CsvTable t({"slot", "wigner_c0", "wigner_cx", "wigner_cp", "model_c0", "model_cx", "model_cp", "match"});
  for (int s = 0; s < solver::kSlots; ++s) {
    const auto& a = w.wigner[s];
    const auto& b = w.model[s];
    t.add_row({std::string(solver::kSlotNames[s]), a.c0, a.cx, a.cp, b.c0, b.cx, b.cp,
               std::string(w.match[s] ? "true" : "false")});
  }
  t.write((out / "slots.csv").string());
  write_json(out / "substitution.json", {{"friction", w.friction},
                                         {"coupling", w.coupling},
                                         {"time_derivative", w.time_derivative},
                                         {"D_pq", w.D_pq},
                                         {"D_qq", w.D_qq},
                                         {"D_pp", w.D_pp},
                                         {"field_gradient_D", w.field_gradient},
                                         {"all_match", w.all_match()}});
  return w.all_match() ? kOk : kNumerical;
}

}  // namespace detail

/// Writes an error record and maps the failure to an exit code.
inline int report_error(const Error& e, const fs::path& out) {
  const int code = is_numerical(e.code()) ? kNumerical : kValidation;
  const json j = {{"code", std::string(to_string(e.code()))},
                  {"message", e.message()},
                  {"context", e.context()}};
  std::cerr << j.dump() << "\n";
  std::error_code ec;
  fs::create_directories(out, ec);
  if (!ec) {
    std::ofstream f(out / "error.json", std::ios::binary);
    if (f) f << j.dump(2) << "\n";
  }
  return code;
}

inline int run(const RunConfig& cfg) {
  const fs::path out = cfg.out_dir();
  try {
    fs::create_directories(out);
    detail::write_json(out / "config.resolved.json", cfg.resolved());
    switch (cfg.subcommand()) {
      case Subcommand::airy_check: return detail::run_airy_check(cfg, out);
      case Subcommand::free: return detail::run_free(cfg, out);
      case Subcommand::residual: return detail::run_residual(cfg, out);
      case Subcommand::well: return detail::run_well(cfg, out);
      case Subcommand::osc: return detail::run_osc(cfg, out);
      case Subcommand::evolve: return detail::run_evolve(cfg, out);
      case Subcommand::mc: return detail::run_mc(cfg, out);
      case Subcommand::mc_vs_pde: return detail::run_mc_vs_pde(cfg, out);
      case Subcommand::wigner_map: return detail::run_wigner_map(cfg, out);
    }
  } catch (const Error& e) {
    return report_error(e, out);
  } catch (const fs::filesystem_error& e) {
    return report_error(Error(ErrorCode::InvalidArgument, e.what(), e.path1().string()), out);
  }
  return kOk;
}

}  // namespace rfq::cli
