#include "bkuq/scenarios.hpp"

#include "bkuq/common.hpp"
#include "bkuq/decay_fit.hpp"
#include "bkuq/gpc_sg.hpp"
#include "bkuq/kernel_cache.hpp"
#include "bkuq/linear_operator.hpp"
#include "bkuq/outputs.hpp"
#include "bkuq/properties.hpp"
#include "bkuq/solver.hpp"
#include "bkuq/spectral.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

namespace bkuq {

namespace fs = std::filesystem;

namespace {

struct ScenarioOutput {
  std::vector<CsvTable> tables;
  std::vector<PlotPanel> panels;
  bool validation_ok = true;
  std::vector<std::string> notes;
};

std::optional<fs::path> cache_path(const ScenarioConfig& c) {
  if (c.cache_dir.empty()) return std::nullopt;
  return fs::path(c.cache_dir);
}

std::vector<std::pair<int, AssemblyPath>> needed_units(const CollisionModel& m) {
  if (m.family == KernelFamily::Proportional) return {{1, AssemblyPath::GradClosedForm}};
  return {{1, AssemblyPath::DirectQuadrature}, {3, AssemblyPath::DirectQuadrature}};
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

std::string window_text(double t0, double t1) { return fmt(t0) + ":" + fmt(t1); }

ScenarioOutput spectrum(const ScenarioConfig& c, std::ostream& log) {
  auto grid = std::make_shared<VelocityGrid>(c.make_grid());
  OperatorFactory fac(grid, c.make_assembly(), cache_path(c));
  const CollisionModel model = c.make_model();
  const LinearOperator L = fac.assemble(model, 0.0, 0);
  const SpectrumSection& s = c.experiment.spectrum;

  ScenarioOutput out;
  const auto etas = linspace(s.eta_min, s.eta_max, s.eta_count);
  const BranchTrackResult bt = branch_track(L, fac.macro(), etas);
  CsvTable spec{"spectrum.csv", {"eta", "branch", "re", "im"}, {}};
  for (const auto& smp : bt.samples) spec.add(smp.eta, smp.branch, smp.sigma.real(), smp.sigma.imag());
  spec.sort(2);
  CsvTable fits{"branch_fit.csv", {"branch", "a_j", "A_j", "residual"}, {}};
  for (const auto& f : bt.fits)
    if (f.available) {
      fits.add(f.branch, f.a, f.A, f.residual);
      log << "branch " << f.branch << ": a = " << f.a << ", A = " << f.A << "\n";
    }
  fits.sort(1);

  const GapEstimate ge = spectral_gap_estimate(L, fac.macro(), 100, 1);
  const GapCertificate cert = gap_certify(L, fac.macro().count(), s.delta, s.gap_eta_max, s.gap_samples);
  CsvTable gap{"spectral_gap.csv",
               {"delta", "tau", "worst_eta", "nonfluid_max_at_zero", "max_real_all", "nu1_est", "nu1_sampled"},
               {}};
  gap.add(cert.delta, cert.tau, cert.worst_eta, cert.nonfluid_max_at_zero, cert.max_real_all, ge.exact, ge.sampled);
  log << "gap certificate: tau = " << cert.tau << " (worst eta " << cert.worst_eta << "), nu1_est = " << ge.exact
      << "\n";

  out.tables = {spec, fits, gap};
  PlotPanel re{"spectrum_re.png", "eta", "Re sigma", false, false, {}};
  PlotPanel im{"spectrum_im.png", "eta", "Im sigma", false, false, {}};
  for (const auto& f : bt.fits)
    if (f.available) {
      const std::string j = std::to_string(f.branch);
      re.curves.push_back({"spectrum.csv", 1, 3, 2, j, "branch " + j});
      im.curves.push_back({"spectrum.csv", 1, 4, 2, j, "branch " + j});
    }
  out.panels = {re, im};
  return out;
}

ScenarioOutput decay(const ScenarioConfig& c, std::ostream& log) {
  auto grid = std::make_shared<VelocityGrid>(c.make_grid());
  OperatorFactory fac(grid, c.make_assembly(), cache_path(c));
  const CollisionModel model = c.make_model();
  const DecaySection& d = c.experiment.decay;
  const InitKind kind = parse_init_kind(d.init);
  const int max_order = *std::max_element(d.orders.begin(), d.orders.end());
  const std::vector<double> times = log_time_grid(d.t_min, d.t_max, d.t_count);
  RadialDesign rd;
  rd.R = d.radial_R;
  rd.order = d.radial_order;
  rd.phase = d.radial_phase;
  const RadialGrid rg = design_radial_grid(d.t_max, rd);
  log << "radial nodes: " << rg.size() << ", times: " << times.size() << "\n";

  ScenarioOutput out;
  CsvTable series{"decay.csv", {"t", "order", "norm_L2x", "norm_Linfx", "z_node_index"}, {}};
  CsvTable fits{"decay_fit.csv", {"order", "norm_kind", "exponent", "residual", "window", "z_node_index"}, {}};
  CsvTable bound{"decay_bound.csv",
                 {"order", "z_node_index", "log_power", "first_half_max", "second_half_max", "bounded"},
                 {}};
  const InitialData init = make_initial_data(*grid, fac.macro(), kind, max_order);
  for (std::size_t zi = 0; zi < d.z_nodes.size(); ++zi) {
    std::vector<LinearOperator> ops;
    for (int k = 0; k <= max_order; ++k) ops.push_back(fac.assemble(model, d.z_nodes[zi], k));
    const NormSeries ns = evolve_norms(ops, init, rg, times, grid->beta, d.linf);
    for (int o : d.orders) {
      for (std::size_t t = 0; t < times.size(); ++t)
        series.add(times[t], o, ns.l2x[o][t], d.linf ? fmt(ns.linfx[o][t]) : std::string(), static_cast<int>(zi));
      const DecayFit f2 = decay_fit(times, ns.l2x[o], d.fit_t0, d.fit_t1, o >= 1, std::max(o, 1));
      fits.add(o, "L2x", f2.exponent, f2.residual, window_text(d.fit_t0, d.fit_t1), static_cast<int>(zi));
      log << "z[" << zi << "] order " << o << ": L2x exponent " << f2.exponent;
      if (o >= 1) bound.add(o, static_cast<int>(zi), o - 1, f2.first_half_max, f2.second_half_max, f2.bounded ? 1 : 0);
      if (d.linf) {
        const DecayFit fi = decay_fit(times, ns.linfx[o], d.fit_t0, d.fit_t1);
        fits.add(o, "Linfx", fi.exponent, fi.residual, window_text(d.fit_t0, d.fit_t1), static_cast<int>(zi));
        log << ", Linfx exponent " << fi.exponent;
      }
      log << "\n";
    }
  }
  // primary keys: z node, order, t
  std::stable_sort(series.rows.begin(), series.rows.end(), [](const auto& a, const auto& b) {
    const int za = std::stoi(a[4]), zb = std::stoi(b[4]), oa = std::stoi(a[1]), ob = std::stoi(b[1]);
    if (za != zb) return za < zb;
    return oa < ob;
  });
  out.tables = {series, fits, bound};

  PlotPanel l2{"decay_l2x.png", "t", "L2x norm", true, true, {}};
  PlotPanel li{"decay_linfx.png", "t", "Linfx norm", true, true, {}};
  for (int o : d.orders) {
    const std::string s = std::to_string(o);
    l2.curves.push_back({"decay.csv", 1, 3, 2, s, "order " + s});
    if (d.linf) li.curves.push_back({"decay.csv", 1, 4, 2, s, "order " + s});
  }
  out.panels = {l2};
  if (d.linf) out.panels.push_back(li);

  if (!d.sg_K.empty()) {
    const LinearOperator unit = fac.assemble(model, 0.0, 0);
    CsvTable sgs{"sg_decay.csv", {"K", "t", "norm_weighted_L2x"}, {}};
    CsvTable sgf{"sg_decay_fit.csv", {"K", "exponent", "log_c", "residual", "window"}, {}};
    PlotPanel sp{"sg_decay.png", "t", "weighted L2x norm", true, true, {}};
    for (int K : d.sg_K) {
      const GpcBasis basis = make_basis(c.basis_family(), K, c.basis_quadrature_order(K));
      const ChaosTensors ct = make_chaos_tensors(basis, model.c_poly(), c.basis.m);
      const SgOperator sg = assemble_sg(unit, ct, model);
      SgState st;
      st.F = Eigen::MatrixXd::Zero(grid->size(), K);
      st.F.col(0) = init.h[0];
      RadialDesign srd = rd;
      srd.damping = 0.2 * sg.mu.minCoeff();
      const RadialGrid srg = design_radial_grid(d.t_max, srd);
      SgEvolveOptions so;
      so.beta = grid->beta;
      so.m = c.basis.m;
      const SgEvolution ev = evolve_sg(sg, st, srg, times, so);
      for (std::size_t t = 0; t < times.size(); ++t) sgs.add(K, times[t], ev.weighted_l2x[t]);
      const DecayFit f = decay_fit(times, ev.weighted_l2x, d.fit_t0, d.fit_t1);
      sgf.add(K, f.exponent, f.log_c, f.residual, window_text(d.fit_t0, d.fit_t1));
      sp.curves.push_back({"sg_decay.csv", 2, 3, 1, std::to_string(K), "K = " + std::to_string(K)});
      log << "SG K = " << K << ": weighted exponent " << f.exponent << ", ln C " << f.log_c << "\n";
    }
    out.tables.push_back(sgs);
    out.tables.push_back(sgf);
    out.panels.push_back(sp);
  }
  return out;
}

CsvTable tensor_table(const ChaosTensors& ct) {
  CsvTable t{"tensors.csv", {"k", "i", "j", "value"}, {}};
  for (int k = 0; k < ct.K; ++k)
    for (int i = 0; i < ct.K; ++i)
      for (int j = 0; j < ct.K; ++j)
        if (ct.chi(k, i, j)) t.add(k + 1, i + 1, j + 1, ct.sp(k, i, j));
  return t;
}

ScenarioOutput gap_certify_sweep(const ScenarioConfig& c, std::ostream& log) {
  auto grid = std::make_shared<VelocityGrid>(c.make_grid());
  OperatorFactory fac(grid, c.make_assembly(), cache_path(c));
  const CollisionModel model = c.make_model();
  CollisionModel base = model;
  base.b1 = 0.0;
  base.eps = 0.0;
  const LinearOperator L = fac.assemble(base, 0.0, 0);
  const GapSweepSection& s = c.experiment.gap;
  const GapEstimate ge = spectral_gap_estimate(L, fac.macro(), s.samples, s.seed);
  log << "nu1_est = " << ge.exact << "\n";

  ScenarioOutput out;
  CsvTable cert{"gap_certificate.csv", {"m", "gamma", "K", "bound", "rayleigh_check"}, {}};
  for (double m : s.m)
    for (double gamma : s.gamma)
      for (int K : s.K) {
        const GpcBasis basis = make_basis(c.basis_family(), K, c.basis_quadrature_order(K));
        const ChaosTensors ct = make_chaos_tensors(basis, ZPolynomial{{1.0, gamma}}, m);
        const CoupledGapResult r = coupled_gap_estimate(ct.B, ct.W, m, gamma, L, fac.macro(), ge.exact, s.samples,
                                                        s.seed);
        cert.add(m, gamma, K, r.bound, r.rayleigh_check);
        const bool ok = r.bound > 0.0 && r.rayleigh_check <= -r.bound * (1.0 - 1e-12);
        if (!ok) out.validation_ok = false;
        log << "m = " << m << ", gamma = " << gamma << ", K = " << K << ": bound " << r.bound << ", rayleigh "
            << r.rayleigh_check << (ok ? "" : "  (violated)") << "\n";
      }
  cert.sort(3);
  out.tables.push_back(cert);

  const GpcBasis basis = make_basis(c.basis_family(), c.basis.K, c.basis_quadrature_order(c.basis.K));
  const ZPolynomial cz = model.family == KernelFamily::Proportional ? model.c_poly() : ZPolynomial{{1.0}};
  CsvTable tens = tensor_table(make_chaos_tensors(basis, cz, c.basis.m));
  tens.sort(3);
  out.tables.push_back(tens);

  PlotPanel p{"gap_certificate.png", "K", "bound", false, false, {}};
  for (double m : s.m)
    for (double gamma : s.gamma) {
      (void)gamma;
      p.curves.push_back({"gap_certificate.csv", 3, 4, 1, fmt(m), "m = " + fmt(m)});
    }
  out.panels.push_back(p);
  return out;
}

ScenarioOutput gpc_converge(const ScenarioConfig& c, std::ostream& log) {
  if (c.basis_family() != BasisFamily::UniformLegendre)
    throw ConfigError("gpc-converge compares against a uniform-Legendre collocation reference; set "
                      "basis.family = uniform-legendre");
  auto grid = std::make_shared<VelocityGrid>(c.make_grid());
  OperatorFactory fac(grid, c.make_assembly(), cache_path(c));
  const CollisionModel model = c.make_model();
  (void)model.c_poly();
  const ConvergeSection& s = c.experiment.converge;
  const Eigen::VectorXd h = make_initial_data(*grid, fac.macro(), InitKind::Macro, 0).h[0];
  const std::vector<ZProfile> families{
      [h](double z) -> Eigen::VectorXd { return h * std::exp(0.5 * z); },
      [h](double z) -> Eigen::VectorXd { return h * ((z - 0.3) * std::abs(z - 0.3)); },
  };
  const std::vector<std::string> names{"analytic", "limited"};
  const RadialGrid rg = uniform_radial_grid(s.radial_R, s.radial_panels, s.radial_order);
  const int kmax = *std::max_element(s.K.begin(), s.K.end());
  const CollocationReference ref = collocation_reference(fac, model, s.reference_nodes, kmax, families, rg, s.times);
  CollisionModel unit_model = model;
  unit_model.b1 = 0.0;
  const LinearOperator unit = fac.assemble(unit_model, 0.0, 0);
  const GpcErrorCurve cur = gpc_error_curve(s.K, ref, unit, model, families, grid->beta, s.linf);

  ScenarioOutput out;
  CsvTable fit{"convergence_fit.csv",
               {"family", "spectral_rms", "algebraic_rms", "spectral_slope", "algebraic_slope", "strictly_decreasing"},
               {}};
  PlotPanel p{"convergence.png", "K", "max_t err_L2x", false, true, {}};
  for (std::size_t f = 0; f < families.size(); ++f) {
    CsvTable t{"convergence_" + names[f] + ".csv", {"K", "t", "err_L2x", "err_Linfx", "proj_err", "num_err"}, {}};
    std::vector<double> worst(s.K.size(), 0.0);
    for (std::size_t k = 0; k < s.K.size(); ++k)
      for (std::size_t ti = 0; ti < s.times.size(); ++ti) {
        t.add(s.K[k], s.times[ti], cur.err_l2x[f][k][ti], s.linf ? fmt(cur.err_linfx[f][k][ti]) : std::string(),
              cur.proj_err[f][k][ti], cur.num_err[f][k][ti]);
        worst[k] = std::max(worst[k], cur.err_l2x[f][k][ti]);
      }
    t.sort(2);
    out.tables.push_back(t);
    const ConvergenceFit cf = fit_convergence(s.K, worst);
    fit.add(names[f], cf.spectral_rms, cf.algebraic_rms, cf.spectral_slope, cf.algebraic_slope,
            cf.strictly_decreasing ? 1 : 0);
    log << names[f] << ": spectral rms " << cf.spectral_rms << ", algebraic rms " << cf.algebraic_rms
        << ", algebraic slope " << cf.algebraic_slope << "\n";
    p.curves.push_back({"convergence_" + names[f] + ".csv", 1, 3, 2, fmt(s.times.back()), names[f]});
  }
  out.tables.push_back(fit);
  out.panels.push_back(p);
  return out;
}

ScenarioOutput validate(const ScenarioConfig& c, std::ostream& log) {
  PropertySuiteOptions po;
  po.xi_max = c.grid.xi_max;
  po.beta = c.grid.beta;
  po.assembly = c.make_assembly();
  const auto checks = run_property_suite(po);
  ScenarioOutput out;
  CsvTable t{"validate.csv", {"check", "value", "tolerance", "pass"}, {}};
  for (const auto& ch : checks) {
    t.add(ch.name, ch.value, ch.tolerance, ch.pass ? 1 : 0);
    log << (ch.pass ? "PASS " : "FAIL ") << ch.name << ": " << ch.value << " (tol " << ch.tolerance << ")\n";
    if (!ch.pass) out.validation_ok = false;
  }
  out.tables.push_back(t);
  return out;
}

ScenarioOutput dispatch(const ScenarioConfig& c, std::ostream& log) {
  const std::string& s = c.experiment.scenario;
  if (s == "spectrum") return spectrum(c, log);
  if (s == "decay") return decay(c, log);
  if (s == "gap-certify") return gap_certify_sweep(c, log);
  if (s == "gpc-converge") return gpc_converge(c, log);
  if (s == "validate") return validate(c, log);
  throw ConfigError("unknown scenario '" + s + "'");
}

std::string manifest_text(const ScenarioConfig& c, const RunOptions& opt, double wall,
                          const std::vector<fs::path>& files, bool ok) {
  nlohmann::json j;
  j["version"] = version_string();
  j["scenario"] = c.experiment.scenario;
  j["command"] = opt.command_line;
  j["config"] = nlohmann::json::parse(serialize_config(c));
  j["threads"] = thread_count();
  j["wall_time_seconds"] = wall;
  j["validation_passed"] = ok;
  std::vector<std::string> names;
  for (const auto& f : files) names.push_back(f.filename().string());
  std::sort(names.begin(), names.end());
  j["files"] = names;
  return j.dump(2) + "\n";
}

} // namespace

int run_scenario(const ScenarioConfig& c, const RunOptions& opt, std::ostream& log) {
  set_thread_count(c.threads);
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<OutputSet> outs;
  try {
    outs.emplace(fs::path(c.experiment.output));
    ScenarioOutput r = dispatch(c, log);
    for (const auto& t : r.tables) outs->write(t);
    if (opt.plots) outs->write_text("plot.gp", plot_script(r.panels));
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::vector<fs::path> files = outs->files();
    files.push_back(outs->dir() / "manifest.json");
    outs->write_text("manifest.json", manifest_text(c, opt, wall, files, r.validation_ok));
    if (!r.validation_ok) {
      log << "scenario '" << c.experiment.scenario << "': validation failed\n";
      return kExitValidation;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    if (outs) outs->discard();
    log << "error in scenario '" << c.experiment.scenario << "': " << e.what() << "\n";
    return kExitValidation;
  } catch (const CertificationFailure& e) {
    if (outs) outs->discard();
    log << "error in scenario '" << c.experiment.scenario << "': " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    if (outs) outs->discard();
    log << "error in scenario '" << c.experiment.scenario << "': " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cache_ops(const std::string& action, const ScenarioConfig& c, std::ostream& log) {
  try {
    if (c.cache_dir.empty()) throw ConfigError("cache: no cache_dir configured");
    set_thread_count(c.threads);
    const fs::path dir(c.cache_dir);
    if (action == "purge") {
      std::size_t n = 0;
      if (fs::exists(dir))
        for (const auto& e : fs::directory_iterator(dir))
          if (e.path().extension() == ".bkq" || e.path().extension() == ".tmp") {
            fs::remove(e.path());
            ++n;
          }
      log << "removed " << n << " cache entries from " << dir << "\n";
      return kExitOk;
    }
    auto grid = std::make_shared<VelocityGrid>(c.make_grid());
    const CollisionModel model = c.make_model();
    const AssemblyParams ap = c.make_assembly();
    if (action == "build") {
      OperatorFactory fac(grid, ap, dir);
      for (const auto& [power, path] : needed_units(model)) {
        fac.raw_kernel(power, path);
        log << "cached " << cache_file(dir, grid->hash(), fnv1a(unit_descriptor(power, path, ap)), 0) << "\n";
      }
      return kExitOk;
    }
    if (action == "verify") {
      bool ok = true;
      std::mt19937_64 rng(12345);
      for (const auto& [power, path] : needed_units(model)) {
        const std::uint64_t gh = grid->hash(), mh = fnv1a(unit_descriptor(power, path, ap));
        const fs::path file = cache_file(dir, gh, mh, 0);
        if (!fs::exists(file)) {
          log << "missing " << file << "\n";
          ok = false;
          continue;
        }
        const auto K = read_kernel_cache(file, gh, mh);
        if (!K || K->rows() != grid->size()) {
          log << "stale entry " << file << " (hash mismatch)\n";
          ok = false;
          continue;
        }
        std::uniform_int_distribution<int> pick(0, grid->size() - 1);
        double worst = 0.0;
        for (int r = 0; r < kVerifyRows; ++r) {
          const int i = pick(rng);
          const Eigen::VectorXd row = assemble_kernel_row(*grid, i, power, path, ap);
          const double scale = std::max(row.cwiseAbs().maxCoeff(), 1e-300);
          worst = std::max(worst, (K->row(i).transpose() - row).cwiseAbs().maxCoeff() / scale);
        }
        const bool good = worst <= kVerifyTol;
        log << (good ? "ok " : "MISMATCH ") << file << " (max row deviation " << worst << ")\n";
        ok = ok && good;
      }
      return ok ? kExitOk : kExitValidation;
    }
    throw ConfigError("cache: unknown action '" + action + "' (expected build, verify or purge)");
  } catch (const ConfigError& e) {
    log << "cache " << action << ": " << e.what() << "\n";
    return kExitValidation;
  } catch (const CacheError& e) {
    log << "cache " << action << ": corrupt cache entry: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    log << "cache " << action << ": " << e.what() << "\n";
    return kExitRuntime;
  }
}

} // namespace bkuq
