#include "bkuq/config.hpp"

#include "bkuq/common.hpp"
#include "bkuq/solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace bkuq {

namespace {

using json = nlohmann::json;

template <class V> void visit(GridSection& s, V& v);
template <class V> void visit(ModelSection& s, V& v);
template <class V> void visit(BasisSection& s, V& v);
template <class V> void visit(AssemblySection& s, V& v);
template <class V> void visit(SpectrumSection& s, V& v);
template <class V> void visit(DecaySection& s, V& v);
template <class V> void visit(GapSweepSection& s, V& v);
template <class V> void visit(ConvergeSection& s, V& v);
template <class V> void visit(ExperimentSection& s, V& v);
template <class V> void visit(ScenarioConfig& s, V& v);

// Reads the fields of one section and remembers which keys were consumed.
class Reader {
public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config: section '" + path_ + "' must be an object");
  }

  template <class T>
  void operator()(const char* key, T& value) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      value = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config: bad value for '" + where(key) + "': " + e.what());
    }
  }

  template <class S>
  void section(const char* key, S& s) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    Reader sub(*it, where(key));
    visit(s, sub);
    sub.finish();
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw ConfigError("config: unknown key '" + where(item.key()) + "'");
  }

private:
  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

class Writer {
public:
  explicit Writer(json& j) : j_(j) { j_ = json::object(); }
  template <class T>
  void operator()(const char* key, const T& value) {
    j_[key] = value;
  }
  template <class S>
  void section(const char* key, const S& s) {
    json sub;
    Writer w(sub);
    visit(const_cast<S&>(s), w);
    j_[key] = sub;
  }

private:
  json& j_;
};

template <class V>
void visit(GridSection& s, V& v) {
  v("mode", s.mode);
  v("xi_max", s.xi_max);
  v("resolution", s.resolution);
  v("beta", s.beta);
}

template <class V>
void visit(ModelSection& s, V& v) {
  v("family", s.family);
  v("b1", s.b1);
  v("eps", s.eps);
  v("cz", s.cz);
  v("alpha", s.alpha);
}

template <class V>
void visit(BasisSection& s, V& v) {
  v("family", s.family);
  v("K", s.K);
  v("m", s.m);
  v("quadrature_order", s.quadrature_order);
}

template <class V>
void visit(AssemblySection& s, V& v) {
  v("n_r", s.n_r);
  v("n_theta", s.n_theta);
  v("n_phi", s.n_phi);
  v("r_max", s.r_max);
  v("plane_nv", s.plane_nv);
  v("plane_npsi", s.plane_npsi);
  v("nu_nr", s.nu_nr);
  v("nu_nu", s.nu_nu);
}

template <class V>
void visit(SpectrumSection& s, V& v) {
  v("eta_min", s.eta_min);
  v("eta_max", s.eta_max);
  v("eta_count", s.eta_count);
  v("delta", s.delta);
  v("gap_eta_max", s.gap_eta_max);
  v("gap_samples", s.gap_samples);
}

template <class V>
void visit(DecaySection& s, V& v) {
  v("init", s.init);
  v("orders", s.orders);
  v("z_nodes", s.z_nodes);
  v("t_min", s.t_min);
  v("t_max", s.t_max);
  v("t_count", s.t_count);
  v("fit_t0", s.fit_t0);
  v("fit_t1", s.fit_t1);
  v("linf", s.linf);
  v("radial_R", s.radial_R);
  v("radial_order", s.radial_order);
  v("radial_phase", s.radial_phase);
  v("sg_K", s.sg_K);
}

template <class V>
void visit(GapSweepSection& s, V& v) {
  v("m", s.m);
  v("gamma", s.gamma);
  v("K", s.K);
  v("samples", s.samples);
  v("seed", s.seed);
}

template <class V>
void visit(ConvergeSection& s, V& v) {
  v("K", s.K);
  v("reference_nodes", s.reference_nodes);
  v("times", s.times);
  v("radial_R", s.radial_R);
  v("radial_panels", s.radial_panels);
  v("radial_order", s.radial_order);
  v("linf", s.linf);
}

template <class V>
void visit(ExperimentSection& s, V& v) {
  v("scenario", s.scenario);
  v("output", s.output);
  v.section("spectrum", s.spectrum);
  v.section("decay", s.decay);
  v.section("gap", s.gap);
  v.section("converge", s.converge);
}

template <class V>
void visit(ScenarioConfig& s, V& v) {
  v.section("grid", s.grid);
  v.section("model", s.model);
  v.section("basis", s.basis);
  v.section("assembly", s.assembly);
  v.section("experiment", s.experiment);
  v("threads", s.threads);
  v("cache_dir", s.cache_dir);
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError("config: " + msg);
}

} // namespace

VelocityGrid ScenarioConfig::make_grid() const {
  GridMode mode = parse_grid_mode(grid.mode);
  std::array<int, 3> res{1, 1, 1};
  if (mode == GridMode::Axisym2d) {
    require(grid.resolution.size() == 2, "grid.resolution must be [n_z, n_rho] for axisym2d");
    res = {grid.resolution[0], grid.resolution[1], 1};
  } else {
    require(grid.resolution.size() == 1 || grid.resolution.size() == 3,
            "grid.resolution must be [n] or [n, n, n] for full3d");
    int n = grid.resolution[0];
    res = {n, n, n};
    if (grid.resolution.size() == 3) res = {grid.resolution[0], grid.resolution[1], grid.resolution[2]};
  }
  return build_grid(mode, grid.xi_max, res, grid.beta);
}

CollisionModel ScenarioConfig::make_model() const {
  CollisionModel m;
  m.family = parse_kernel_family(model.family);
  m.b1 = model.b1;
  m.eps = model.eps;
  m.cz = model.cz;
  m.alpha = model.alpha;
  m.validate();
  return m;
}

AssemblyParams ScenarioConfig::make_assembly() const {
  AssemblyParams p;
  p.n_r = assembly.n_r;
  p.n_theta = assembly.n_theta;
  p.n_phi = assembly.n_phi;
  p.r_max = assembly.r_max;
  p.plane_nv = assembly.plane_nv;
  p.plane_npsi = assembly.plane_npsi;
  p.nu_nr = assembly.nu_nr;
  p.nu_nu = assembly.nu_nu;
  return p;
}

BasisFamily ScenarioConfig::basis_family() const { return parse_basis_family(basis.family); }

int ScenarioConfig::basis_quadrature_order(int K) const {
  int qmin = min_quadrature_order(K, 1);
  return basis.quadrature_order > 0 ? std::max(basis.quadrature_order, qmin) : qmin;
}

void validate_config(const ScenarioConfig& c) {
  c.make_grid();
  CollisionModel model = c.make_model();
  BasisFamily bf = c.basis_family();

  const AssemblySection& a = c.assembly;
  require(a.n_r > 0 && a.n_theta > 0 && a.n_phi > 0 && a.plane_nv > 0 && a.plane_npsi > 0 && a.nu_nr > 0 &&
              a.nu_nu > 0,
          "assembly node counts must be positive");
  require(a.r_max > 0.0, "assembly.r_max must be positive");

  require(c.basis.K >= 1, "basis.K must be at least 1");
  if (c.basis.quadrature_order > 0 && c.basis.quadrature_order < min_quadrature_order(c.basis.K, 1)) {
    std::ostringstream os;
    os << "basis.quadrature_order " << c.basis.quadrature_order << " is below the exact order "
       << min_quadrature_order(c.basis.K, 1) << " for K = " << c.basis.K;
    throw ConfigError("config: " + os.str());
  }
  GpcBasis basis = make_basis(bf, c.basis.K, c.basis_quadrature_order(c.basis.K));
  weight_matrix(c.basis.K, c.basis.m, basis.growth_n);

  const ExperimentSection& e = c.experiment;
  require(std::find(kScenarioNames.begin(), kScenarioNames.end(), e.scenario) != kScenarioNames.end(),
          "unknown scenario '" + e.scenario + "'");
  require(!e.output.empty(), "experiment.output must name a directory");

  const SpectrumSection& s = e.spectrum;
  require(s.eta_min > 0.0 && s.eta_max > s.eta_min, "spectrum: need 0 < eta_min < eta_max");
  require(s.eta_count >= 3, "spectrum.eta_count must be at least 3");
  require(s.delta > 0.0 && s.gap_eta_max > s.delta, "spectrum: need 0 < delta < gap_eta_max");
  require(s.gap_samples >= 50, "spectrum.gap_samples must be at least 50");

  const DecaySection& d = e.decay;
  parse_init_kind(d.init);
  require(!d.orders.empty(), "decay.orders must not be empty");
  for (int o : d.orders) {
    require(o >= 0 && o <= 2, "decay.orders entries must lie in 0..2");
    if (o > model.alpha) {
      std::ostringstream os;
      os << "decay order " << o << " exceeds the derivative support alpha = " << model.alpha;
      throw ConfigError("config: " + os.str());
    }
  }
  require(!d.z_nodes.empty(), "decay.z_nodes must not be empty");
  for (double z : d.z_nodes)
    if (!(std::abs(z) <= model.cz)) {
      std::ostringstream os;
      os << "decay z node " << z << " lies outside [-C_z, C_z] = [" << -model.cz << ", " << model.cz << "]";
      throw ConfigError("config: " + os.str());
    }
  require(d.t_min > 0.0 && d.t_max > d.t_min && d.t_count >= 10, "decay: need 0 < t_min < t_max, t_count >= 10");
  require(d.fit_t0 >= d.t_min && d.fit_t1 <= d.t_max && d.fit_t1 > d.fit_t0,
          "decay fit window must lie inside the time grid");
  require(d.radial_R > 0.0 && d.radial_order >= 2 && d.radial_phase > 0.0, "decay radial grid settings invalid");
  for (int K : d.sg_K) require(K >= 1, "decay.sg_K entries must be at least 1");
  if (!d.sg_K.empty()) model.c_poly();

  const GapSweepSection& g = e.gap;
  require(!g.m.empty() && !g.gamma.empty() && !g.K.empty(), "gap sweep lists must not be empty");
  for (int K : g.K) require(K >= 1, "gap.K entries must be at least 1");
  for (double m : g.m) {
    weight_matrix(2, m, basis.growth_n);
    for (double gamma : g.gamma) {
      double lim = 1.0 / (std::pow(2.0, m) + 1.0);
      if (!(gamma >= 0.0 && gamma < lim)) {
        std::ostringstream os;
        os << "gap sweep: γ = " << gamma << " violates γ < 1/(2^m+1) = " << lim << " for m = " << m;
        throw ConfigError("config: " + os.str());
      }
    }
  }
  require(g.samples >= 1, "gap.samples must be positive");

  const ConvergeSection& v = e.converge;
  require(v.K.size() >= 3, "converge.K needs at least three values");
  for (int K : v.K) {
    require(K >= 1, "converge.K entries must be at least 1");
    if (!(2 * K < v.reference_nodes)) {
      std::ostringstream os;
      os << "reference resolution: " << v.reference_nodes << " collocation nodes cannot resolve K = " << K
         << " (need more than 2K)";
      throw ConfigError("config: " + os.str());
    }
  }
  require(!v.times.empty(), "converge.times must not be empty");
  for (std::size_t i = 0; i < v.times.size(); ++i) {
    require(v.times[i] >= 0.0, "converge.times must be nonnegative");
    if (i > 0) require(v.times[i] > v.times[i - 1], "converge.times must increase");
  }
  require(v.radial_R > 0.0 && v.radial_panels >= 1 && v.radial_order >= 2, "converge radial grid settings invalid");
}

ScenarioConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }
  ScenarioConfig c;
  Reader r(j, "");
  visit(c, r);
  r.finish();
  validate_config(c);
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("config: cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ScenarioConfig& c) {
  json j;
  Writer w(j);
  visit(const_cast<ScenarioConfig&>(c), w);
  return j.dump(2) + "\n";
}

} // namespace bkuq
