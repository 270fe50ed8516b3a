#pragma once

#include "bkuq/collision_model.hpp"
#include "bkuq/gpc_basis.hpp"
#include "bkuq/kernel_assembly.hpp"
#include "bkuq/radial.hpp"
#include "bkuq/velocity_grid.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace bkuq {

struct GridSection {
  std::string mode = "axisym2d";
  double xi_max = 6.0;
  std::vector<int> resolution{40, 20};
  double beta = 2.0;
  bool operator==(const GridSection&) const = default;
};

struct ModelSection {
  std::string family = "proportional";
  double b1 = 0.1;
  double eps = 0.5;
  double cz = 1.0;
  int alpha = 2;
  bool operator==(const ModelSection&) const = default;
};

struct BasisSection {
  std::string family = "uniform-legendre";
  int K = 4;
  double m = 2.0;
  int quadrature_order = 0; // 0 selects the minimum exact order
  bool operator==(const BasisSection&) const = default;
};

struct AssemblySection {
  int n_r = 40;
  int n_theta = 40;
  int n_phi = 24;
  double r_max = 14.0;
  int plane_nv = 20;
  int plane_npsi = 16;
  int nu_nr = 64;
  int nu_nu = 64;
  bool operator==(const AssemblySection&) const = default;
};

struct SpectrumSection {
  double eta_min = 0.02;
  double eta_max = 0.3;
  int eta_count = 15;
  double delta = 0.5;
  double gap_eta_max = 10.0;
  int gap_samples = 100;
  bool operator==(const SpectrumSection&) const = default;
};

struct DecaySection {
  std::string init = "macro";
  std::vector<int> orders{0};
  std::vector<double> z_nodes{0.0};
  double t_min = 0.5;
  double t_max = 400.0;
  int t_count = 60;
  double fit_t0 = 20.0;
  double fit_t1 = 300.0;
  bool linf = true;
  double radial_R = 10.0;
  int radial_order = 20;
  double radial_phase = 40.0;
  // SG weighted-norm decay for each listed K (empty disables it)
  std::vector<int> sg_K{};
  bool operator==(const DecaySection&) const = default;
};

struct GapSweepSection {
  std::vector<double> m{2.0};
  std::vector<double> gamma{0.1};
  std::vector<int> K{2, 4, 6, 8};
  int samples = 100;
  unsigned seed = 7;
  bool operator==(const GapSweepSection&) const = default;
};

struct ConvergeSection {
  std::vector<int> K{2, 3, 4, 5, 6, 7, 8};
  int reference_nodes = 32;
  std::vector<double> times{0.0, 0.5, 1.0, 2.0, 5.0};
  double radial_R = 6.0;
  int radial_panels = 6;
  int radial_order = 12;
  bool linf = true;
  bool operator==(const ConvergeSection&) const = default;
};

struct ExperimentSection {
  std::string scenario = "spectrum";
  std::string output = "out";
  SpectrumSection spectrum;
  DecaySection decay;
  GapSweepSection gap;
  ConvergeSection converge;
  bool operator==(const ExperimentSection&) const = default;
};

struct ScenarioConfig {
  GridSection grid;
  ModelSection model;
  BasisSection basis;
  AssemblySection assembly;
  ExperimentSection experiment;
  unsigned threads = 0; // 0 = available cores
  std::string cache_dir;  // empty disables the disk cache
  bool operator==(const ScenarioConfig&) const = default;

  VelocityGrid make_grid() const;
  CollisionModel make_model() const;
  AssemblyParams make_assembly() const;
  BasisFamily basis_family() const;
  int basis_quadrature_order(int K) const;
};

inline const std::vector<std::string> kScenarioNames{"spectrum", "decay", "gap-certify", "gpc-converge",
                                                     "validate"};

// Parses the text form; every unknown key is an error and every module guard
// is re-checked (see validate_config).
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& file);
// Canonical text form with every key present (sorted, stable).
std::string serialize_config(const ScenarioConfig& c);
void validate_config(const ScenarioConfig& c);

} // namespace bkuq
