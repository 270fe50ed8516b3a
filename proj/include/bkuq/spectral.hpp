#pragma once

#include "bkuq/common.hpp"
#include "bkuq/dense_eigen.hpp"
#include "bkuq/linear_operator.hpp"

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bkuq {

// A(eta) = -i xi_z eta I + mu L in symmetric coordinates (similar to the
// nodal symbol through the diagonal weight scaling).
struct SymbolMatrix {
  double eta = 0.0;
  double mu = 1.0;
  CMatrix A;
};

SymbolMatrix assemble_symbol(const LinearOperator& L, double eta, double mu = 1.0);

struct BranchSample {
  double eta = 0.0;
  int branch = 0;
  cplx sigma;
};

// sigma_j(eta) ~ -i a_j eta - A_j eta^2 near eta = 0.
struct BranchFit {
  int branch = 0;
  bool available = true;
  std::vector<double> eta;
  std::vector<cplx> sigma;
  double a = 0.0;
  double A = 0.0;
  double residual = 0.0; // rms of the fit misfit relative to rms |sigma| over the window
  int window_count = 0;
};

struct BranchTrackResult {
  std::vector<BranchFit> fits; // j = 0..4
  std::vector<BranchSample> samples;
};

// Branch crossing that overlap matching cannot resolve.
class BranchAmbiguity : public NumericalError {
public:
  BranchAmbiguity(const std::string& what, double eta) : NumericalError(what), eta_(eta) {}
  double eta() const { return eta_; }

private:
  double eta_;
};

BranchTrackResult branch_track(const LinearOperator& L, const MacroBasis& mb, const std::vector<double>& etas);

struct GapCertificate {
  double delta = 0.0;
  double tau = 0.0;
  double worst_eta = 0.0;
  double worst_mu = 1.0;
  double max_real_all = 0.0; // max Re over every eigenvalue of every sample
  double nonfluid_max_at_zero = 0.0;
  std::vector<double> etas;
  std::vector<double> mus;
  std::vector<double> max_real_nonfluid; // per (mu, eta), row-major in mu
  bool sampling_based = true;
};

class CertificationFailure : public NumericalError {
public:
  CertificationFailure(const std::string& what, double eta) : NumericalError(what), eta_(eta) {}
  double eta() const { return eta_; }

private:
  double eta_;
};

// Sweeps eta over n_samples points on [0, eta_max] for every block multiplier
// mu and reports tau = -max Re sigma with the fluid branches removed below delta.
GapCertificate gap_certify(const LinearOperator& L, int fluid_count, double delta, double eta_max, int n_samples,
                           const std::vector<double>& mus = {1.0}, bool throw_on_failure = true);

struct CoupledGapResult {
  double bound = 0.0;
  double gamma_eff = 0.0;     // off-diagonal row sum of W B W^{-1} divided by (2^m + 1)
  double row_sum = 0.0;       // max_k sum_{j != k} |(W B W^{-1})_kj| / (W B W^{-1})_kk
  double rayleigh_check = 0.0; // max sampled Rayleigh quotient on microscopic vectors (must be <= -bound)
  double spectrum_gap = 0.0;  // max |lambda(B) - lambda(W B W^{-1})|
};

// Explicit coupled spectral-gap bound (1 - (2^m + 1) gamma_eff) nu1 with the
// admissibility guard gamma < 1 / (2^m + 1).
CoupledGapResult coupled_gap_estimate(const Eigen::MatrixXd& B, const Eigen::MatrixXd& W, double m, double gamma,
                                      const LinearOperator& L, const MacroBasis& mb, double nu1, int samples = 100,
                                      unsigned seed = 7);

} // namespace bkuq
