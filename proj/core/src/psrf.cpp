#include "sspg/diag/psrf.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "sspg/error.hpp"

namespace sspg::diag {

void ConvergenceState::validate() const {
  if (!(n_hat >= 1.0)) throw ContractError("ConvergenceState: n_hat must be >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) throw ContractError("ConvergenceState: rho must lie in [0, 1)");
  if (!(threshold > 1.0)) throw ContractError("ConvergenceState: threshold must be > 1");
  if (n_max < 2) throw ContractError("ConvergenceState: n_max must be >= 2");
}

namespace {

// Per-chain means over steps 1..N, M x d.
Matrix chain_means(const ChainHistory& chain) {
  Matrix means = Matrix::Zero(chain.chains(), chain.dim());
  for (const Matrix& s : chain.steps) means += s;
  return means / static_cast<double>(chain.length());
}

}  // namespace

Matrix within_covariance(const ChainHistory& chain) {
  const int n = chain.length();
  if (n < 2) throw InsufficientSamplesError("within_covariance: need N >= 2 steps, got " + std::to_string(n));
  const Eigen::Index m = chain.chains(), d = chain.dim();
  const Matrix means = chain_means(chain);
  Matrix w = Matrix::Zero(d, d);
  for (const Matrix& s : chain.steps) {
    const Matrix dev = s - means;  // M x d
    w.noalias() += dev.transpose() * dev;
  }
  // Sum over chains of the per-chain scatter, each normalized by N-1, then averaged over M.
  return w / (static_cast<double>(n - 1) * static_cast<double>(m));
}

Matrix between_covariance(const ChainHistory& chain) {
  const Eigen::Index m = chain.chains();
  if (m < 2) throw InsufficientSamplesError("between_covariance: need M >= 2 chains, got " + std::to_string(m));
  if (chain.length() < 1) throw InsufficientSamplesError("between_covariance: chain has no steps");
  const Matrix means = chain_means(chain);
  const Eigen::RowVectorXd grand = means.colwise().mean();
  const Matrix dev = means.rowwise() - grand;
  return dev.transpose() * dev / static_cast<double>(m - 1);
}

PsrfReport psrf(const ChainHistory& chain, PsrfVariant variant) {
  PsrfReport r;
  r.within = within_covariance(chain);
  r.between = between_covariance(chain);
  r.steps = chain.length();
  r.chains = static_cast<int>(chain.chains());
  const Eigen::Index d = r.within.rows();

  Eigen::SelfAdjointEigenSolver<Matrix> wsolver(r.within, Eigen::EigenvaluesOnly);
  if (wsolver.info() != Eigen::Success || wsolver.eigenvalues().minCoeff() <= kSingularEigenvalue) {
    std::vector<int> dims;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (r.within(j, j) <= kSingularEigenvalue) dims.push_back(static_cast<int>(j));
    }
    if (dims.empty()) {
      for (Eigen::Index j = 0; j < d; ++j) dims.push_back(static_cast<int>(j));
    }
    std::ostringstream os;
    os << "psrf: within-chain covariance is singular in dimension(s)";
    for (int j : dims) os << ' ' << j;
    throw DegenerateCovarianceError(os.str(), dims);
  }

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(r.between, r.within, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("psrf", "generalized eigensolver failed");
  r.lambda_max = solver.eigenvalues().maxCoeff();

  const double n = static_cast<double>(r.steps);
  double scaled = r.lambda_max;
  if (variant == PsrfVariant::brooks_gelman) {
    scaled *= (static_cast<double>(r.chains) + 1.0) / static_cast<double>(r.chains);
  }
  r.r_p = std::sqrt((n - 1.0) / n + scaled);
  return r;
}

std::optional<int> min_converged_length(const ChainHistory& chain, const ConvergenceState& state,
                                        PsrfVariant variant) {
  const int full = chain.length();
  if (full < 2) throw InsufficientSamplesError("min_converged_length: need N >= 2 steps");
  if (!(psrf(chain, variant).r_p < state.threshold)) return std::nullopt;
  for (int n = 2; n < full; ++n) {
    try {
      if (psrf(chain.prefix(n), variant).r_p < state.threshold) return n;
    } catch (const DegenerateCovarianceError&) {
      // A short prefix with collapsed chains does not pass.
    }
  }
  return full;
}

ConvergenceState update_running_steps(ConvergenceState state, int n) {
  if (n < 1) throw ContractError("update_running_steps: N must be >= 1");
  state.n_hat = state.rho * state.n_hat + (1.0 - state.rho) * static_cast<double>(n);
  return state;
}

}  // namespace sspg::diag
