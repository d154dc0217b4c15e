#pragma once

#include <optional>

#include "sspg/policy/bt_policy.hpp"

namespace sspg::diag {

using diff::Matrix;
using policy::ChainHistory;

/// Which PSRF formula to apply to the (W, B) pair.
enum class PsrfVariant {
  /// sqrt((N-1)/N + lambda_max(W^-1 B))
  literal,
  /// sqrt((N-1)/N + (M+1)/M * lambda_max(W^-1 B)), the Brooks-Gelman scaling.
  brooks_gelman,
};

/// W counts as singular when its smallest eigenvalue is at or below this.
inline constexpr double kSingularEigenvalue = 1e-10;

struct PsrfReport {
  Matrix within;   ///< W, d x d
  Matrix between;  ///< B, d x d
  double lambda_max = 0.0;
  double r_p = 0.0;
  int steps = 0;   ///< N
  int chains = 0;  ///< M
};

/// Adaptive reasoning-length bookkeeping: running mean of converged lengths
/// and the thresholds that govern a single act() call.
struct ConvergenceState {
  double n_hat = 1.0;      ///< running mean of converged lengths
  double rho = 0.99;       ///< decay of the running mean
  double threshold = 1.1;  ///< R^p below this counts as converged
  int n_max = 64;          ///< hard cap on reasoning steps

  /// Throws ContractError unless n_hat >= 1, 0 <= rho < 1, threshold > 1, n_max >= 2.
  void validate() const;
};

/// W = (1/M) sum_m W_m, W_m the unbiased covariance of chain m over steps 1..N.
/// Throws InsufficientSamplesError when N < 2.
Matrix within_covariance(const ChainHistory& chain);

/// B = 1/(M-1) sum_m (mean_m - mean)(mean_m - mean)^T over per-chain means.
/// Throws InsufficientSamplesError when M < 2.
Matrix between_covariance(const ChainHistory& chain);

/// Multivariate potential scale reduction factor of steps 1..N.
/// Throws DegenerateCovarianceError when W is singular beyond the ridge.
PsrfReport psrf(const ChainHistory& chain, PsrfVariant variant = PsrfVariant::literal);

/// When the full chain passes `state.threshold`, the smallest N >= 2 whose
/// prefix passes; std::nullopt otherwise.
std::optional<int> min_converged_length(const ChainHistory& chain, const ConvergenceState& state,
                                        PsrfVariant variant = PsrfVariant::literal);

/// n_hat <- rho * n_hat + (1 - rho) * n.
ConvergenceState update_running_steps(ConvergenceState state, int n);

}  // namespace sspg::diag
