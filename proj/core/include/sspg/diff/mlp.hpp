#pragma once

#include <string>
#include <vector>

#include "sspg/diff/params.hpp"
#include "sspg/rng.hpp"

namespace sspg::diff {

/// Fully connected ReLU network: input -> hidden... -> output (linear head).
struct MlpSpec {
  int input = 1;
  std::vector<int> hidden;
  int output = 1;

  /// Throws ContractError unless every width is positive.
  void validate() const;
  int layer_count() const noexcept { return static_cast<int>(hidden.size()) + 1; }
};

/// Parameter names of layer `i`: "<prefix>/l<i>/W" (in x out) and "<prefix>/l<i>/b" (1 x out).
std::string weight_name(const std::string& prefix, int layer);
std::string bias_name(const std::string& prefix, int layer);

/// Registers the network's parameters in `store`, drawn U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
void mlp_init(const MlpSpec& spec, ParamStore& store, const std::string& prefix, Rng& rng);

/// Registers all-zero parameters.
void mlp_init_zero(const MlpSpec& spec, ParamStore& store, const std::string& prefix);

/// Records the forward pass of `x` (rows = batch) through the network.
/// Throws DimensionError when x.cols() != spec.input.
Var mlp_forward(Tape& tape, const MlpSpec& spec, const ParamStore& store, const std::string& prefix,
                const Var& x, Binding binding);

/// Forward pass without gradient bookkeeping for the caller.
Matrix mlp_evaluate(const MlpSpec& spec, const ParamStore& store, const std::string& prefix,
                    const Matrix& x);

}  // namespace sspg::diff
