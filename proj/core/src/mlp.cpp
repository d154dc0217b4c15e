#include "sspg/diff/mlp.hpp"

#include <cmath>
#include <sstream>

#include "sspg/diff/ops.hpp"
#include "sspg/error.hpp"

namespace sspg::diff {

void MlpSpec::validate() const {
  bool ok = input > 0 && output > 0;
  for (int h : hidden) ok = ok && h > 0;
  if (!ok) throw ContractError("MlpSpec: all layer widths must be positive");
}

std::string weight_name(const std::string& prefix, int layer) {
  return prefix + "/l" + std::to_string(layer) + "/W";
}

std::string bias_name(const std::string& prefix, int layer) {
  return prefix + "/l" + std::to_string(layer) + "/b";
}

namespace {

std::vector<int> widths(const MlpSpec& spec) {
  std::vector<int> w{spec.input};
  w.insert(w.end(), spec.hidden.begin(), spec.hidden.end());
  w.push_back(spec.output);
  return w;
}

}  // namespace

void mlp_init(const MlpSpec& spec, ParamStore& store, const std::string& prefix, Rng& rng) {
  spec.validate();
  const auto w = widths(spec);
  for (int l = 0; l + 1 < static_cast<int>(w.size()); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(w[l]));
    store.add(weight_name(prefix, l), uniform_matrix(rng, w[l], w[l + 1], -bound, bound));
    store.add(bias_name(prefix, l), uniform_matrix(rng, 1, w[l + 1], -bound, bound));
  }
}

void mlp_init_zero(const MlpSpec& spec, ParamStore& store, const std::string& prefix) {
  spec.validate();
  const auto w = widths(spec);
  for (int l = 0; l + 1 < static_cast<int>(w.size()); ++l) {
    store.add(weight_name(prefix, l), Matrix::Zero(w[l], w[l + 1]));
    store.add(bias_name(prefix, l), Matrix::Zero(1, w[l + 1]));
  }
}

Var mlp_forward(Tape& tape, const MlpSpec& spec, const ParamStore& store, const std::string& prefix,
                const Var& x, Binding binding) {
  if (x.cols() != spec.input) {
    std::ostringstream os;
    os << "mlp_forward(" << prefix << "): input has " << x.cols() << " columns, expected "
       << spec.input;
    throw DimensionError(os.str());
  }
  Var h = x;
  const int layers = spec.layer_count();
  for (int l = 0; l < layers; ++l) {
    Var w = diff::bind(tape, store, weight_name(prefix, l), binding);
    Var b = diff::bind(tape, store, bias_name(prefix, l), binding);
    h = add(matmul(h, w), b);
    if (l + 1 < layers) h = relu(h);
  }
  return h;
}

Matrix mlp_evaluate(const MlpSpec& spec, const ParamStore& store, const std::string& prefix,
                    const Matrix& x) {
  Tape tape;
  return mlp_forward(tape, spec, store, prefix, tape.constant(x), Binding::frozen).value();
}

}  // namespace sspg::diff
