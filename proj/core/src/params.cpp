#include "sspg/diff/params.hpp"

#include <cmath>

#include "sspg/error.hpp"

namespace sspg::diff {

void ParamStore::add(const std::string& name, Matrix value) {
  if (params_.count(name) != 0) throw ContractError("ParamStore::add: duplicate parameter '" + name + "'");
  const auto r = value.rows(), c = value.cols();
  params_.emplace(name, Parameter{std::move(value), Matrix::Zero(r, c), Matrix::Zero(r, c)});
}

const Parameter& ParamStore::parameter(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ContractError("ParamStore: unknown parameter '" + name + "'");
  return it->second;
}

Parameter& ParamStore::mutable_parameter(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ContractError("ParamStore: unknown parameter '" + name + "'");
  return it->second;
}

const Matrix& ParamStore::value(const std::string& name) const { return parameter(name).value; }

Matrix& ParamStore::mutable_value(const std::string& name) { return mutable_parameter(name).value; }

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, _] : params_) out.push_back(name);
  return out;
}

Eigen::Index ParamStore::scalar_count() const {
  Eigen::Index n = 0;
  for (const auto& [_, p] : params_) n += p.value.size();
  return n;
}

void ParamStore::set_step(std::int64_t step) {
  if (step < 0) throw ContractError("ParamStore::set_step: negative step counter");
  step_ = step;
}

Var bind(Tape& tape, const ParamStore& store, const std::string& name, Binding binding) {
  const Matrix& v = store.value(name);
  switch (binding) {
    case Binding::trainable:
      return tape.param(name, v);
    case Binding::stopped:
      return tape.stopped_param(name, v);
    case Binding::frozen:
    default:
      return tape.constant(v);
  }
}

void adam_step(ParamStore& store, const Gradients& grads, const AdamConfig& config) {
  for (const auto& name : store.names()) {
    auto it = grads.find(name);
    if (it == grads.end()) throw ContractError("adam_step: missing gradient for '" + name + "'");
    const Matrix& v = store.value(name);
    if (it->second.rows() != v.rows() || it->second.cols() != v.cols()) {
      throw DimensionError("adam_step: gradient shape mismatch for '" + name + "'");
    }
  }
  store.increment_step();
  const double t = static_cast<double>(store.step());
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  for (const auto& name : store.names()) {
    Parameter& p = store.mutable_parameter(name);
    const Matrix& g = grads.at(name);
    p.first_moment = config.beta1 * p.first_moment + (1.0 - config.beta1) * g;
    p.second_moment = config.beta2 * p.second_moment + (1.0 - config.beta2) * g.cwiseProduct(g);
    const auto m_hat = p.first_moment.array() / bc1;
    const auto v_hat = p.second_moment.array() / bc2;
    p.value.array() -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
  }
}

Gradients with_prefix(const Gradients& grads, const std::string& prefix) {
  Gradients out;
  for (const auto& [name, g] : grads) {
    if (name.compare(0, prefix.size(), prefix) == 0) out.emplace(name, g);
  }
  return out;
}

}  // namespace sspg::diff
