#include "sspg/diff/tape.hpp"

#include <sstream>

#include "sspg/error.hpp"

namespace sspg::diff {

const Matrix& Var::value() const {
  if (tape_ == nullptr) throw ContractError("Var: use of an unbound variable");
  return tape_->value(id_);
}

double Var::scalar() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) {
    std::ostringstream os;
    os << "Var::scalar: node has shape " << v.rows() << "x" << v.cols();
    throw DimensionError(os.str());
  }
  return v(0, 0);
}

bool Var::requires_grad() const { return tape_ != nullptr && tape_->requires_grad(id_); }

Var Tape::push(Matrix value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), Matrix(), BackwardFn(), requires_grad});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Matrix value) { return push(std::move(value), false); }

Var Tape::variable(Matrix value) { return push(std::move(value), true); }

Var Tape::param(const std::string& name, const Matrix& value) {
  if (auto it = named_.find(name); it != named_.end()) {
    if (!nodes_[it->second].requires_grad) {
      throw ContractError("Tape::param: '" + name + "' already bound as stopped");
    }
    return Var(this, it->second);
  }
  Var v = push(value, true);
  named_.emplace(name, v.id());
  named_order_.emplace_back(name, v.id());
  return v;
}

Var Tape::stopped_param(const std::string& name, const Matrix& value) {
  std::size_t leaf = 0;
  if (auto it = named_.find(name); it != named_.end()) {
    leaf = it->second;
  } else {
    leaf = push(value, true).id();
    named_.emplace(name, leaf);
    named_order_.emplace_back(name, leaf);
  }
  // Consumers get a constant copy, so nothing flows back into the leaf.
  return constant(nodes_[leaf].value);
}

Var Tape::record(Matrix value, const std::vector<Var>& parents, BackwardFn backward) {
  bool needs = false;
  for (const Var& p : parents) {
    if (p.tape() != this) throw ContractError("Tape::record: parent from another tape");
    needs = needs || nodes_[p.id()].requires_grad;
  }
  Var out = push(std::move(value), needs && static_cast<bool>(backward));
  if (nodes_[out.id()].requires_grad) nodes_[out.id()].backward = std::move(backward);
  return out;
}

void Tape::accumulate(std::size_t node, const Matrix& delta) {
  Node& n = nodes_.at(node);
  if (!n.requires_grad) return;
  if (delta.rows() != n.value.rows() || delta.cols() != n.value.cols()) {
    std::ostringstream os;
    os << "Tape::accumulate: adjoint shape " << delta.rows() << "x" << delta.cols()
       << " does not match node shape " << n.value.rows() << "x" << n.value.cols();
    throw DimensionError(os.str());
  }
  if (n.adjoint.size() == 0) {
    n.adjoint = delta;
  } else {
    n.adjoint += delta;
  }
}

Gradients Tape::backward(const Var& root) {
  if (root.tape() != this) throw ContractError("Tape::backward: root from another tape");
  const Matrix& rv = nodes_[root.id()].value;
  if (rv.rows() != 1 || rv.cols() != 1) {
    std::ostringstream os;
    os << "Tape::backward: root must be scalar, got " << rv.rows() << "x" << rv.cols();
    throw ContractError(os.str());
  }
  for (Node& n : nodes_) n.adjoint.resize(0, 0);

  if (nodes_[root.id()].requires_grad) {
    nodes_[root.id()].adjoint = Matrix::Ones(1, 1);
    for (std::size_t i = root.id() + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.adjoint.size() == 0 || !n.backward) continue;
      // Closures only write into parents, which have smaller ids.
      n.backward(*this, n.adjoint);
    }
  }

  Gradients grads;
  for (const auto& [name, id] : named_order_) {
    const Node& n = nodes_[id];
    grads[name] = n.adjoint.size() == 0 ? Matrix::Zero(n.value.rows(), n.value.cols()) : n.adjoint;
  }
  return grads;
}

Matrix Tape::adjoint(const Var& v) const {
  const Node& n = nodes_.at(v.id());
  if (n.adjoint.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.adjoint;
}

}  // namespace sspg::diff
