#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace sspg::diff {

/// Dense real matrix. Rows index batch elements, columns index features.
using Matrix = Eigen::MatrixXd;

/// Gradient of a scalar root with respect to named parameters.
using Gradients = std::map<std::string, Matrix>;

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  /// Value of a 1x1 node.
  double scalar() const;

  Tape* tape() const noexcept { return tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }
  bool requires_grad() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Propagates the adjoint of a node into its parents' adjoints.
using BackwardFn = std::function<void(Tape& tape, const Matrix& adjoint)>;

/// Append-only record of a computation for reverse-mode differentiation.
///
/// Nodes are stored in creation order, which is a topological order of the
/// graph: every parent is created before its children. `backward` therefore
/// walks ids downward from the root and visits each node once. Adjoints of a
/// node with several consumers accumulate additively.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that never receives gradients.
  Var constant(Matrix value);
  /// Anonymous leaf that receives gradients; read them with `adjoint`.
  Var variable(Matrix value);
  /// Named trainable leaf. Repeated calls with the same name return the same
  /// node, so every use of a parameter feeds one gradient entry.
  Var param(const std::string& name, const Matrix& value);
  /// Named leaf whose consumers see a gradient-stopped copy. The leaf itself
  /// is reported by `backward` (always with a zero gradient).
  Var stopped_param(const std::string& name, const Matrix& value);

  /// Records an interior node. `backward` may be empty when no parent
  /// requires gradients.
  Var record(Matrix value, const std::vector<Var>& parents, BackwardFn backward);

  /// Reverse sweep from a 1x1 root. Returns gradients of every named leaf.
  /// Throws ContractError when the root is not scalar.
  Gradients backward(const Var& root);

  /// Adds `delta` into the adjoint of `node` (no-op for constants).
  void accumulate(std::size_t node, const Matrix& delta);

  const Matrix& value(std::size_t node) const { return nodes_.at(node).value; }
  bool requires_grad(std::size_t node) const { return nodes_.at(node).requires_grad; }
  /// Adjoint after `backward`; zero matrix if the node was not reached.
  Matrix adjoint(const Var& v) const;

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix adjoint;  // empty until first accumulation
    BackwardFn backward;
    bool requires_grad = false;
  };

  Var push(Matrix value, bool requires_grad);

  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::size_t> named_;
  std::vector<std::pair<std::string, std::size_t>> named_order_;
};

}  // namespace sspg::diff
