#pragma once

#include <cstddef>
#include <vector>

#include "sspg/diff/tape.hpp"
#include "sspg/rng.hpp"

namespace sspg::agent {

using diff::Matrix;

/// Bounded FIFO of recent action-beliefs used to seed new reasoning chains.
class ShortTermActionMemory {
 public:
  ShortTermActionMemory(int capacity, int action_dim);

  /// Appends every row of `beliefs`, evicting the oldest rows beyond capacity.
  void push(const Matrix& beliefs);

  /// Exactly `m` beliefs: drawn uniformly without replacement when the memory
  /// holds at least `m`, otherwise every stored belief plus uniform cube samples.
  Matrix draw(int m, Rng& rng) const;

  int size() const noexcept { return static_cast<int>(count_); }
  int capacity() const noexcept { return capacity_; }
  int action_dim() const noexcept { return action_dim_; }
  /// Stored beliefs, oldest first.
  Matrix contents() const;
  void clear() noexcept { count_ = head_ = 0; }

 private:
  int capacity_;
  int action_dim_;
  Matrix rows_;
  std::size_t head_ = 0;   // next write position
  std::size_t count_ = 0;
};

struct Transition {
  Matrix state;       ///< 1 x state_dim
  Matrix action;      ///< 1 x action_dim
  double reward = 0.0;
  Matrix next_state;  ///< 1 x state_dim
  bool done = false;
};

/// Row-stacked sample of transitions.
struct TransitionBatch {
  Matrix states;
  Matrix actions;
  Matrix rewards;  ///< B x 1
  Matrix next_states;
  Matrix done;     ///< B x 1, 1.0 for terminal transitions

  Eigen::Index size() const noexcept { return actions.rows(); }
};

/// FIFO experience buffer with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  /// `batch` transitions drawn uniformly with replacement. Throws ContractError when empty.
  TransitionBatch sample(std::size_t batch, Rng& rng) const;

  std::size_t size() const noexcept { return data_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  /// i-th oldest stored transition.
  const Transition& at(std::size_t i) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> data_;
  std::size_t head_ = 0;  // oldest element once full
};

}  // namespace sspg::agent
