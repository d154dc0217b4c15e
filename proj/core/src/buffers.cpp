#include "sspg/agent/buffers.hpp"

#include <algorithm>
#include <numeric>

#include "sspg/error.hpp"

namespace sspg::agent {

ShortTermActionMemory::ShortTermActionMemory(int capacity, int action_dim)
    : capacity_(capacity), action_dim_(action_dim) {
  if (capacity < 1 || action_dim < 1) throw ContractError("ShortTermActionMemory: capacity and width must be positive");
  rows_.resize(capacity, action_dim);
}

void ShortTermActionMemory::push(const Matrix& beliefs) {
  if (beliefs.cols() != action_dim_) throw DimensionError("ShortTermActionMemory::push: belief width mismatch");
  for (Eigen::Index i = 0; i < beliefs.rows(); ++i) {
    rows_.row(static_cast<Eigen::Index>(head_)) = beliefs.row(i);
    head_ = (head_ + 1) % static_cast<std::size_t>(capacity_);
    count_ = std::min<std::size_t>(count_ + 1, static_cast<std::size_t>(capacity_));
  }
}

Matrix ShortTermActionMemory::contents() const {
  Matrix out(static_cast<Eigen::Index>(count_), action_dim_);
  const std::size_t cap = static_cast<std::size_t>(capacity_);
  const std::size_t oldest = count_ < cap ? 0 : head_;
  for (std::size_t i = 0; i < count_; ++i) {
    out.row(static_cast<Eigen::Index>(i)) = rows_.row(static_cast<Eigen::Index>((oldest + i) % cap));
  }
  return out;
}

Matrix ShortTermActionMemory::draw(int m, Rng& rng) const {
  if (m < 1) throw ContractError("ShortTermActionMemory::draw: m must be positive");
  const Matrix stored = contents();
  Matrix out(m, action_dim_);
  if (static_cast<int>(count_) >= m) {
    // Partial Fisher-Yates: the first m entries of a shuffled index list.
    std::vector<std::size_t> idx(count_);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (int i = 0; i < m; ++i) {
      const std::size_t j = static_cast<std::size_t>(i) + uniform_index(rng, count_ - static_cast<std::size_t>(i));
      std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
      out.row(i) = stored.row(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]));
    }
    return out;
  }
  const int have = static_cast<int>(count_);
  if (have > 0) out.topRows(have) = stored;
  out.bottomRows(m - have) = uniform_matrix(rng, m - have, action_dim_, -1.0, 1.0);
  return out;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ContractError("ReplayBuffer: capacity must be positive");
  data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
    return;
  }
  data_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= data_.size()) throw ContractError("ReplayBuffer::at: index out of range");
  return data_[(head_ + i) % data_.size()];
}

TransitionBatch ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  if (data_.empty()) throw ContractError("ReplayBuffer::sample: buffer is empty");
  const Transition& first = data_.front();
  const auto b = static_cast<Eigen::Index>(batch);
  TransitionBatch out{Matrix(b, first.state.cols()), Matrix(b, first.action.cols()), Matrix(b, 1),
                      Matrix(b, first.next_state.cols()), Matrix(b, 1)};
  for (Eigen::Index i = 0; i < b; ++i) {
    const Transition& t = data_[uniform_index(rng, data_.size())];
    out.states.row(i) = t.state;
    out.actions.row(i) = t.action;
    out.rewards(i, 0) = t.reward;
    out.next_states.row(i) = t.next_state;
    out.done(i, 0) = t.done ? 1.0 : 0.0;
  }
  return out;
}

}  // namespace sspg::agent
