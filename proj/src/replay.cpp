#include "antijam/replay.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "antijam/errors.hpp"

namespace antijam::replay {

UniformBuffer::UniformBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("buffer capacity must be >= 1");
  items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void UniformBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[cursor_] = std::move(t);
  }
  cursor_ = (cursor_ + 1) % capacity_;
}

const Transition& UniformBuffer::oldest(std::size_t i) const {
  if (i >= items_.size()) throw UsageError("buffer index out of range");
  const std::size_t start = items_.size() < capacity_ ? 0 : cursor_;
  return items_[(start + i) % items_.size()];
}

std::vector<Transition> UniformBuffer::sample(std::size_t k, Rng& rng) const {
  if (items_.size() < k || items_.empty()) {
    throw InsufficientData("buffer holds " + std::to_string(items_.size()) + " < " +
                           std::to_string(k) + " transitions");
  }
  std::vector<Transition> batch;
  batch.reserve(k);
  for (std::size_t i = 0; i < k; ++i) batch.push_back(items_[rng.uniform_index(items_.size())]);
  return batch;
}

SumTree::SumTree(std::size_t capacity)
    : capacity_(capacity), leaves_(std::bit_ceil(std::max<std::size_t>(capacity, 1))) {
  if (capacity == 0) throw std::invalid_argument("sum tree capacity must be >= 1");
  sums_.assign(2 * leaves_, 0.0);
  maxes_.assign(2 * leaves_, 0.0);
}

void SumTree::set(std::size_t leaf, double priority) {
  if (leaf >= capacity_) throw UsageError("sum tree leaf " + std::to_string(leaf) + " out of range");
  if (!(priority >= 0.0) || !std::isfinite(priority)) {
    throw UsageError("priority must be finite and >= 0");
  }
  std::size_t node = leaves_ + leaf;
  sums_[node] = priority;
  maxes_[node] = priority;
  for (node /= 2; node >= 1; node /= 2) {
    sums_[node] = sums_[2 * node] + sums_[2 * node + 1];
    maxes_[node] = std::max(maxes_[2 * node], maxes_[2 * node + 1]);
  }
}

std::size_t SumTree::find(double mass) const {
  std::size_t node = 1;
  while (node < leaves_) {
    const std::size_t left = 2 * node;
    const std::size_t right = left + 1;
    if ((mass < sums_[left] && sums_[left] > 0.0) || sums_[right] <= 0.0) {
      node = left;
    } else {
      mass -= sums_[left];
      node = right;
    }
  }
  return node - leaves_;
}

PrioritizedBuffer::PrioritizedBuffer(std::size_t capacity, double alpha, double epsilon)
    : tree_(capacity), alpha_(alpha), epsilon_(epsilon) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("PER alpha must be >= 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("PER epsilon must be > 0");
  data_.resize(capacity);
}

double PrioritizedBuffer::priority_for(double td_error) const {
  return std::pow(std::abs(td_error) + epsilon_, alpha_);
}

void PrioritizedBuffer::push(Transition t) {
  const double p = size_ == 0 ? 1.0 : tree_.max_priority();
  push(std::move(t), p > 0.0 ? p : 1.0);
}

void PrioritizedBuffer::push(Transition t, double priority) {
  data_[cursor_] = std::move(t);
  tree_.set(cursor_, priority);
  cursor_ = (cursor_ + 1) % tree_.capacity();
  size_ = std::min(size_ + 1, tree_.capacity());
}

const Transition& PrioritizedBuffer::at(std::size_t index) const {
  if (index >= size_) throw UsageError("prioritized buffer index out of range");
  return data_[index];
}

PrioritizedSample PrioritizedBuffer::sample(std::size_t k, double beta, Rng& rng) const {
  if (size_ == 0) throw UsageError("sampling from an empty prioritized buffer");
  if (k == 0) throw UsageError("sample size must be >= 1");
  if (!(beta >= 0.0 && beta <= 1.0)) throw UsageError("beta must lie in [0, 1]");
  const double total = tree_.total();
  if (!(total > 0.0)) throw UsageError("prioritized buffer has zero total priority");

  PrioritizedSample out;
  out.indices.reserve(k);
  out.transitions.reserve(k);
  out.is_weights.reserve(k);
  const double segment = total / static_cast<double>(k);
  const double n = static_cast<double>(size_);
  double max_w = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double mass = segment * (static_cast<double>(i) + rng.uniform());
    const std::size_t leaf = tree_.find(std::min(mass, total));
    const double prob = tree_.get(leaf) / total;
    const double w = std::pow(n * prob, -beta);
    max_w = std::max(max_w, w);
    out.indices.push_back(leaf);
    out.transitions.push_back(data_[leaf]);
    out.is_weights.push_back(w);
  }
  for (double& w : out.is_weights) w /= max_w;
  return out;
}

void PrioritizedBuffer::update(std::span<const std::size_t> indices,
                               std::span<const double> td_errors) {
  if (indices.size() != td_errors.size()) throw UsageError("indices/td_errors length mismatch");
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= size_) {
      throw UsageError("priority update for invalid index " + std::to_string(indices[i]));
    }
    tree_.set(indices[i], priority_for(td_errors[i]));
  }
}

}  // namespace antijam::replay
