#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "antijam/rng.hpp"

namespace antijam::replay {

struct Transition {
  std::vector<double> state;
  std::size_t action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  bool done = false;
};

// Fixed-capacity FIFO ring.
class UniformBuffer {
 public:
  explicit UniformBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }

  // i-th oldest retained transition.
  const Transition& oldest(std::size_t i) const;

  // k draws with replacement. Throws InsufficientData when size() < k.
  std::vector<Transition> sample(std::size_t k, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<Transition> items_;
};

// Binary sum tree over a power-of-two number of leaves. A parallel max tree
// tracks the largest leaf so new items can enter at the current maximum.
class SumTree {
 public:
  explicit SumTree(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  std::size_t leaf_count() const { return leaves_; }

  void set(std::size_t leaf, double priority);
  double get(std::size_t leaf) const { return sums_[leaves_ + leaf]; }
  double total() const { return sums_[1]; }
  double max_priority() const { return maxes_[1]; }

  // Leaf whose cumulative-priority interval contains `mass`; never returns a
  // zero-priority leaf while total() > 0.
  std::size_t find(double mass) const;

  // Heap-ordered node array: node 1 is the root, node n has children 2n and 2n+1,
  // leaves occupy [leaf_count(), 2 * leaf_count()).
  std::span<const double> nodes() const { return sums_; }

 private:
  std::size_t capacity_;
  std::size_t leaves_;
  std::vector<double> sums_;
  std::vector<double> maxes_;
};

struct PrioritizedSample {
  std::vector<std::size_t> indices;
  std::vector<Transition> transitions;
  std::vector<double> is_weights;
};

class PrioritizedBuffer {
 public:
  PrioritizedBuffer(std::size_t capacity, double alpha, double epsilon = 1e-6);

  // Inserts at the current maximum leaf priority (1 when empty).
  void push(Transition t);
  void push(Transition t, double priority);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return tree_.capacity(); }
  double alpha() const { return alpha_; }
  const SumTree& tree() const { return tree_; }
  const Transition& at(std::size_t index) const;

  // Stored priority for a TD error: (|delta| + epsilon)^alpha.
  double priority_for(double td_error) const;

  // Stratified proportional sampling: k equal mass segments, one draw each.
  // IS weights (N P(i))^-beta normalized by the batch maximum.
  PrioritizedSample sample(std::size_t k, double beta, Rng& rng) const;

  void update(std::span<const std::size_t> indices, std::span<const double> td_errors);

 private:
  SumTree tree_;
  double alpha_;
  double epsilon_;
  std::size_t cursor_ = 0;
  std::size_t size_ = 0;
  std::vector<Transition> data_;
};

}  // namespace antijam::replay
