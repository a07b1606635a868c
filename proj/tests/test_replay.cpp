#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "antijam/errors.hpp"
#include "antijam/replay.hpp"

using namespace antijam;
using namespace antijam::replay;

namespace {

Transition tagged(double tag) {
  Transition t;
  t.state = {tag};
  t.next_state = {tag};
  t.reward = tag;
  return t;
}

// Every internal node must equal the sum of its children.
void expect_consistent(const SumTree& tree) {
  const auto n = tree.nodes();
  for (std::size_t i = 1; i < tree.leaf_count(); ++i) {
    ASSERT_NEAR(n[i], n[2 * i] + n[2 * i + 1], 1e-9 * (1.0 + n[i])) << "node " << i;
  }
  double leaves = 0.0;
  double max_leaf = 0.0;
  for (std::size_t i = 0; i < tree.capacity(); ++i) {
    leaves += tree.get(i);
    max_leaf = std::max(max_leaf, tree.get(i));
  }
  ASSERT_NEAR(tree.total(), leaves, 1e-9 * (1.0 + leaves));
  ASSERT_EQ(tree.max_priority(), max_leaf);
}

}  // namespace

TEST(UniformBuffer, RingEvictsOldestFirst) {
  UniformBuffer buf(4);
  for (int i = 0; i < 5; ++i) buf.push(tagged(i));
  EXPECT_EQ(buf.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(buf.oldest(i).reward, double(i + 1));
  for (int i = 5; i < 11; ++i) buf.push(tagged(i));
  EXPECT_EQ(buf.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(buf.oldest(i).reward, double(i + 7));
}

TEST(UniformBuffer, SingleItemAndInsufficientData) {
  UniformBuffer buf(10);
  Rng rng(1);
  EXPECT_THROW(buf.sample(1, rng), InsufficientData);
  buf.push(tagged(3.5));
  const auto one = buf.sample(1, rng);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].reward, 3.5);
  EXPECT_THROW(buf.sample(3, rng), InsufficientData);
}

TEST(UniformBuffer, SameSeedSameBatch) {
  UniformBuffer buf(100);
  for (int i = 0; i < 50; ++i) buf.push(tagged(i));
  Rng a(9), b(9);
  const auto x = buf.sample(32, a);
  const auto y = buf.sample(32, b);
  for (std::size_t i = 0; i < 32; ++i) EXPECT_EQ(x[i].reward, y[i].reward);
}

TEST(UniformBuffer, EmpiricalFrequencyIsUniform) {
  UniformBuffer buf(4);
  for (int i = 0; i < 4; ++i) buf.push(tagged(i));
  Rng rng(17);
  std::array<int, 4> counts{};
  const int n = 100000;
  for (int d = 0; d < n / 4; ++d) {
    for (const auto& t : buf.sample(4, rng)) ++counts[static_cast<int>(t.reward)];
  }
  for (int c : counts) EXPECT_NEAR(c / double(n), 0.25, 0.01);
}

TEST(SumTree, RootIsSumAndLeavesPadToPowerOfTwo) {
  SumTree tree(4);
  for (std::size_t i = 0; i < 4; ++i) tree.set(i, double(i + 1));
  EXPECT_DOUBLE_EQ(tree.total(), 10.0);
  EXPECT_DOUBLE_EQ(tree.max_priority(), 4.0);
  SumTree odd(5);
  EXPECT_EQ(odd.leaf_count(), 8u);
}

TEST(SumTree, FindLocatesMassInterval) {
  SumTree tree(4);
  for (std::size_t i = 0; i < 4; ++i) tree.set(i, double(i + 1));
  EXPECT_EQ(tree.find(0.0), 0u);
  EXPECT_EQ(tree.find(0.99), 0u);
  EXPECT_EQ(tree.find(1.0), 1u);
  EXPECT_EQ(tree.find(2.5), 1u);
  EXPECT_EQ(tree.find(3.0), 2u);
  EXPECT_EQ(tree.find(9.999), 3u);
}

TEST(SumTree, NeverFindsZeroPriorityLeaf) {
  SumTree tree(6);
  tree.set(2, 5.0);
  for (double m : {0.0, 1.0, 4.9999, 5.0, 7.0}) EXPECT_EQ(tree.find(m), 2u);
}

TEST(SumTree, ConsistentUnderRandomInterleaving) {
  for (std::size_t cap : {1u, 3u, 8u, 13u, 64u}) {
    SumTree tree(cap);
    Rng rng(cap);
    for (int op = 0; op < 1000; ++op) {
      tree.set(rng.uniform_index(cap), rng.uniform() < 0.1 ? 0.0 : rng.uniform(0.0, 10.0));
      expect_consistent(tree);
    }
  }
}

TEST(SumTree, RejectsBadArguments) {
  SumTree tree(4);
  EXPECT_THROW(tree.set(4, 1.0), UsageError);
  EXPECT_THROW(tree.set(0, -1.0), UsageError);
  EXPECT_THROW(tree.set(0, std::nan("")), UsageError);
}

TEST(PrioritizedBuffer, FirstPushEntersAtOne) {
  PrioritizedBuffer buf(8, 0.6);
  buf.push(tagged(0));
  EXPECT_DOUBLE_EQ(buf.tree().total(), 1.0);
  buf.push(tagged(1), 3.0);
  buf.push(tagged(2));
  EXPECT_DOUBLE_EQ(buf.tree().get(2), 3.0);
}

TEST(PrioritizedBuffer, DegenerateDistribution) {
  PrioritizedBuffer buf(4, 1.0);
  const double p[] = {0.0, 0.0, 5.0, 0.0};
  for (int i = 0; i < 4; ++i) buf.push(tagged(i), p[i]);
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    for (auto idx : buf.sample(8, 0.4, rng).indices) ASSERT_EQ(idx, 2u);
  }
}

TEST(PrioritizedBuffer, EqualPrioritiesGiveUnitWeights) {
  PrioritizedBuffer buf(16, 0.6);
  for (int i = 0; i < 16; ++i) buf.push(tagged(i), 2.0);
  Rng rng(4);
  for (double w : buf.sample(32, 1.0, rng).is_weights) EXPECT_DOUBLE_EQ(w, 1.0);
}

TEST(PrioritizedBuffer, ImportanceWeightsHandComputed) {
  // P = [0.75, 0.25], N = 2: raw weights 1/1.5 and 1/0.5, normalized by the max.
  PrioritizedBuffer buf(2, 1.0);
  buf.push(tagged(0), 3.0);
  buf.push(tagged(1), 1.0);
  Rng rng(5);
  bool saw0 = false, saw1 = false;
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = buf.sample(2, 1.0, rng);
    const double raw0 = 1.0 / (2.0 * 0.75);
    const double raw1 = 1.0 / (2.0 * 0.25);
    double batch_max = 0.0;
    for (auto idx : s.indices) batch_max = std::max(batch_max, idx == 0 ? raw0 : raw1);
    for (std::size_t i = 0; i < s.indices.size(); ++i) {
      const double raw = s.indices[i] == 0 ? raw0 : raw1;
      EXPECT_NEAR(s.is_weights[i], raw / batch_max, 1e-12);
      if (s.indices[i] == 0 && batch_max == raw1) {
        EXPECT_NEAR(s.is_weights[i], 1.0 / 3.0, 1e-12);
        saw0 = true;
      }
      if (s.indices[i] == 1) {
        EXPECT_DOUBLE_EQ(s.is_weights[i], 1.0);
        saw1 = true;
      }
    }
    EXPECT_DOUBLE_EQ(*std::max_element(s.is_weights.begin(), s.is_weights.end()), 1.0);
  }
  EXPECT_TRUE(saw0);
  EXPECT_TRUE(saw1);
}

TEST(PrioritizedBuffer, EmpiricalFrequencyMatchesProportions) {
  PrioritizedBuffer buf(5, 1.0);
  const double p[] = {1.0, 2.0, 3.0, 4.0, 10.0};
  for (int i = 0; i < 5; ++i) buf.push(tagged(i), p[i]);
  Rng rng(6);
  std::array<int, 5> counts{};
  const int n = 100000;
  for (int d = 0; d < n / 25; ++d) {
    for (auto idx : buf.sample(25, 0.4, rng).indices) ++counts[idx];
  }
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(counts[i] / double(n), p[i] / 20.0, 0.01) << i;
}

TEST(PrioritizedBuffer, UpdateAppliesEpsilonFloorAndAlpha) {
  PrioritizedBuffer buf(4, 0.6, 1e-6);
  for (int i = 0; i < 4; ++i) buf.push(tagged(i));
  const std::vector<std::size_t> idx{0, 1};
  const std::vector<double> err{0.0, -2.0};
  buf.update(idx, err);
  EXPECT_NEAR(buf.tree().get(0), std::pow(1e-6, 0.6), 1e-18);
  EXPECT_GT(buf.tree().get(0), 0.0);
  EXPECT_NEAR(buf.tree().get(1), std::pow(2.0 + 1e-6, 0.6), 1e-12);
  EXPECT_DOUBLE_EQ(buf.priority_for(-2.0), buf.priority_for(2.0));
}

TEST(PrioritizedBuffer, AlphaZeroRecoversUniform) {
  PrioritizedBuffer buf(4, 0.0);
  for (int i = 0; i < 4; ++i) buf.push(tagged(i));
  const std::vector<std::size_t> idx{0, 1, 2, 3};
  const std::vector<double> err{0.0, 5.0, 100.0, 0.3};
  buf.update(idx, err);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(buf.tree().get(i), 1.0);
  Rng rng(2);
  std::array<int, 4> counts{};
  const int n = 100000;
  for (int d = 0; d < n / 20; ++d) {
    const auto s = buf.sample(20, 0.7, rng);
    for (auto i : s.indices) ++counts[i];
    for (double w : s.is_weights) ASSERT_DOUBLE_EQ(w, 1.0);
  }
  for (int c : counts) EXPECT_NEAR(c / double(n), 0.25, 0.01);
}

TEST(PrioritizedBuffer, RootTracksLeavesAfterManyUpdates) {
  PrioritizedBuffer buf(64, 0.6);
  Rng rng(7);
  for (int i = 0; i < 100; ++i) buf.push(tagged(i));
  EXPECT_EQ(buf.size(), 64u);
  for (int op = 0; op < 1000; ++op) {
    const std::vector<std::size_t> idx{rng.uniform_index(64)};
    const std::vector<double> err{rng.uniform(-3.0, 3.0)};
    buf.update(idx, err);
    if (op % 7 == 0) buf.push(tagged(op));
  }
  expect_consistent(buf.tree());
}

TEST(PrioritizedBuffer, EvictsInInsertionOrder) {
  PrioritizedBuffer buf(3, 0.6);
  for (int i = 0; i < 7; ++i) buf.push(tagged(i));
  EXPECT_EQ(buf.size(), 3u);
  // Slots 0,1,2 hold items 6,4,5.
  EXPECT_EQ(buf.at(0).reward, 6.0);
  EXPECT_EQ(buf.at(1).reward, 4.0);
  EXPECT_EQ(buf.at(2).reward, 5.0);
}

TEST(PrioritizedBuffer, RejectsInvalidUse) {
  PrioritizedBuffer buf(4, 0.6);
  Rng rng(1);
  EXPECT_THROW(buf.sample(1, 0.4, rng), UsageError);
  buf.push(tagged(0));
  const std::vector<std::size_t> idx{3};
  const std::vector<double> err{1.0};
  EXPECT_THROW(buf.update(idx, err), UsageError);
}
