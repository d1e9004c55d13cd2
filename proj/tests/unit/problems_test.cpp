#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "topoproj/constraints.hpp"
#include "topoproj/errors.hpp"
#include "topoproj/problems.hpp"

namespace topoproj {
namespace {

double min_pair_distance(const std::vector<NodeState>& s) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < s.size(); ++a)
    for (std::size_t b = a + 1; b < s.size(); ++b)
      best = std::min(best, (position_of(s[a]) - position_of(s[b])).norm());
  return best;
}

TEST(GenerateInstance, ConstraintCounts) {
  for (std::size_t n : {2u, 3u, 6u, 7u, 20u}) {
    const auto inst = generate_instance(n, 1);
    EXPECT_EQ(inst.constraints.separations.size(), n * (n - 1) / 2);
    EXPECT_EQ(inst.constraints.anchors.size(), (n + 1) / 2);
    EXPECT_EQ(inst.constraints.orderings.size(), n - 1);
    EXPECT_EQ(inst.initial_states.size(), n);
  }
  const auto six = generate_instance(6, 0);
  EXPECT_EQ(six.constraints.separations.size(), 15u);
  EXPECT_EQ(six.constraints.anchors.size(), 3u);
  EXPECT_EQ(six.constraints.orderings.size(), 5u);
}

TEST(GenerateInstance, DeterministicPerSeed) {
  const auto a = generate_instance(9, 1234);
  const auto b = generate_instance(9, 1234);
  EXPECT_EQ(a.initial_states, b.initial_states);
  ASSERT_EQ(a.constraints.anchors.size(), b.constraints.anchors.size());
  for (const auto& [id, ref] : a.constraints.anchors) EXPECT_EQ(b.constraints.anchors.at(id), ref);
  const auto c = generate_instance(9, 1235);
  EXPECT_NE(a.initial_states, c.initial_states);
}

TEST(GenerateInstance, DrawRanges) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = generate_instance(8, seed);
    for (const auto& s : inst.initial_states) {
      for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_GE(s[i], 0.0);
        EXPECT_LT(s[i], 1.0);
      }
      for (std::size_t i = 3; i < kStateDim; ++i) {
        EXPECT_GE(s[i], -0.1);
        EXPECT_LT(s[i], 0.1);
      }
    }
    for (const auto& [id, ref] : inst.constraints.anchors) {
      EXPECT_LT(id, 4u);
      for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_GE(ref[i], 0.0);
        EXPECT_LT(ref[i], 1.0);
      }
      EXPECT_EQ(ref.values().tail<61>(), inst.initial_states[id].values().tail<61>());
    }
  }
}

TEST(GenerateInstance, ChainOrderingsAndSeparations) {
  const auto inst = generate_instance(5, 3);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& o = inst.constraints.orderings[i];
    EXPECT_EQ(o.a, i);
    EXPECT_EQ(o.b, i + 1);
    EXPECT_EQ(o.axis, 0u);
    EXPECT_EQ(o.margin, 0.0);
  }
  std::set<std::pair<NodeId, NodeId>> pairs;
  for (const auto& c : inst.constraints.separations) {
    EXPECT_EQ(c.min_dist, 0.1);
    pairs.emplace(c.a, c.b);
  }
  EXPECT_EQ(pairs.size(), 10u);
}

TEST(GenerateInstance, ConfigOverrides) {
  GeneratorConfig cfg;
  cfg.anchor_fraction = 1.0;
  cfg.n_orderings = 2;
  cfg.min_sep = 0.05;
  const auto inst = generate_instance(6, 8, cfg);
  EXPECT_EQ(inst.constraints.anchors.size(), 6u);
  EXPECT_EQ(inst.constraints.orderings.size(), 2u);
  EXPECT_EQ(inst.constraints.separations.front().min_dist, 0.05);
  cfg.anchor_fraction = 0.0;
  EXPECT_TRUE(generate_instance(6, 8, cfg).constraints.anchors.empty());
}

TEST(GenerateInstance, RejectsBadArguments) {
  EXPECT_THROW((void)generate_instance(1, 0), InvalidInput);
  GeneratorConfig cfg;
  cfg.anchor_fraction = 1.5;
  EXPECT_THROW((void)generate_instance(4, 0, cfg), InvalidInput);
}

TEST(GenerateInstance, PhysicsAwareModeKeepsOtherDraws) {
  GeneratorConfig cfg;
  cfg.init_mode = InitMode::PhysicsAware;
  const auto plain = generate_instance(10, 42);
  const auto placed = generate_instance(10, 42, cfg);
  for (std::size_t v = 0; v < 10; ++v) {
    EXPECT_EQ(plain.initial_states[v].values().tail<61>(),
              placed.initial_states[v].values().tail<61>());
  }
  EXPECT_EQ(loss_components(placed.initial_states, placed.constraints, Normalization::SSE).phys,
            0.0);
}

TEST(PhysicsAwareInit, TwoNodes) {
  const auto s = physics_aware_init(2, 0, 0.1);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_GE(min_pair_distance(s), 0.1);
}

TEST(PhysicsAwareInit, AllPairsSeparatedAndInCube) {
  for (std::size_t n : {2u, 5u, 8u, 9u, 20u, 27u, 64u}) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const auto s = physics_aware_init(n, seed, 0.1);
      ASSERT_EQ(s.size(), n);
      ASSERT_GE(min_pair_distance(s), 0.1) << "n=" << n << " seed=" << seed;
      for (const auto& x : s) {
        for (std::size_t i = 0; i < 3; ++i) {
          EXPECT_GE(x[i], 0.0);
          EXPECT_LE(x[i], 1.0);
        }
        EXPECT_TRUE(x.values().tail<61>().isZero(0.0));
      }
    }
  }
}

TEST(PhysicsAwareInit, InfeasibleSeparation) {
  EXPECT_THROW((void)physics_aware_init(2, 0, 2.0), InfeasibleInit);
  EXPECT_THROW((void)physics_aware_init(2000, 0, 0.1), InfeasibleInit);
  EXPECT_THROW((void)physics_aware_init(2, 0, 0.0), InvalidInput);
}

TEST(PhysicsAwareInit, Deterministic) {
  EXPECT_EQ(physics_aware_init(12, 5, 0.1), physics_aware_init(12, 5, 0.1));
}

TEST(UniformStream, RangeAndReproducibility) {
  UniformStream a(77), b(77);
  for (int i = 0; i < 10000; ++i) {
    const double x = a.next();
    ASSERT_EQ(x, b.next());
    ASSERT_GE(x, 0.0);
    ASSERT_LT(x, 1.0);
  }
  UniformStream c(1);
  for (int i = 0; i < 1000; ++i) ASSERT_LT(c.next_index(7), 7u);
}

TEST(ProblemInstance, ValidateCatchesMismatch) {
  auto inst = generate_instance(4, 2);
  inst.initial_states.pop_back();
  EXPECT_THROW(inst.validate(), InvalidInput);
  inst = generate_instance(4, 2);
  inst.constraints.separations.push_back({0, 9, 0.1});
  EXPECT_THROW(inst.validate(), InvalidConstraint);
}

}  // namespace
}  // namespace topoproj

namespace topoproj {
namespace {

TEST(PhysicsAwareStates, RespectsLargerInstanceSeparations) {
  ProblemInstance inst = generate_instance(3, 8);
  for (auto& c : inst.constraints.separations) c.min_dist = 0.5;
  const auto s = physics_aware_states(inst);
  EXPECT_EQ(loss_components(s, inst.constraints, Normalization::MSE).phys, 0.0);
  for (const auto& c : inst.constraints.separations) {
    EXPECT_GE((s[c.a].values().head<3>() - s[c.b].values().head<3>()).norm(), 0.5);
  }
}

}  // namespace
}  // namespace topoproj
