#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "topoproj/constraints.hpp"
#include "topoproj/graph.hpp"

namespace topoproj {

enum class InitMode { Uniform, PhysicsAware };

struct GeneratorConfig {
  double anchor_fraction = 0.5;             // anchored nodes = ceil(n * fraction)
  double min_sep = 0.1;
  std::optional<std::size_t> n_orderings;   // default n - 1 (full chain)
  InitMode init_mode = InitMode::Uniform;
};

struct ProblemInstance {
  std::size_t n = 0;
  std::vector<NodeState> initial_states;
  ConstraintSet constraints;
  std::uint64_t seed = 0;
  GeneratorConfig config;

  /// Throws InvalidInput / InvalidConstraint when the instance is malformed.
  void validate() const;
};

/// Seeded uniform draws in [0, 1), identical across platforms for a given
/// seed (no dependence on std:: distributions).
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed);
  double next();                                // [0, 1)
  double next(double lo, double hi) { return lo + (hi - lo) * next(); }
  std::uint64_t next_index(std::uint64_t bound);  // [0, bound)

 private:
  std::uint64_t state_;
};

/// Generated instance, drawn in this order from one stream seeded by `seed`:
///  1. per node: 3 position coordinates in [0, 1), then the other 61
///     components in [-0.1, 0.1);
///  2. per anchored node (the first ceil(n * anchor_fraction)): 3 reference
///     position coordinates in [0, 1). The reference keeps the node's other
///     61 components.
/// Separations cover all pairs with min_sep; orderings chain i before i + 1
/// on axis 0 with zero margin. PhysicsAware init then overwrites positions
/// from physics_aware_init, leaving every draw above unchanged.
/// Throws InvalidInput for n < 2.
ProblemInstance generate_instance(std::size_t n, std::uint64_t seed,
                                  const GeneratorConfig& cfg = {});

/// Positions on a jittered ceil(n^(1/3))^3 grid inside the unit cube, with
/// jitter small enough that every pair is at least min_sep apart. Only the
/// position slice is set. Throws InfeasibleInit when the grid spacing is
/// below min_sep.
std::vector<NodeState> physics_aware_init(std::size_t n, std::uint64_t seed, double min_sep);

/// The instance's initial states with positions replaced by
/// physics_aware_init(n, seed, min_sep).
std::vector<NodeState> physics_aware_states(const ProblemInstance& inst);

}  // namespace topoproj
