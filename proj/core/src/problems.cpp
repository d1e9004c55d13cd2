#include "topoproj/problems.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "topoproj/errors.hpp"

namespace topoproj {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kPhysicsStreamSalt = 0x70687973696e6974ULL;  // "physinit"

}  // namespace

UniformStream::UniformStream(std::uint64_t seed) : state_(seed) {}

double UniformStream::next() {
  return static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53;
}

std::uint64_t UniformStream::next_index(std::uint64_t bound) {
  return splitmix64(state_) % bound;
}

void ProblemInstance::validate() const {
  if (n < 2) throw InvalidInput("problem instance needs at least 2 nodes");
  if (initial_states.size() != n) {
    throw InvalidInput("problem instance has " + std::to_string(initial_states.size()) +
                       " states for n = " + std::to_string(n));
  }
  constraints.validate(n);
}

ProblemInstance generate_instance(std::size_t n, std::uint64_t seed, const GeneratorConfig& cfg) {
  if (n < 2) throw InvalidInput("generate_instance: n must be at least 2");
  if (!(cfg.anchor_fraction >= 0.0 && cfg.anchor_fraction <= 1.0)) {
    throw InvalidInput("generate_instance: anchor_fraction must lie in [0, 1]");
  }
  if (!(cfg.min_sep > 0.0)) throw InvalidInput("generate_instance: min_sep must be positive");

  ProblemInstance inst;
  inst.n = n;
  inst.seed = seed;
  inst.config = cfg;

  UniformStream rng(seed);
  inst.initial_states.reserve(n);
  for (std::size_t v = 0; v < n; ++v) {
    StateVector s;
    for (Eigen::Index i = 0; i < 3; ++i) s[i] = rng.next();
    for (Eigen::Index i = 3; i < static_cast<Eigen::Index>(kStateDim); ++i) {
      s[i] = rng.next(-0.1, 0.1);
    }
    inst.initial_states.emplace_back(s);
  }

  const auto anchored = static_cast<std::size_t>(
      std::ceil(static_cast<double>(n) * cfg.anchor_fraction));
  for (std::size_t v = 0; v < anchored; ++v) {
    StateVector ref = inst.initial_states[v].values();
    for (Eigen::Index i = 0; i < 3; ++i) ref[i] = rng.next();
    inst.constraints.anchors.emplace(v, NodeState(ref));
  }

  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b) inst.constraints.separations.push_back({a, b, cfg.min_sep});

  const std::size_t chain = std::min(cfg.n_orderings.value_or(n - 1), n - 1);
  for (NodeId i = 0; i < chain; ++i) inst.constraints.orderings.push_back({i, i + 1, 0, 0.0});

  if (cfg.init_mode == InitMode::PhysicsAware) {
    inst.initial_states = physics_aware_states(inst);
  }
  return inst;
}

std::vector<NodeState> physics_aware_init(std::size_t n, std::uint64_t seed, double min_sep) {
  if (!(min_sep > 0.0)) throw InvalidInput("physics_aware_init: min_sep must be positive");
  std::size_t g = 1;
  while (g * g * g < n) ++g;
  const double cell = 1.0 / static_cast<double>(g);
  if (cell < min_sep) {
    throw InfeasibleInit("cannot place " + std::to_string(n) + " nodes " +
                         std::to_string(min_sep) + " apart in the unit cube");
  }
  // Nodes in distinct cells differ along some axis by at least
  // cell - 2 * jitter > min_sep.
  const double jitter = 0.49 * (cell - min_sep);

  UniformStream rng(seed ^ kPhysicsStreamSalt);
  std::vector<std::size_t> cells(g * g * g);
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = i;
  for (std::size_t i = cells.size(); i > 1; --i) {
    std::swap(cells[i - 1], cells[rng.next_index(i)]);
  }

  std::vector<NodeState> out;
  out.reserve(n);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t c = cells[v];
    const std::size_t idx[3] = {c % g, (c / g) % g, c / (g * g)};
    StateVector s = StateVector::Zero();
    for (Eigen::Index a = 0; a < 3; ++a) {
      const double centre = (static_cast<double>(idx[a]) + 0.5) * cell;
      s[a] = centre + rng.next(-jitter, jitter);
    }
    out.emplace_back(s);
  }
  return out;
}

std::vector<NodeState> physics_aware_states(const ProblemInstance& inst) {
  // Loaded instances may ask for more room than the generator default.
  double min_sep = inst.config.min_sep;
  for (const auto& c : inst.constraints.separations) min_sep = std::max(min_sep, c.min_dist);
  const auto placed = physics_aware_init(inst.n, inst.seed, min_sep);
  std::vector<NodeState> out;
  out.reserve(inst.n);
  for (std::size_t v = 0; v < inst.n; ++v) {
    StateVector s = inst.initial_states[v].values();
    s.head<3>() = placed[v].values().head<3>();
    out.emplace_back(s);
  }
  return out;
}

}  // namespace topoproj
