#ifndef CARTANKIT_TESTS_SUPPORT_HPP
#define CARTANKIT_TESTS_SUPPORT_HPP

#include <random>
#include <set>
#include <vector>

#include "cartankit/twist.hpp"
#include "oracles.hpp"

namespace support {

using cartankit::EquivariantFunction;

template <class Rng>
EquivariantFunction random_function(const std::shared_ptr<const cartankit::CocycleTwist>& t, int k, Rng& rng) {
  std::normal_distribution<double> nd;
  EquivariantFunction f(t, k);
  for (int a = 0; a < static_cast<int>(t->size()); ++a) f[a] = {nd(rng), nd(rng)};
  return f;
}

/// Random function supported on a random bisection.
template <class Rng>
EquivariantFunction random_bisection_function(const std::shared_ptr<const cartankit::CocycleTwist>& t, int k, Rng& rng) {
  const auto& g = t->groupoid();
  std::vector<int> order(g.num_arrows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::shuffle(order.begin(), order.end(), rng);
  std::set<int> srcs, rngs;
  std::normal_distribution<double> nd;
  std::bernoulli_distribution keep(0.6);
  EquivariantFunction f(t, k);
  for (int a : order) {
    if (srcs.count(g.src(a)) || rngs.count(g.rng(a)) || !keep(rng)) continue;
    srcs.insert(g.src(a));
    rngs.insert(g.rng(a));
    f[a] = {nd(rng), nd(rng)};
  }
  return f;
}

inline oracle::Fn to_fn(const EquivariantFunction& f) {
  return oracle::Fn(f.values().data(), f.values().data() + f.values().size());
}

inline double sup_distance(const EquivariantFunction& f, const oracle::Fn& g) {
  double d = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) d = std::max(d, std::abs(f(static_cast<int>(i)) - g[i]));
  return d;
}

/// All arrows of the orbits of the chosen units; such unions have the factorization property.
inline std::vector<int> orbit_union(const cartankit::FiniteGroupoid& g, const std::vector<int>& seeds) {
  std::set<int> units;
  for (int x : seeds)
    for (int y : g.orbit(x)) units.insert(y);
  std::vector<int> h;
  for (int a = 0; a < static_cast<int>(g.num_arrows()); ++a)
    if (units.count(g.src(a))) h.push_back(a);
  return h;
}

}  // namespace support

#endif  // CARTANKIT_TESTS_SUPPORT_HPP
