#include <gtest/gtest.h>

#include <random>

#include "cartankit/fixtures.hpp"
#include "cartankit/reduced_cstar.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace cartankit;
using support::random_function;

TEST(RegularRepresentation, Pair2Example) {
  const auto t = fixtures::pair2_twist();
  const auto& g = t->groupoid();
  RegularRepresentation pi(t, 1, "1");
  ASSERT_EQ(pi.basis(), (std::vector<int>{g.arrow_index("11"), g.arrow_index("21")}));
  EXPECT_LT((pi(EquivariantFunction::delta(t, 1, g.arrow_index("21"))) - matrix_unit(2, 1, 0)).norm(), 1e-15);
  EXPECT_LT((pi(EquivariantFunction::unit(t, 1)) - identity(2)).norm(), 1e-15);
  EXPECT_THROW(RegularRepresentation(t, 1, "9"), Error);
}

TEST(RegularRepresentation, K4PauliType) {
  const auto t = fixtures::k4_twist(true);
  RegularRepresentation pi(t, 1, 0);
  std::vector<Matrix> u;
  for (const char* id : {"a", "b", "c"}) u.push_back(pi(EquivariantFunction::delta(t, 1, t->groupoid().arrow_index(id))));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_LT((u[i].adjoint() * u[i] - identity(4)).norm(), 1e-14);
    for (std::size_t j = i + 1; j < 3; ++j) EXPECT_LT((u[i] * u[j] + u[j] * u[i]).norm(), 1e-14);
  }
}

TEST(RegularRepresentation, AgreesWithOracleAndIsStarHomomorphism) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 40; ++trial) {
    const auto t = fixtures::random_twist(rng);
    for (int k : {1, -1}) {
      const auto f = random_function(t, k, rng), g = random_function(t, k, rng);
      for (int x = 0; x < static_cast<int>(t->groupoid().num_units()); ++x) {
        RegularRepresentation pi(t, k, x);
        EXPECT_LT((pi(f) - oracle::regular_matrix(*t, k, x, support::to_fn(f))).norm(), 1e-12);
        EXPECT_LT((pi(convolve(f, g)) - pi(f) * pi(g)).norm(), 1e-10);
        EXPECT_LT((pi(involution(f)) - pi(f).adjoint()).norm(), 1e-10);
      }
    }
  }
}

TEST(ReducedNorm, Examples) {
  const auto t = fixtures::pair2_twist();
  const auto& g = t->groupoid();
  EXPECT_NEAR(reduced_norm(EquivariantFunction::unit(t, 1)), 1.0, 1e-14);
  for (int a = 0; a < 4; ++a) EXPECT_NEAR(reduced_norm(EquivariantFunction::delta(t, 1, a)), 1.0, 1e-14);
  const auto f = EquivariantFunction::delta(t, 1, g.arrow_index("11")) + EquivariantFunction::delta(t, 1, g.arrow_index("12"));
  // Singular values of [[1,1],[0,0]].
  Eigen::Matrix2cd m;
  m << 1.0, 1.0, 0.0, 0.0;
  const double expected = Eigen::JacobiSVD<Eigen::Matrix2cd>(m).singularValues()(0);
  EXPECT_NEAR(reduced_norm(f), expected, 1e-14);
  EXPECT_NEAR(reduced_norm(f), std::sqrt(2.0), 1e-14);
}

TEST(ReducedNorm, CStarIdentityAndTransposeIsometry) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const auto t = fixtures::random_twist(rng);
    for (int k : {1, -1}) {
      const auto f = random_function(t, k, rng);
      const double n = reduced_norm(f);
      EXPECT_NEAR(reduced_norm(convolve(involution(f), f)), n * n, 1e-8 * n * n);
      EXPECT_NEAR(reduced_norm(transpose(f)), n, 1e-8 * n);
      EXPECT_NEAR(reduced_norm(involution(f)), n, 1e-8 * n);
    }
  }
}

TEST(ConditionalExpectation, Examples) {
  const auto t = fixtures::pair2_twist();
  const auto& g = t->groupoid();
  const auto d12 = EquivariantFunction::delta(t, 1, g.arrow_index("12"));
  EXPECT_EQ(conditional_expectation(d12).values().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LT(conditional_expectation(EquivariantFunction::unit(t, 1)).sup_distance(EquivariantFunction::unit(t, 1)), 1e-15);
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = fixtures::random_twist(rng);
    const auto& h = r->groupoid();
    for (int a = 0; a < static_cast<int>(h.num_arrows()); ++a) {
      const auto d = EquivariantFunction::delta(r, 1, a);
      const auto e = conditional_expectation(convolve(involution(d), d));
      EXPECT_LT(e.sup_distance(EquivariantFunction::delta(r, 1, h.unit_arrow(h.src(a)))), 1e-12);
    }
  }
}

TEST(ConditionalExpectation, IdempotentPositiveBimodularFaithful) {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 40; ++trial) {
    const auto t = fixtures::random_twist(rng);
    const auto& g = t->groupoid();
    for (int k : {1, -1}) {
      const auto f = random_function(t, k, rng);
      const auto e = conditional_expectation(f);
      EXPECT_EQ(conditional_expectation(e).values(), e.values());
      const auto p = conditional_expectation(convolve(involution(f), f));
      for (int x = 0; x < static_cast<int>(g.num_units()); ++x) {
        const Complex v = p(g.unit_arrow(x));
        EXPECT_GE(v.real(), -1e-12);
        EXPECT_LT(std::abs(v.imag()), 1e-12);
      }
      EquivariantFunction d(t, k);
      for (int x = 0; x < static_cast<int>(g.num_units()); ++x) d[g.unit_arrow(x)] = {nd(rng), nd(rng)};
      EXPECT_LT(conditional_expectation(convolve(convolve(d, f), d)).sup_distance(convolve(convolve(d, e), d)), 1e-12);
      // Faithfulness: sum_x E(f* f)(x) is the squared l2 norm of f.
      double l2 = f.values().squaredNorm();
      EXPECT_NEAR(p.values().sum().real(), l2, 1e-10 * l2);
    }
  }
}

TEST(Realize, BlockStructures) {
  EXPECT_EQ(block_structure(realize(fixtures::pair2_twist(), 1).realization()), std::vector<int>{2});
  EXPECT_EQ(block_structure(realize(fixtures::k4_twist(false), 1).realization()), (std::vector<int>{1, 1, 1, 1}));
  EXPECT_EQ(block_structure(realize(fixtures::k4_twist(true), 1).realization()), std::vector<int>{2});
  EXPECT_EQ(oracle::block_structure(*fixtures::k4_twist(true), 1), std::vector<int>{2});
  EXPECT_EQ(oracle::block_structure(*fixtures::k4_twist(false), 1), (std::vector<int>{1, 1, 1, 1}));
}

TEST(Realize, RandomTwistsMatchOracle) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 25; ++trial) {
    const auto t = fixtures::random_twist(rng);
    for (int k : {1, -1}) {
      const auto r = realize(t, k);
      EXPECT_TRUE(r.faithful());
      EXPECT_EQ(block_structure(r.realization()), oracle::block_structure(*t, k));
      const auto f = random_function(t, k, rng), g = random_function(t, k, rng);
      EXPECT_LT((r.embed(convolve(f, g)) - r.embed(f) * r.embed(g)).norm(), 1e-9);
      EXPECT_LT(r.pull_back(r.embed(f)).sup_distance(f), 1e-9);
      // Dropping units in the same orbit preserves the norm.
      EXPECT_NEAR(operator_norm(r.embed(f)), reduced_norm(f), 1e-9 * reduced_norm(f));
    }
    // The two degrees give isomorphic algebras at finite scale.
    EXPECT_EQ(block_structure(realize(t, 1).realization()), block_structure(realize(t, -1).realization()));
  }
}

TEST(Realize, DimensionCap) {
  Tolerance tol;
  tol.cap = 3;
  try {
    realize(fixtures::k4_twist(false), 1, tol);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionOverflow);
  }
}

TEST(CartanPair, Examples) {
  const auto p = is_cartan_pair(realize(fixtures::pair2_twist(), 1));
  EXPECT_TRUE(p.cartan());
  const auto kt = is_cartan_pair(realize(fixtures::k4_twist(false), 1));
  EXPECT_TRUE(kt.regular);
  EXPECT_TRUE(kt.faithful_E);
  const auto kn = is_cartan_pair(realize(fixtures::k4_twist(true), 1));
  EXPECT_FALSE(kn.masa);
  EXPECT_FALSE(kn.cartan());
  EXPECT_EQ(kn.diagonal_dim, 1u);
  EXPECT_EQ(kn.commutant_dim, 4u);
}

TEST(CartanPair, PrincipalTwistsAreCartan) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 15; ++trial) {
    const auto t = fixtures::random_twist(rng, 24, true);
    EXPECT_TRUE(is_cartan_pair(realize(t, 1)).cartan());
  }
}

TEST(Lemmas, BisectionExpectationIdentity) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 40; ++trial) {
    const auto t = fixtures::random_twist(rng);
    for (int k : {1, -1}) {
      const auto f1 = support::random_bisection_function(t, k, rng);
      auto f2 = support::random_bisection_function(t, k, rng);
      // Force overlap on a shared arrow now and then.
      for (int a = 0; a < static_cast<int>(t->size()); ++a)
        if (f1(a) != Complex(0.0) && trial % 2 == 0) {
          bool ok = true;
          for (int b = 0; b < static_cast<int>(t->size()); ++b)
            if (b != a && f2(b) != Complex(0.0) &&
                (t->groupoid().src(b) == t->groupoid().src(a) || t->groupoid().rng(b) == t->groupoid().rng(a)))
              ok = false;
          if (ok) f2[a] = {0.7, -0.2};
          break;
        }
      const auto lhs = convolve(conditional_expectation(convolve(f1, involution(f2))), f2);
      const auto rhs = convolve(convolve(f1, involution(f2)), f2);
      for (int a = 0; a < static_cast<int>(t->size()); ++a) {
        const bool both = f1(a) != Complex(0.0) && f2(a) != Complex(0.0);
        if (both) EXPECT_LT(std::abs(lhs(a) - rhs(a)), 1e-10);
        else EXPECT_LT(std::abs(lhs(a)), 1e-10);
      }
    }
  }
}

TEST(Lemmas, RestrictionIsContractiveEpimorphism) {
  std::mt19937_64 rng(59);
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const auto t = fixtures::random_twist(rng);
    const auto reps = t->groupoid().orbit_representatives();
    if (reps.size() < 2) continue;
    const auto h = support::orbit_union(t->groupoid(), {reps.front()});
    const auto sub = subtwist(*t, h);
    for (int k : {1, -1}) {
      const auto f = random_function(t, k, rng);
      EXPECT_LE(reduced_norm(restrict(f, sub)), reduced_norm(f) * (1 + 1e-12));
      // Surjectivity by dimension: images of deltas span the subtwist algebra.
      std::vector<Matrix> imgs;
      const auto rs = realize(sub, k);
      for (int a = 0; a < static_cast<int>(t->size()); ++a) imgs.push_back(rs.embed(restrict(EquivariantFunction::delta(t, k, a), sub)));
      EXPECT_EQ(Subspace(rs.ambient_dim(), imgs, 1e-8).dim(), rs.realization().dim());
      EXPECT_EQ(rs.realization().dim(), h.size());
    }
    ++checked;
  }
  EXPECT_GT(checked, 5);
}
