#include <gtest/gtest.h>

#include <random>

#include "cartankit/fixtures.hpp"
#include "cartankit/inclusion.hpp"

using namespace cartankit;

namespace {

Matrix e(int n, int i, int j) { return matrix_unit(n, i, j); }

/// (M_2 + C, D_2 + C) with normalizer e12 + e33.
Inclusion m2_plus_c_diag() {
  std::vector<Matrix> c;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) c.push_back(e(3, i, j));
  c.push_back(e(3, 2, 2));
  return make_inclusion(3, c, {e(3, 0, 0), e(3, 1, 1), e(3, 2, 2)}, {Matrix(e(3, 0, 1) + e(3, 2, 2))});
}

int corner_index(const Inclusion& inc, const Matrix& p) {
  for (std::size_t i = 0; i < inc.num_corners(); ++i)
    if ((inc.projections()[i] - p).norm() < 1e-9) return static_cast<int>(i);
  return -1;
}

template <class Rng>
Matrix random_d_element(const Inclusion& inc, Rng& rng) {
  std::normal_distribution<double> nd;
  Matrix d = Matrix::Zero(inc.n(), inc.n());
  for (const auto& p : inc.projections()) d += Complex(nd(rng), nd(rng)) * p;
  return d;
}

template <class Rng>
Matrix random_c_element(const Inclusion& inc, Rng& rng) {
  std::normal_distribution<double> nd;
  Matrix x = Matrix::Zero(inc.n(), inc.n());
  for (const auto& b : inc.C().basis()) x += Complex(nd(rng), nd(rng)) * b;
  return x;
}

}  // namespace

TEST(Inclusion, ConstructionChecks) {
  const auto inc = fixtures::mn_dn(2);
  EXPECT_TRUE(inc.regular());
  EXPECT_EQ(inc.num_corners(), 2u);
  EXPECT_EQ(corner_index(inc, e(2, 0, 0)), 0);

  std::vector<Matrix> full = {e(2, 0, 0), e(2, 0, 1), e(2, 1, 0), e(2, 1, 1)};
  try {
    make_inclusion(2, full, {e(2, 0, 1)}, {});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::NotAbelian);
  }
  try {
    make_inclusion(2, full, {e(2, 0, 0)}, {Matrix(e(2, 0, 1) + e(2, 0, 0))});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::NotANormalizer);
  }
  EXPECT_FALSE(make_inclusion(2, full, {e(2, 0, 0)}, {}).regular());
}

TEST(IsNormalizer, Examples) {
  const auto inc = fixtures::mn_dn(2);
  EXPECT_TRUE(is_normalizer(inc, Matrix(2.0 * e(2, 0, 0) - e(2, 1, 1))));
  EXPECT_TRUE(is_normalizer(inc, e(2, 0, 1)));
  EXPECT_FALSE(is_normalizer(inc, Matrix(e(2, 0, 1) + e(2, 0, 0))));
  EXPECT_THROW(is_normalizer(fixtures::dd(2), e(2, 0, 1)), Error);
  const auto m3 = fixtures::mn_dn(3);
  EXPECT_TRUE(is_normalizer(m3, e(3, 0, 1)));
}

TEST(Beta, Examples) {
  const auto inc = fixtures::mn_dn(2);
  const auto b = beta(inc, e(2, 0, 1));
  // dom = {2}, beta(2) = 1 in one-based corner labels.
  EXPECT_EQ(b.map, (std::vector<int>{-1, 0}));
  const auto u = beta(inc, Matrix(e(2, 0, 0) + Complex(0, 1) * e(2, 1, 1)));
  EXPECT_EQ(u.map, (std::vector<int>{0, 1}));
  EXPECT_EQ(beta(inc, e(2, 0, 0)).domain(), std::vector<int>{0});
  try {
    beta(inc, Matrix(e(2, 0, 1) + e(2, 0, 0)));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::NotANormalizer);
  }
}

TEST(Beta, MultiplicativeOnRandomInclusions) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inc = fixtures::random_masa_inclusion(rng, 6);
    const auto& gens = inc.normalizers();
    for (const auto& v : gens) {
      EXPECT_EQ(beta(inc, v.adjoint()), beta(inc, v).inverse());
      for (const auto& w : gens) {
        const Matrix vw = v * w;
        EXPECT_EQ(beta(inc, vw), beta(inc, v).compose(beta(inc, w)));
      }
    }
  }
}

TEST(Theta, Examples) {
  const auto inc = fixtures::mn_dn(2);
  const auto t = theta(inc, e(2, 0, 1));
  EXPECT_LT((t.apply(inc, e(2, 0, 0)) - e(2, 1, 1)).norm(), 1e-14);
  const auto id = theta(inc, identity(2));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = Complex(0, 2);
  EXPECT_LT((id.apply(inc, d) - d).norm(), 1e-14);
}

TEST(Theta, CharactersTransportAlongBeta) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inc = fixtures::random_masa_inclusion(rng, 6);
    for (const auto& v : inc.normalizers()) {
      const auto b = beta(inc, v);
      const auto t = theta(inc, v);
      const Matrix d = random_d_element(inc, rng);
      const Matrix td = t.apply(inc, d);
      // sigma_i(theta_v(d)) = beta_v(sigma_i)(d) for i in dom beta_v.
      for (int i : b.domain())
        EXPECT_LT(std::abs(inc.character(static_cast<std::size_t>(i), td) -
                           inc.character(static_cast<std::size_t>(b.map[static_cast<std::size_t>(i)]), d)),
                  1e-9);
      // theta_v(vv* h) = v* h v.
      EXPECT_LT((t.apply(inc, Matrix(v * v.adjoint() * d)) - v.adjoint() * d * v).norm(), 1e-9);
    }
  }
}

TEST(FixedPointIdeal, Examples) {
  const auto inc = fixtures::mn_dn(2);
  const Matrix u = e(2, 0, 0) + Complex(0, 1) * e(2, 1, 1);
  EXPECT_EQ(fixed_point_ideal(inc, u).dim(), 2u);
  EXPECT_TRUE(fixed_point_ideal(inc, e(2, 0, 1)).is_zero());

  const auto inc3 = m2_plus_c_diag();
  const Matrix v = e(3, 0, 1) + e(3, 2, 2);
  const auto k0 = fixed_point_ideal(inc3, v);
  EXPECT_EQ(k0.dim(), 1u);
  EXPECT_TRUE(k0.contains(e(3, 2, 2), 1e-9));

  EXPECT_TRUE(fixed_set_check(inc, u).pass);
  EXPECT_TRUE(fixed_set_check(inc, e(2, 0, 1)).pass);
  EXPECT_TRUE(fixed_set_check(inc3, v).pass);
  // A corrupted K0 is detected.
  const auto corrupt = IdealSubspace::from_span(inc.D_ptr(), inc.D().basis(), inc.tolerance());
  EXPECT_FALSE(fixed_set_check(inc, e(2, 1, 0), corrupt).pass);
}

TEST(FixedPointIdeal, FixedSetOnRandomWords) {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inc = fixtures::random_masa_inclusion(rng, 5);
    for (const auto& w : normalizer_words(inc, 2)) {
      const auto r = fixed_set_check(inc, w);
      EXPECT_TRUE(r.pass);
    }
  }
}

TEST(ModStates, Examples) {
  const auto mn = mod_states(fixtures::mn_dn(2));
  ASSERT_EQ(mn.size(), 2u);
  for (const auto& c : mn) {
    EXPECT_EQ(c.corner.dim(), 1u);
    EXPECT_EQ(c.extreme_points.size(), 1u);
  }
  const auto m2c = mod_states(fixtures::m2c());
  ASSERT_EQ(m2c.size(), 1u);
  EXPECT_EQ(m2c[0].corner.dim(), 5u);
  EXPECT_FALSE(m2c[0].abelian);
  const auto dd = fixtures::dd(3);
  EXPECT_EQ(mod_extreme_points(dd).size(), 3u);
  EXPECT_THROW(mod_extreme_points(fixtures::m2c()), Error);
}

TEST(ModStates, ValidationAndErrors) {
  const auto inc = fixtures::mn_dn(2);
  EXPECT_NO_THROW(make_mod_state(inc, 0, e(2, 0, 0)));
  try {
    make_mod_state(inc, 0, Matrix(identity(2) / 2.0));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::InvalidState);
  }
  EXPECT_THROW(make_mod_state(inc, 0, Matrix(-e(2, 0, 0))), Error);
}

TEST(Compatibility, PaperAndDerivedExamples) {
  const auto m2c = fixtures::m2c();
  const auto lam = make_mod_state(m2c, 0, e(3, 2, 2));
  const auto r1 = is_compatible_state(m2c, lam);
  EXPECT_TRUE(r1.compatible);
  EXPECT_EQ(r1.word_bound, 4);
  Matrix half = Matrix::Zero(3, 3);
  half(0, 0) = half(1, 1) = 0.5;
  const auto tr = make_mod_state(m2c, 0, half);
  const auto r2 = is_compatible_state(m2c, tr);
  EXPECT_FALSE(r2.compatible);
  ASSERT_TRUE(r2.witness.has_value());
  EXPECT_GT(r2.witness_value, 1e-6);
  EXPECT_GT(std::abs(r2.witness_value - r2.witness_norm), 1e-6);

  for (int n : {2, 3}) {
    const auto inc = fixtures::mn_dn(n);
    for (const auto& s : strongly_compatible(inc)) EXPECT_TRUE(is_compatible_state(inc, s).compatible);
  }
}

TEST(NormalizerWords, Enumeration) {
  const auto inc = fixtures::mn_dn(2);
  const auto w1 = normalizer_words(inc, 1);
  EXPECT_LT((w1.front() - identity(2)).norm(), 1e-15);
  const auto w4 = normalizer_words(inc, 4);
  EXPECT_GE(w4.size(), w1.size());
  for (const auto& w : w4) EXPECT_TRUE(is_normalizer(inc, w));
  try {
    normalizer_words(fixtures::mn_dn(3), 6, 10);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::DimensionOverflow);
  }
}

TEST(PseudoExpectations, Examples) {
  std::mt19937_64 rng(73);
  const auto mn = fixtures::mn_dn(3);
  const auto s = pseudo_expectations(mn);
  EXPECT_TRUE(s.unique);
  EXPECT_TRUE(s.faithful);
  const Matrix x = random_c_element(mn, rng);
  Matrix diag = Matrix::Zero(3, 3);
  for (const auto& p : mn.projections()) diag += p * x * p;
  EXPECT_LT(((*s.expectation)(mn, x) - diag).norm(), 1e-12);

  const auto m2c = pseudo_expectations(fixtures::m2c());
  EXPECT_FALSE(m2c.unique);
  EXPECT_EQ(m2c.corners.size(), 1u);
  EXPECT_EQ(m2c.corners[0].corner.dim(), 5u);

  const auto dd = fixtures::dd(3);
  const auto sd = pseudo_expectations(dd);
  EXPECT_TRUE(sd.unique);
  EXPECT_TRUE(sd.faithful);
  const Matrix d = random_d_element(dd, rng);
  EXPECT_LT(((*sd.expectation)(dd, d) - d).norm(), 1e-12);
}

TEST(PseudoExpectations, CornerParametrizationGivesUcpBimodularMaps) {
  std::mt19937_64 rng(79);
  const auto inc = fixtures::m2cc();
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Matrix> dens;
    for (std::size_t i = 0; i < inc.num_corners(); ++i) {
      const Matrix& p = inc.projections()[i];
      const Matrix a = p * fixtures::random_matrix(rng, inc.n()) * p;
      Matrix rho = inc.C().project(a * a.adjoint());
      rho /= rho.trace();
      dens.push_back(rho);
    }
    const auto e_ = make_pseudo_expectation(inc, dens);
    EXPECT_LT((e_(inc, identity(inc.n())) - identity(inc.n())).norm(), 1e-10);
    const Matrix d1 = random_d_element(inc, rng), d2 = random_d_element(inc, rng);
    EXPECT_LT((e_(inc, d1) - d1).norm(), 1e-10);
    const Matrix x = random_c_element(inc, rng);
    EXPECT_LT((e_(inc, Matrix(d1 * x * d2)) - d1 * e_(inc, x) * d2).norm(), 1e-9);
    const Matrix px = e_(inc, Matrix(x.adjoint() * x));
    for (const auto& p : inc.projections()) EXPECT_GE(inc.character(corner_index(inc, p), px).real(), -1e-10);
  }
}

TEST(LeftKernel, Examples) {
  const auto mn = fixtures::mn_dn(2);
  const auto l = left_kernel(mn, *pseudo_expectations(mn).expectation);
  EXPECT_TRUE(l.ideal.is_zero());
  EXPECT_TRUE(l.two_sided && l.meets_D_trivially && l.maximal);

  const auto dd = fixtures::dd(2);
  EXPECT_TRUE(left_kernel(dd, *pseudo_expectations(dd).expectation).ideal.is_zero());

  // M2C with E(x + lambda) = lambda: L = M_2 + 0, and the summand 0 + C escapes L.
  const auto m2c = fixtures::m2c();
  const auto lk = left_kernel(m2c, make_pseudo_expectation(m2c, {e(3, 2, 2)}));
  EXPECT_EQ(lk.ideal.dim(), 4u);
  EXPECT_TRUE(lk.two_sided);
  EXPECT_TRUE(lk.meets_D_trivially);
  EXPECT_FALSE(lk.maximal);

  std::vector<Matrix> full = {e(2, 0, 0), e(2, 0, 1), e(2, 1, 0), e(2, 1, 1)};
  const auto irregular = make_inclusion(2, full, {e(2, 0, 0)}, {});
  try {
    left_kernel(irregular, *pseudo_expectations(irregular).expectation);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::NotRegular);
  }
}

TEST(RadicalIdeal, Examples) {
  const auto mn = fixtures::mn_dn(2);
  EXPECT_TRUE(radical_ideal(mn, mod_extreme_points(mn)).is_zero());
  EXPECT_EQ(radical_ideal(mn, {}).dim(), 4u);
  try {
    radical_ideal(mn, {strongly_compatible(mn).front()});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::NotInvariant);
  }
  const auto k = fixtures::k4ns_cartan();
  EXPECT_TRUE(radical_ideal(k, strongly_compatible(k)).is_zero());
}

TEST(StronglyCompatible, Examples) {
  for (int n : {2, 3}) {
    const auto inc = fixtures::mn_dn(n);
    const auto f = strongly_compatible(inc);
    EXPECT_EQ(f.size(), static_cast<std::size_t>(n));
    EXPECT_TRUE(covers(inc, f));
    EXPECT_TRUE(is_invariant(inc, f));
  }
  const auto dd = fixtures::dd(3);
  const auto f = strongly_compatible(dd);
  const auto ext = mod_extreme_points(dd);
  ASSERT_EQ(f.size(), ext.size());
  for (const auto& s : f) EXPECT_GE(find_state(ext, s), 0);
  try {
    strongly_compatible(fixtures::m2c());
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::NonUniquePseudoExpectation);
  }
  // Minimality: every covering invariant set of Mod states here contains S_s.
  const auto mn = fixtures::mn_dn(3);
  const auto all = mod_extreme_points(mn);
  for (const auto& s : strongly_compatible(mn)) EXPECT_GE(find_state(all, s), 0);
}

TEST(MasaInclusions, UniqueFaithfulExpectationAndInvariants) {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 25; ++trial) {
    const auto inc = fixtures::random_masa_inclusion(rng, 6);
    EXPECT_TRUE(is_masa(inc));
    const auto s = pseudo_expectations(inc);
    ASSERT_TRUE(s.unique);
    EXPECT_TRUE(s.faithful);
    const auto& E = *s.expectation;
    for (const auto& x : inc.C().basis()) {
      Matrix diag = Matrix::Zero(inc.n(), inc.n());
      for (const auto& p : inc.projections()) diag += p * x * p;
      EXPECT_LT((E(inc, x) - diag).norm(), 1e-10);
    }
    for (const auto& v : inc.normalizers()) {
      const auto th = theta(inc, v);
      for (const auto& x : inc.C().basis())
        EXPECT_LT((E(inc, Matrix(v.adjoint() * x * v)) - th.apply(inc, E(inc, Matrix(v * v.adjoint() * x)))).norm(), 1e-9);
      // v* E(v) lies in D^c = D.
      EXPECT_TRUE(inc.D().contains(Matrix(v.adjoint() * E(inc, v)), 1e-9));
    }
    // Transport keeps strongly compatible states inside the set.
    const auto f = strongly_compatible(inc);
    for (const auto& rho : f)
      for (const auto& v : inc.normalizers()) {
        const auto t = transport(inc, rho, v);
        if (t) EXPECT_GE(find_state(f, *t), 0);
      }
  }
}

TEST(Masa, Examples) {
  EXPECT_TRUE(is_masa(fixtures::mn_dn(3)));
  EXPECT_FALSE(is_masa(fixtures::m2c()));
  EXPECT_FALSE(is_masa(fixtures::m2cc()));
  EXPECT_TRUE(is_masa(fixtures::k4ns_cartan()));
  EXPECT_TRUE(is_masa(fixtures::k4triv_abelian()));
}
