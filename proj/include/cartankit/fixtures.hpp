#ifndef CARTANKIT_FIXTURES_HPP
#define CARTANKIT_FIXTURES_HPP

// Standard groupoids, twists and inclusions, plus seeded random generators
// for property tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cartankit/groupoid.hpp"
#include "cartankit/inclusion.hpp"
#include "cartankit/matalg.hpp"
#include "cartankit/reduced_cstar.hpp"
#include "cartankit/twist.hpp"

namespace cartankit::fixtures {

/// A finite group by its multiplication table; element 0 is the identity.
struct FiniteGroup {
  std::string name;
  std::vector<std::string> elements;
  std::vector<std::vector<int>> mul;
  bool is_k4 = false;
  int inverse(int g) const {
    for (int h = 0; h < static_cast<int>(elements.size()); ++h)
      if (mul[static_cast<std::size_t>(g)][static_cast<std::size_t>(h)] == 0) return h;
    return -1;
  }
  std::size_t order() const { return elements.size(); }
};

inline FiniteGroup trivial_group() { return {"1", {""}, {{0}}, false}; }

inline FiniteGroup cyclic_group(int m) {
  FiniteGroup g{"Z" + std::to_string(m), {}, {}, false};
  for (int i = 0; i < m; ++i) {
    g.elements.push_back(i == 0 ? "e" : "r" + std::to_string(i));
    std::vector<int> row;
    for (int j = 0; j < m; ++j) row.push_back((i + j) % m);
    g.mul.push_back(row);
  }
  return g;
}

/// Z/2 x Z/2 with e=(0,0), a=(1,0), b=(0,1), c=(1,1).
inline FiniteGroup klein_group() {
  FiniteGroup g{"K4", {"e", "a", "b", "c"}, {}, true};
  for (int i = 0; i < 4; ++i) {
    std::vector<int> row;
    for (int j = 0; j < 4; ++j) row.push_back(i ^ j);
    g.mul.push_back(row);
  }
  return g;
}

/// Bits of a K4 element index: a=(1,0) is index 1, b=(0,1) is index 2.
inline std::pair<int, int> k4_bits(int g) { return {g & 1, (g >> 1) & 1}; }

/// The standard nontrivial cocycle (-1)^{x2 y1} on K4.
inline double k4_sigma_ns(int x, int y) {
  return ((k4_bits(x).second * k4_bits(y).first) & 1) ? -1.0 : 1.0;
}

inline FiniteGroup symmetric_group3() {
  // Permutations of {0,1,2} in a fixed order; composition (p*q)(x) = p(q(x)).
  const std::vector<std::array<int, 3>> perms = {{0, 1, 2}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}, {1, 2, 0}, {2, 0, 1}};
  FiniteGroup g{"S3", {"e", "t01", "t12", "t02", "c1", "c2"}, {}, false};
  for (const auto& p : perms) {
    std::vector<int> row;
    for (const auto& q : perms) {
      std::array<int, 3> r{p[static_cast<std::size_t>(q[0])], p[static_cast<std::size_t>(q[1])],
                           p[static_cast<std::size_t>(q[2])]};
      row.push_back(static_cast<int>(std::find(perms.begin(), perms.end(), r) - perms.begin()));
    }
    g.mul.push_back(row);
  }
  return g;
}

/// One connected component: pair groupoid on n units times a group H.
struct Component {
  int n = 1;
  FiniteGroup group = trivial_group();
  bool k4_cocycle = false;   // pull back sigma_ns from a K4 factor
};

namespace detail {

inline std::string unit_id(const std::string& prefix, int i) { return prefix + "u" + std::to_string(i); }

inline std::string arrow_id(const std::string& prefix, int i, int j, const FiniteGroup& h, int g) {
  std::string s = prefix + std::to_string(i) + "<" + std::to_string(j);
  if (h.order() > 1) s += ":" + h.elements[static_cast<std::size_t>(g)];
  return s;
}

}  // namespace detail

struct BuiltTwist {
  std::shared_ptr<const FiniteGroupoid> groupoid;
  std::map<std::pair<std::string, std::string>, Complex> sigma;   // non-unit entries only
};

/// Disjoint union of components with the product cocycle (sigma_ns on flagged K4 factors).
inline BuiltTwist build_components(const std::vector<Component>& comps) {
  GroupoidSpec spec;
  struct Info {
    std::size_t comp;
    int i, j, g;
  };
  std::map<std::string, Info> info;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const auto& k = comps[c];
    const std::string prefix = comps.size() > 1 ? "c" + std::to_string(c) + "." : "";
    for (int i = 0; i < k.n; ++i) {
      spec.units.push_back(detail::unit_id(prefix, i));
      spec.unit_arrows[detail::unit_id(prefix, i)] = detail::arrow_id(prefix, i, i, k.group, 0);
    }
    const int m = static_cast<int>(k.group.order());
    for (int i = 0; i < k.n; ++i)
      for (int j = 0; j < k.n; ++j)
        for (int g = 0; g < m; ++g) {
          const auto id = detail::arrow_id(prefix, i, j, k.group, g);
          spec.arrows.push_back({id, detail::unit_id(prefix, j), detail::unit_id(prefix, i),
                                 detail::arrow_id(prefix, j, i, k.group, k.group.inverse(g))});
          info[id] = {c, i, j, g};
        }
    for (int i = 0; i < k.n; ++i)
      for (int j = 0; j < k.n; ++j)
        for (int l = 0; l < k.n; ++l)
          for (int g = 0; g < m; ++g)
            for (int h = 0; h < m; ++h)
              spec.compose.push_back({detail::arrow_id(prefix, i, j, k.group, g), detail::arrow_id(prefix, j, l, k.group, h),
                                      detail::arrow_id(prefix, i, l, k.group,
                                                       k.group.mul[static_cast<std::size_t>(g)][static_cast<std::size_t>(h)])});
  }
  BuiltTwist out;
  out.groupoid = std::make_shared<const FiniteGroupoid>(spec);
  for (const auto& a : spec.compose) {
    const auto& x = info[a[0]];
    const auto& y = info[a[1]];
    if (comps[x.comp].k4_cocycle && comps[x.comp].group.is_k4) {
      const double s = k4_sigma_ns(x.g, y.g);
      if (s != 1.0) out.sigma[{a[0], a[1]}] = s;
    }
  }
  return out;
}

inline std::shared_ptr<const CocycleTwist> make_twist(const BuiltTwist& b) {
  return std::make_shared<const CocycleTwist>(b.groupoid, CocycleTwist::table_from(*b.groupoid, b.sigma));
}

/// Pair groupoid on units "1","2" with arrows "ij" = (i <- j), trivial cocycle.
inline GroupoidSpec pair2_spec() {
  GroupoidSpec s;
  s.units = {"1", "2"};
  for (const char* i : {"1", "2"})
    for (const char* j : {"1", "2"})
      s.arrows.push_back({std::string(i) + j, j, i, std::string(j) + i});
  for (const char* i : {"1", "2"})
    for (const char* j : {"1", "2"})
      for (const char* k : {"1", "2"}) s.compose.push_back({std::string(i) + j, std::string(j) + k, std::string(i) + k});
  s.unit_arrows = {{"1", "11"}, {"2", "22"}};
  return s;
}

/// K4 as a one-unit groupoid: unit "e", arrows e, a, b, c.
inline GroupoidSpec k4_spec() {
  GroupoidSpec s;
  const auto g = klein_group();
  s.units = {"e"};
  for (int x = 0; x < 4; ++x) s.arrows.push_back({g.elements[static_cast<std::size_t>(x)], "e", "e", g.elements[static_cast<std::size_t>(x)]});
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y)
      s.compose.push_back({g.elements[static_cast<std::size_t>(x)], g.elements[static_cast<std::size_t>(y)],
                           g.elements[static_cast<std::size_t>(x ^ y)]});
  return s;
}

/// PAIR2 and K4 side by side; K4 arrows are prefixed with "k".
inline GroupoidSpec pair2_k4_spec() {
  GroupoidSpec s = pair2_spec();
  const auto g = klein_group();
  s.units.push_back("ke");
  s.unit_arrows["ke"] = "ke";
  for (int x = 0; x < 4; ++x) s.arrows.push_back({"k" + g.elements[static_cast<std::size_t>(x)], "ke", "ke", "k" + g.elements[static_cast<std::size_t>(x)]});
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y)
      s.compose.push_back({"k" + g.elements[static_cast<std::size_t>(x)], "k" + g.elements[static_cast<std::size_t>(y)],
                           "k" + g.elements[static_cast<std::size_t>(x ^ y)]});
  return s;
}

inline std::shared_ptr<const FiniteGroupoid> pair2() { return std::make_shared<const FiniteGroupoid>(pair2_spec()); }
inline std::shared_ptr<const FiniteGroupoid> k4() { return std::make_shared<const FiniteGroupoid>(k4_spec()); }

inline std::shared_ptr<const CocycleTwist> pair2_twist() { return std::make_shared<const CocycleTwist>(pair2()); }

inline std::map<std::pair<std::string, std::string>, Complex> k4_ns_entries() {
  std::map<std::pair<std::string, std::string>, Complex> m;
  const auto g = klein_group();
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y)
      if (k4_sigma_ns(x, y) != 1.0) m[{g.elements[static_cast<std::size_t>(x)], g.elements[static_cast<std::size_t>(y)]}] = -1.0;
  return m;
}

inline std::shared_ptr<const CocycleTwist> k4_twist(bool nontrivial) {
  auto g = k4();
  if (!nontrivial) return std::make_shared<const CocycleTwist>(g);
  return std::make_shared<const CocycleTwist>(g, CocycleTwist::table_from(*g, k4_ns_entries()));
}

/// Haar-random unitary (QR of a complex Gaussian matrix with phase correction).
template <class Rng>
Matrix random_unitary(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> nd;
  Matrix z(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) z(i, j) = Complex(nd(rng), nd(rng));
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

template <class Rng>
Matrix random_matrix(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> nd;
  Matrix z(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) z(i, j) = Complex(nd(rng), nd(rng));
  return z;
}

/// Multiplies the cocycle by the coboundary b(g)b(h)/b(gh), b = 1 on units.
template <class Rng>
std::shared_ptr<const CocycleTwist> with_random_coboundary(const CocycleTwist& t, Rng& rng) {
  const auto& g = t.groupoid();
  std::uniform_real_distribution<double> ang(0.0, 2.0 * 3.14159265358979323846);
  std::vector<Complex> b(g.num_arrows(), 1.0);
  for (int a = 0; a < static_cast<int>(g.num_arrows()); ++a)
    if (!g.is_unit_arrow(a)) b[static_cast<std::size_t>(a)] = std::polar(1.0, ang(rng));
  CocycleTwist::Table s = t.table();
  const std::size_t n = g.num_arrows();
  for (int a = 0; a < static_cast<int>(n); ++a)
    for (int c = 0; c < static_cast<int>(n); ++c) {
      const int ac = g.compose(a, c);
      if (ac < 0) continue;
      auto& v = s[static_cast<std::size_t>(a) * n + static_cast<std::size_t>(c)];
      v *= b[static_cast<std::size_t>(a)] * b[static_cast<std::size_t>(c)] * std::conj(b[static_cast<std::size_t>(ac)]);
      v /= std::abs(v);
    }
  return std::make_shared<const CocycleTwist>(t.groupoid_ptr(), std::move(s));
}

/// Random disjoint union of pair groupoids, groups, group bundles and pair x group
/// products with at most `max_arrows` arrows; `principal` restricts to pair groupoids.
template <class Rng>
std::vector<Component> random_components(Rng& rng, std::size_t max_arrows, bool principal) {
  const std::vector<FiniteGroup> groups = {cyclic_group(2), cyclic_group(3), cyclic_group(4), klein_group(),
                                           symmetric_group3(), cyclic_group(5)};
  std::uniform_int_distribution<int> coin(0, 3), pn(1, 4), pg(0, static_cast<int>(groups.size()) - 1);
  std::vector<Component> comps;
  std::size_t used = 0;
  for (int tries = 0; tries < 12; ++tries) {
    Component c;
    const int kind = principal ? 0 : coin(rng);
    c.n = pn(rng);
    if (kind == 1) c.n = 1;                       // group
    if (kind >= 1) c.group = groups[static_cast<std::size_t>(pg(rng))];
    if (kind == 2) c.n = 1;                       // another bundle fibre
    c.k4_cocycle = c.group.is_k4 && coin(rng) % 2 == 0;
    const std::size_t size = static_cast<std::size_t>(c.n * c.n) * c.group.order();
    if (used + size > max_arrows) continue;
    used += size;
    comps.push_back(c);
    if (kind == 2 && used + c.group.order() <= max_arrows) {   // group bundle: repeat the fibre
      used += c.group.order();
      comps.push_back(c);
    }
    if (coin(rng) == 0) break;
  }
  if (comps.empty()) comps.push_back(Component{});
  return comps;
}

template <class Rng>
std::shared_ptr<const CocycleTwist> random_twist(Rng& rng, std::size_t max_arrows = 24, bool principal = false) {
  const auto built = build_components(random_components(rng, max_arrows, principal));
  return with_random_coboundary(*make_twist(built), rng);
}

// ----------------------------------------------------------- inclusions

/// (M_n, D_n) with every off-diagonal matrix unit as a normalizer.
inline Inclusion mn_dn(int n = 2) {
  std::vector<Matrix> c, d, v;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      c.push_back(matrix_unit(n, i, j));
      if (i == j) d.push_back(matrix_unit(n, i, i));
      else v.push_back(matrix_unit(n, i, j));
    }
  return make_inclusion(n, c, d, v);
}

/// (D_n, D_n) with a diagonal unitary as normalizer.
inline Inclusion dd(int n = 2) {
  std::vector<Matrix> d;
  Matrix u = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    d.push_back(matrix_unit(n, i, i));
    u(i, i) = std::polar(1.0, 0.7 * (i + 1));
  }
  return make_inclusion(n, d, d, {u});
}

inline Matrix m2c_element(const Matrix& x, Complex lambda) {
  Matrix m = Matrix::Zero(3, 3);
  m.topLeftCorner(2, 2) = x;
  m(2, 2) = lambda;
  return m;
}

/// (M_2 + C, C 1) with normalizers diag(1,i)+1, X+1 and 1+(-1).
inline Inclusion m2c() {
  std::vector<Matrix> c;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) c.push_back(matrix_unit(3, i, j));
  c.push_back(matrix_unit(3, 2, 2));
  Matrix s(2, 2), x(2, 2);
  s << 1, 0, 0, Complex(0, 1);
  x << 0, 1, 1, 0;
  return make_inclusion(3, c, {identity(3)},
                        {m2c_element(s, 1.0), m2c_element(x, 1.0), m2c_element(Matrix::Identity(2, 2), -1.0)});
}

/// (M_2 + C + C, {diag(a,b) + c + c}) with normalizers e12, e21 and 1_2 + 1 + (-1).
inline Inclusion m2cc() {
  std::vector<Matrix> c;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) c.push_back(matrix_unit(4, i, j));
  c.push_back(matrix_unit(4, 2, 2));
  c.push_back(matrix_unit(4, 3, 3));
  const std::vector<Matrix> d = {matrix_unit(4, 0, 0), matrix_unit(4, 1, 1), Matrix(matrix_unit(4, 2, 2) + matrix_unit(4, 3, 3))};
  Matrix u = identity(4);
  u(3, 3) = -1.0;
  return make_inclusion(4, c, d, {matrix_unit(4, 0, 1), matrix_unit(4, 1, 0), u});
}

/// The Cartan presentation of realize(K4/sigma_ns): the twisted group algebra
/// (a copy of M_2) with the MASA generated by the self-adjoint unitary pi(delta_a).
inline Inclusion k4ns_cartan() {
  const auto r = realize(k4_twist(true), 1);
  const int a = r.twist().groupoid().arrow_index("a");
  const auto d = std::make_shared<const FdStarAlgebra>(generate_star_algebra(r.ambient_dim(), std::vector<Matrix>{r.embed_delta(a)}));
  std::vector<Matrix> gens;
  for (int h = 0; h < 4; ++h) gens.push_back(r.embed_delta(h));
  return Inclusion(std::make_shared<const FdStarAlgebra>(r.realization()), d, gens);
}

/// realize(K4/sigma_triv) with D the whole (abelian) algebra.
inline Inclusion k4triv_abelian() {
  const auto r = realize(k4_twist(false), 1);
  auto c = std::make_shared<const FdStarAlgebra>(r.realization());
  std::vector<Matrix> gens;
  for (int h = 0; h < 4; ++h) gens.push_back(r.embed_delta(h));
  return Inclusion(c, c, gens);
}

/// Block-diagonal MASA inclusion (+) M_{n_i} with the diagonal, conjugated by a
/// random unitary; normalizers are the conjugated matrix units of each block.
template <class Rng>
Inclusion random_masa_inclusion(Rng& rng, int max_dim = 6) {
  std::uniform_int_distribution<int> bs(1, 3);
  std::vector<int> blocks;
  int total = 0;
  while (true) {
    const int b = bs(rng);
    if (total + b > max_dim) break;
    blocks.push_back(b);
    total += b;
    if (total >= 2 && bs(rng) == 1) break;
  }
  const Matrix u = random_unitary(rng, total);
  std::vector<Matrix> c, d, v;
  int off = 0;
  for (int b : blocks) {
    for (int i = 0; i < b; ++i)
      for (int j = 0; j < b; ++j) {
        const Matrix e = u * matrix_unit(total, off + i, off + j) * u.adjoint();
        c.push_back(e);
        if (i == j) d.push_back(e);
        else v.push_back(e);
      }
    off += b;
  }
  return make_inclusion(total, c, d, v);
}

}  // namespace cartankit::fixtures

#endif  // CARTANKIT_FIXTURES_HPP
