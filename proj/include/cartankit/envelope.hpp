#ifndef CARTANKIT_ENVELOPE_HPP
#define CARTANKIT_ENVELOPE_HPP

// Eigenfunctionals [v,f](x) = f(v* x) / f(v* v)^{1/2}, the eigenfunctional twist
// over a compatible cover F, the map theta_F and the Cartan-envelope pipeline.
// Functionals are stored by their canonical density M in C, phi(x) = tr(M x).
// Arrows of the twist are circle classes of eigenfunctionals; each carries the
// representative whose density has its first significant entry positive real,
// and phi_a phi_b = sigma(a,b) phi_ab defines the cocycle. theta_F(a) is the
// degree-1 function gamma -> phi_gamma(a).

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "cartankit/error.hpp"
#include "cartankit/groupoid.hpp"
#include "cartankit/inclusion.hpp"
#include "cartankit/matalg.hpp"
#include "cartankit/reduced_cstar.hpp"
#include "cartankit/twist.hpp"
#include "cartankit/weyl.hpp"

namespace cartankit {

struct Eigenfunctional {
  Matrix v;
  ModState source;
  ModState range;
  Matrix density;
  Complex operator()(const Matrix& x) const { return (density * x).trace(); }
};

inline Eigenfunctional eigenfunctional(const Inclusion& inc, const Matrix& v, const ModState& f) {
  const double s = f(v.adjoint() * v).real();
  if (s <= inc.tolerance().eps * std::max(1.0, v.squaredNorm()))
    throw Error(ErrorKind::SourceVanishes, "f(v* v) vanishes");
  Eigenfunctional phi;
  phi.v = v;
  phi.source = f;
  phi.density = canonical_density(inc, Matrix(f.density * v.adjoint() / std::sqrt(s)));
  phi.range = *transport(inc, f, v);
  return phi;
}

/// Same circle class (mode RT) or same functional up to a positive factor (mode R1).
inline bool eig_equal(const Eigenfunctional& a, const Eigenfunctional& b, GermMode mode = GermMode::R1, double tol = 1e-7) {
  if (!same_state(a.source, b.source)) return false;
  const Complex c = a.source(a.v.adjoint() * b.v);
  const double scale = std::sqrt(a.source(a.v.adjoint() * a.v).real() * b.source(b.v.adjoint() * b.v).real());
  if (std::abs(c) <= tol * scale) return false;
  if (mode == GermMode::RT) return true;
  return c.real() > 0 && std::abs(c.imag()) <= tol * std::abs(c);
}

inline Eigenfunctional eig_product(const Inclusion& inc, const Eigenfunctional& a, const Eigenfunctional& b) {
  if (!same_state(a.source, b.range)) throw Error(ErrorKind::NotComposable, "s(phi1) != r(phi2)");
  return eigenfunctional(inc, Matrix(a.v * b.v), b.source);
}

inline Eigenfunctional eig_inverse(const Inclusion& inc, const Eigenfunctional& a) {
  return eigenfunctional(inc, Matrix(a.v.adjoint()), a.range);
}

// ----------------------------------------------------------------- covers

struct CompatibleCover {
  std::vector<ModState> states;
  int word_bound = 4;
  bool certified = false;
};

enum class CoverMode { StronglyCompatible, Custom };

inline CompatibleCover build_cover(const Inclusion& inc, CoverMode mode, const std::vector<ModState>& custom = {},
                                   int word_bound = 4) {
  CompatibleCover c;
  c.word_bound = word_bound;
  c.states = mode == CoverMode::StronglyCompatible ? strongly_compatible(inc) : custom;
  for (auto& s : c.states) {
    s.density = canonical_density(inc, s.density);
    if (!check_mod_state(inc, s).ok()) throw Error(ErrorKind::InvalidState, "cover element is not in Mod(C,D)");
    if (!is_compatible_state(inc, s, word_bound).compatible)
      throw Error(ErrorKind::InvalidState, "cover element is not a compatible state");
  }
  if (!covers(inc, c.states)) throw Error(ErrorKind::NotCovering, "restrictions of F miss a character of D");
  if (!is_invariant(inc, c.states)) throw Error(ErrorKind::NotInvariant, "F is not invariant under the normalizers");
  c.certified = true;
  return c;
}

/// The strongly compatible states all lie in F.
inline bool contains_strongly_compatible(const Inclusion& inc, const CompatibleCover& f) {
  for (const auto& s : strongly_compatible(inc))
    if (find_state(f.states, s) < 0) return false;
  return true;
}

// ----------------------------------------------------------- eigen twist

struct EigenTwist {
  std::shared_ptr<const CocycleTwist> twist;
  std::vector<ModState> states;              // unit i <-> states[i]
  std::vector<Eigenfunctional> representatives;   // by arrow index
  int word_bound = 0;
  static constexpr int degree = 1;
};

namespace detail {

inline std::string state_label(std::size_t i, std::size_t m) { return "f" + corner_label(i, m); }

inline void require_certified(const CompatibleCover& f) {
  if (!f.certified) throw Error(ErrorKind::CoverNotCertified, "cover has not been certified");
}

}  // namespace detail

inline EigenTwist eigen_twist(const Inclusion& inc, const CompatibleCover& cover) {
  detail::require_certified(cover);
  EigenTwist out;
  out.states = cover.states;
  out.word_bound = cover.word_bound;
  const std::size_t m = cover.states.size();

  struct Cls {
    std::size_t r, s;
    Eigenfunctional phi;
  };
  std::vector<Cls> classes;
  for (std::size_t i = 0; i < m; ++i) {
    auto phi = eigenfunctional(inc, identity(inc.n()), cover.states[i]);
    phi.density = cover.states[i].density;
    classes.push_back({i, i, phi});
  }
  auto index_of = [&](const ModState& s) {
    const int k = find_state(cover.states, s);
    if (k < 0) throw Error(ErrorKind::NotInvariant, "range state leaves the cover");
    return static_cast<std::size_t>(k);
  };
  for (const auto& w : normalizer_words(inc, cover.word_bound)) {
    for (std::size_t i = 0; i < m; ++i) {
      const auto& f = cover.states[i];
      if (f(w.adjoint() * w).real() <= inc.tolerance().eps * std::max(1.0, w.squaredNorm())) continue;
      auto phi = eigenfunctional(inc, w, f);
      const std::size_t r = index_of(phi.range);
      bool known = false;
      for (const auto& c : classes)
        if (c.r == r && c.s == i && eig_equal(c.phi, phi, GermMode::RT)) {
          known = true;
          break;
        }
      if (known) continue;
      const Complex ph = canonical_phase(phi.density);
      phi.density *= ph;
      phi.v *= std::conj(ph);
      classes.push_back({r, i, std::move(phi)});
    }
  }

  // Labels: "f<r><<s>" plus a class counter when several classes share (r, s).
  std::map<std::pair<std::size_t, std::size_t>, int> counter;
  std::vector<std::string> ids;
  for (const auto& c : classes) {
    const int k = counter[{c.r, c.s}]++;
    std::string id = detail::corner_label(c.r, m) + "<" + detail::corner_label(c.s, m);
    if (k > 0) id += "#" + std::to_string(k);
    ids.push_back(id);
  }
  auto find_class = [&](std::size_t r, std::size_t s, const Eigenfunctional& phi) -> int {
    for (std::size_t k = 0; k < classes.size(); ++k)
      if (classes[k].r == r && classes[k].s == s && eig_equal(classes[k].phi, phi, GermMode::RT)) return static_cast<int>(k);
    return -1;
  };

  GroupoidSpec spec;
  for (std::size_t i = 0; i < m; ++i) {
    spec.units.push_back(detail::state_label(i, m));
    spec.unit_arrows[detail::state_label(i, m)] = ids[i];
  }
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t, Complex>> products;
  for (std::size_t a = 0; a < classes.size(); ++a) {
    const auto inv = find_class(classes[a].s, classes[a].r, eig_inverse(inc, classes[a].phi));
    if (inv < 0) throw Error(ErrorKind::IncompleteEnumeration, "inverse eigenfunctional class missing; raise the word bound");
    spec.arrows.push_back({ids[a], detail::state_label(classes[a].s, m), detail::state_label(classes[a].r, m),
                           ids[static_cast<std::size_t>(inv)]});
    for (std::size_t b = 0; b < classes.size(); ++b) {
      if (classes[a].s != classes[b].r) continue;
      const auto prod = eig_product(inc, classes[a].phi, classes[b].phi);
      const int c = find_class(classes[a].r, classes[b].s, prod);
      if (c < 0) throw Error(ErrorKind::IncompleteEnumeration, "product eigenfunctional class missing; raise the word bound");
      const Matrix& mc = classes[static_cast<std::size_t>(c)].phi.density;
      Complex s = hs_inner(prod.density, mc) / hs_inner(mc, mc);
      s /= std::abs(s);
      spec.compose.push_back({ids[a], ids[b], ids[static_cast<std::size_t>(c)]});
      products.emplace_back(a, b, static_cast<std::size_t>(c), s);
    }
  }
  const auto rep = validate(spec);
  if (!rep.ok()) throw Error(ErrorKind::IncompleteEnumeration, "eigenfunctional classes violate " + rep.violations.front().axiom);
  auto g = std::make_shared<const FiniteGroupoid>(spec);
  const std::size_t n = g->num_arrows();
  out.representatives.resize(n);
  std::vector<int> pos(classes.size());
  for (std::size_t k = 0; k < classes.size(); ++k) {
    pos[k] = g->arrow_index(ids[k]);
    out.representatives[static_cast<std::size_t>(pos[k])] = classes[k].phi;
  }
  CocycleTwist::Table table(n * n, Complex(1.0));
  for (const auto& [a, b, c, s] : products) {
    const int ia = pos[a], ib = pos[b];
    if (g->is_unit_arrow(ia) || g->is_unit_arrow(ib)) continue;
    table[static_cast<std::size_t>(ia) * n + static_cast<std::size_t>(ib)] = s;
  }
  auto t = CocycleTwist::unchecked(g, std::move(table));
  if (!validate_cocycle(t, 1e-8).ok()) throw Error(ErrorKind::InvalidCocycle, "extracted cocycle fails the cocycle identity");
  out.twist = std::make_shared<const CocycleTwist>(std::move(t));
  return out;
}

/// theta_F(a)(gamma) = phi_gamma(a), a degree-1 function on the eigen twist.
inline EquivariantFunction theta_F(const EigenTwist& et, const Matrix& a) {
  EquivariantFunction f(et.twist, 1);
  for (std::size_t k = 0; k < et.representatives.size(); ++k) f[static_cast<int>(k)] = et.representatives[k](a);
  return f;
}

// ------------------------------------------------------------ certificate

struct EnvelopeCertificate {
  bool exists = false;
  std::string reason;
  // Rejection sub-reports.
  bool unique_pseudo_expectation = false;
  bool dc_abelian = false;
  bool dc_d_essential = false;
  bool c_dc_essential = false;
  // The built pair.
  std::optional<EigenTwist> twist;
  std::optional<ReducedAlgebra> algebra;
  bool regular_homomorphism = false;
  bool kernel_equals_KF = false;
  bool generation = false;
  bool D1_generation = false;
  bool essential_extension = false;
  bool pointwise_density = false;
  bool cartan = false;
  bool theta_isomorphism = false;
  std::size_t kernel_dim = 0;
  std::vector<int> block_structure;
  double homomorphism_residual = 0.0;
  bool all() const {
    return exists && regular_homomorphism && kernel_equals_KF && generation && D1_generation && essential_extension &&
           pointwise_density && cartan;
  }
};

namespace detail {

/// Matrix whose columns are theta(b) for the basis b of C.
inline Matrix theta_matrix(const Inclusion& inc, const EigenTwist& et) {
  const auto& basis = inc.C().basis();
  Matrix m(static_cast<Eigen::Index>(et.representatives.size()), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = theta_F(et, basis[j]).values();
  return m;
}

inline std::size_t numeric_rank_of(const Matrix& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * std::max(1.0, s(0))) ++r;
  return r;
}

}  // namespace detail

/// Fills the certificate booleans for a given cover.
inline EnvelopeCertificate certify_cover(const Inclusion& inc, const CompatibleCover& cover) {
  EnvelopeCertificate c;
  const auto& tol = inc.tolerance();
  c.exists = true;
  c.twist = eigen_twist(inc, cover);
  const auto& et = *c.twist;
  c.algebra = realize(et.twist, 1, tol);
  const auto& r = *c.algebra;
  const auto& basis = inc.C().basis();

  double res = 0.0;
  for (const auto& a : basis)
    for (const auto& b : basis)
      res = std::max(res, convolve(theta_F(et, a), theta_F(et, b)).sup_distance(theta_F(et, Matrix(a * b))));
  for (const auto& a : basis) res = std::max(res, involution(theta_F(et, a)).sup_distance(theta_F(et, Matrix(a.adjoint()))));
  bool normalizers_ok = true;
  for (const auto& v : inc.normalizers())
    if (normalizer_residual(r.diagonal(), r.embed(theta_F(et, v))) > 1e3 * tol.eps) normalizers_ok = false;
  c.homomorphism_residual = res;
  c.regular_homomorphism = res < 1e-9 && normalizers_ok;

  const Matrix tm = detail::theta_matrix(inc, et);
  const Matrix ker = detail::null_space(tm, tol.rank);
  c.kernel_dim = static_cast<std::size_t>(ker.cols());
  const auto kf = radical_ideal(inc, cover.states);
  bool inside = kf.dim() == c.kernel_dim;
  for (Eigen::Index k = 0; k < ker.cols() && inside; ++k) inside = kf.contains(inc.C().from_coords(Vector(ker.col(k))), 1e-7);
  c.kernel_equals_KF = inside;

  std::vector<Matrix> gens, d1;
  for (const auto& a : basis) gens.push_back(r.embed(theta_F(et, a)));
  const std::size_t theta_rank = Subspace(r.ambient_dim(), gens, tol.rank).dim();
  for (const auto& d : r.diagonal().basis()) gens.push_back(d);
  c.generation = generate_star_algebra(r.ambient_dim(), gens, tol).dim() == r.realization().dim();
  for (const auto& a : basis) d1.push_back(r.embed(conditional_expectation(theta_F(et, a))));
  c.D1_generation = generate_star_algebra(r.ambient_dim(), d1, tol).dim() == r.diagonal().dim();

  std::vector<int> hits(inc.num_corners(), 0);
  for (const auto& s : cover.states)
    if (s.corner >= 0) ++hits[static_cast<std::size_t>(s.corner)];
  c.essential_extension = std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
  c.pointwise_density = detail::numeric_rank_of(tm, tol.rank) == et.representatives.size();
  c.cartan = is_cartan_pair(r, tol).cartan();
  c.theta_isomorphism = c.kernel_dim == 0 && theta_rank == r.realization().dim();
  c.block_structure = cartankit::block_structure(r.realization(), tol);
  return c;
}

inline EnvelopeCertificate cartan_envelope(const Inclusion& inc, int word_bound = 4) {
  if (!inc.regular()) throw Error(ErrorKind::NotRegular, "the envelope pipeline needs a regular inclusion");
  const auto& tol = inc.tolerance();
  const auto dc = relative_commutant(inc.D(), inc.C(), tol);
  const auto pe = pseudo_expectations(inc);
  EnvelopeCertificate c;
  c.unique_pseudo_expectation = pe.unique;
  c.dc_abelian = dc.is_abelian(10 * tol.eps);
  c.dc_d_essential = dc.dim() == inc.D().dim();
  c.c_dc_essential = true;   // every ideal zC has z central, hence in D^c
  if (!pe.unique) {
    c.reason = c.dc_abelian ? "pseudo-expectation not unique: (D^c, D) is not an essential inclusion"
                            : "pseudo-expectation not unique: D^c is not abelian";
    return c;
  }
  auto out = certify_cover(inc, build_cover(inc, CoverMode::StronglyCompatible, {}, word_bound));
  out.unique_pseudo_expectation = c.unique_pseudo_expectation;
  out.dc_abelian = c.dc_abelian;
  out.dc_d_essential = c.dc_d_essential;
  out.c_dc_essential = c.c_dc_essential;
  return out;
}

// ------------------------------------------------------- cover comparison

struct CoverComparison {
  std::vector<int> arrow_map;          // arrow of G_1 -> arrow of G_2
  std::vector<Complex> phases;         // phi1_a = phase_a * phi2_{map(a)}
  std::size_t dim_large = 0, dim_small = 0, kernel_dim = 0;
  bool surjective = false;
  double multiplicative_residual = 0.0;
  double intertwining_residual = 0.0;   // q o theta_2 - theta_1 on the C basis
  EigenTwist small, large;

  /// q(f)(a) = phase_a f(map(a)).
  EquivariantFunction apply(const EquivariantFunction& f) const {
    EquivariantFunction out(small.twist, f.degree());
    for (std::size_t a = 0; a < arrow_map.size(); ++a) out[static_cast<int>(a)] = phases[a] * f(arrow_map[a]);
    return out;
  }
};

inline CoverComparison cover_comparison(const Inclusion& inc, const CompatibleCover& f1, const CompatibleCover& f2) {
  detail::require_certified(f1);
  detail::require_certified(f2);
  for (const auto& s : f1.states)
    if (find_state(f2.states, s) < 0) throw Error(ErrorKind::NotNested, "F1 is not contained in F2");
  CoverComparison cc;
  cc.small = eigen_twist(inc, f1);
  cc.large = eigen_twist(inc, f2);
  const auto& g1 = cc.small.twist->groupoid();
  cc.dim_small = g1.num_arrows();
  cc.dim_large = cc.large.twist->size();
  for (std::size_t a = 0; a < cc.dim_small; ++a) {
    const auto& phi = cc.small.representatives[a];
    int hit = -1;
    for (std::size_t b = 0; b < cc.dim_large; ++b)
      if (eig_equal(cc.large.representatives[b], phi, GermMode::RT) &&
          same_state(cc.large.representatives[b].range, phi.range)) {
        hit = static_cast<int>(b);
        break;
      }
    if (hit < 0) throw Error(ErrorKind::IncompleteEnumeration, "an eigenfunctional over F1 has no class over F2");
    const Matrix& m2 = cc.large.representatives[static_cast<std::size_t>(hit)].density;
    Complex ph = hs_inner(phi.density, m2) / hs_inner(m2, m2);
    cc.arrow_map.push_back(hit);
    cc.phases.push_back(ph / std::abs(ph));
  }
  std::vector<int> sorted = cc.arrow_map;
  std::sort(sorted.begin(), sorted.end());
  cc.surjective = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
  cc.kernel_dim = cc.dim_large - cc.dim_small;

  double mres = 0.0;
  for (std::size_t a = 0; a < cc.dim_large; ++a)
    for (std::size_t b = 0; b < cc.dim_large; ++b) {
      const auto da = EquivariantFunction::delta(cc.large.twist, 1, static_cast<int>(a));
      const auto db = EquivariantFunction::delta(cc.large.twist, 1, static_cast<int>(b));
      mres = std::max(mres, cc.apply(convolve(da, db)).sup_distance(convolve(cc.apply(da), cc.apply(db))));
    }
  cc.multiplicative_residual = mres;
  double ires = 0.0;
  for (const auto& x : inc.C().basis())
    ires = std::max(ires, cc.apply(theta_F(cc.large, x)).sup_distance(theta_F(cc.small, x)));
  cc.intertwining_residual = ires;
  return cc;
}

// ------------------------------------------------- uniqueness crosscheck

/// (qC q, qD q) for a projection q commuting with C, written on the range of q.
inline Inclusion compress_inclusion(const Inclusion& inc, const Matrix& q) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((q + q.adjoint()) / 2.0);
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > 0.5) cols.push_back(i);
  Matrix w(inc.n(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) w.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(cols[k]);
  const Eigen::Index r = w.cols();
  auto cut = [&](const Matrix& x) { return Matrix(w.adjoint() * x * w); };
  std::vector<Matrix> c, d, v;
  for (const auto& b : inc.C().basis()) c.push_back(cut(b));
  for (const auto& b : inc.D().basis()) d.push_back(cut(b));
  for (const auto& g : inc.normalizers()) {
    const Matrix x = cut(g);
    if (x.norm() > 1e-12) v.push_back(x);
  }
  const auto& tol = inc.tolerance();
  auto cc = std::make_shared<const FdStarAlgebra>(FdStarAlgebra::from_span(r, c, tol));
  auto dd = std::make_shared<const FdStarAlgebra>(FdStarAlgebra::from_span(r, d, tol));
  return Inclusion(cc, dd, v, tol);
}

struct CrosscheckReport {
  bool pass = false;
  bool block_structure_equal = false;
  bool groupoid_isomorphic = false;
  bool exhaustive = false;
  std::vector<int> eigen_blocks, weyl_blocks;
  std::size_t eigen_arrows = 0, weyl_arrows = 0;
};

namespace detail {

/// Arrow counts per (source, target) class sizes and isotropy orders, as sorted multisets.
inline std::vector<std::size_t> groupoid_invariants(const FiniteGroupoid& g) {
  std::vector<std::size_t> inv;
  std::map<std::pair<int, int>, std::size_t> per;
  for (int a = 0; a < static_cast<int>(g.num_arrows()); ++a) ++per[{g.src(a), g.rng(a)}];
  std::vector<std::size_t> counts;
  for (const auto& [k, n] : per) counts.push_back(n);
  std::sort(counts.begin(), counts.end());
  std::vector<std::size_t> iso;
  for (int x = 0; x < static_cast<int>(g.num_units()); ++x) iso.push_back(isotropy(g, x).size());
  std::sort(iso.begin(), iso.end());
  inv.push_back(g.num_units());
  inv.push_back(g.num_arrows());
  inv.insert(inv.end(), counts.begin(), counts.end());
  inv.push_back(0);
  inv.insert(inv.end(), iso.begin(), iso.end());
  return inv;
}

}  // namespace detail

inline CrosscheckReport envelope_uniqueness_crosscheck(const Inclusion& inc, int word_bound = 4) {
  const auto pe = pseudo_expectations(inc);
  if (!inc.regular() || !pe.unique || !is_masa(inc))
    throw Error(ErrorKind::EnvelopeAbsent, "no Cartan envelope: the inclusion is not a regular MASA inclusion");
  const auto& tol = inc.tolerance();
  const auto et = eigen_twist(inc, build_cover(inc, CoverMode::StronglyCompatible, {}, word_bound));
  const auto l = left_kernel(inc, *pe.expectation);
  const Matrix keep = inc.C().unit() - l.ideal.support_projection();
  const auto quotient = l.ideal.is_zero() ? inc : compress_inclusion(inc, keep);
  const auto wt = weyl_twist(quotient, word_bound);

  CrosscheckReport r;
  r.eigen_blocks = block_structure(realize(et.twist, 1, tol).realization(), tol);
  r.weyl_blocks = block_structure(realize(wt.twist, WeylTwist::degree, tol).realization(), tol);
  r.block_structure_equal = r.eigen_blocks == r.weyl_blocks;
  const auto& ge = et.twist->groupoid();
  const auto& gw = wt.twist->groupoid();
  r.eigen_arrows = ge.num_arrows();
  r.weyl_arrows = gw.num_arrows();
  r.exhaustive = ge.num_arrows() <= 12 && gw.num_arrows() <= 12;
  r.groupoid_isomorphic = r.exhaustive ? find_isomorphism(ge, gw).has_value()
                                       : detail::groupoid_invariants(ge) == detail::groupoid_invariants(gw);
  r.pass = r.block_structure_equal && r.groupoid_isomorphic;
  return r;
}

}  // namespace cartankit

#endif  // CARTANKIT_ENVELOPE_HPP
