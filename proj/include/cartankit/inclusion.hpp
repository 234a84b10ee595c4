#ifndef CARTANKIT_INCLUSION_HPP
#define CARTANKIT_INCLUSION_HPP

// Finite-dimensional inclusions (C, D): normalizers and their partial dynamics,
// fixed-point ideals, Mod(C,D), compatible states, pseudo-expectations and the
// ideals L(C,D), K_F. States are stored as densities M in C, phi(x) = tr(M x).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "cartankit/error.hpp"
#include "cartankit/matalg.hpp"
#include "cartankit/reduced_cstar.hpp"

namespace cartankit {

class Inclusion {
 public:
  Inclusion() = default;

  /// C and D must share the unit, D must be abelian and contained in C; every
  /// normalizer is verified.
  Inclusion(std::shared_ptr<const FdStarAlgebra> c, std::shared_ptr<const FdStarAlgebra> d,
            std::vector<Matrix> normalizers, const Tolerance& tol = {})
      : c_(std::move(c)), d_(std::move(d)), gens_(std::move(normalizers)), tol_(tol) {
    if (c_->ambient_dim() != d_->ambient_dim())
      throw Error(ErrorKind::NotASubalgebra, "C and D live in different matrix sizes");
    if (!c_->contains(*d_, 10 * tol_.eps)) throw Error(ErrorKind::NotASubalgebra, "D is not contained in C");
    if (!d_->is_abelian(10 * tol_.eps)) throw Error(ErrorKind::NotAbelian, "D is not abelian");
    if ((c_->unit() - d_->unit()).norm() > 10 * tol_.eps) throw Error(ErrorKind::NotASubalgebra, "C and D have different units");
    projs_ = minimal_projections(*d_, tol_);
    for (const auto& v : gens_) {
      if (v.rows() != n() || v.cols() != n()) throw Error(ErrorKind::NonSquareMatrix, "normalizer has wrong shape");
      if (!c_->contains(v, 10 * tol_.eps)) throw Error(ErrorKind::OutsideAmbient, "normalizer is not in C");
      if (normalizer_residual(*d_, v) > tol_.eps * std::max(1.0, v.squaredNorm()))
        throw Error(ErrorKind::NotANormalizer, "generator fails v*Dv, vDv* in D");
    }
    std::vector<Matrix> gen = gens_;
    for (const auto& b : d_->basis()) gen.push_back(b);
    regular_ = generate_star_algebra(n(), gen, tol_).dim() == c_->dim();
  }

  const FdStarAlgebra& C() const { return *c_; }
  const FdStarAlgebra& D() const { return *d_; }
  std::shared_ptr<const FdStarAlgebra> C_ptr() const { return c_; }
  std::shared_ptr<const FdStarAlgebra> D_ptr() const { return d_; }
  const std::vector<Matrix>& normalizers() const { return gens_; }
  /// Minimal projections p_1..p_m of D; index i is the character sigma_i.
  const std::vector<Matrix>& projections() const { return projs_; }
  std::size_t num_corners() const { return projs_.size(); }
  const Tolerance& tolerance() const { return tol_; }
  Eigen::Index n() const { return c_->ambient_dim(); }
  /// The *-algebra generated by the normalizers and D equals C.
  bool regular() const { return regular_; }

  /// sigma_i(d) for d in D.
  Complex character(std::size_t i, const Matrix& d) const {
    const Matrix& p = projs_[i];
    return (p * d).trace() / p.trace().real();
  }

 private:
  std::shared_ptr<const FdStarAlgebra> c_, d_;
  std::vector<Matrix> gens_;
  std::vector<Matrix> projs_;
  Tolerance tol_;
  bool regular_ = false;
};

/// Builds an inclusion from generators. With no C generators, C is generated by
/// the normalizers and D.
inline Inclusion make_inclusion(Eigen::Index n, const std::vector<Matrix>& c_gens, const std::vector<Matrix>& d_gens,
                                const std::vector<Matrix>& normalizers, const Tolerance& tol = {}) {
  std::vector<Matrix> dg = d_gens;
  if (dg.empty()) dg.push_back(identity(n));
  auto d = std::make_shared<const FdStarAlgebra>(generate_star_algebra(n, dg, tol));
  std::vector<Matrix> cg = c_gens;
  if (cg.empty()) {
    cg = normalizers;
    for (const auto& b : d->basis()) cg.push_back(b);
  }
  auto c = std::make_shared<const FdStarAlgebra>(generate_star_algebra(n, cg, tol));
  return Inclusion(std::move(c), std::move(d), normalizers, tol);
}

/// (C*_r(Sigma,G,k), C(G^0)) with the delta functions as normalizers.
inline Inclusion inclusion_from_realization(const ReducedAlgebra& r, const Tolerance& tol = {}) {
  std::vector<Matrix> gens;
  for (int a = 0; a < static_cast<int>(r.twist().size()); ++a) gens.push_back(r.embed_delta(a));
  return Inclusion(std::make_shared<const FdStarAlgebra>(r.realization()),
                   std::make_shared<const FdStarAlgebra>(r.diagonal()), std::move(gens), tol);
}

inline bool is_normalizer(const Inclusion& inc, const Matrix& v) {
  const auto& tol = inc.tolerance();
  if (v.rows() != inc.n() || v.cols() != inc.n() || !inc.C().contains(v, 10 * tol.eps))
    throw Error(ErrorKind::OutsideAmbient, "element is not in C");
  return normalizer_residual(inc.D(), v) <= tol.eps * std::max(1.0, v.squaredNorm());
}

namespace detail {
inline void require_normalizer(const Inclusion& inc, const Matrix& v) {
  bool ok = false;
  try {
    ok = is_normalizer(inc, v);
  } catch (const Error&) {
    ok = false;
  }
  if (!ok) throw Error(ErrorKind::NotANormalizer, "element is not a normalizer");
}
}  // namespace detail

/// A partial bijection of {0..m-1}; map[i] = -1 outside the domain.
struct PartialBijection {
  std::vector<int> map;
  bool in_domain(std::size_t i) const { return map[i] >= 0; }
  std::vector<int> domain() const {
    std::vector<int> d;
    for (std::size_t i = 0; i < map.size(); ++i)
      if (map[i] >= 0) d.push_back(static_cast<int>(i));
    return d;
  }
  PartialBijection compose(const PartialBijection& inner) const {
    PartialBijection out{std::vector<int>(map.size(), -1)};
    for (std::size_t i = 0; i < map.size(); ++i)
      if (inner.map[i] >= 0) out.map[i] = map[static_cast<std::size_t>(inner.map[i])];
    return out;
  }
  PartialBijection inverse() const {
    PartialBijection out{std::vector<int>(map.size(), -1)};
    for (std::size_t i = 0; i < map.size(); ++i)
      if (map[i] >= 0) out.map[static_cast<std::size_t>(map[i])] = static_cast<int>(i);
    return out;
  }
  bool operator==(const PartialBijection&) const = default;
};

/// beta_v on D^ = {sigma_i}: dom = {i : sigma_i(v*v) > 0}, beta_v(sigma_i) = sigma_i(v* . v)/sigma_i(v*v).
inline PartialBijection beta(const Inclusion& inc, const Matrix& v) {
  detail::require_normalizer(inc, v);
  const std::size_t m = inc.num_corners();
  const auto& p = inc.projections();
  const double scale = std::max(1.0, v.squaredNorm());
  const Matrix vv = v.adjoint() * v;
  PartialBijection b{std::vector<int>(m, -1)};
  for (std::size_t i = 0; i < m; ++i) {
    const double s = inc.character(i, vv).real();
    if (s <= inc.tolerance().eps * scale) continue;
    for (std::size_t j = 0; j < m; ++j) {
      const double r = inc.character(i, v.adjoint() * p[j] * v).real() / s;
      if (std::abs(r - 1.0) < 1e-6) {
        b.map[i] = static_cast<int>(j);
        break;
      }
    }
    if (b.map[i] < 0) throw Error(ErrorKind::NumericalRankAmbiguity, "beta_v(sigma_i) is not a character");
  }
  return b;
}

/// theta_v : D vv* -> D v*v, theta_v(vv* h) = v* h v.
struct Theta {
  std::vector<int> domain;          // indices j with p_j <= supp(vv*)
  std::vector<Matrix> images;       // theta_v(p_j), aligned with domain
  Matrix apply(const Inclusion& inc, const Matrix& d) const {
    Matrix out = Matrix::Zero(inc.n(), inc.n());
    for (std::size_t k = 0; k < domain.size(); ++k)
      out += inc.character(static_cast<std::size_t>(domain[k]), d) * images[k];
    return out;
  }
};

inline Theta theta(const Inclusion& inc, const Matrix& v) {
  detail::require_normalizer(inc, v);
  Theta t;
  const Matrix vv = v * v.adjoint();
  const double scale = std::max(1.0, v.squaredNorm());
  for (std::size_t j = 0; j < inc.num_corners(); ++j) {
    const double s = inc.character(j, vv).real();
    if (s <= inc.tolerance().eps * scale) continue;
    t.domain.push_back(static_cast<int>(j));
    t.images.push_back(v.adjoint() * inc.projections()[j] * v / s);
  }
  return t;
}

/// Indices i with p_i x != 0.
inline std::vector<int> support_indices(const Inclusion& inc, const Matrix& x) {
  std::vector<int> s;
  const double scale = std::max(1.0, x.norm());
  for (std::size_t i = 0; i < inc.num_corners(); ++i)
    if ((inc.projections()[i] * x).norm() > inc.tolerance().eps * scale) s.push_back(static_cast<int>(i));
  return s;
}

/// K_0 = {d in (vv*D)^perp-perp : vd = dv, vd commutes with D}, an ideal of D.
inline IdealSubspace fixed_point_ideal(const Inclusion& inc, const Matrix& v) {
  detail::require_normalizer(inc, v);
  const auto supp = support_indices(inc, v * v.adjoint());
  const auto& p = inc.projections();
  const Eigen::Index n = inc.n();
  const auto k = static_cast<Eigen::Index>(supp.size());
  const auto nd = static_cast<Eigen::Index>(inc.D().dim());
  Matrix sys((1 + nd) * n * n, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const Matrix& pc = p[static_cast<std::size_t>(supp[static_cast<std::size_t>(c)])];
    sys.block(0, c, n * n, 1) = vec(v * pc - pc * v);
    for (Eigen::Index j = 0; j < nd; ++j) {
      const Matrix& e = inc.D().basis()[static_cast<std::size_t>(j)];
      const Matrix vd = v * pc;
      sys.block((1 + j) * n * n, c, n * n, 1) = vec(vd * e - e * vd);
    }
  }
  std::vector<Matrix> span;
  if (k > 0) {
    const Matrix ns = detail::null_space(sys, inc.tolerance().rank);
    for (Eigen::Index c = 0; c < ns.cols(); ++c) {
      Matrix d = Matrix::Zero(n, n);
      for (Eigen::Index j = 0; j < k; ++j) d += ns(j, c) * p[static_cast<std::size_t>(supp[static_cast<std::size_t>(j)])];
      span.push_back(d);
    }
  }
  return IdealSubspace::from_span(inc.D_ptr(), span, inc.tolerance());
}

/// Corner indices i with p_i in the ideal J of D.
inline std::vector<int> ideal_support(const Inclusion& inc, const IdealSubspace& j) {
  std::vector<int> s;
  for (std::size_t i = 0; i < inc.num_corners(); ++i)
    if (j.contains(inc.projections()[i], 1e3 * inc.tolerance().eps)) s.push_back(static_cast<int>(i));
  return s;
}

struct FixedSetReport {
  bool pass = false;
  std::vector<int> ideal_side;   // supp(K_0 cap v*v D)
  std::vector<int> fixed_side;   // fixed points of beta_v
};

inline FixedSetReport fixed_set_check(const Inclusion& inc, const Matrix& v, const IdealSubspace& k0) {
  detail::require_normalizer(inc, v);
  FixedSetReport r;
  const auto dom = support_indices(inc, v.adjoint() * v);
  const std::set<int> ds(dom.begin(), dom.end());
  for (int i : ideal_support(inc, k0))
    if (ds.count(i)) r.ideal_side.push_back(i);
  const auto b = beta(inc, v);
  for (std::size_t i = 0; i < b.map.size(); ++i)
    if (b.map[i] == static_cast<int>(i)) r.fixed_side.push_back(static_cast<int>(i));
  r.pass = r.ideal_side == r.fixed_side;
  return r;
}

inline FixedSetReport fixed_set_check(const Inclusion& inc, const Matrix& v) {
  return fixed_set_check(inc, v, fixed_point_ideal(inc, v));
}

// ---------------------------------------------------------------- states

/// A state of C with restriction sigma_corner to D, given by its density.
struct ModState {
  int corner = -1;
  Matrix density;
  Complex operator()(const Matrix& x) const { return (density * x).trace(); }
};

/// The canonical density of a functional x -> tr(m x) restricted to C.
inline Matrix canonical_density(const Inclusion& inc, const Matrix& m) {
  return inc.C().project(m.adjoint()).adjoint();
}

struct StateCheck {
  bool positive = false, normalized = false, restricts = false, corner_supported = false;
  bool ok() const { return positive && normalized && restricts && corner_supported; }
};

inline StateCheck check_mod_state(const Inclusion& inc, const ModState& s, double tol = 1e-9) {
  StateCheck c;
  const Matrix rho = canonical_density(inc, s.density);
  const Matrix h = (rho + rho.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  c.positive = (rho - rho.adjoint()).norm() < tol && es.eigenvalues()(0) > -tol;
  c.normalized = std::abs(rho.trace() - 1.0) < tol;
  if (s.corner < 0 || s.corner >= static_cast<int>(inc.num_corners())) return c;
  c.restricts = true;
  for (std::size_t i = 0; i < inc.num_corners(); ++i) {
    const double want = static_cast<int>(i) == s.corner ? 1.0 : 0.0;
    if (std::abs((rho * inc.projections()[i]).trace() - want) > tol) c.restricts = false;
  }
  const Matrix& p = inc.projections()[static_cast<std::size_t>(s.corner)];
  c.corner_supported = (p * rho * p - rho).norm() < 1e2 * tol;
  return c;
}

inline ModState make_mod_state(const Inclusion& inc, int corner, const Matrix& density) {
  ModState s{corner, canonical_density(inc, density)};
  if (!check_mod_state(inc, s).ok()) throw Error(ErrorKind::InvalidState, "density is not a state in Mod(C,D)");
  return s;
}

/// Which corner a state of C lives over; -1 if its restriction to D is not a character.
inline int corner_of(const Inclusion& inc, const Matrix& density, double tol = 1e-9) {
  for (std::size_t i = 0; i < inc.num_corners(); ++i)
    if (std::abs((density * inc.projections()[i]).trace() - 1.0) < tol) return static_cast<int>(i);
  return -1;
}

struct CornerDescriptor {
  int index = -1;
  Matrix projection;
  FdStarAlgebra corner;             // p_i C p_i with unit p_i
  bool abelian = false;
  std::vector<ModState> extreme_points;   // filled when the corner is abelian
};

/// Mod(C,D) as the union over i of the state spaces of p_i C p_i.
inline std::vector<CornerDescriptor> mod_states(const Inclusion& inc) {
  std::vector<CornerDescriptor> out;
  const auto& tol = inc.tolerance();
  for (std::size_t i = 0; i < inc.num_corners(); ++i) {
    CornerDescriptor c;
    c.index = static_cast<int>(i);
    c.projection = inc.projections()[i];
    std::vector<Matrix> span;
    for (const auto& b : inc.C().basis()) span.push_back(c.projection * b * c.projection);
    c.corner = FdStarAlgebra::from_span(inc.n(), span, tol, &c.projection);
    c.abelian = c.corner.is_abelian(10 * tol.eps);
    if (c.abelian) {
      for (const auto& q : minimal_projections(c.corner, tol))
        c.extreme_points.push_back({static_cast<int>(i), canonical_density(inc, q / q.trace().real())});
    }
    out.push_back(std::move(c));
  }
  return out;
}

// ------------------------------------------------------ normalizer words

namespace detail {

/// Scale-free fingerprint of a nonzero matrix.
inline std::string ray_key(const Matrix& x) {
  Matrix y = x / x.norm();
  y *= canonical_phase(y, 1e-6);
  std::string key;
  key.reserve(static_cast<std::size_t>(y.size()) * 12);
  char buf[48];
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      const long re = std::lround(y(i, j).real() * 1e7), im = std::lround(y(i, j).imag() * 1e7);
      std::snprintf(buf, sizeof buf, "%ld,%ld;", re, im);
      key += buf;
    }
  return key;
}

}  // namespace detail

/// Generic unitary of D used to sample multiplicative D-coefficients.
inline Matrix generic_d_unitary(const Inclusion& inc) {
  Matrix u = Matrix::Zero(inc.n(), inc.n());
  for (std::size_t i = 0; i < inc.num_corners(); ++i) {
    const double t = 2.0 * 3.14159265358979323846 * std::fmod(0.6180339887498949 * double(i + 1), 1.0);
    u += std::polar(1.0, t) * inc.projections()[i];
  }
  return u;
}

/// Distinct (up to scalars) nonzero elements of the *-semigroup generated by the
/// normalizer generators, their adjoints, the minimal projections of D and a
/// generic unitary of D, as products of at most L letters. The unit comes first.
inline std::vector<Matrix> normalizer_words(const Inclusion& inc, int word_bound, std::size_t max_words = 200000) {
  std::vector<Matrix> alphabet;
  std::unordered_set<std::string> seen_alpha;
  auto add_letter = [&](const Matrix& x) {
    if (x.norm() < 1e-12) return;
    if (seen_alpha.insert(detail::ray_key(x)).second) alphabet.push_back(x);
  };
  for (const auto& v : inc.normalizers()) add_letter(v);
  for (const auto& v : inc.normalizers()) add_letter(v.adjoint());
  for (const auto& p : inc.projections()) add_letter(p);
  add_letter(generic_d_unitary(inc));

  std::vector<Matrix> words{identity(inc.n())};
  std::unordered_set<std::string> seen{detail::ray_key(words.front())};
  std::vector<Matrix> frontier;
  for (const auto& a : alphabet)
    if (seen.insert(detail::ray_key(a)).second) {
      words.push_back(a);
      frontier.push_back(a);
    }
  for (int len = 2; len <= word_bound; ++len) {
    std::vector<Matrix> next;
    for (const auto& w : frontier)
      for (const auto& a : alphabet) {
        Matrix p = a * w;
        if (p.norm() < 1e-9) continue;
        if (!seen.insert(detail::ray_key(p)).second) continue;
        words.push_back(p);
        next.push_back(std::move(p));
        if (words.size() > max_words)
          throw Error(ErrorKind::DimensionOverflow, "normalizer word enumeration exceeds " + std::to_string(max_words));
      }
    frontier = std::move(next);
    if (frontier.empty()) break;
  }
  return words;
}

struct CompatibilityResult {
  bool compatible = false;
  int word_bound = 0;
  std::size_t words_checked = 0;
  std::optional<Matrix> witness;
  double witness_value = 0.0;   // |rho(v)|^2
  double witness_norm = 0.0;    // rho(v*v)
};

/// |rho(v)|^2 in {0, rho(v*v)} for every normalizer word of length at most L.
inline CompatibilityResult is_compatible_state(const Inclusion& inc, const ModState& rho, int word_bound = 4) {
  CompatibilityResult r;
  r.word_bound = word_bound;
  const auto words = normalizer_words(inc, word_bound);
  const double tol = 1e-7;
  for (const auto& v : words) {
    ++r.words_checked;
    const double a = std::norm(rho(v));
    const double b = rho(v.adjoint() * v).real();
    const double scale = std::max(1.0, v.squaredNorm());
    if (a <= tol * scale || std::abs(a - b) <= tol * scale) continue;
    r.witness = v;
    r.witness_value = a;
    r.witness_norm = b;
    return r;
  }
  r.compatible = true;
  return r;
}

// ------------------------------------------------- pseudo-expectations

/// E(x) = sum_i tr(rho_i x) p_i with rho_i a state supported in p_i C p_i.
struct PseudoExpectation {
  std::vector<Matrix> corner_densities;
  Matrix operator()(const Inclusion& inc, const Matrix& x) const {
    Matrix out = Matrix::Zero(inc.n(), inc.n());
    for (std::size_t i = 0; i < corner_densities.size(); ++i)
      out += (corner_densities[i] * x).trace() * inc.projections()[i];
    return out;
  }
};

/// Builds and checks a pseudo-expectation from corner states.
inline PseudoExpectation make_pseudo_expectation(const Inclusion& inc, const std::vector<Matrix>& densities) {
  if (densities.size() != inc.num_corners())
    throw Error(ErrorKind::InvalidState, "one corner state per minimal projection is required");
  PseudoExpectation e;
  for (std::size_t i = 0; i < densities.size(); ++i)
    e.corner_densities.push_back(make_mod_state(inc, static_cast<int>(i), densities[i]).density);
  return e;
}

struct IdealReport {
  IdealSubspace ideal;
  bool two_sided = false;
  bool meets_D_trivially = false;
  bool maximal = false;
};

namespace detail {

/// {x in C : x r_j = 0 for all j}.
inline std::vector<Matrix> right_annihilator(const FdStarAlgebra& c, const std::vector<Matrix>& roots, double rank_tol) {
  const Eigen::Index n = c.ambient_dim();
  const auto d = static_cast<Eigen::Index>(c.dim());
  if (roots.empty()) return c.basis();
  Matrix sys(static_cast<Eigen::Index>(roots.size()) * n * n, d);
  for (Eigen::Index col = 0; col < d; ++col)
    for (std::size_t j = 0; j < roots.size(); ++j)
      sys.block(static_cast<Eigen::Index>(j) * n * n, col, n * n, 1) = vec(c.basis()[static_cast<std::size_t>(col)] * roots[j]);
  const Matrix ns = null_space(sys, rank_tol);
  std::vector<Matrix> out;
  for (Eigen::Index k = 0; k < ns.cols(); ++k) out.push_back(c.from_coords(ns.col(k)));
  return out;
}

inline Matrix psd_sqrt(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((rho + rho.adjoint()) / 2.0);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

inline std::size_t intersection_dim(const Subspace& a, const Subspace& b, double rank_tol) {
  std::vector<Matrix> all = a.basis();
  all.insert(all.end(), b.basis().begin(), b.basis().end());
  const Subspace sum(a.ambient_dim(), all, rank_tol);
  return a.dim() + b.dim() - sum.dim();
}

}  // namespace detail

/// L = {x : E(x*x) = 0} with ideal / D-intersection / maximality flags.
inline IdealReport left_kernel(const Inclusion& inc, const PseudoExpectation& e) {
  if (!inc.regular()) throw Error(ErrorKind::NotRegular, "left kernel analysis requires a regular inclusion");
  const auto& tol = inc.tolerance();
  std::vector<Matrix> roots;
  for (const auto& rho : e.corner_densities) roots.push_back(detail::psd_sqrt(rho));
  const auto span = detail::right_annihilator(inc.C(), roots, tol.rank);
  IdealReport r;
  try {
    r.ideal = IdealSubspace::from_span(inc.C_ptr(), span, tol);
    r.two_sided = true;
  } catch (const Error&) {
    r.two_sided = false;
    return r;
  }
  r.meets_D_trivially = detail::intersection_dim(r.ideal, inc.D(), tol.rank) == 0;
  // Every ideal qC (q central) with qC cap D = 0 must lie in L.
  const auto z = minimal_projections(center(inc.C(), tol), tol);
  if (z.size() > 16) throw Error(ErrorKind::DimensionOverflow, "too many central summands for the maximality scan");
  r.maximal = true;
  for (unsigned mask = 1; mask < (1u << z.size()); ++mask) {
    Matrix q = Matrix::Zero(inc.n(), inc.n());
    for (std::size_t k = 0; k < z.size(); ++k)
      if (mask & (1u << k)) q += z[k];
    std::vector<Matrix> qc;
    for (const auto& b : inc.C().basis()) qc.push_back(q * b);
    const Subspace qs(inc.n(), qc, tol.rank);
    if (detail::intersection_dim(qs, inc.D(), tol.rank) != 0) continue;
    if (!r.ideal.contains(qs, 1e3 * tol.eps)) r.maximal = false;
  }
  return r;
}

struct PseudoExpectationSet {
  std::vector<CornerDescriptor> corners;
  bool unique = false;
  bool faithful = false;                    // meaningful when unique
  std::optional<PseudoExpectation> expectation;   // the unique one
};

inline PseudoExpectationSet pseudo_expectations(const Inclusion& inc) {
  PseudoExpectationSet s;
  s.corners = mod_states(inc);
  s.unique = std::all_of(s.corners.begin(), s.corners.end(), [](const CornerDescriptor& c) { return c.corner.dim() == 1; });
  if (!s.unique) return s;
  PseudoExpectation e;
  for (const auto& p : inc.projections()) e.corner_densities.push_back(p / p.trace().real());
  std::vector<Matrix> roots;
  for (const auto& rho : e.corner_densities) roots.push_back(detail::psd_sqrt(rho));
  s.faithful = detail::right_annihilator(inc.C(), roots, inc.tolerance().rank).empty();
  s.expectation = std::move(e);
  return s;
}

/// beta~_v(rho)(x) = rho(v* x v) / rho(v* v), as a Mod state.
inline std::optional<ModState> transport(const Inclusion& inc, const ModState& rho, const Matrix& v) {
  const double s = rho(v.adjoint() * v).real();
  if (s <= inc.tolerance().eps * std::max(1.0, v.squaredNorm())) return std::nullopt;
  const Matrix m = canonical_density(inc, v * rho.density * v.adjoint() / s);
  return ModState{corner_of(inc, m), m};
}

inline bool same_state(const ModState& a, const ModState& b, double tol = 1e-7) {
  return (a.density - b.density).norm() <= tol;
}

/// Index of `s` in `f`, or -1.
inline int find_state(const std::vector<ModState>& f, const ModState& s, double tol = 1e-7) {
  for (std::size_t i = 0; i < f.size(); ++i)
    if (same_state(f[i], s, tol)) return static_cast<int>(i);
  return -1;
}

/// F is closed under beta~_v for the generators and their adjoints.
inline bool is_invariant(const Inclusion& inc, const std::vector<ModState>& f) {
  for (const auto& rho : f)
    for (const auto& g : inc.normalizers())
      for (const Matrix& v : {g, Matrix(g.adjoint())}) {
        const auto t = transport(inc, rho, v);
        if (t && find_state(f, *t) < 0) return false;
      }
  return true;
}

/// Restrictions of F exhaust D^.
inline bool covers(const Inclusion& inc, const std::vector<ModState>& f) {
  std::vector<bool> hit(inc.num_corners(), false);
  for (const auto& s : f)
    if (s.corner >= 0) hit[static_cast<std::size_t>(s.corner)] = true;
  return std::all_of(hit.begin(), hit.end(), [](bool b) { return b; });
}

/// K_F = {x : rho(x*x) = 0 for rho in F}.
inline IdealSubspace radical_ideal(const Inclusion& inc, const std::vector<ModState>& f) {
  if (!is_invariant(inc, f)) throw Error(ErrorKind::NotInvariant, "state set is not invariant under the normalizers");
  std::vector<Matrix> roots;
  for (const auto& rho : f) roots.push_back(detail::psd_sqrt(rho.density));
  return IdealSubspace::from_span(inc.C_ptr(), detail::right_annihilator(inc.C(), roots, inc.tolerance().rank),
                                  inc.tolerance());
}

/// S_s(C,D) = {sigma_i o E} for the unique pseudo-expectation E.
inline std::vector<ModState> strongly_compatible(const Inclusion& inc) {
  const auto s = pseudo_expectations(inc);
  if (!s.unique) throw Error(ErrorKind::NonUniquePseudoExpectation, "the inclusion has several pseudo-expectations");
  std::vector<ModState> out;
  for (std::size_t i = 0; i < inc.num_corners(); ++i)
    out.push_back({static_cast<int>(i), canonical_density(inc, s.expectation->corner_densities[i])});
  return out;
}

/// Extreme points of Mod(C,D) when every corner is abelian.
inline std::vector<ModState> mod_extreme_points(const Inclusion& inc) {
  std::vector<ModState> out;
  for (const auto& c : mod_states(inc)) {
    if (!c.abelian) throw Error(ErrorKind::NotAbelian, "a corner p_i C p_i is not abelian");
    out.insert(out.end(), c.extreme_points.begin(), c.extreme_points.end());
  }
  return out;
}

/// D^c = D.
inline bool is_masa(const Inclusion& inc) {
  return relative_commutant(inc.D(), inc.C(), inc.tolerance()).dim() == inc.D().dim();
}

}  // namespace cartankit

#endif  // CARTANKIT_INCLUSION_HPP
