#ifndef CARTANKIT_REDUCED_CSTAR_HPP
#define CARTANKIT_REDUCED_CSTAR_HPP

#include <algorithm>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cartankit/error.hpp"
#include "cartankit/matalg.hpp"
#include "cartankit/twist.hpp"

namespace cartankit {

/// pi_{x,k}: the left regular representation on l^2(G_x), G_x = {g : s(g) = x}.
class RegularRepresentation {
 public:
  RegularRepresentation(std::shared_ptr<const CocycleTwist> t, int k, int x) : t_(std::move(t)), k_(k), x_(x) {
    check_degree(k);
    const auto& g = t_->groupoid();
    if (x < 0 || x >= static_cast<int>(g.num_units())) throw Error(ErrorKind::UnknownUnit, "unit index out of range");
    basis_ = g.arrows_from(x);
    pos_.assign(g.num_arrows(), -1);
    for (std::size_t i = 0; i < basis_.size(); ++i) pos_[static_cast<std::size_t>(basis_[i])] = static_cast<int>(i);
  }

  RegularRepresentation(std::shared_ptr<const CocycleTwist> t, int k, const std::string& unit)
      : RegularRepresentation(t, k, t->groupoid().unit_index(unit)) {}

  /// Arrows indexing the coordinates, sorted.
  const std::vector<int>& basis() const { return basis_; }
  int unit() const { return x_; }

  Matrix operator()(const EquivariantFunction& f) const {
    if (!f.twist().same_as(*t_)) throw Error(ErrorKind::TwistMismatch, "function over a different twist");
    if (f.degree() != k_) throw Error(ErrorKind::DegreeMismatch, "function has a different degree");
    const auto& g = t_->groupoid();
    const auto m = static_cast<Eigen::Index>(basis_.size());
    Matrix out = Matrix::Zero(m, m);
    for (Eigen::Index col = 0; col < m; ++col) {
      const int b = basis_[static_cast<std::size_t>(col)];
      for (int a = 0; a < static_cast<int>(g.num_arrows()); ++a) {
        if (f(a) == Complex(0.0)) continue;
        const int c = g.compose(a, b);
        if (c < 0) continue;
        out(pos_[static_cast<std::size_t>(c)], col) += t_->weight(k_, a, b) * f(a);
      }
    }
    return out;
  }

 private:
  std::shared_ptr<const CocycleTwist> t_;
  int k_;
  int x_;
  std::vector<int> basis_;
  std::vector<int> pos_;
};

/// sup over units of ||pi_x(f)||.
inline double reduced_norm(const EquivariantFunction& f) {
  double n = 0.0;
  for (int x = 0; x < static_cast<int>(f.twist().groupoid().num_units()); ++x)
    n = std::max(n, operator_norm(RegularRepresentation(f.twist_ptr(), f.degree(), x)(f)));
  return n;
}

/// E(f): restriction to unit arrows, zero elsewhere.
inline EquivariantFunction conditional_expectation(const EquivariantFunction& f) {
  const auto& g = f.twist().groupoid();
  EquivariantFunction out(f.twist_ptr(), f.degree());
  for (int x = 0; x < static_cast<int>(g.num_units()); ++x) out[g.unit_arrow(x)] = f(g.unit_arrow(x));
  return out;
}

/// C*_r(Sigma, G, k) realized as the direct sum of pi_x over the smallest unit of each orbit.
class ReducedAlgebra {
 public:
  ReducedAlgebra(std::shared_ptr<const CocycleTwist> t, int k, const Tolerance& tol = {}) : t_(std::move(t)), k_(k) {
    check_degree(k);
    const auto& g = t_->groupoid();
    if (g.num_arrows() > tol.cap)
      throw Error(ErrorKind::DimensionOverflow, "twist has more arrows than the dimension cap");
    for (int x : g.orbit_representatives()) reps_.emplace_back(t_, k_, x);
    n_ = 0;
    for (const auto& r : reps_) n_ += static_cast<Eigen::Index>(r.basis().size());
    std::vector<Matrix> images;
    for (int a = 0; a < static_cast<int>(g.num_arrows()); ++a)
      images.push_back(embed(EquivariantFunction::delta(t_, k_, a)));
    const Matrix id = identity(n_);
    realization_ = FdStarAlgebra::from_span(n_, images, tol, &id);
    std::vector<Matrix> units;
    for (int x = 0; x < static_cast<int>(g.num_units()); ++x)
      units.push_back(embed(EquivariantFunction::delta(t_, k_, g.unit_arrow(x))));
    diagonal_ = FdStarAlgebra::from_span(n_, units, tol, &id);
  }

  const CocycleTwist& twist() const { return *t_; }
  const std::shared_ptr<const CocycleTwist>& twist_ptr() const { return t_; }
  int degree() const { return k_; }
  const std::vector<RegularRepresentation>& representations() const { return reps_; }
  /// The realization, a *-subalgebra of M_N with N = sum |G_x| over orbit representatives.
  const FdStarAlgebra& realization() const { return realization_; }
  /// The image of C(G^0).
  const FdStarAlgebra& diagonal() const { return diagonal_; }
  Eigen::Index ambient_dim() const { return n_; }

  bool faithful() const { return realization_.dim() == t_->size(); }

  Matrix embed(const EquivariantFunction& f) const {
    std::vector<Matrix> blocks;
    blocks.reserve(reps_.size());
    for (const auto& r : reps_) blocks.push_back(r(f));
    return direct_sum(blocks);
  }

  Matrix embed_delta(int arrow) const { return embed(EquivariantFunction::delta(t_, k_, arrow)); }

  /// Inverse of embed on the realization (least-squares coordinates in the delta basis).
  EquivariantFunction pull_back(const Matrix& x) const {
    const auto& g = t_->groupoid();
    const auto m = static_cast<Eigen::Index>(g.num_arrows());
    Matrix a(n_ * n_, m);
    for (Eigen::Index i = 0; i < m; ++i) a.col(i) = vec(embed_delta(static_cast<int>(i)));
    const Vector c = a.colPivHouseholderQr().solve(vec(x));
    return {t_, k_, c};
  }

  EquivariantFunction unit_function() const { return EquivariantFunction::unit(t_, k_); }

 private:
  std::shared_ptr<const CocycleTwist> t_;
  int k_;
  std::vector<RegularRepresentation> reps_;
  Eigen::Index n_ = 0;
  FdStarAlgebra realization_;
  FdStarAlgebra diagonal_;
};

inline ReducedAlgebra realize(std::shared_ptr<const CocycleTwist> t, int k, const Tolerance& tol = {}) {
  return ReducedAlgebra(std::move(t), k, tol);
}

struct CartanCertificate {
  bool masa = false;
  bool regular = false;
  bool faithful_E = false;
  std::size_t diagonal_dim = 0;
  std::size_t commutant_dim = 0;
  std::vector<std::string> non_normalizing;   // arrow ids whose delta fails to normalize
  double min_gram_eigenvalue = 0.0;
  bool cartan() const { return masa && regular && faithful_E; }
};

inline CartanCertificate is_cartan_pair(const ReducedAlgebra& r, const Tolerance& tol = {}) {
  CartanCertificate c;
  const auto& g = r.twist().groupoid();
  const auto& d = r.diagonal();
  c.diagonal_dim = d.dim();
  c.commutant_dim = relative_commutant(d, r.realization(), tol).dim();
  c.masa = c.commutant_dim == c.diagonal_dim;

  std::vector<Matrix> images;
  for (int a = 0; a < static_cast<int>(g.num_arrows()); ++a) {
    const Matrix v = r.embed_delta(a);
    if (normalizer_residual(d, v) > 1e3 * tol.eps) c.non_normalizing.push_back(g.arrows()[static_cast<std::size_t>(a)]);
    images.push_back(v);
  }
  const Subspace span(r.ambient_dim(), images, tol.rank);
  c.regular = c.non_normalizing.empty() && span.dim() == r.realization().dim();

  // Gram matrix of f -> sum_x E(f^* f)(x) in the delta basis.
  const auto n = static_cast<Eigen::Index>(g.num_arrows());
  Matrix gram = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto di = involution(EquivariantFunction::delta(r.twist_ptr(), r.degree(), static_cast<int>(i)));
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto e = conditional_expectation(
          convolve(di, EquivariantFunction::delta(r.twist_ptr(), r.degree(), static_cast<int>(j))));
      gram(i, j) = e.values().sum();
    }
  }
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
    c.min_gram_eigenvalue = es.eigenvalues()(0);
  }
  c.faithful_E = c.min_gram_eigenvalue > tol.rank;
  return c;
}

}  // namespace cartankit

#endif  // CARTANKIT_REDUCED_CSTAR_HPP
