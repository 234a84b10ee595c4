#ifndef CARTANKIT_MATALG_HPP
#define CARTANKIT_MATALG_HPP

// Finite-dimensional *-subalgebras of M_n(C): closures, commutants, block
// structure, minimal projections and ideals. All subspaces are stored with an
// orthonormal basis for the Hilbert-Schmidt inner product <a,b> = tr(b^* a).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cartankit/error.hpp"

namespace cartankit {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Numerical policy shared by every module.
struct Tolerance {
  double eps = 1e-9;         // equality of matrices / subspaces (HS norm)
  double rank = 1e-8;        // singular-value threshold for rank decisions
  std::size_t cap = 4096;    // maximal dimension of a generated algebra
};

inline Vector vec(const Matrix& x) {
  return Eigen::Map<const Vector>(x.data(), x.size());
}

inline Matrix unvec(const Vector& v, Eigen::Index n) {
  return Eigen::Map<const Matrix>(v.data(), n, n);
}

inline Complex hs_inner(const Matrix& a, const Matrix& b) {
  return (b.adjoint() * a).trace();
}

inline double hs_norm(const Matrix& a) { return a.norm(); }

/// Largest singular value.
inline double operator_norm(const Matrix& x) {
  if (x.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(x);
  return svd.singularValues()(0);
}

inline Matrix identity(Eigen::Index n) { return Matrix::Identity(n, n); }

/// e_i e_j^* in M_n.
inline Matrix matrix_unit(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
  Matrix m = Matrix::Zero(n, n);
  m(i, j) = 1.0;
  return m;
}

inline Matrix direct_sum(std::span<const Matrix> blocks) {
  Eigen::Index n = 0;
  for (const auto& b : blocks) n += b.rows();
  Matrix out = Matrix::Zero(n, n);
  Eigen::Index off = 0;
  for (const auto& b : blocks) {
    out.block(off, off, b.rows(), b.cols()) = b;
    off += b.rows();
  }
  return out;
}

inline Matrix direct_sum(const Matrix& a, const Matrix& b) {
  const Matrix blocks[] = {a, b};
  return direct_sum(std::span<const Matrix>(blocks));
}

inline Matrix diagonal(std::span<const Complex> entries) {
  const auto n = static_cast<Eigen::Index>(entries.size());
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = entries[static_cast<std::size_t>(i)];
  return m;
}

inline bool is_square(const Matrix& x) { return x.rows() == x.cols(); }

/// Lexicographic comparison in row-major entry order (real part, then imaginary
/// part); entries closer than `tol` count as equal. Returns -1, 0 or 1.
inline int lex_compare(const Matrix& a, const Matrix& b, double tol = 1e-9) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double dr = a(i, j).real() - b(i, j).real();
      if (std::abs(dr) > tol) return dr < 0 ? -1 : 1;
      const double di = a(i, j).imag() - b(i, j).imag();
      if (std::abs(di) > tol) return di < 0 ? -1 : 1;
    }
  }
  return 0;
}

/// Rotates `x` so that its first entry (row-major) of modulus above
/// `tol * max|entry|` is a positive real. Returns the applied phase.
inline Complex canonical_phase(const Matrix& x, double tol = 1e-8) {
  double mx = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) mx = std::max(mx, std::abs(x(i, j)));
  if (mx == 0.0) return 1.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double m = std::abs(x(i, j));
      if (m > tol * mx) return std::conj(x(i, j)) / m;
    }
  }
  return 1.0;
}

namespace detail {

/// Appends the component of `v` orthogonal to `q` as a new column when it is
/// numerically independent. `v` is normalized first; vectors below `floor`
/// are treated as zero.
inline bool grow_basis(Matrix& q, Vector v, double rank_tol, double floor = 1e-10) {
  const double nv = v.norm();
  if (nv < floor) return false;
  v /= nv;
  if (q.cols() > 0) {
    v -= q * (q.adjoint() * v);
    v -= q * (q.adjoint() * v);
  }
  const double nr = v.norm();
  if (nr <= rank_tol) return false;
  q.conservativeResize(v.size(), q.cols() + 1);
  q.col(q.cols() - 1) = v / nr;
  return true;
}

/// Orthonormal basis of the kernel of `k` (columns). Tall systems are first
/// reduced to their triangular QR factor; the rank is read off a Jacobi SVD.
inline Matrix null_space(const Matrix& k, double rank_tol) {
  const Eigen::Index d = k.cols();
  if (d == 0) return Matrix(0, 0);
  if (k.rows() == 0) return Matrix::Identity(d, d);
  Matrix r;
  if (k.rows() > d) {
    Eigen::HouseholderQR<Matrix> qr(k);
    r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  } else {
    r = k;
  }
  Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double scale = std::max(1.0, s.size() > 0 ? s(0) : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rank_tol * scale) ++rank;
  return svd.matrixV().rightCols(d - rank);
}

}  // namespace detail

/// A linear subspace of M_n with an orthonormal HS basis.
class Subspace {
 public:
  Subspace() = default;

  Subspace(Eigen::Index n, std::span<const Matrix> spanning, double rank_tol = 1e-8)
      : n_(n), q_(n * n, 0) {
    for (const auto& m : spanning) {
      if (m.rows() != n || m.cols() != n)
        throw Error(ErrorKind::NonSquareMatrix, "spanning element has wrong shape");
      detail::grow_basis(q_, vec(m), rank_tol);
    }
    rebuild();
  }

  Eigen::Index ambient_dim() const { return n_; }
  std::size_t dim() const { return basis_.size(); }
  const std::vector<Matrix>& basis() const { return basis_; }
  /// n^2 x dim matrix whose columns are the vectorized basis.
  const Matrix& frame() const { return q_; }

  Vector coords(const Matrix& x) const { return q_.adjoint() * vec(x); }

  Matrix from_coords(const Vector& c) const { return unvec(q_ * c, n_); }

  Matrix project(const Matrix& x) const { return from_coords(coords(x)); }

  double residual(const Matrix& x) const { return (vec(x) - q_ * coords(x)).norm(); }

  bool contains(const Matrix& x, double eps) const {
    return residual(x) <= eps * std::max(1.0, hs_norm(x));
  }

  bool contains(const Subspace& other, double eps) const {
    return std::all_of(other.basis_.begin(), other.basis_.end(),
                       [&](const Matrix& b) { return contains(b, eps); });
  }

  /// HS distance between the orthogonal projections onto the two subspaces.
  double distance(const Subspace& other) const {
    const Matrix p = q_ * q_.adjoint();
    const Matrix r = other.q_ * other.q_.adjoint();
    return (p - r).norm();
  }

 protected:
  void rebuild() {
    basis_.clear();
    basis_.reserve(static_cast<std::size_t>(q_.cols()));
    for (Eigen::Index k = 0; k < q_.cols(); ++k) basis_.push_back(unvec(q_.col(k), n_));
  }

  Eigen::Index n_ = 0;
  Matrix q_;
  std::vector<Matrix> basis_;
};

/// A concrete *-subalgebra of M_n(C).
class FdStarAlgebra : public Subspace {
 public:
  FdStarAlgebra() = default;

  /// Wraps a subspace already known to be a *-algebra with the given unit.
  /// Closure under products and adjoints is verified.
  static FdStarAlgebra from_span(Eigen::Index n, std::span<const Matrix> spanning,
                                 const Tolerance& tol = {},
                                 const Matrix* unit = nullptr) {
    FdStarAlgebra a;
    static_cast<Subspace&>(a) = Subspace(n, spanning, tol.rank);
    a.unit_ = unit ? *unit : a.find_unit(tol);
    a.verify(tol);
    return a;
  }

  const Matrix& unit() const { return unit_; }

  bool unit_is_identity(double eps = 1e-9) const {
    return (unit_ - identity(n_)).norm() <= eps;
  }

  bool is_abelian(double eps = 1e-9) const {
    for (std::size_t i = 0; i < basis_.size(); ++i)
      for (std::size_t j = i + 1; j < basis_.size(); ++j)
        if ((basis_[i] * basis_[j] - basis_[j] * basis_[i]).norm() > eps) return false;
    return true;
  }

  /// Largest HS residual of products and adjoints of basis pairs.
  double closure_residual() const {
    double worst = 0.0;
    for (const auto& a : basis_) {
      worst = std::max(worst, residual(a.adjoint()));
      for (const auto& b : basis_) worst = std::max(worst, residual(a * b));
    }
    return worst;
  }

 private:
  Matrix find_unit(const Tolerance& tol) const {
    if (basis_.empty()) return Matrix::Zero(n_, n_);
    const Matrix id = identity(n_);
    if (contains(id, tol.eps)) return id;
    // Solve e * b_j = b_j and b_j * e = b_j for e in the span.
    const auto d = static_cast<Eigen::Index>(basis_.size());
    Matrix sys(2 * d * n_ * n_, d);
    Vector rhs(2 * d * n_ * n_);
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto& bj = basis_[static_cast<std::size_t>(j)];
      for (Eigen::Index k = 0; k < d; ++k) {
        const auto& bk = basis_[static_cast<std::size_t>(k)];
        sys.block(2 * j * n_ * n_, k, n_ * n_, 1) = vec(bk * bj);
        sys.block((2 * j + 1) * n_ * n_, k, n_ * n_, 1) = vec(bj * bk);
      }
      rhs.segment(2 * j * n_ * n_, n_ * n_) = vec(bj);
      rhs.segment((2 * j + 1) * n_ * n_, n_ * n_) = vec(bj);
    }
    const Vector c = sys.colPivHouseholderQr().solve(rhs);
    if ((sys * c - rhs).norm() > 1e3 * tol.eps)
      throw Error(ErrorKind::NotASubalgebra, "span has no unit");
    return from_coords(c);
  }

  void verify(const Tolerance& tol) const {
    const double r = closure_residual();
    if (r > 1e3 * tol.eps)
      throw Error(ErrorKind::NotASubalgebra,
                  "span is not closed under products/adjoints (residual " +
                      std::to_string(r) + ")");
    for (const auto& b : basis_) {
      if ((unit_ * b - b).norm() > 1e3 * tol.eps || (b * unit_ - b).norm() > 1e3 * tol.eps)
        throw Error(ErrorKind::NotASubalgebra, "unit does not act as identity");
    }
  }

  Matrix unit_;
};

/// Smallest unital *-subalgebra of M_n containing the generators.
inline FdStarAlgebra generate_star_algebra(Eigen::Index n, std::span<const Matrix> generators,
                                           const Tolerance& tol = {}) {
  if (generators.empty())
    throw Error(ErrorKind::NotASubalgebra, "at least one generator is required");
  std::vector<Matrix> alphabet;
  for (const auto& g : generators) {
    if (!is_square(g) || g.rows() != n)
      throw Error(ErrorKind::NonSquareMatrix, "generator is not " + std::to_string(n) + "x" +
                                                  std::to_string(n));
    const double ng = hs_norm(g);
    if (ng < 1e-300) continue;
    alphabet.push_back(g / ng);
    alphabet.push_back(g.adjoint() / ng);
  }
  Matrix q(n * n, 0);
  std::vector<Matrix> frontier;
  const Matrix id = identity(n);
  if (detail::grow_basis(q, vec(id), tol.rank)) frontier.push_back(id / std::sqrt(double(n)));
  // Words in the generators: left-multiply every new element by the alphabet.
  while (!frontier.empty()) {
    std::vector<Matrix> next;
    for (const auto& w : frontier) {
      for (const auto& a : alphabet) {
        Matrix p = a * w;
        if (detail::grow_basis(q, vec(p), tol.rank)) {
          next.push_back(unvec(q.col(q.cols() - 1), n));
          if (static_cast<std::size_t>(q.cols()) > tol.cap)
            throw Error(ErrorKind::DimensionOverflow,
                        "generated algebra exceeds dimension cap " + std::to_string(tol.cap));
        }
      }
    }
    frontier = std::move(next);
  }
  std::vector<Matrix> basis;
  for (Eigen::Index k = 0; k < q.cols(); ++k) basis.push_back(unvec(q.col(k), n));
  return FdStarAlgebra::from_span(n, basis, tol, &id);
}

/// {x in within : xa = ax for all a in A}.
inline FdStarAlgebra relative_commutant(const FdStarAlgebra& a, const FdStarAlgebra& within,
                                        const Tolerance& tol = {}) {
  if (a.ambient_dim() != within.ambient_dim() || !within.contains(a, tol.eps * 10))
    throw Error(ErrorKind::NotASubalgebra, "algebra is not contained in the ambient algebra");
  const Eigen::Index n = within.ambient_dim();
  const auto d = static_cast<Eigen::Index>(within.dim());
  const auto m = static_cast<Eigen::Index>(a.dim());
  Matrix k(m * n * n, d);
  for (Eigen::Index col = 0; col < d; ++col) {
    const auto& w = within.basis()[static_cast<std::size_t>(col)];
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto& x = a.basis()[static_cast<std::size_t>(j)];
      k.block(j * n * n, col, n * n, 1) = vec(w * x - x * w);
    }
  }
  const Matrix ns = detail::null_space(k, tol.rank);
  std::vector<Matrix> span;
  for (Eigen::Index c = 0; c < ns.cols(); ++c) span.push_back(within.from_coords(ns.col(c)));
  const Matrix unit = within.unit();
  return FdStarAlgebra::from_span(n, span, tol, &unit);
}

inline FdStarAlgebra center(const FdStarAlgebra& a, const Tolerance& tol = {}) {
  return relative_commutant(a, a, tol);
}

/// Minimal projections of an abelian algebra, summing to its unit. Ordered by
/// decreasing row-major lexicographic entry order, so e1e1^* precedes e2e2^*.
inline std::vector<Matrix> minimal_projections(const FdStarAlgebra& d, const Tolerance& tol = {}) {
  if (!d.is_abelian(tol.eps * 10)) throw Error(ErrorKind::NotAbelian, "algebra is not abelian");
  const Eigen::Index n = d.ambient_dim();
  if (d.dim() == 0) return {};
  const Matrix& unit = d.unit();
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int attempt = 0; attempt < 16; ++attempt) {
    Matrix h = Matrix::Zero(n, n);
    for (const auto& b : d.basis()) h += coef(rng) * (b + b.adjoint());
    const double shift = 2.0 * operator_norm(h) + 1.0;
    const Matrix hs = h + shift * (identity(n) - unit);
    Eigen::SelfAdjointEigenSolver<Matrix> es(hs);
    const auto& ev = es.eigenvalues();
    const double gap = 1e-6 * (1.0 + std::abs(ev(n - 1) - ev(0)));
    std::vector<Matrix> projs;
    Eigen::Index start = 0;
    for (Eigen::Index i = 1; i <= n; ++i) {
      if (i == n || ev(i) - ev(i - 1) > gap) {
        const Matrix v = es.eigenvectors().middleCols(start, i - start);
        Matrix p = v * v.adjoint();
        if ((p * unit - p).norm() < 1e-6 && p.norm() > 1e-6) projs.push_back(p);
        start = i;
      }
    }
    bool ok = projs.size() == d.dim();
    for (const auto& p : projs) {
      if (!ok) break;
      if (!d.contains(p, 1e3 * tol.eps)) ok = false;
    }
    if (!ok) continue;
    // Project back into the algebra to remove eigensolver noise.
    for (auto& p : projs) p = d.project(p);
    std::sort(projs.begin(), projs.end(),
              [](const Matrix& x, const Matrix& y) { return lex_compare(x, y) > 0; });
    return projs;
  }
  throw Error(ErrorKind::NumericalRankAmbiguity, "could not separate minimal projections");
}

namespace detail {

/// Rank of a spanning family; throws NumericalRankAmbiguity when a normalized
/// singular value falls in the ambiguous band around the threshold.
inline std::size_t numeric_rank(std::span<const Matrix> family, const Tolerance& tol) {
  if (family.empty()) return 0;
  const Eigen::Index rows = family.front().size();
  Matrix m(rows, static_cast<Eigen::Index>(family.size()));
  for (std::size_t k = 0; k < family.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = vec(family[k]);
  Matrix r = m;
  if (m.rows() > m.cols()) {
    Eigen::HouseholderQR<Matrix> qr(m);
    r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  }
  Eigen::JacobiSVD<Matrix> svd(r);
  const auto& s = svd.singularValues();
  const double scale = std::max(1.0, s.size() > 0 ? s(0) : 0.0);
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double r = s(i) / scale;
    if (r > tol.rank * 1e-3 && r < tol.rank * 1e3)
      throw Error(ErrorKind::NumericalRankAmbiguity,
                  "singular value " + std::to_string(r) + " near rank threshold");
    if (r > tol.rank) ++rank;
  }
  return rank;
}

}  // namespace detail

/// Sizes n_i with A = (+) M_{n_i}(C), in decreasing order.
inline std::vector<int> block_structure(const FdStarAlgebra& a, const Tolerance& tol = {}) {
  const FdStarAlgebra z = center(a, tol);
  std::vector<int> sizes;
  for (const auto& q : minimal_projections(z, tol)) {
    std::vector<Matrix> corner;
    corner.reserve(a.dim());
    for (const auto& b : a.basis()) corner.push_back(q * b);
    const auto r = detail::numeric_rank(corner, tol);
    const auto k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(r))));
    if (static_cast<std::size_t>(k * k) != r)
      throw Error(ErrorKind::NumericalRankAmbiguity,
                  "central summand of dimension " + std::to_string(r) + " is not a square");
    sizes.push_back(k);
  }
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  return sizes;
}

/// A two-sided ideal J = pA of a finite-dimensional C*-algebra.
class IdealSubspace : public Subspace {
 public:
  IdealSubspace() = default;

  /// Builds the ideal spanned by `spanning`; closure under multiplication by the
  /// parent is verified and the central support projection computed.
  static IdealSubspace from_span(std::shared_ptr<const FdStarAlgebra> parent,
                                 std::span<const Matrix> spanning, const Tolerance& tol = {}) {
    IdealSubspace j;
    static_cast<Subspace&>(j) = Subspace(parent->ambient_dim(), spanning, tol.rank);
    j.parent_ = std::move(parent);
    for (const auto& x : j.basis_) {
      for (const auto& b : j.parent_->basis()) {
        if (!j.contains(b * x, 1e3 * tol.eps) || !j.contains(x * b, 1e3 * tol.eps))
          throw Error(ErrorKind::NotASubalgebra, "subspace is not a two-sided ideal");
      }
    }
    const Eigen::Index n = j.n_;
    j.support_ = Matrix::Zero(n, n);
    if (!j.basis_.empty()) {
      for (const auto& q : minimal_projections(center(*j.parent_, tol), tol))
        if (j.contains(q, 1e3 * tol.eps)) j.support_ += q;
    }
    if (j.dim() != 0) {
      std::vector<Matrix> check;
      for (const auto& b : j.parent_->basis()) check.push_back(j.support_ * b);
      if (Subspace(n, check, tol.rank).dim() != j.dim())
        throw Error(ErrorKind::NumericalRankAmbiguity, "ideal is not pA for a central projection");
    }
    return j;
  }

  const FdStarAlgebra& parent() const { return *parent_; }
  const Matrix& support_projection() const { return support_; }
  bool is_zero() const { return dim() == 0; }

 private:
  std::shared_ptr<const FdStarAlgebra> parent_;
  Matrix support_;
};

/// Smallest two-sided ideal of A containing the seeds.
inline IdealSubspace ideal_generated_by(const FdStarAlgebra& a, std::span<const Matrix> seeds,
                                        const Tolerance& tol = {}) {
  auto parent = std::make_shared<const FdStarAlgebra>(a);
  std::vector<Matrix> span;
  for (const auto& s : seeds) {
    if (!a.contains(s, tol.eps * 10))
      throw Error(ErrorKind::SeedOutsideAlgebra, "seed does not lie in the algebra");
    if (hs_norm(s) < tol.eps) continue;
    for (const auto& x : a.basis())
      for (const auto& y : a.basis()) span.push_back(x * s * y);
  }
  return IdealSubspace::from_span(std::move(parent), span, tol);
}

/// Largest residual of v^* d v and v d v^* outside D over a basis d of D.
inline double normalizer_residual(const Subspace& d, const Matrix& v) {
  double worst = 0.0;
  for (const auto& b : d.basis()) {
    worst = std::max(worst, d.residual(v.adjoint() * b * v));
    worst = std::max(worst, d.residual(v * b * v.adjoint()));
  }
  return worst;
}

}  // namespace cartankit

#endif  // CARTANKIT_MATALG_HPP
