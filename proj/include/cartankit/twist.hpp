#ifndef CARTANKIT_TWIST_HPP
#define CARTANKIT_TWIST_HPP

// Twists over finite groupoids, presented by normalized circle-valued
// 2-cocycles, and the equivariant function algebras C_c(Sigma, G, k).
//
// Convention: for a section j with j(a) j(b) = sigma(a,b) j(ab),
//   (f * g)(c)  = sum_{ab = c} c_k(a,b) f(a) g(b),   c_k = sigma^{-k}
//   f^*(c)      = w_k(c) conj(f(c^-1)),               w_k(c) = sigma(c, c^-1)^k
//   tau(f)(c)   = conj(w_k(c)) f(c^-1)                (degree -k)
// sigma^{-1} is evaluated as conj(sigma) so that the degree-k data over a twist
// coincide bit-for-bit with the degree -k data over its conjugate.

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cartankit/error.hpp"
#include "cartankit/groupoid.hpp"

namespace cartankit {

using Complex = std::complex<double>;

class CocycleTwist {
 public:
  /// Dense |G| x |G| table; entries at non-composable pairs are 1 and unused.
  using Table = std::vector<Complex>;

  CocycleTwist() = default;

  /// Trivial cocycle.
  explicit CocycleTwist(std::shared_ptr<const FiniteGroupoid> g) : g_(std::move(g)) {
    sigma_.assign(g_->num_arrows() * g_->num_arrows(), Complex(1.0));
  }

  /// Validated construction; throws InvalidCocycle on the first violation.
  CocycleTwist(std::shared_ptr<const FiniteGroupoid> g, Table sigma);

  /// No validation; use validate_cocycle on the result.
  static CocycleTwist unchecked(std::shared_ptr<const FiniteGroupoid> g, Table sigma) {
    CocycleTwist t;
    t.g_ = std::move(g);
    t.sigma_ = std::move(sigma);
    return t;
  }

  /// Builds the table from (arrow id, arrow id) -> value entries; omitted pairs are 1.
  static Table table_from(const FiniteGroupoid& g,
                          const std::map<std::pair<std::string, std::string>, Complex>& entries) {
    Table t(g.num_arrows() * g.num_arrows(), Complex(1.0));
    for (const auto& [pair, v] : entries) {
      const int a = g.arrow_index(pair.first), b = g.arrow_index(pair.second);
      if (g.compose(a, b) < 0)
        throw Error(ErrorKind::InvalidCocycle, "cocycle value given for non-composable pair (" +
                                                   pair.first + "," + pair.second + ")");
      t[static_cast<std::size_t>(a) * g.num_arrows() + static_cast<std::size_t>(b)] = v;
    }
    return t;
  }

  const FiniteGroupoid& groupoid() const { return *g_; }
  const std::shared_ptr<const FiniteGroupoid>& groupoid_ptr() const { return g_; }
  std::size_t size() const { return g_->num_arrows(); }

  Complex sigma(int a, int b) const {
    return sigma_[static_cast<std::size_t>(a) * size() + static_cast<std::size_t>(b)];
  }
  const Table& table() const { return sigma_; }

  /// Convolution weight c_k(a,b).
  Complex weight(int k, int a, int b) const {
    const Complex s = sigma(a, b);
    return k == 1 ? std::conj(s) : s;
  }

  /// Involution correction w_k(c).
  Complex involution_weight(int k, int c) const {
    const Complex s = sigma(c, g_->inv(c));
    return k == 1 ? s : std::conj(s);
  }

  bool same_as(const CocycleTwist& o) const {
    if (this == &o) return true;
    if (g_ != o.g_ && (g_->arrows() != o.g_->arrows() || g_->units() != o.g_->units())) return false;
    return sigma_ == o.sigma_;
  }

 private:
  std::shared_ptr<const FiniteGroupoid> g_;
  Table sigma_;
};

/// Reports unit-modulus, normalization and cocycle-identity violations (tolerance 1e-12).
inline ValidationReport validate_cocycle(const CocycleTwist& t, double tol = 1e-12) {
  ValidationReport rep;
  const auto& g = t.groupoid();
  const int n = static_cast<int>(g.num_arrows());
  if (t.table().size() != g.num_arrows() * g.num_arrows()) {
    rep.violations.push_back({"cocycle table has wrong size", {}});
    return rep;
  }
  auto id = [&](int a) { return g.arrows()[static_cast<std::size_t>(a)]; };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (g.compose(a, b) < 0) continue;
      const Complex s = t.sigma(a, b);
      if (!std::isfinite(s.real()) || !std::isfinite(s.imag()) || std::abs(std::abs(s) - 1.0) > tol)
        rep.violations.push_back({"cocycle value is not unimodular", {id(a), id(b)}});
    }
  for (int a = 0; a < n; ++a) {
    if (std::abs(t.sigma(g.unit_arrow(g.rng(a)), a) - 1.0) > tol)
      rep.violations.push_back({"normalization sigma(r(g),g) = 1", {id(g.unit_arrow(g.rng(a))), id(a)}});
    if (std::abs(t.sigma(a, g.unit_arrow(g.src(a))) - 1.0) > tol)
      rep.violations.push_back({"normalization sigma(g,s(g)) = 1", {id(a), id(g.unit_arrow(g.src(a)))}});
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int ab = g.compose(a, b);
      if (ab < 0) continue;
      for (int c = 0; c < n; ++c) {
        const int bc = g.compose(b, c);
        if (bc < 0) continue;
        const Complex lhs = t.sigma(a, b) * t.sigma(ab, c);
        const Complex rhs = t.sigma(a, bc) * t.sigma(b, c);
        if (std::abs(lhs - rhs) > tol) rep.violations.push_back({"cocycle identity", {id(a), id(b), id(c)}});
      }
    }
  return rep;
}

inline CocycleTwist::CocycleTwist(std::shared_ptr<const FiniteGroupoid> g, Table sigma)
    : g_(std::move(g)), sigma_(std::move(sigma)) {
  const auto rep = validate_cocycle(*this);
  if (!rep.ok()) {
    std::string w;
    for (const auto& s : rep.violations.front().witness) w += (w.empty() ? "" : ",") + s;
    throw Error(ErrorKind::InvalidCocycle, rep.violations.front().axiom + " (" + w + ")");
  }
}

/// The twist with complex-conjugated cocycle.
inline CocycleTwist conjugate(const CocycleTwist& t) {
  CocycleTwist::Table s = t.table();
  for (auto& v : s) v = std::conj(v);
  return CocycleTwist::unchecked(t.groupoid_ptr(), std::move(s));
}

inline void check_degree(int k) {
  if (k != 1 && k != -1) throw Error(ErrorKind::DegreeMismatch, "degree must be 1 or -1");
}

/// An element of C_c(Sigma, G, k), stored as values on arrows in the chosen trivialization.
class EquivariantFunction {
 public:
  EquivariantFunction() = default;

  EquivariantFunction(std::shared_ptr<const CocycleTwist> t, int k)
      : t_(std::move(t)), k_(k), v_(Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(t_->size()))) {
    check_degree(k);
  }

  EquivariantFunction(std::shared_ptr<const CocycleTwist> t, int k, Eigen::VectorXcd values)
      : t_(std::move(t)), k_(k), v_(std::move(values)) {
    check_degree(k);
    if (v_.size() != static_cast<Eigen::Index>(t_->size()))
      throw Error(ErrorKind::TwistMismatch, "value vector does not match the arrow count");
  }

  static EquivariantFunction delta(std::shared_ptr<const CocycleTwist> t, int k, int arrow, Complex c = 1.0) {
    EquivariantFunction f(std::move(t), k);
    f.v_(arrow) = c;
    return f;
  }

  /// Indicator of the unit space, the unit of the algebra.
  static EquivariantFunction unit(std::shared_ptr<const CocycleTwist> t, int k) {
    EquivariantFunction f(t, k);
    for (int x = 0; x < static_cast<int>(t->groupoid().num_units()); ++x) f.v_(t->groupoid().unit_arrow(x)) = 1.0;
    return f;
  }

  const CocycleTwist& twist() const { return *t_; }
  const std::shared_ptr<const CocycleTwist>& twist_ptr() const { return t_; }
  int degree() const { return k_; }
  const Eigen::VectorXcd& values() const { return v_; }
  Complex operator()(int a) const { return v_(a); }
  Complex& operator[](int a) { return v_(a); }

  EquivariantFunction operator+(const EquivariantFunction& o) const {
    require_compatible(o);
    return {t_, k_, v_ + o.v_};
  }
  EquivariantFunction operator-(const EquivariantFunction& o) const {
    require_compatible(o);
    return {t_, k_, v_ - o.v_};
  }
  EquivariantFunction operator*(Complex c) const { return {t_, k_, v_ * c}; }

  /// sup-norm distance to another function of the same twist.
  double sup_distance(const EquivariantFunction& o) const {
    require_compatible(o);
    return v_.size() == 0 ? 0.0 : (v_ - o.v_).cwiseAbs().maxCoeff();
  }

  void require_compatible(const EquivariantFunction& o) const {
    if (!t_->same_as(*o.t_)) throw Error(ErrorKind::TwistMismatch, "functions live over different twists");
    if (k_ != o.k_) throw Error(ErrorKind::DegreeMismatch, "functions have different degrees");
  }

 private:
  std::shared_ptr<const CocycleTwist> t_;
  int k_ = 1;
  Eigen::VectorXcd v_;
};

inline EquivariantFunction convolve(const EquivariantFunction& f, const EquivariantFunction& g) {
  f.require_compatible(g);
  const auto& t = f.twist();
  const auto& gr = t.groupoid();
  const int n = static_cast<int>(gr.num_arrows());
  const int k = f.degree();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
  for (int a = 0; a < n; ++a) {
    if (f(a) == Complex(0.0)) continue;
    for (int b = 0; b < n; ++b) {
      const int c = gr.compose(a, b);
      if (c < 0 || g(b) == Complex(0.0)) continue;
      out(c) += t.weight(k, a, b) * f(a) * g(b);
    }
  }
  return {f.twist_ptr(), k, std::move(out)};
}

inline EquivariantFunction involution(const EquivariantFunction& f) {
  const auto& t = f.twist();
  const auto& gr = t.groupoid();
  const int n = static_cast<int>(gr.num_arrows());
  Eigen::VectorXcd out(n);
  for (int c = 0; c < n; ++c) out(c) = t.involution_weight(f.degree(), c) * std::conj(f(gr.inv(c)));
  return {f.twist_ptr(), f.degree(), std::move(out)};
}

/// The anti-isomorphism C_c(Sigma,G,k) -> C_c(Sigma,G,-k).
inline EquivariantFunction transpose(const EquivariantFunction& f) {
  const auto& t = f.twist();
  const auto& gr = t.groupoid();
  const int n = static_cast<int>(gr.num_arrows());
  Eigen::VectorXcd out(n);
  for (int c = 0; c < n; ++c) out(c) = std::conj(t.involution_weight(f.degree(), c)) * f(gr.inv(c));
  return {f.twist_ptr(), -f.degree(), std::move(out)};
}

/// Structure constants of the degree-k algebra: for each composable (a,b), the
/// weight of delta_a * delta_b on delta_ab, plus the involution weights.
struct StructureConstants {
  std::vector<std::array<int, 3>> products;
  std::vector<Complex> weights;
  std::vector<Complex> involution;
  bool operator==(const StructureConstants&) const = default;
};

inline StructureConstants structure_constants(const CocycleTwist& t, int k) {
  check_degree(k);
  StructureConstants s;
  const auto& g = t.groupoid();
  const int n = static_cast<int>(g.num_arrows());
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int c = g.compose(a, b);
      if (c < 0) continue;
      s.products.push_back({a, b, c});
      s.weights.push_back(t.weight(k, a, b));
    }
  for (int c = 0; c < n; ++c) s.involution.push_back(t.involution_weight(k, c));
  return s;
}

/// The restricted twist over a subgroupoid H with the factorization property.
inline std::shared_ptr<const CocycleTwist> subtwist(const CocycleTwist& t, const std::vector<int>& h) {
  const auto& g = t.groupoid();
  if (!has_factorization_property(g, h))
    throw Error(ErrorKind::FactorizationPropertyFails, "subgroupoid lacks the factorization property");
  auto sub = std::make_shared<const FiniteGroupoid>(subgroupoid(g, h));
  CocycleTwist::Table s(sub->num_arrows() * sub->num_arrows(), Complex(1.0));
  for (int a = 0; a < static_cast<int>(sub->num_arrows()); ++a)
    for (int b = 0; b < static_cast<int>(sub->num_arrows()); ++b)
      if (sub->compose(a, b) >= 0)
        s[static_cast<std::size_t>(a) * sub->num_arrows() + static_cast<std::size_t>(b)] =
            t.sigma(g.arrow_index(sub->arrows()[static_cast<std::size_t>(a)]),
                    g.arrow_index(sub->arrows()[static_cast<std::size_t>(b)]));
  return std::make_shared<const CocycleTwist>(CocycleTwist::unchecked(std::move(sub), std::move(s)));
}

/// Pointwise restriction to the subtwist `sub` (as returned by subtwist).
inline EquivariantFunction restrict(const EquivariantFunction& f, const std::shared_ptr<const CocycleTwist>& sub) {
  const auto& g = f.twist().groupoid();
  const auto& h = sub->groupoid();
  Eigen::VectorXcd out(static_cast<Eigen::Index>(h.num_arrows()));
  for (int a = 0; a < static_cast<int>(h.num_arrows()); ++a)
    out(a) = f(g.arrow_index(h.arrows()[static_cast<std::size_t>(a)]));
  return {sub, f.degree(), std::move(out)};
}

inline EquivariantFunction restrict(const EquivariantFunction& f, const std::vector<int>& h) {
  return restrict(f, subtwist(f.twist(), h));
}

}  // namespace cartankit

#endif  // CARTANKIT_TWIST_HPP
