#ifndef CARTANKIT_WEYL_HPP
#define CARTANKIT_WEYL_HPP

// The Weyl twist of a finite regular MASA inclusion. Germs [sigma_j, v, sigma_i]
// are read off v p_i; on a MASA every p_j C p_i is at most one-dimensional, so
// the circle classes are the pairs (j, i) with p_j C p_i != 0. Each arrow gets a
// canonical partial isometry u_a (first significant entry positive real) and the
// cocycle is defined by u_a u_b = sigma(a,b) u_ab, so delta_a -> u_a realizes C
// as the degree -1 algebra of the twist.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cartankit/error.hpp"
#include "cartankit/groupoid.hpp"
#include "cartankit/inclusion.hpp"
#include "cartankit/matalg.hpp"
#include "cartankit/twist.hpp"

namespace cartankit {

enum class GermMode { R1, RT };

namespace detail {

/// Indices of corners in dom beta_v.
inline bool in_source(const Inclusion& inc, const Matrix& v, std::size_t i) {
  const double s = inc.character(i, Matrix(v.adjoint() * v)).real();
  return s > inc.tolerance().eps * std::max(1.0, v.squaredNorm());
}

/// Ratio lambda with y = lambda x, if the two are proportional.
inline std::optional<Complex> proportionality(const Matrix& x, const Matrix& y, double tol) {
  const double nx = x.norm(), ny = y.norm();
  if (nx == 0.0 || ny == 0.0) return std::nullopt;
  const Complex lambda = hs_inner(y, x) / (nx * nx);
  if ((y - lambda * x).norm() > tol * ny) return std::nullopt;
  return lambda;
}

inline std::string corner_label(std::size_t i, std::size_t m) {
  const int width = static_cast<int>(std::to_string(m).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, i + 1);
  return buf;
}

}  // namespace detail

/// [sigma_j, v, sigma_i] = [sigma_j', w, sigma_i]: v p_i and w p_i are nonzero
/// multiples of each other, with a positive ratio in mode R1.
inline bool germ_equal(const Inclusion& inc, const Matrix& v, const Matrix& w, std::size_t i, GermMode mode) {
  detail::require_normalizer(inc, v);
  detail::require_normalizer(inc, w);
  if (i >= inc.num_corners()) throw Error(ErrorKind::NotInDomain, "corner index out of range");
  const bool inv = detail::in_source(inc, v, i), inw = detail::in_source(inc, w, i);
  if (!inv && !inw) throw Error(ErrorKind::NotInDomain, "corner lies outside both source domains");
  if (!inv || !inw) return false;
  const Matrix& p = inc.projections()[i];
  const auto lambda = detail::proportionality(Matrix(v * p), Matrix(w * p), 1e-7);
  if (!lambda) return false;
  if (mode == GermMode::RT) return true;
  return lambda->real() > 0 && std::abs(lambda->imag()) <= 1e-7 * std::abs(*lambda);
}

/// sigma_i(E(w* v)) != 0 for the conditional expectation onto D.
inline bool germ_expectation_criterion(const Inclusion& inc, const Matrix& v, const Matrix& w, std::size_t i) {
  const auto s = pseudo_expectations(inc);
  if (!s.unique) throw Error(ErrorKind::NoConditionalExpectation, "no unique conditional expectation onto D");
  if (i >= inc.num_corners()) throw Error(ErrorKind::NotInDomain, "corner index out of range");
  const Matrix e = (*s.expectation)(inc, Matrix(w.adjoint() * v));
  return std::abs(inc.character(i, e)) > 1e-7 * std::max(1.0, v.norm() * w.norm());
}

struct WeylTwist {
  std::shared_ptr<const CocycleTwist> twist;
  /// Canonical partial isometries u_a, indexed like the arrows of the twist.
  std::vector<Matrix> representatives;
  int word_bound = 0;
  std::size_t words_checked = 0;
  /// The degree at which delta_a -> u_a is a *-isomorphism onto C.
  static constexpr int degree = -1;

  Matrix embed(const EquivariantFunction& f) const {
    Matrix out = Matrix::Zero(representatives.front().rows(), representatives.front().cols());
    for (std::size_t a = 0; a < representatives.size(); ++a) out += f(static_cast<int>(a)) * representatives[a];
    return out;
  }
};

inline WeylTwist weyl_twist(const Inclusion& inc, int word_bound = 4) {
  if (!inc.regular()) throw Error(ErrorKind::NotRegular, "the Weyl twist needs a regular inclusion");
  if (!is_masa(inc)) throw Error(ErrorKind::NotAMasa, "the germ relations only agree for MASA inclusions");
  const std::size_t m = inc.num_corners();
  const auto& p = inc.projections();

  WeylTwist out;
  out.word_bound = word_bound;
  std::map<std::pair<std::size_t, std::size_t>, Matrix> reps;   // (j, i) -> u
  for (std::size_t i = 0; i < m; ++i) reps[{i, i}] = p[i];
  const auto words = normalizer_words(inc, word_bound);
  for (const auto& w : words) {
    ++out.words_checked;
    const auto b = beta(inc, w);
    for (int i : b.domain()) {
      const auto j = static_cast<std::size_t>(b.map[static_cast<std::size_t>(i)]);
      const auto key = std::make_pair(j, static_cast<std::size_t>(i));
      if (reps.count(key)) continue;
      Matrix x = w * p[static_cast<std::size_t>(i)];
      x /= std::sqrt(inc.character(static_cast<std::size_t>(i), Matrix(x.adjoint() * x)).real());
      x *= canonical_phase(x);
      reps[key] = std::move(x);
    }
  }
  std::vector<Matrix> all;
  for (const auto& [k, u] : reps) all.push_back(u);
  if (Subspace(inc.n(), all, inc.tolerance().rank).dim() != inc.C().dim())
    throw Error(ErrorKind::IncompleteEnumeration,
                "germ representatives from words of length " + std::to_string(word_bound) + " do not span C");

  GroupoidSpec spec;
  for (std::size_t i = 0; i < m; ++i) spec.units.push_back(detail::corner_label(i, m));
  auto id = [&](std::size_t j, std::size_t i) { return detail::corner_label(j, m) + "<" + detail::corner_label(i, m); };
  for (const auto& [k, u] : reps) {
    spec.arrows.push_back({id(k.first, k.second), detail::corner_label(k.second, m), detail::corner_label(k.first, m),
                           id(k.second, k.first)});
    if (k.first == k.second) spec.unit_arrows[detail::corner_label(k.first, m)] = id(k.first, k.first);
  }
  for (const auto& [k1, u1] : reps)
    for (const auto& [k2, u2] : reps)
      if (k1.second == k2.first) spec.compose.push_back({id(k1.first, k1.second), id(k2.first, k2.second), id(k1.first, k2.second)});
  const auto rep = validate(spec);
  if (!rep.ok()) throw Error(ErrorKind::IncompleteEnumeration, "germ classes do not close up to a groupoid");
  auto g = std::make_shared<const FiniteGroupoid>(spec);

  const std::size_t n = g->num_arrows();
  out.representatives.resize(n);
  for (const auto& [k, u] : reps) out.representatives[static_cast<std::size_t>(g->arrow_index(id(k.first, k.second)))] = u;
  CocycleTwist::Table table(n * n, Complex(1.0));
  for (int a = 0; a < static_cast<int>(n); ++a)
    for (int b = 0; b < static_cast<int>(n); ++b) {
      const int c = g->compose(a, b);
      if (c < 0 || g->is_unit_arrow(a) || g->is_unit_arrow(b)) continue;
      const Matrix& uc = out.representatives[static_cast<std::size_t>(c)];
      Complex s = hs_inner(Matrix(out.representatives[static_cast<std::size_t>(a)] * out.representatives[static_cast<std::size_t>(b)]), uc) /
                  hs_inner(uc, uc);
      s /= std::abs(s);
      table[static_cast<std::size_t>(a) * n + static_cast<std::size_t>(b)] = s;
    }
  auto t = CocycleTwist::unchecked(g, std::move(table));
  if (!validate_cocycle(t, 1e-8).ok()) throw Error(ErrorKind::InvalidCocycle, "extracted cocycle fails the cocycle identity");
  out.twist = std::make_shared<const CocycleTwist>(std::move(t));
  return out;
}

}  // namespace cartankit

#endif  // CARTANKIT_WEYL_HPP
