#ifndef CARTANKIT_GROUPOID_HPP
#define CARTANKIT_GROUPOID_HPP

#include <algorithm>
#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cartankit/error.hpp"

namespace cartankit {

/// Raw, unchecked description of a finite groupoid (as read from JSON).
struct GroupoidSpec {
  struct Arrow {
    std::string id, src, rng, inv;
  };
  std::vector<std::string> units;
  std::vector<Arrow> arrows;
  std::vector<std::array<std::string, 3>> compose;   // (a, b, ab)
  std::map<std::string, std::string> unit_arrows;     // optional explicit unit -> arrow
};

struct Violation {
  std::string axiom;
  std::vector<std::string> witness;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks every groupoid axiom of a raw description; an empty report means valid.
inline ValidationReport validate(const GroupoidSpec& g);

/// A validated finite groupoid with interned ids and a dense composition table.
/// Arrows and units are sorted by identifier. Composition gh is defined iff s(g) = r(h).
class FiniteGroupoid {
 public:
  FiniteGroupoid() = default;

  /// Throws InvalidGroupoid (message lists the first violation) if `spec` is invalid.
  explicit FiniteGroupoid(const GroupoidSpec& spec);

  std::size_t num_units() const { return units_.size(); }
  std::size_t num_arrows() const { return arrows_.size(); }
  const std::vector<std::string>& units() const { return units_; }
  const std::vector<std::string>& arrows() const { return arrows_; }

  int src(int a) const { return src_[static_cast<std::size_t>(a)]; }
  int rng(int a) const { return rng_[static_cast<std::size_t>(a)]; }
  int inv(int a) const { return inv_[static_cast<std::size_t>(a)]; }
  /// Arrow index of ab, or -1 when s(a) != r(b).
  int compose(int a, int b) const {
    return table_[static_cast<std::size_t>(a) * arrows_.size() + static_cast<std::size_t>(b)];
  }
  int unit_arrow(int x) const { return unit_arrow_[static_cast<std::size_t>(x)]; }
  bool is_unit_arrow(int a) const { return unit_of_[static_cast<std::size_t>(a)] >= 0; }
  /// Unit index of a unit arrow, -1 otherwise.
  int unit_of(int a) const { return unit_of_[static_cast<std::size_t>(a)]; }

  int unit_index(const std::string& id) const {
    auto it = std::lower_bound(units_.begin(), units_.end(), id);
    if (it == units_.end() || *it != id) throw Error(ErrorKind::UnknownUnit, "unknown unit '" + id + "'");
    return static_cast<int>(it - units_.begin());
  }

  int arrow_index(const std::string& id) const {
    auto it = std::lower_bound(arrows_.begin(), arrows_.end(), id);
    if (it == arrows_.end() || *it != id)
      throw Error(ErrorKind::UnknownArrow, "unknown arrow '" + id + "'");
    return static_cast<int>(it - arrows_.begin());
  }

  /// Arrows with source x.
  std::vector<int> arrows_from(int x) const {
    std::vector<int> out;
    for (int a = 0; a < static_cast<int>(num_arrows()); ++a)
      if (src(a) == x) out.push_back(a);
    return out;
  }

  /// r-orbit of x as a sorted unit list.
  std::vector<int> orbit(int x) const {
    std::set<int> o;
    for (int a : arrows_from(x)) o.insert(rng(a));
    return {o.begin(), o.end()};
  }

  /// Smallest unit index of each orbit, in increasing order.
  std::vector<int> orbit_representatives() const {
    std::vector<int> reps;
    std::vector<bool> seen(num_units(), false);
    for (int x = 0; x < static_cast<int>(num_units()); ++x) {
      if (seen[static_cast<std::size_t>(x)]) continue;
      reps.push_back(x);
      for (int y : orbit(x)) seen[static_cast<std::size_t>(y)] = true;
    }
    return reps;
  }

  bool is_principal() const {
    for (int a = 0; a < static_cast<int>(num_arrows()); ++a)
      if (src(a) == rng(a) && !is_unit_arrow(a)) return false;
    return true;
  }

  /// Re-exports the groupoid as a raw description (explicit unit arrows).
  GroupoidSpec spec() const {
    GroupoidSpec s;
    s.units = units_;
    for (int a = 0; a < static_cast<int>(num_arrows()); ++a) {
      s.arrows.push_back({arrows_[static_cast<std::size_t>(a)], units_[static_cast<std::size_t>(src(a))],
                          units_[static_cast<std::size_t>(rng(a))], arrows_[static_cast<std::size_t>(inv(a))]});
      for (int b = 0; b < static_cast<int>(num_arrows()); ++b) {
        const int c = compose(a, b);
        if (c >= 0)
          s.compose.push_back({arrows_[static_cast<std::size_t>(a)], arrows_[static_cast<std::size_t>(b)],
                               arrows_[static_cast<std::size_t>(c)]});
      }
    }
    for (int x = 0; x < static_cast<int>(num_units()); ++x)
      s.unit_arrows[units_[static_cast<std::size_t>(x)]] = arrows_[static_cast<std::size_t>(unit_arrow(x))];
    return s;
  }

 private:
  std::vector<std::string> units_, arrows_;
  std::vector<int> src_, rng_, inv_, unit_arrow_, unit_of_, table_;
};

namespace detail {

/// Resolves unit arrows: explicit map first, then an arrow whose id equals the
/// unit id, then the unique arrow e at x with ee = e.
inline std::optional<std::string> resolve_unit_arrow(
    const GroupoidSpec& g, const std::string& x,
    const std::map<std::pair<std::string, std::string>, std::string>& table) {
  if (auto it = g.unit_arrows.find(x); it != g.unit_arrows.end()) return it->second;
  for (const auto& a : g.arrows)
    if (a.id == x) return a.id;
  std::optional<std::string> found;
  for (const auto& a : g.arrows) {
    if (a.src != x || a.rng != x) continue;
    auto it = table.find({a.id, a.id});
    if (it != table.end() && it->second == a.id) {
      if (found) return std::nullopt;
      found = a.id;
    }
  }
  return found;
}

}  // namespace detail

inline ValidationReport validate(const GroupoidSpec& g) {
  ValidationReport rep;
  auto fail = [&](std::string axiom, std::vector<std::string> w) {
    rep.violations.push_back({std::move(axiom), std::move(w)});
  };
  std::set<std::string> units, arrows;
  for (const auto& u : g.units)
    if (!units.insert(u).second) fail("duplicate unit", {u});
  std::map<std::string, const GroupoidSpec::Arrow*> by_id;
  for (const auto& a : g.arrows) {
    if (!arrows.insert(a.id).second) fail("duplicate arrow", {a.id});
    by_id[a.id] = &a;
  }
  if (units.empty()) fail("empty unit space", {});
  for (const auto& a : g.arrows) {
    if (!units.count(a.src)) fail("source is not a unit", {a.id, a.src});
    if (!units.count(a.rng)) fail("range is not a unit", {a.id, a.rng});
    if (!arrows.count(a.inv)) fail("inverse is not an arrow", {a.id, a.inv});
  }
  if (!rep.ok()) return rep;

  std::map<std::pair<std::string, std::string>, std::string> table;
  for (const auto& c : g.compose) {
    if (!arrows.count(c[0]) || !arrows.count(c[1]) || !arrows.count(c[2])) {
      fail("composition entry names an unknown arrow", {c[0], c[1], c[2]});
      continue;
    }
    auto [it, fresh] = table.emplace(std::make_pair(c[0], c[1]), c[2]);
    if (!fresh && it->second != c[2]) fail("composition entry defined twice", {c[0], c[1], c[2]});
  }
  if (!rep.ok()) return rep;

  // Inverse axioms.
  for (const auto& a : g.arrows) {
    const auto& ia = *by_id[a.inv];
    if (ia.inv != a.id) fail("inverse is not involutive", {a.id, a.inv, ia.inv});
    if (ia.src != a.rng || ia.rng != a.src) fail("inverse swaps source and range", {a.id, a.inv});
  }

  // Composition domain and typing.
  for (const auto& a : g.arrows) {
    for (const auto& b : g.arrows) {
      auto it = table.find({a.id, b.id});
      const bool composable = a.src == b.rng;
      if (composable && it == table.end()) fail("composition missing for composable pair", {a.id, b.id});
      if (!composable && it != table.end()) fail("composition defined for non-composable pair", {a.id, b.id, it->second});
      if (composable && it != table.end()) {
        const auto& c = *by_id[it->second];
        if (c.src != b.src || c.rng != a.rng) fail("composite has wrong endpoints", {a.id, b.id, c.id});
      }
    }
  }
  if (!rep.ok()) return rep;

  // Units.
  std::map<std::string, std::string> ua;
  for (const auto& x : g.units) {
    auto e = detail::resolve_unit_arrow(g, x, table);
    if (!e || !by_id.count(*e)) {
      fail("no unit arrow for unit", {x});
      continue;
    }
    const auto& ea = *by_id[*e];
    if (ea.src != x || ea.rng != x) fail("unit arrow is not a loop at its unit", {x, *e});
    ua[x] = *e;
  }
  if (!rep.ok()) return rep;
  for (const auto& a : g.arrows) {
    if (table.at({ua[a.rng], a.id}) != a.id) fail("left unit law", {ua[a.rng], a.id});
    if (table.at({a.id, ua[a.src]}) != a.id) fail("right unit law", {a.id, ua[a.src]});
    if (table.at({a.inv, a.id}) != ua[a.src]) fail("inverse law g^-1 g = s(g)", {a.inv, a.id});
    if (table.at({a.id, a.inv}) != ua[a.rng]) fail("inverse law g g^-1 = r(g)", {a.id, a.inv});
  }
  // Associativity.
  for (const auto& a : g.arrows)
    for (const auto& b : g.arrows) {
      if (a.src != b.rng) continue;
      const auto& ab = table.at({a.id, b.id});
      for (const auto& c : g.arrows) {
        if (b.src != c.rng) continue;
        const auto& bc = table.at({b.id, c.id});
        if (table.at({ab, c.id}) != table.at({a.id, bc})) fail("associativity", {a.id, b.id, c.id});
      }
    }
  return rep;
}

inline FiniteGroupoid::FiniteGroupoid(const GroupoidSpec& spec) {
  const auto rep = validate(spec);
  if (!rep.ok()) {
    std::string w;
    for (const auto& s : rep.violations.front().witness) w += (w.empty() ? "" : ",") + s;
    throw Error(ErrorKind::InvalidGroupoid, rep.violations.front().axiom + " (" + w + ")");
  }
  units_ = spec.units;
  std::sort(units_.begin(), units_.end());
  for (const auto& a : spec.arrows) arrows_.push_back(a.id);
  std::sort(arrows_.begin(), arrows_.end());
  const std::size_t n = arrows_.size();
  src_.assign(n, -1);
  rng_.assign(n, -1);
  inv_.assign(n, -1);
  for (const auto& a : spec.arrows) {
    const auto i = static_cast<std::size_t>(arrow_index(a.id));
    src_[i] = unit_index(a.src);
    rng_[i] = unit_index(a.rng);
    inv_[i] = arrow_index(a.inv);
  }
  table_.assign(n * n, -1);
  std::map<std::pair<std::string, std::string>, std::string> t;
  for (const auto& c : spec.compose) {
    t[{c[0], c[1]}] = c[2];
    table_[static_cast<std::size_t>(arrow_index(c[0])) * n + static_cast<std::size_t>(arrow_index(c[1]))] =
        arrow_index(c[2]);
  }
  unit_arrow_.assign(units_.size(), -1);
  unit_of_.assign(n, -1);
  for (std::size_t x = 0; x < units_.size(); ++x) {
    const int e = arrow_index(*detail::resolve_unit_arrow(spec, units_[x], t));
    unit_arrow_[x] = e;
    unit_of_[static_cast<std::size_t>(e)] = static_cast<int>(x);
  }
}

/// {g : s(g) = r(g) = x}.
inline std::vector<int> isotropy(const FiniteGroupoid& g, int x) {
  if (x < 0 || x >= static_cast<int>(g.num_units()))
    throw Error(ErrorKind::UnknownUnit, "unit index out of range");
  std::vector<int> out;
  for (int a = 0; a < static_cast<int>(g.num_arrows()); ++a)
    if (g.src(a) == x && g.rng(a) == x) out.push_back(a);
  return out;
}

inline std::vector<int> isotropy(const FiniteGroupoid& g, const std::string& x) {
  return isotropy(g, g.unit_index(x));
}

inline std::vector<int> arrow_ids_to_indices(const FiniteGroupoid& g, const std::vector<std::string>& ids) {
  std::vector<int> out;
  for (const auto& id : ids) out.push_back(g.arrow_index(id));
  return out;
}

inline bool is_bisection(const FiniteGroupoid& g, const std::vector<int>& s) {
  std::set<int> srcs, rngs, seen;
  for (int a : s) {
    if (a < 0 || a >= static_cast<int>(g.num_arrows()))
      throw Error(ErrorKind::UnknownArrow, "arrow index out of range");
    if (!seen.insert(a).second) continue;
    if (!srcs.insert(g.src(a)).second || !rngs.insert(g.rng(a)).second) return false;
  }
  return true;
}

inline bool is_subgroupoid(const FiniteGroupoid& g, const std::vector<int>& h) {
  const std::set<int> hs(h.begin(), h.end());
  for (int a : hs) {
    if (a < 0 || a >= static_cast<int>(g.num_arrows())) return false;
    if (!hs.count(g.inv(a))) return false;
    for (int b : hs) {
      const int c = g.compose(a, b);
      if (c >= 0 && !hs.count(c)) return false;
    }
  }
  return true;
}

/// True iff whenever ab lies in H (for arrows a, b of G), both a and b lie in H.
inline bool has_factorization_property(const FiniteGroupoid& g, const std::vector<int>& h) {
  if (!is_subgroupoid(g, h)) throw Error(ErrorKind::NotASubgroupoid, "arrow set is not a subgroupoid");
  const std::set<int> hs(h.begin(), h.end());
  for (int a = 0; a < static_cast<int>(g.num_arrows()); ++a)
    for (int b = 0; b < static_cast<int>(g.num_arrows()); ++b) {
      const int c = g.compose(a, b);
      if (c >= 0 && hs.count(c) && (!hs.count(a) || !hs.count(b))) return false;
    }
  return true;
}

/// The subgroupoid on the arrow set H, with units the sources of H.
inline FiniteGroupoid subgroupoid(const FiniteGroupoid& g, const std::vector<int>& h) {
  if (!is_subgroupoid(g, h)) throw Error(ErrorKind::NotASubgroupoid, "arrow set is not a subgroupoid");
  const std::set<int> hs(h.begin(), h.end());
  GroupoidSpec s;
  std::set<int> us;
  for (int a : hs) us.insert(g.src(a));
  for (int x : us) {
    if (!hs.count(g.unit_arrow(x))) throw Error(ErrorKind::NotASubgroupoid, "subgroupoid misses a unit arrow");
    s.units.push_back(g.units()[static_cast<std::size_t>(x)]);
    s.unit_arrows[g.units()[static_cast<std::size_t>(x)]] = g.arrows()[static_cast<std::size_t>(g.unit_arrow(x))];
  }
  const auto& id = g.arrows();
  const auto& un = g.units();
  for (int a : hs) {
    s.arrows.push_back({id[static_cast<std::size_t>(a)], un[static_cast<std::size_t>(g.src(a))],
                        un[static_cast<std::size_t>(g.rng(a))], id[static_cast<std::size_t>(g.inv(a))]});
    for (int b : hs) {
      const int c = g.compose(a, b);
      if (c >= 0)
        s.compose.push_back({id[static_cast<std::size_t>(a)], id[static_cast<std::size_t>(b)],
                             id[static_cast<std::size_t>(c)]});
    }
  }
  return FiniteGroupoid(s);
}

/// Searches for a groupoid isomorphism G -> H by backtracking over arrow images.
/// Returns the arrow map (index in G -> index in H) if one exists.
inline std::optional<std::vector<int>> find_isomorphism(const FiniteGroupoid& g, const FiniteGroupoid& h) {
  const int na = static_cast<int>(g.num_arrows());
  if (g.num_arrows() != h.num_arrows() || g.num_units() != h.num_units()) return std::nullopt;
  // Cheap invariant: multiset of (orbit size, isotropy order).
  auto signature = [](const FiniteGroupoid& k) {
    std::vector<std::pair<std::size_t, std::size_t>> sig;
    for (int x = 0; x < static_cast<int>(k.num_units()); ++x)
      sig.emplace_back(k.orbit(x).size(), isotropy(k, x).size());
    std::sort(sig.begin(), sig.end());
    return sig;
  };
  if (signature(g) != signature(h)) return std::nullopt;

  std::vector<int> umap(g.num_units(), -1), uused(h.num_units(), 0);
  std::vector<int> amap(static_cast<std::size_t>(na), -1), aused(h.num_arrows(), 0);
  // Assign unit arrows first (they determine the unit map), then the rest.
  std::vector<int> order;
  for (int x = 0; x < static_cast<int>(g.num_units()); ++x) order.push_back(g.unit_arrow(x));
  for (int a = 0; a < na; ++a)
    if (!g.is_unit_arrow(a)) order.push_back(a);

  auto consistent = [&](int a, int b) {
    // Check all composites among already mapped arrows involving a.
    for (int c = 0; c < na; ++c) {
      const int mc = amap[static_cast<std::size_t>(c)];
      if (mc < 0) continue;
      const int ac = g.compose(a, c), ca = g.compose(c, a);
      const int bc = h.compose(b, mc), cb = h.compose(mc, b);
      if ((ac >= 0) != (bc >= 0) || (ca >= 0) != (cb >= 0)) return false;
      if (ac >= 0 && amap[static_cast<std::size_t>(ac)] >= 0 && amap[static_cast<std::size_t>(ac)] != bc) return false;
      if (ca >= 0 && amap[static_cast<std::size_t>(ca)] >= 0 && amap[static_cast<std::size_t>(ca)] != cb) return false;
      // Composites landing on a.
      if (ac >= 0 && ac == a && bc != b) return false;
      if (ca >= 0 && ca == a && cb != b) return false;
    }
    const int ia = g.inv(a);
    if (amap[static_cast<std::size_t>(ia)] >= 0 && amap[static_cast<std::size_t>(ia)] != h.inv(b)) return false;
    return true;
  };

  std::function<bool(std::size_t)> rec = [&](std::size_t k) -> bool {
    if (k == order.size()) {
      for (int a = 0; a < na; ++a)
        for (int b = 0; b < na; ++b) {
          const int c = g.compose(a, b);
          const int d = h.compose(amap[static_cast<std::size_t>(a)], amap[static_cast<std::size_t>(b)]);
          if ((c >= 0) != (d >= 0) || (c >= 0 && amap[static_cast<std::size_t>(c)] != d)) return false;
        }
      return true;
    }
    const int a = order[k];
    for (int b = 0; b < static_cast<int>(h.num_arrows()); ++b) {
      if (aused[static_cast<std::size_t>(b)]) continue;
      if (g.is_unit_arrow(a) != h.is_unit_arrow(b)) continue;
      const int sa = g.src(a), ra = g.rng(a);
      const int sb = h.src(b), rb = h.rng(b);
      if (umap[static_cast<std::size_t>(sa)] >= 0 && umap[static_cast<std::size_t>(sa)] != sb) continue;
      if (umap[static_cast<std::size_t>(ra)] >= 0 && umap[static_cast<std::size_t>(ra)] != rb) continue;
      if (g.is_unit_arrow(a) && uused[static_cast<std::size_t>(sb)]) continue;
      if (!consistent(a, b)) continue;
      const bool new_unit = g.is_unit_arrow(a);
      if (new_unit) {
        umap[static_cast<std::size_t>(sa)] = sb;
        uused[static_cast<std::size_t>(sb)] = 1;
      }
      amap[static_cast<std::size_t>(a)] = b;
      aused[static_cast<std::size_t>(b)] = 1;
      if (rec(k + 1)) return true;
      amap[static_cast<std::size_t>(a)] = -1;
      aused[static_cast<std::size_t>(b)] = 0;
      if (new_unit) {
        umap[static_cast<std::size_t>(sa)] = -1;
        uused[static_cast<std::size_t>(sb)] = 0;
      }
    }
    return false;
  };
  if (rec(0)) return amap;
  return std::nullopt;
}

}  // namespace cartankit

#endif  // CARTANKIT_GROUPOID_HPP
