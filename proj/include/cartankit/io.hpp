#ifndef CARTANKIT_IO_HPP
#define CARTANKIT_IO_HPP

// JSON reading and writing in the "cartankit/v1" schema.
//
//   complex   [re, im] or a bare number
//   matrix    row-major array of rows of complex entries
//   groupoid  {"units": [..], "arrows": [{"id","src","rng","inv"}..],
//              "compose": [["a","b","ab"]..], "unit_arrows": {unit: arrow}?}
//   twist     groupoid fields plus "cocycle": [[["a","b"], [re,im]]..], omitted pairs are 1
//   inclusion {"ambient_dim": n, "C_generators": [..], "D_generators": [..], "normalizers": [..]}
//   covers    {"small": [density..], "large": [density..]}
//
// Every document may carry "schema": "cartankit/v1" and "kind"; without "kind"
// the kind is inferred from the fields present.

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cartankit/error.hpp"
#include "cartankit/groupoid.hpp"
#include "cartankit/inclusion.hpp"
#include "cartankit/matalg.hpp"
#include "cartankit/twist.hpp"

namespace cartankit::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchema = "cartankit/v1";

/// Values this close to zero are written as 0 so reports do not carry round-off noise.
inline double clean(double x) { return std::abs(x) < 1e-13 ? 0.0 : x; }

inline Json to_json(Complex z) { return Json::array({clean(z.real()), clean(z.imag())}); }

inline Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace detail {

[[noreturn]] inline void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::ParseError, where + ": " + what);
}

inline const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) schema_error(where, std::string("missing field \"") + key + "\"");
  return j.at(key);
}

inline std::string string_of(const Json& j, const std::string& where) {
  if (!j.is_string()) schema_error(where, "expected a string");
  return j.get<std::string>();
}

}  // namespace detail

inline Complex complex_from(const Json& j, const std::string& where = "value") {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) return {j[0].get<double>(), j[1].get<double>()};
  detail::schema_error(where, "expected a number or an [re, im] pair");
}

inline Matrix matrix_from(const Json& j, const std::string& where = "matrix") {
  if (!j.is_array() || j.empty()) detail::schema_error(where, "expected a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Matrix m;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array()) detail::schema_error(where, "row " + std::to_string(i) + " is not an array");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(n, cols);
    }
    if (static_cast<Eigen::Index>(row.size()) != cols) detail::schema_error(where, "ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(i, c) = complex_from(row[static_cast<std::size_t>(c)], where + "[" + std::to_string(i) + "][" + std::to_string(c) + "]");
  }
  return m;
}

inline std::vector<Matrix> matrices_from(const Json& j, const std::string& where) {
  if (!j.is_array()) detail::schema_error(where, "expected an array of matrices");
  std::vector<Matrix> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(matrix_from(j[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

// ------------------------------------------------------------- documents

/// Parses text, reporting syntax errors with line and column.
inline Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": malformed JSON");
  }
}

inline Json read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

inline std::string kind_of(const Json& j) {
  if (!j.is_object()) detail::schema_error("document", "top level must be an object");
  if (j.contains("schema") && j["schema"] != kSchema)
    detail::schema_error("schema", "unsupported schema " + j["schema"].dump());
  if (j.contains("kind")) return detail::string_of(j["kind"], "kind");
  if (j.contains("ambient_dim")) return "inclusion";
  if (j.contains("cocycle")) return "twist";
  if (j.contains("arrows")) return "groupoid";
  if (j.contains("small") || j.contains("large")) return "covers";
  detail::schema_error("document", "cannot tell what kind of document this is");
}

inline GroupoidSpec groupoid_spec_from(const Json& j) {
  GroupoidSpec g;
  const auto& units = detail::field(j, "units", "groupoid");
  if (!units.is_array()) detail::schema_error("units", "expected an array");
  for (const auto& u : units) g.units.push_back(detail::string_of(u, "units"));
  const auto& arrows = detail::field(j, "arrows", "groupoid");
  if (!arrows.is_array()) detail::schema_error("arrows", "expected an array");
  for (std::size_t k = 0; k < arrows.size(); ++k) {
    const std::string w = "arrows[" + std::to_string(k) + "]";
    const auto& a = arrows[k];
    g.arrows.push_back({detail::string_of(detail::field(a, "id", w), w + ".id"), detail::string_of(detail::field(a, "src", w), w + ".src"),
                        detail::string_of(detail::field(a, "rng", w), w + ".rng"), detail::string_of(detail::field(a, "inv", w), w + ".inv")});
  }
  const auto& comp = detail::field(j, "compose", "groupoid");
  if (!comp.is_array()) detail::schema_error("compose", "expected an array");
  for (std::size_t k = 0; k < comp.size(); ++k) {
    const auto& c = comp[k];
    const std::string w = "compose[" + std::to_string(k) + "]";
    if (!c.is_array() || c.size() != 3) detail::schema_error(w, "expected [a, b, ab]");
    g.compose.push_back({detail::string_of(c[0], w), detail::string_of(c[1], w), detail::string_of(c[2], w)});
  }
  if (j.contains("unit_arrows")) {
    if (!j["unit_arrows"].is_object()) detail::schema_error("unit_arrows", "expected an object");
    for (const auto& [u, a] : j["unit_arrows"].items()) g.unit_arrows[u] = detail::string_of(a, "unit_arrows");
  }
  return g;
}

inline std::map<std::pair<std::string, std::string>, Complex> cocycle_entries_from(const Json& j) {
  std::map<std::pair<std::string, std::string>, Complex> out;
  if (!j.contains("cocycle")) return out;
  const auto& c = j["cocycle"];
  if (!c.is_array()) detail::schema_error("cocycle", "expected an array of [[a, b], value] entries");
  for (std::size_t k = 0; k < c.size(); ++k) {
    const std::string w = "cocycle[" + std::to_string(k) + "]";
    const auto& e = c[k];
    if (!e.is_array() || e.size() != 2 || !e[0].is_array() || e[0].size() != 2) detail::schema_error(w, "expected [[a, b], value]");
    out[{detail::string_of(e[0][0], w), detail::string_of(e[0][1], w)}] = complex_from(e[1], w);
  }
  return out;
}

namespace detail {

inline CocycleTwist::Table cocycle_table(const FiniteGroupoid& g, const Json& j) {
  const auto entries = cocycle_entries_from(j);
  try {
    return CocycleTwist::table_from(g, entries);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UnknownArrow) throw;
    schema_error("cocycle", e.what());
  }
}

}  // namespace detail

/// Twist without validation of the cocycle identity; the groupoid must be valid.
inline std::shared_ptr<const CocycleTwist> twist_unchecked(const Json& j) {
  auto g = std::make_shared<const FiniteGroupoid>(groupoid_spec_from(j));
  return std::make_shared<const CocycleTwist>(CocycleTwist::unchecked(g, detail::cocycle_table(*g, j)));
}

inline std::shared_ptr<const CocycleTwist> twist_from(const Json& j) {
  auto g = std::make_shared<const FiniteGroupoid>(groupoid_spec_from(j));
  return std::make_shared<const CocycleTwist>(g, detail::cocycle_table(*g, j));
}

inline Inclusion inclusion_from(const Json& j, const Tolerance& tol = {}) {
  const auto& nj = detail::field(j, "ambient_dim", "inclusion");
  if (!nj.is_number_integer() || nj.get<long long>() < 1) detail::schema_error("ambient_dim", "expected a positive integer");
  const auto n = static_cast<Eigen::Index>(nj.get<long long>());
  auto list = [&](const char* key, bool required) {
    if (!j.contains(key)) {
      if (required) detail::schema_error("inclusion", std::string("missing field \"") + key + "\"");
      return std::vector<Matrix>{};
    }
    auto ms = matrices_from(j[key], key);
    for (const auto& m : ms)
      if (m.rows() != n || m.cols() != n)
        throw Error(ErrorKind::NonSquareMatrix, std::string(key) + ": matrix is not " + std::to_string(n) + "x" + std::to_string(n));
    return ms;
  };
  return make_inclusion(n, list("C_generators", false), list("D_generators", false), list("normalizers", true), tol);
}

/// States of Mod(C,D) given by density matrices; the corner is read off the restriction to D.
inline std::vector<ModState> states_from(const Inclusion& inc, const Json& j, const std::string& where) {
  std::vector<ModState> out;
  for (const auto& m : matrices_from(j, where)) {
    if (m.rows() != inc.n() || m.cols() != inc.n()) throw Error(ErrorKind::NonSquareMatrix, where + ": density has the wrong size");
    out.push_back(make_mod_state(inc, corner_of(inc, canonical_density(inc, m)), m));
  }
  return out;
}

// ------------------------------------------------------------- writers

inline Json to_json(const FiniteGroupoid& g) {
  Json j;
  j["units"] = g.units();
  Json arrows = Json::array();
  for (int a = 0; a < static_cast<int>(g.num_arrows()); ++a)
    arrows.push_back({{"id", g.arrows()[static_cast<std::size_t>(a)]},
                      {"src", g.units()[static_cast<std::size_t>(g.src(a))]},
                      {"rng", g.units()[static_cast<std::size_t>(g.rng(a))]},
                      {"inv", g.arrows()[static_cast<std::size_t>(g.inv(a))]}});
  j["arrows"] = std::move(arrows);
  Json comp = Json::array();
  for (int a = 0; a < static_cast<int>(g.num_arrows()); ++a)
    for (int b = 0; b < static_cast<int>(g.num_arrows()); ++b) {
      const int c = g.compose(a, b);
      if (c >= 0)
        comp.push_back({g.arrows()[static_cast<std::size_t>(a)], g.arrows()[static_cast<std::size_t>(b)],
                        g.arrows()[static_cast<std::size_t>(c)]});
    }
  j["compose"] = std::move(comp);
  Json ua = Json::object();
  for (int x = 0; x < static_cast<int>(g.num_units()); ++x)
    ua[g.units()[static_cast<std::size_t>(x)]] = g.arrows()[static_cast<std::size_t>(g.unit_arrow(x))];
  j["unit_arrows"] = std::move(ua);
  return j;
}

inline Json to_json(const CocycleTwist& t) {
  Json j = {{"schema", kSchema}, {"kind", "twist"}};
  const Json g_json = to_json(t.groupoid());
  for (const auto& [k, v] : g_json.items()) j[k] = v;
  const auto& g = t.groupoid();
  Json c = Json::array();
  for (int a = 0; a < static_cast<int>(g.num_arrows()); ++a)
    for (int b = 0; b < static_cast<int>(g.num_arrows()); ++b) {
      if (g.compose(a, b) < 0) continue;
      const Complex s = t.sigma(a, b);
      if (std::abs(s - 1.0) < 1e-13) continue;
      c.push_back({{g.arrows()[static_cast<std::size_t>(a)], g.arrows()[static_cast<std::size_t>(b)]}, to_json(s)});
    }
  j["cocycle"] = std::move(c);
  return j;
}

inline Json to_json(const ValidationReport& r) {
  Json v = Json::array();
  for (const auto& x : r.violations) v.push_back({{"axiom", x.axiom}, {"witness", x.witness}});
  return v;
}

/// Plain-text rendering of a report: one "path: value" line per scalar.
inline void render_text(const Json& j, std::ostream& out, const std::string& prefix = "") {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) render_text(v, out, prefix.empty() ? k : prefix + "." + k);
  } else if (j.is_array() && !j.empty() && (j[0].is_object() || (j[0].is_array() && !j[0].empty() && j[0][0].is_array()))) {
    for (std::size_t i = 0; i < j.size(); ++i) render_text(j[i], out, prefix + "[" + std::to_string(i) + "]");
  } else {
    out << prefix << ": " << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
  }
}

}  // namespace cartankit::io

#endif  // CARTANKIT_IO_HPP
