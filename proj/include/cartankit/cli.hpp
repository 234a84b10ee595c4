#ifndef CARTANKIT_CLI_HPP
#define CARTANKIT_CLI_HPP

// Command-line front end. Every command builds a JSON report; the text format is
// a rendering of that report. Exit codes: 0 success, 1 mathematical violation or
// refusal, 2 input error, 3 resource cap.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cartankit/envelope.hpp"
#include "cartankit/error.hpp"
#include "cartankit/inclusion.hpp"
#include "cartankit/io.hpp"
#include "cartankit/reduced_cstar.hpp"
#include "cartankit/weyl.hpp"

namespace cartankit::cli {

using io::Json;

inline constexpr const char* kVersion = "1.0.0";

struct Options {
  double tolerance = 1e-9;
  int word_bound = 4;
  std::string format = "json";
  int degree = 1;
  std::size_t cap = 4096;
  int threads = 1;

  Tolerance tol() const {
    Tolerance t;
    t.eps = tolerance;
    t.cap = cap;
    return t;
  }
};

struct Outcome {
  int exit_code = 0;
  Json report;
};

namespace detail {

inline Json header(const std::string& command, const std::vector<std::string>& inputs, const Options& o) {
  return {{"schema", io::kSchema}, {"version", kVersion}, {"command", command}, {"inputs", inputs},
          {"tolerance", o.tolerance}, {"word_bound", o.word_bound}, {"threads", o.threads}};
}

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::ParseError:
    case ErrorKind::InvalidOption:
    case ErrorKind::NonSquareMatrix:
      return 2;
    case ErrorKind::DimensionOverflow:
      return 3;
    default:
      return 1;
  }
}

inline Json error_json(const Error& e) { return {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}}; }

inline Json states_json(const std::vector<ModState>& f) {
  Json a = Json::array();
  for (const auto& s : f) a.push_back({{"corner", s.corner}, {"density", io::to_json(s.density)}});
  return a;
}

inline std::shared_ptr<const CocycleTwist> twist_or_trivial(const Json& doc, const std::string& kind) {
  if (kind == "groupoid") return std::make_shared<const CocycleTwist>(std::make_shared<const FiniteGroupoid>(io::groupoid_spec_from(doc)));
  if (kind == "twist") return io::twist_from(doc);
  throw Error(ErrorKind::ParseError, "expected a groupoid or twist document, got \"" + kind + "\"");
}

inline Inclusion inclusion_doc(const Json& doc, const Options& o) {
  const auto kind = io::kind_of(doc);
  if (kind != "inclusion") throw Error(ErrorKind::ParseError, "expected an inclusion document, got \"" + kind + "\"");
  return io::inclusion_from(doc, o.tol());
}

}  // namespace detail

inline Json to_json(const EnvelopeCertificate& c) {
  Json j = {{"exists", c.exists}, {"reason", c.reason}};
  j["theorem_conditions"] = {{"unique_pseudo_expectation", c.unique_pseudo_expectation},
                             {"dc_abelian", c.dc_abelian},
                             {"dc_d_essential", c.dc_d_essential},
                             {"c_dc_essential", c.c_dc_essential}};
  if (!c.exists) return j;
  j["regular_homomorphism"] = c.regular_homomorphism;
  j["kernel_equals_KF"] = c.kernel_equals_KF;
  j["generation"] = c.generation;
  j["D1_generation"] = c.D1_generation;
  j["essential_extension"] = c.essential_extension;
  j["pointwise_density"] = c.pointwise_density;
  j["cartan"] = c.cartan;
  j["theta_isomorphism"] = c.theta_isomorphism;
  j["kernel_dim"] = c.kernel_dim;
  j["block_structure"] = c.block_structure;
  j["all"] = c.all();
  if (c.twist) j["twist"] = io::to_json(*c.twist->twist);
  return j;
}

// ------------------------------------------------------------- commands

inline Outcome cmd_validate(const std::string& path, const Options& o) {
  Outcome out{0, detail::header("validate", {path}, o)};
  const Json doc = io::read_file(path);
  const auto kind = io::kind_of(doc);
  out.report["kind"] = kind;
  ValidationReport rep;
  if (kind == "groupoid" || kind == "twist") {
    const auto spec = io::groupoid_spec_from(doc);
    rep = validate(spec);
    if (rep.ok() && kind == "twist") {
      try {
        rep = validate_cocycle(*io::twist_unchecked(doc), o.tolerance);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::InvalidCocycle) throw;
        rep.violations.push_back({e.what(), {}});
      }
    }
  } else if (kind == "inclusion") {
    try {
      const auto inc = io::inclusion_from(doc, o.tol());
      out.report["regular"] = inc.regular();
    } catch (const Error& e) {
      if (detail::exit_code_for(e.kind()) != 1) throw;
      rep.violations.push_back({std::string(to_string(e.kind())), {e.what()}});
    }
  } else if (kind == "covers") {
    for (const char* key : {"small", "large"})
      out.report[std::string(key) + "_states"] = io::matrices_from(io::detail::field(doc, key, "covers"), key).size();
  } else {
    throw Error(ErrorKind::ParseError, "unknown document kind \"" + kind + "\"");
  }
  out.report["valid"] = rep.ok();
  out.report["violations"] = io::to_json(rep);
  out.exit_code = rep.ok() ? 0 : 1;
  return out;
}

inline Outcome cmd_cstar(const std::string& path, const Options& o) {
  Outcome out{0, detail::header("cstar", {path}, o)};
  const Json doc = io::read_file(path);
  const auto t = detail::twist_or_trivial(doc, io::kind_of(doc));
  const auto r = realize(t, o.degree, o.tol());
  const auto cert = is_cartan_pair(r, o.tol());
  out.report["degree"] = o.degree;
  out.report["arrows"] = t->size();
  out.report["dimension"] = r.realization().dim();
  out.report["block_structure"] = block_structure(r.realization(), o.tol());
  out.report["cartan"] = {{"masa", cert.masa}, {"regular", cert.regular}, {"faithful_E", cert.faithful_E}};
  Json norms = Json::object();
  const auto& g = t->groupoid();
  for (int a = 0; a < static_cast<int>(g.num_arrows()); ++a)
    norms[g.arrows()[static_cast<std::size_t>(a)]] = io::clean(reduced_norm(EquivariantFunction::delta(t, o.degree, a)));
  out.report["norm_table"] = std::move(norms);
  return out;
}

inline Outcome cmd_analyze(const std::string& path, const Options& o) {
  Outcome out{0, detail::header("analyze", {path}, o)};
  const auto inc = detail::inclusion_doc(io::read_file(path), o);
  const auto dc = relative_commutant(inc.D(), inc.C(), inc.tolerance());
  const auto pe = pseudo_expectations(inc);
  auto& r = out.report;
  r["c_dim"] = inc.C().dim();
  r["d_dim"] = inc.D().dim();
  r["corners"] = inc.num_corners();
  r["regular"] = inc.regular();
  r["masa"] = dc.dim() == inc.D().dim();
  r["dc_dim"] = dc.dim();
  r["dc_abelian"] = dc.is_abelian(10 * inc.tolerance().eps);
  Json dims = Json::array();
  for (const auto& c : pe.corners) dims.push_back(c.corner.dim());
  r["pseudo_expectation"] = {{"unique", pe.unique}, {"faithful", pe.unique && pe.faithful}, {"corner_dims", dims}};
  if (pe.unique) {
    r["strongly_compatible"] = detail::states_json(strongly_compatible(inc));
    if (inc.regular()) {
      const auto l = left_kernel(inc, *pe.expectation);
      r["left_kernel"] = {{"dim", l.ideal.dim()}, {"two_sided", l.two_sided}, {"meets_D_trivially", l.meets_D_trivially},
                          {"maximal", l.maximal}};
    }
  }
  return out;
}

inline Outcome cmd_weyl(const std::string& path, const Options& o) {
  Outcome out{0, detail::header("weyl", {path}, o)};
  const auto inc = detail::inclusion_doc(io::read_file(path), o);
  const auto w = weyl_twist(inc, o.word_bound);
  const auto& g = w.twist->groupoid();
  out.report["units"] = g.num_units();
  out.report["arrows"] = g.num_arrows();
  out.report["principal"] = g.is_principal();
  out.report["words_checked"] = w.words_checked;
  out.report["degree"] = WeylTwist::degree;
  out.report["block_structure"] = block_structure(realize(w.twist, WeylTwist::degree, o.tol()).realization(), o.tol());
  out.report["twist"] = io::to_json(*w.twist);
  return out;
}

inline Outcome cmd_envelope(const std::string& path, const Options& o) {
  Outcome out{0, detail::header("envelope", {path}, o)};
  const auto inc = detail::inclusion_doc(io::read_file(path), o);
  const auto c = cartan_envelope(inc, o.word_bound);
  out.report["certificate"] = to_json(c);
  bool ok = c.exists && c.all();
  if (c.exists && is_masa(inc)) {
    const auto x = envelope_uniqueness_crosscheck(inc, o.word_bound);
    out.report["crosscheck"] = {{"pass", x.pass}, {"block_structure_equal", x.block_structure_equal},
                                {"groupoid_isomorphic", x.groupoid_isomorphic}, {"exhaustive", x.exhaustive}};
    ok = ok && x.pass;
  }
  out.exit_code = ok ? 0 : 1;
  return out;
}

inline Outcome cmd_compare(const std::string& inclusion_path, const std::string& covers_path, const Options& o) {
  Outcome out{0, detail::header("compare", {inclusion_path, covers_path}, o)};
  const auto inc = detail::inclusion_doc(io::read_file(inclusion_path), o);
  const Json doc = io::read_file(covers_path);
  if (io::kind_of(doc) != "covers") throw Error(ErrorKind::ParseError, "expected a covers document");
  const auto f1 = build_cover(inc, CoverMode::Custom, io::states_from(inc, io::detail::field(doc, "small", "covers"), "small"), o.word_bound);
  const auto f2 = build_cover(inc, CoverMode::Custom, io::states_from(inc, io::detail::field(doc, "large", "covers"), "large"), o.word_bound);
  const auto cc = cover_comparison(inc, f1, f2);
  const auto& g1 = cc.small.twist->groupoid();
  const auto& g2 = cc.large.twist->groupoid();
  Json map = Json::object();
  for (std::size_t a = 0; a < cc.arrow_map.size(); ++a)
    map[g1.arrows()[a]] = g2.arrows()[static_cast<std::size_t>(cc.arrow_map[a])];
  auto& r = out.report;
  r["dim_large"] = cc.dim_large;
  r["dim_small"] = cc.dim_small;
  r["kernel_dim"] = cc.kernel_dim;
  r["surjective"] = cc.surjective;
  r["multiplicative_residual"] = io::clean(cc.multiplicative_residual);
  r["intertwining_residual"] = io::clean(cc.intertwining_residual);
  r["arrow_map"] = std::move(map);
  r["small_kernel_dim"] = radical_ideal(inc, f1.states).dim();
  r["large_kernel_dim"] = radical_ideal(inc, f2.states).dim();
  out.exit_code = cc.surjective && cc.multiplicative_residual < 1e-9 && cc.intertwining_residual < 1e-9 ? 0 : 1;
  return out;
}

// ------------------------------------------------------------------ main

inline void emit(const Outcome& o, const std::string& format, std::ostream& out) {
  if (format == "text") io::render_text(o.report, out);
  else out << o.report.dump(2) << "\n";
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Finite-scale toolkit for regular inclusions and twisted groupoid C*-algebras", "cartankit"};
  app.set_version_flag("--version", kVersion);
  Options o;
  app.add_option("--tolerance", o.tolerance, "Equality tolerance")->check(CLI::Range(1e-14, 1e-4));
  app.add_option("--word-bound", o.word_bound, "Maximal normalizer word length")->check(CLI::Range(1, 8));
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "text"}));
  app.add_option("--degree", o.degree, "Degree of the equivariant functions")->check(CLI::IsMember({-1, 1}));
  app.add_option("--cap", o.cap, "Maximal generated dimension")->check(CLI::Range(std::size_t{1}, std::size_t{1} << 20));
  app.require_subcommand(1);

  std::string path, path2;
  std::string chosen;
  auto add = [&](const char* name, const char* help, bool two = false) {
    auto* sub = app.add_subcommand(name, help)->fallthrough();
    sub->add_option("path", path, two ? "Inclusion file" : "Input file")->required();
    if (two) sub->add_option("covers", path2, "Covers file")->required();
    sub->callback([&chosen, name] { chosen = name; });
  };
  add("validate", "Parse and validate a groupoid, twist, inclusion or covers file");
  add("cstar", "Realize the reduced algebra of a twist");
  add("analyze", "Analyze an inclusion");
  add("weyl", "Extract the Weyl twist of a regular MASA inclusion");
  add("envelope", "Run the Cartan envelope pipeline");
  add("compare", "Compare the eigenfunctional twists of two nested covers", true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  if (const char* t = std::getenv("CARTANKIT_THREADS")) {
    try {
      o.threads = std::stoi(t);
    } catch (const std::exception&) {
      o.threads = 0;
    }
    if (o.threads < 1) {
      err << "InvalidOption: CARTANKIT_THREADS must be a positive integer\n";
      return 2;
    }
  }

  Outcome result;
  try {
    if (chosen == "validate") result = cmd_validate(path, o);
    else if (chosen == "cstar") result = cmd_cstar(path, o);
    else if (chosen == "analyze") result = cmd_analyze(path, o);
    else if (chosen == "weyl") result = cmd_weyl(path, o);
    else if (chosen == "envelope") result = cmd_envelope(path, o);
    else result = cmd_compare(path, path2, o);
  } catch (const Error& e) {
    std::vector<std::string> inputs{path};
    if (chosen == "compare") inputs.push_back(path2);
    result.report = detail::header(chosen, inputs, o);
    result.report["error"] = detail::error_json(e);
    result.exit_code = detail::exit_code_for(e.kind());
    err << e.what() << "\n";
  }
  emit(result, o.format, out);
  return result.exit_code;
}

}  // namespace cartankit::cli

#endif  // CARTANKIT_CLI_HPP
