#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cartankit/cli.hpp"
#include "cartankit/fixtures.hpp"
#include "cartankit/io.hpp"

using namespace cartankit;
using io::Json;

namespace {

std::string data(const std::string& name) { return std::string(CARTANKIT_DATA_DIR) + "/" + name; }

struct Run {
  int code;
  std::string out, err;
  Json json() const { return Json::parse(out); }
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cartankit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& content) {
  const std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST(Io, ComplexAndMatrix) {
  EXPECT_EQ(io::complex_from(Json::parse("[1.5, -2]")), Complex(1.5, -2));
  EXPECT_EQ(io::complex_from(Json::parse("3")), Complex(3, 0));
  std::mt19937_64 rng(151);
  const Matrix m = fixtures::random_matrix(rng, 3);
  EXPECT_EQ((io::matrix_from(io::to_json(m)) - m).norm(), 0.0);
  for (const char* bad : {"[[1, 2], [3]]", "[]", "[[\"x\"]]", "[[[1, 2, 3]]]"}) {
    try {
      io::matrix_from(Json::parse(bad));
      FAIL() << bad;
    } catch (const Error& err) {
      EXPECT_EQ(err.kind(), ErrorKind::ParseError);
    }
  }
}

TEST(Io, SyntaxErrorsCarryPosition) {
  try {
    io::parse("{\n  \"units\": [\"1\",\n  ]\n");
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::ParseError);
    EXPECT_NE(std::string(err.what()).find("line 3"), std::string::npos) << err.what();
  }
}

TEST(Io, KindInference) {
  EXPECT_EQ(io::kind_of(Json::parse(R"({"units": [], "arrows": [], "compose": []})")), "groupoid");
  EXPECT_EQ(io::kind_of(Json::parse(R"({"units": [], "arrows": [], "compose": [], "cocycle": []})")), "twist");
  EXPECT_EQ(io::kind_of(Json::parse(R"({"ambient_dim": 2, "normalizers": []})")), "inclusion");
  try {
    io::kind_of(Json::parse(R"({"schema": "other/v2", "kind": "twist"})"));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::ParseError);
  }
}

TEST(Io, TwistRoundTrip) {
  std::mt19937_64 rng(157);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = fixtures::random_twist(rng, 20);
    const auto back = io::twist_from(io::parse(io::to_json(*t).dump()));
    const auto& g = t->groupoid();
    ASSERT_EQ(back->groupoid().arrows(), g.arrows());
    for (int a = 0; a < static_cast<int>(g.num_arrows()); ++a)
      for (int b = 0; b < static_cast<int>(g.num_arrows()); ++b)
        if (g.compose(a, b) >= 0) EXPECT_LT(std::abs(back->sigma(a, b) - t->sigma(a, b)), 1e-13);
  }
}

TEST(Io, InclusionFromFile) {
  const auto inc = io::inclusion_from(io::read_file(data("m2d2.json")));
  EXPECT_EQ(inc.n(), 2);
  EXPECT_EQ(inc.C().dim(), 4u);
  EXPECT_EQ(inc.num_corners(), 2u);
  EXPECT_TRUE(inc.regular());
  const auto m2c = io::inclusion_from(io::read_file(data("m2c.json")));
  EXPECT_EQ(m2c.C().dim(), 5u);
  EXPECT_EQ(m2c.num_corners(), 1u);
}

TEST(Io, UnknownCocycleArrow) {
  const auto path = temp_file("bad_cocycle.json",
                              R"({"units": ["e"], "arrows": [{"id": "e", "src": "e", "rng": "e", "inv": "e"}],
                                  "compose": [["e", "e", "e"]], "cocycle": [[["e", "zz"], [1, 0]]]})");
  EXPECT_EQ(run_cli({"validate", path}).code, 2);
}

TEST(Cli, ValidateExitCodes) {
  EXPECT_EQ(run_cli({"validate", data("pair2.json")}).code, 0);
  const auto bad = run_cli({"validate", data("pair2_bad_inverse.json")});
  EXPECT_EQ(bad.code, 1);
  const auto j = bad.json();
  EXPECT_FALSE(j["valid"].get<bool>());
  EXPECT_EQ(j["violations"][0]["witness"][0], "12");
  const auto trunc = run_cli({"validate", data("truncated.json")});
  EXPECT_EQ(trunc.code, 2);
  EXPECT_NE(trunc.err.find("line"), std::string::npos);
  EXPECT_EQ(run_cli({"validate", data("missing.json")}).code, 2);
  EXPECT_EQ(run_cli({"validate", data("k4_ns.json")}).code, 0);
  EXPECT_EQ(run_cli({"validate", data("m2c.json")}).code, 0);
  EXPECT_EQ(run_cli({"validate", data("m2cc_covers.json")}).code, 0);
}

TEST(Cli, ValidateBrokenCocycle) {
  std::ifstream in(data("k4_ns.json"));
  Json j = Json::parse(in);
  j["cocycle"][0][1] = Json::array({0.0, 1.0});
  const auto path = temp_file("k4_broken.json", j.dump());
  const auto r = run_cli({"validate", path});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.json()["violations"][0]["axiom"], "cocycle identity");
}

TEST(Cli, Cstar) {
  const auto ns = run_cli({"cstar", data("k4_ns.json")});
  EXPECT_EQ(ns.code, 0);
  EXPECT_EQ(ns.json()["block_structure"], Json::parse("[2]"));
  EXPECT_EQ(run_cli({"cstar", data("k4_triv.json")}).json()["block_structure"], Json::parse("[1,1,1,1]"));
  const auto p = run_cli({"cstar", data("pair2.json")}).json();
  EXPECT_EQ(p["block_structure"], Json::parse("[2]"));
  EXPECT_EQ(p["cartan"], Json::parse(R"({"masa": true, "regular": true, "faithful_E": true})"));
  EXPECT_EQ(p["norm_table"]["12"], 1.0);
  EXPECT_EQ(run_cli({"cstar", data("k4_ns.json"), "--degree", "-1"}).json()["degree"], -1);
  EXPECT_EQ(run_cli({"cstar", data("k4_ns.json"), "--degree", "2"}).code, 2);
  EXPECT_EQ(run_cli({"cstar", data("k4_ns.json"), "--cap", "2"}).code, 3);
}

TEST(Cli, Analyze) {
  const auto mn = run_cli({"analyze", data("m2d2.json")}).json();
  EXPECT_TRUE(mn["pseudo_expectation"]["unique"].get<bool>());
  EXPECT_TRUE(mn["pseudo_expectation"]["faithful"].get<bool>());
  EXPECT_EQ(mn["strongly_compatible"].size(), 2u);
  EXPECT_EQ(mn["left_kernel"]["dim"], 0);
  const auto m2c = run_cli({"analyze", data("m2c.json")}).json();
  EXPECT_FALSE(m2c["pseudo_expectation"]["unique"].get<bool>());
  EXPECT_FALSE(m2c["dc_abelian"].get<bool>());
  EXPECT_EQ(m2c["dc_dim"], 5);
  const auto dd = run_cli({"analyze", data("d3d3.json")}).json();
  EXPECT_TRUE(dd["masa"].get<bool>());
  EXPECT_EQ(dd["c_dim"], 3);
}

TEST(Cli, Weyl) {
  const auto dd = run_cli({"weyl", data("d3d3.json")});
  EXPECT_EQ(dd.code, 0);
  EXPECT_EQ(dd.json()["arrows"], 3);
  EXPECT_EQ(dd.json()["units"], 3);
  const auto m3 = run_cli({"weyl", data("m3d3.json")});
  EXPECT_EQ(m3.json()["arrows"], 9);
  EXPECT_EQ(m3.json()["block_structure"], Json::parse("[3]"));
  // The emitted twist feeds back into cstar.
  const auto path = temp_file("weyl_m3.json", m3.json()["twist"].dump());
  const auto back = run_cli({"cstar", path, "--degree", "-1"});
  EXPECT_EQ(back.code, 0);
  EXPECT_EQ(back.json()["block_structure"], Json::parse("[3]"));
  const auto refused = run_cli({"weyl", data("m2c.json")});
  EXPECT_EQ(refused.code, 1);
  EXPECT_EQ(refused.json()["error"]["kind"], "NotAMasa");
}

TEST(Cli, Envelope) {
  const auto ok = run_cli({"envelope", data("m2d2.json")});
  EXPECT_EQ(ok.code, 0);
  const auto cert = ok.json()["certificate"];
  for (const char* k : {"regular_homomorphism", "kernel_equals_KF", "generation", "D1_generation", "essential_extension",
                        "pointwise_density", "cartan", "theta_isomorphism", "all"})
    EXPECT_TRUE(cert[k].get<bool>()) << k;
  EXPECT_TRUE(ok.json()["crosscheck"]["pass"].get<bool>());
  const auto no = run_cli({"envelope", data("m2c.json")});
  EXPECT_EQ(no.code, 1);
  EXPECT_FALSE(no.json()["certificate"]["exists"].get<bool>());
  EXPECT_NE(no.json()["certificate"]["reason"].get<std::string>().find("not abelian"), std::string::npos);
}

TEST(Cli, Compare) {
  const auto r = run_cli({"compare", data("m2cc.json"), data("m2cc_covers.json")});
  EXPECT_EQ(r.code, 0);
  const auto j = r.json();
  EXPECT_EQ(j["dim_large"], 6);
  EXPECT_EQ(j["dim_small"], 5);
  EXPECT_TRUE(j["surjective"].get<bool>());
  EXPECT_EQ(run_cli({"compare", data("m2cc.json")}).code, 2);
}

TEST(Cli, ReportsAreDeterministicAndTagged) {
  for (const auto& args : std::vector<std::vector<std::string>>{{"envelope", data("m3d3.json")},
                                                               {"weyl", data("m2d2.json"), "--word-bound", "3"},
                                                               {"cstar", data("k4_ns.json"), "--tolerance", "1e-10"}}) {
    const auto a = run_cli(args), b = run_cli(args);
    EXPECT_EQ(a.out, b.out);
    const auto j = a.json();
    EXPECT_EQ(j["schema"], "cartankit/v1");
    EXPECT_EQ(j["version"], cli::kVersion);
    EXPECT_TRUE(j.contains("tolerance"));
    EXPECT_TRUE(j.contains("word_bound"));
  }
  EXPECT_EQ(run_cli({"weyl", data("m2d2.json"), "--word-bound", "3"}).json()["word_bound"], 3);
  EXPECT_EQ(run_cli({"cstar", data("k4_ns.json"), "--tolerance", "1e-10"}).json()["tolerance"], 1e-10);
}

TEST(Cli, OptionRanges) {
  EXPECT_EQ(run_cli({"weyl", data("m2d2.json"), "--word-bound", "9"}).code, 2);
  EXPECT_EQ(run_cli({"weyl", data("m2d2.json"), "--word-bound", "0"}).code, 2);
  EXPECT_EQ(run_cli({"weyl", data("m2d2.json"), "--tolerance", "1e-3"}).code, 2);
  EXPECT_EQ(run_cli({"weyl", data("m2d2.json"), "--format", "xml"}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(Cli, TextIsARenderingOfJson) {
  const auto j = run_cli({"cstar", data("pair2.json")});
  const auto t = run_cli({"cstar", data("pair2.json"), "--format", "text"});
  EXPECT_EQ(t.code, 0);
  EXPECT_NE(t.out.find("block_structure: [2]"), std::string::npos);
  EXPECT_NE(t.out.find("cartan.masa: true"), std::string::npos);
  std::ostringstream rendered;
  io::render_text(j.json(), rendered);
  EXPECT_EQ(rendered.str(), t.out);
}
