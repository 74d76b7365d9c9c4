#include <doctest.h>

#include "wplab/config.hpp"
#include "wplab/report.hpp"

using namespace wplab;

TEST_CASE("minimal document takes the defaults") {
  RunConfig c = parse_config("schema = 1\n");
  CHECK(c.surface.kind == SurfaceKind::PuncturedTorus);
  CHECK(c.checks.size() == 9);
  CHECK(config_hash(c) == config_hash(RunConfig{}));
}

TEST_CASE("sections and keys") {
  RunConfig c = parse_config(R"(
schema = 1
seed = 11
[surface]
kind = "collar"
ell = 0.25
resolution = 128
[point]
t = [0.01, -0.02]
[scaling]
family = "torus"
values = [2.0, 4.0, 8.0]
)");
  CHECK(c.seed == 11);
  CHECK(c.surface.kind == SurfaceKind::Collar);
  CHECK(c.surface.params.ell == 0.25);
  REQUIRE(c.point.size() == 1);
  CHECK(c.point[0] == cplx(0.01, -0.02));
  CHECK(c.scaling.family == "torus");
}

TEST_CASE("malformed documents are rejected") {
  CHECK_THROWS_AS(parse_config(""), ConfigError);                                    // no schema
  CHECK_THROWS_AS(parse_config("schema = 2\n"), ConfigError);                        // wrong version
  CHECK_THROWS_AS(parse_config("schema = 1\nfoo = 1\n"), ConfigError);               // unknown key
  CHECK_THROWS_AS(parse_config("schema = 1\n[solver]\nframe_tl = 1e-9\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("schema = 1\n[solver]\nframe_tol = -1.0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("schema = 1\n[surface]\nresolution = 96\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("schema = 1\n[surface]\nresolution = 2048\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("schema = 1\n[surface]\nkind = \"sphere\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("schema = 1\n[surface]\nresolution = \"64\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("schema = = 1\n"), ConfigError);
}

TEST_CASE("overrides are validated and hashed") {
  RunConfig c = parse_config("schema = 1\n");
  const std::string before = config_hash(c);
  Overrides o;
  o.threads = 3;
  o.out = "elsewhere";
  apply_overrides(c, o);
  CHECK(config_hash(c) == before);  // output location and threads do not change results
  o.seed = 99;
  apply_overrides(c, o);
  CHECK(config_hash(c) != before);
  Overrides bad;
  bad.resolution = 100;
  CHECK_THROWS_AS(apply_overrides(c, bad), ConfigError);
}

TEST_CASE("CSV and JSON emission") {
  Table t{"x", {"a", "b"}, {{0.1, 1e-300}, {2.0, -3.5}}};
  CHECK(csv_text(t) == "a,b\n0.10000000000000001,1e-300\n2,-3.5\n");
  CheckResult r;
  r.id = 1;
  r.name = "demo";
  r.metrics.push_back({"nan metric", std::nan(""), 1.0, "<", 0.0});
  Json j = to_json(r);
  CHECK(j["pass"] == false);
  CHECK(j["metrics"][0]["value"] == "nan");
}
