#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <doctest.h>

#include "complab/report.hpp"

using namespace complab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "complab_test_report" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

JobConfig gallery_entry(const std::string& name) {
  for (const JobConfig& c : gallery_configs())
    if (c.name == name) return c;
  FAIL("missing gallery entry " << name);
  return {};
}

}  // namespace

TEST_CASE("coefficient JSON format") {
  const TrigPoly f(0.5, {-0.5, 0.25}, {1.0});
  const json j = trig_to_json(f);
  CHECK(j.at("const") == 0.5);
  CHECK(j.at("cos").size() == 2);
  CHECK(trig_from_json(j) == f);
  CHECK(trig_from_json(json::parse(R"({"sin": [1]})")) == TrigPoly::sine(1));
  CHECK_THROWS_AS(trig_from_json(json::parse(R"({"tan": [1]})")), ConfigError);
}

TEST_CASE("config parsing and validation") {
  const JobConfig c = parse_config(json::parse(R"({
    "kind": "sturm", "name": "t", "a": {"sin": [1]}, "b": {"const": 1},
    "controls": {"t_max": 50, "series_order": 16}, "pipelines": ["classify", "flow"], "seed": 4})"));
  CHECK(c.kind == JobKind::Sturm);
  CHECK(c.controls.t_max == 50.0);
  CHECK(c.controls.series_order == 16);
  CHECK(c.controls.seed == 4u);
  CHECK(c.pipelines.size() == 2);
  CHECK(parse_config(config_to_json(c)) == c);

  CHECK_THROWS_AS(parse_config(json::parse(R"({"kind": "sturm"})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"kind": "nope", "a": 1})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"kind": "sturm", "a": 1, "typo": 2})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"kind": "sturm", "a": 1, "controls": {"t_max": -1}})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"kind": "sturm", "a": 1, "controls": {"series_order": 2}})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"kind": "lorentz", "a": 1})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"kind": "lorentz", "model": {"variant": "Torus"}})")), ConfigError);
}

TEST_CASE("gallery configs round trip") {
  const auto configs = gallery_configs();
  REQUIRE(configs.size() == 9);
  for (const JobConfig& c : configs) CHECK(parse_config(config_to_json(c)) == c);
  const fs::path dir = scratch("gallery");
  const auto paths = gallery(dir);
  REQUIRE(paths.size() == 9);
  for (const fs::path& p : paths) CHECK(fs::exists(p));
  const JobConfig e1 = load_config(dir / "E1.json");
  CHECK(e1.a == TrigPoly::sine(1));
  CHECK(e1.b == TrigPoly::constant_fn(1.0));
  const JobConfig e2 = load_config(dir / "E2.json");
  CHECK(e2.a == TrigPoly(0.5, {-0.5}, {}));
  CHECK(e2.b.is_zero());
  CHECK(load_config(dir / "CliftonPohl.json").model->kind == LorentzKind::CliftonPohl);
}

TEST_CASE("E1 full run") {
  const fs::path dir = scratch("e1");
  const RunOutcome out = run(gallery_entry("E1"), dir);
  CHECK(out.exit_code == 0);
  const JobReport& r = out.report;
  REQUIRE(r.classification.has_value());
  CHECK_FALSE(r.classification->classical);
  CHECK_FALSE(r.classification->quantum);
  REQUIRE(r.agreement.has_value());
  CHECK(*r.agreement);
  CHECK(r.errors.empty());
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "trajectories" / "witness.csv"));
  REQUIRE_FALSE(r.series.empty());
  for (const SeriesEvidence& s : r.series) {
    CHECK(fs::exists(dir / s.file));
    const json sj = json::parse(slurp(dir / s.file));
    CHECK(sj.contains("exponent"));
    CHECK(sj.at("coeffs").size() == static_cast<std::size_t>(s.truncation + 1));
  }
  const std::string csv = slurp(dir / "trajectories" / "witness.csv");
  CHECK(csv.rfind("t,x,xi,p\n", 0) == 0);

  // Citations on every verdict block.
  CHECK_FALSE(r.classification_citation.empty());
  for (const ZeroVerdict& v : r.classification->verdicts) CHECK_FALSE(v.reason.empty());
  CHECK_FALSE(r.flow->citation.empty());
  CHECK_FALSE(r.deficiency->citation.empty());

  // Round trip through the written file.
  const JobReport parsed = report_from_json(json::parse(slurp(dir / "report.json")));
  CHECK(parsed == r);
}

TEST_CASE("determinism") {
  const fs::path d1 = scratch("det1"), d2 = scratch("det2");
  run(gallery_entry("E4"), d1);
  run(gallery_entry("E4"), d2);
  CHECK(slurp(d1 / "report.json") == slurp(d2 / "report.json"));
  CHECK(slurp(d1 / "trajectories" / "probe.csv") == slurp(d2 / "trajectories" / "probe.csv"));
}

TEST_CASE("report round trip with non-finite numbers") {
  JobReport r;
  r.name = "x";
  r.kind = "sturm";
  r.series.push_back({0.0, "Right", "u1", 1.0, 0.0, false, 20, std::numeric_limits<double>::infinity(), 0.3, "f"});
  r.errors.push_back({"flow", "NoBlowupDetected", "m"});
  r.agreement = false;
  r.degree1 = degree1_esa();
  CHECK(report_from_json(json::parse(report_to_json(r).dump())) == r);
}

TEST_CASE("degree1 job") {
  const fs::path dir = scratch("deg1");
  JobConfig c;
  c.kind = JobKind::Degree1;
  c.name = "deg1";
  const RunOutcome out = run(c, dir);
  CHECK(out.exit_code == 0);
  REQUIRE(out.report.degree1.has_value());
  CHECK(out.report.degree1->esa);
  CHECK_FALSE(out.report.degree1->rule.empty());
}

TEST_CASE("lorentz jobs") {
  const fs::path dir = scratch("cp");
  const RunOutcome cp = run(gallery_entry("CliftonPohl"), dir);
  CHECK(cp.exit_code == 0);
  REQUIRE(cp.report.lorentz.has_value());
  REQUIRE(cp.report.lorentz->geodesic.has_value());
  CHECK(cp.report.lorentz->geodesic->status == "Blowup");
  CHECK(*cp.report.lorentz->geodesic->escape_time == doctest::Approx(1.0).epsilon(0.01));
  REQUIRE(cp.report.lorentz->conformal.has_value());
  CHECK(cp.report.lorentz->conformal->same_verdict);
  CHECK(slurp(dir / "trajectories" / "geodesic.csv").rfind("t,x,y,xi,eta,h\n", 0) == 0);
  CHECK(report_from_json(json::parse(slurp(dir / "report.json"))) == cp.report);

  const RunOutcome nf = run(gallery_entry("NormalForm"), scratch("nf"));
  CHECK(nf.exit_code == 0);
  REQUIRE(nf.report.lorentz->esa.has_value());
  CHECK_FALSE(*nf.report.lorentz->esa);
  REQUIRE(nf.report.deficiency.has_value());
  CHECK_FALSE(nf.report.deficiency->esa);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("codes");
  {
    std::ofstream(dir / "bad.json") << "{ not json";
  }
  CHECK(run_file(dir / "bad.json", dir / "bad_out").exit_code == 2);
  CHECK(fs::exists(dir / "bad_out" / "report.json"));
  CHECK(run_file(dir / "missing.json", dir / "missing_out").exit_code == 2);

  // sin^14(pi x) has a zero beyond the supported order.
  JobConfig flat;
  flat.name = "flat";
  flat.a = TrigPoly(0.5, {-0.5}, {}).pow(7);
  flat.b = TrigPoly::constant_fn(1.0);
  const RunOutcome f = run(flat, dir / "flat_out");
  CHECK(f.exit_code == 3);
  REQUIRE_FALSE(f.report.errors.empty());
  CHECK(f.report.errors.front().code == "OrderTooHigh");
}

TEST_CASE("pipeline overrides") {
  const fs::path dir = scratch("override");
  gallery(dir);
  const RunOutcome r =
      run_file(dir / "E2.json", dir / "out", std::set<Pipeline>{Pipeline::Classify},
               [](JobConfig& c) { c.controls.series_order = 12; });
  CHECK(r.exit_code == 0);
  CHECK(r.report.classification.has_value());
  CHECK_FALSE(r.report.flow.has_value());
  CHECK_FALSE(r.report.deficiency.has_value());
  const RunOutcome bad =
      run_file(dir / "E2.json", dir / "out2", std::nullopt, [](JobConfig& c) { c.controls.t_max = -3.0; });
  CHECK(bad.exit_code == 2);
}
