#include <algorithm>
#include <set>

#include "doctest.h"
#include "driftlab/errors.hpp"
#include "driftlab/experiment.hpp"
#include "support.hpp"

using namespace driftlab;
using nlohmann::json;

namespace {

// Shrinks a demo so the test stays quick while exercising the same code.
json small_additive() {
  json doc = find_demo("additive").config;
  doc["trajectories"] = 300;
  doc["horizon"] = 50;
  return doc;
}

std::map<std::string, std::string> csv_bytes(const RunManifest& m) {
  std::map<std::string, std::string> out;
  for (const auto& f : m.outputs) {
    if (f.size() > 4 && f.substr(f.size() - 4) == ".csv") {
      out[f] = testing::slurp(std::filesystem::path(m.output_dir) / f);
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("demo catalogue") {
  const auto& demos = list_demos();
  CHECK(demos.size() >= 7);
  std::set<std::string> names;
  for (const auto& d : demos) {
    names.insert(d.name);
    CHECK_FALSE(d.description.empty());
    CHECK(d.config.at("name") == d.name);
  }
  CHECK(names.size() == demos.size());
  for (const char* required : {"additive", "counterexample", "rot-switch", "cubic-drift",
                               "euler-maruyama-ou", "control-rotation", "exponent-table"}) {
    CHECK(names.count(required) == 1);
  }
  CHECK_THROWS_AS(find_demo("no-such-demo"), Error);
}

TEST_CASE("every shipped demo validates") {
  for (const auto& d : list_demos()) {
    INFO(d.name);
    CHECK_NOTHROW(parse_config(d.config));
  }
}

TEST_CASE("missing seed is a ConfigInvalid naming the field") {
  json doc = small_additive();
  doc.erase("seed");
  try {
    parse_config(doc);
    FAIL("expected ConfigInvalid");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigInvalid);
    CHECK(std::string(e.what()).find("seed") != std::string::npos);
  }
  const auto dir = testing::scratch_dir("missing-seed");
  RunOptions opt;
  opt.output_dir = dir.string();
  const RunManifest m = run_document(doc, opt);
  CHECK(m.exit_code() == 1);
  CHECK(m.error.find("ConfigInvalid: seed") != std::string::npos);
  const std::string manifest = testing::slurp(dir / "manifest.txt");
  CHECK(manifest.find("status = error") != std::string::npos);
  CHECK(manifest.find("exit_code = 1") != std::string::npos);
}

TEST_CASE("field paths in validation errors") {
  json doc = small_additive();
  doc["model"]["noise"]["family"] = "cauchy";
  try {
    parse_config(doc);
    FAIL("expected ConfigInvalid");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("model.noise.family") != std::string::npos);
  }
  json bad_kind = small_additive();
  bad_kind["kind"] = "nonsense";
  CHECK_THROWS_AS(parse_config(bad_kind), Error);
  json bad_seed = small_additive();
  bad_seed["seed"] = -4;
  CHECK_THROWS_AS(parse_config(bad_seed), Error);
  json control = find_demo("control-rotation").config;
  control["plant"]["A"] = json::array({json::array({1, 0})});
  CHECK_THROWS_AS(parse_config(control), Error);
}

TEST_CASE("exit codes: pass, criterion failure, module error") {
  const auto dir = testing::scratch_dir("exit-codes");
  RunOptions opt;
  opt.output_dir = (dir / "pass").string();
  CHECK(run_document(small_additive(), opt).exit_code() == 0);

  json wrong = small_additive();
  wrong["checks"]["terminal_mean"]["target"] = 3.0;
  opt.output_dir = (dir / "fail").string();
  const RunManifest failed = run_document(wrong, opt);
  CHECK(failed.exit_code() == 2);
  CHECK(failed.error.empty());
  CHECK(testing::slurp(dir / "fail" / "manifest.txt").find("status = fail") != std::string::npos);

  // Reachability is checked when the plan runs, not as a schema error.
  json unreachable = find_demo("control-rotation").config;
  unreachable["plant"]["k"] = 1;
  opt.output_dir = (dir / "error").string();
  const RunManifest errored = run_document(unreachable, opt);
  CHECK(errored.exit_code() == 1);
  CHECK(errored.error.find("NotReachable") != std::string::npos);
}

TEST_CASE("reruns and worker counts give byte-identical CSVs") {
  const auto dir = testing::scratch_dir("rerun");
  std::vector<json> docs{small_additive(), find_demo("two-state").config,
                         find_demo("exponent-table").config};
  json sw = find_demo("rot-switch").config;
  sw["horizon"] = 200;
  sw["trajectories"] = 40;
  sw["path_horizon"] = 50;
  sw["checks"].erase("switch_drift");
  docs.push_back(sw);
  json ctl = find_demo("control-rotation").config;
  ctl["horizon"] = 200;
  ctl["trajectories"] = 40;
  ctl["checks"] = json::object();
  docs.push_back(ctl);
  for (const auto& doc : docs) {
    INFO(doc.at("name").get<std::string>());
    RunOptions a, b, c;
    a.output_dir = (dir / "a").string();
    a.workers = 1;
    b.output_dir = (dir / "b").string();
    b.workers = 1;
    c.output_dir = (dir / "c").string();
    c.workers = 4;
    const auto ma = run_document(doc, a);
    const auto mb = run_document(doc, b);
    const auto mc = run_document(doc, c);
    REQUIRE(ma.error.empty());
    const auto ba = csv_bytes(ma);
    CHECK_FALSE(ba.empty());
    CHECK(ba == csv_bytes(mb));
    CHECK(ba == csv_bytes(mc));
    CHECK(ma.config_hash == mb.config_hash);
  }
}

TEST_CASE("manifest layout") {
  RunManifest m;
  m.name = "x";
  m.kind = "ensemble";
  m.version = "1.2.3";
  m.config_hash = "00";
  m.seed = 5;
  m.output_dir = "out";
  m.outputs = {"moments.csv"};
  m.criteria = {{"a", true, "ok"}, {"b", false, "bad"}};
  std::ostringstream out;
  write_manifest(m, out);
  const std::string s = out.str();
  CHECK(s.find("status = fail\nexit_code = 2\n") != std::string::npos);
  CHECK(s.find("output = moments.csv\n") != std::string::npos);
  CHECK(s.find("criterion.a = pass | ok\n") != std::string::npos);
  CHECK(s.find("criterion.b = fail | bad\n") != std::string::npos);
}

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("finite chain loaded from CSV files next to the config") {
  const auto dir = testing::scratch_dir("chain-csv");
  {
    std::ofstream s(dir / "states.csv");
    s << "index,V,x0\n0,0,0\n1,1,1\n";
    std::ofstream p(dir / "matrix.csv");
    p << "0.9,0.1\n0.2,0.8\n";
  }
  json doc = find_demo("two-state").config;
  doc["model"] = {{"type", "finite"}, {"states_csv", "states.csv"}, {"matrix_csv", "matrix.csv"}};
  RunOptions opt;
  opt.output_dir = (dir / "out").string();
  const RunManifest m = run_document(doc, opt, dir);
  CHECK(m.error.empty());
  CHECK(m.exit_code() == 0);
}

}  // TEST_SUITE
