#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "reebldp/errors.hpp"
#include "reebldp_cli/cli.hpp"

using namespace reebldp;
using nlohmann::json;

namespace {

const std::string kData = REEBLDP_DATA_DIR;

struct Result {
  int code = 0;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "reeb_ldp");
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("reebldp_cli_" + name);
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("graph export of the double well") {
  const Result r = run({"graph", "--config", kData + "/doublewell.json", "export", "--grid", "256"});
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["vertices"].size() == 3);
  CHECK(doc["edges"].size() == 3);
  CHECK(doc["manifest"]["digest"].get<std::string>().size() == 16);
  CHECK(doc["manifest"]["command"] == "graph export");
}

TEST_CASE("coeffs of the harmonic edge") {
  const Result r = run({"coeffs", "--config", kData + "/harmonic.json", "--edge", "0", "--grid", "256"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("# manifest ", 0) == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() > 10);
  CHECK(rows[0] == std::vector<std::string>{"edge_id", "h", "T", "B2"});
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double h = std::stod(rows[k][1]), b2 = std::stod(rows[k][3]);
    CHECK(b2 / h >= 2.0 - 1e-5);
    CHECK(b2 / h <= 2.0 + 1e-5);
  }
  // values round-trip: 17 significant digits
  const double t = std::stod(rows[5][2]);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", t);
  CHECK(rows[5][2] == buf);
}

TEST_CASE("configuration errors exit with 2") {
  CHECK(run({"coeffs", "--config", "/nonexistent/system.json"}).code == 2);
  const auto bad = temp_file("bad.json");
  std::ofstream(bad) << "{\"hamiltonian\": ";
  CHECK(run({"analyze", "--config", bad.string()}).code == 2);
  CHECK(run({"coeffs", "--config", kData + "/harmonic.json", "--bogus"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"simulate", "--config", kData + "/harmonic.json", "--x0", "1,zz"}).code == 2);
  const Result missing = run({"action", "minimize", "--config", kData + "/harmonic.json"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("ConfigError") != std::string::npos);
}

TEST_CASE("module errors exit with 1") {
  const Result r = run({"simulate", "--config", kData + "/harmonic.json", "--x0", "1,0", "--dt", "0.5",
                        "--grid", "128"});
  CHECK(r.code == 1);
  CHECK(r.err.find("StepTooLarge") != std::string::npos);
}

TEST_CASE("every subcommand has help and a schema") {
  const std::vector<std::vector<std::string>> cmds = {
      {"analyze"},         {"graph", "export"}, {"coeffs"},         {"simulate"},      {"action", "eval"},
      {"action", "minimize"}, {"ldp", "verify"}, {"oracle", "brownian"}, {"oracle", "escape"}, {"oracle", "drift"},
      {"oracle", "transit"}};
  for (const auto& c : cmds) {
    auto help = c;
    help.push_back("--help");
    const Result h = run(help);
    CHECK(h.code == 0);
    CHECK(h.out.find("--") != std::string::npos);
    auto schema = c;
    schema.push_back("--schema");
    const Result s = run(schema);
    REQUIRE(s.code == 0);
    const json doc = json::parse(s.out);
    CHECK(doc.contains("$schema"));
  }
  CHECK(run({"simulate", "--help"}).out.find("--epsilon") != std::string::npos);
  CHECK(run({"ldp", "verify", "--help"}).out.find("--samples") != std::string::npos);
}

TEST_CASE("outputs are deterministic and cite the manifest") {
  const std::vector<std::string> sim = {"simulate", "--config", kData + "/harmonic.json", "--grid", "128", "--x0",
                                        "1,0", "--epsilon", "0.1", "--dt", "1e-3", "--seed", "5"};
  const Result a = run(sim);
  auto threaded = sim;
  threaded.insert(threaded.end(), {"--threads", "3"});
  const Result b = run(threaded);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  auto reseeded = sim;
  reseeded[reseeded.size() - 1] = "6";
  const Result c = run(reseeded);
  CHECK(c.out != a.out);
  CHECK(c.out.substr(0, 27) != a.out.substr(0, 27));

  const auto out = temp_file("sim.csv");
  const auto man = temp_file("sim.manifest.json");
  auto to_file = sim;
  to_file.insert(to_file.end(), {"--out", out.string(), "--manifest", man.string()});
  REQUIRE(run(to_file).code == 0);
  std::stringstream written;
  written << std::ifstream(out).rdbuf();
  CHECK(written.str() == a.out);
  const json m = json::parse(std::ifstream(man));
  CHECK(m.contains("wall_clock"));
  CHECK(a.out.find("# manifest " + m["digest"].get<std::string>()) == 0);
  CHECK(m["outputs"][0] == out.string());
}

TEST_CASE("action minimize and eval round trip") {
  const auto path = temp_file("min.csv");
  const Result r = run({"action", "minimize", "--config", kData + "/harmonic.json", "--grid", "256", "--from", "0:1",
                        "--to", "0:2", "--horizon", "1", "--path-out", path.string()});
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["s"].get<double>() == doctest::Approx(std::pow(std::sqrt(2.0) - 1.0, 2)).epsilon(1e-6));
  std::stringstream csv;
  csv << std::ifstream(path).rdbuf();
  CHECK(csv.str().find("# manifest " + doc["manifest"]["digest"].get<std::string>()) == 0);
  const Result e = run({"action", "eval", "--config", kData + "/harmonic.json", "--grid", "256", "--path",
                        path.string()});
  REQUIRE(e.code == 0);
  CHECK(json::parse(e.out)["value"].get<double>() == doctest::Approx(doc["action"].get<double>()).epsilon(1e-12));
}

TEST_CASE("brownian reflection oracle from the command line") {
  const Result r = run({"oracle", "brownian", "--case", "reflection", "--paths", "50000", "--seed", "2"});
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["rel_error"].get<double>() < 2e-2);
}

TEST_CASE("thread count from the environment does not change outputs") {
  const std::vector<std::string> cmd = {"oracle", "brownian", "--paths", "20000"};
  const Result a = run(cmd);
  ::setenv("REEB_LDP_THREADS", "3", 1);
  const Result b = run(cmd);
  ::unsetenv("REEB_LDP_THREADS");
  CHECK(a.out == b.out);
}
