#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mixedphase/cli.hpp"
#include "mixedphase/scenarios.hpp"
#include "oracles.hpp"

using namespace mixedphase;
using namespace mixedphase::cli;
using std::numbers::pi;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cell;
  std::stringstream ss(s);
  while (std::getline(ss, cell, sep)) parts.push_back(cell);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

// CSV rows keyed by header name. Cells are never quoted for numeric output.
struct Table {
  std::vector<std::string> header;
  std::vector<std::map<std::string, std::string>> rows;
};

Table parse_csv(const std::string& text) {
  Table t;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (t.header.empty()) {
      t.header = cells;
      continue;
    }
    std::map<std::string, std::string> row;
    for (std::size_t k = 0; k < t.header.size() && k < cells.size(); ++k) row[t.header[k]] = cells[k];
    t.rows.push_back(row);
  }
  return t;
}

std::vector<nlohmann::json> parse_lines(const std::string& text) {
  std::vector<nlohmann::json> v;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty()) v.push_back(nlohmann::json::parse(line));
  return v;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "mixedphase_cli_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::filesystem::path write_file(const std::string& name, const std::string& text) {
  const auto p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

std::string config_field(const std::string& json) {
  try {
    parse_config(json);
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    return what.substr(0, what.find(':'));
  }
  return "";
}

}  // namespace

TEST_CASE("parse_complex") {
  CHECK(parse_complex("1.5") == Complex(1.5, 0));
  CHECK(parse_complex("0.5+2i") == Complex(0.5, 2));
  CHECK(parse_complex("-1e-3-4.5i") == Complex(-1e-3, -4.5));
  CHECK(parse_complex("2e+1+1e-2i") == Complex(20, 0.01));
  CHECK(parse_complex("i") == Complex(0, 1));
  CHECK(parse_complex("-i") == Complex(0, -1));
  CHECK(parse_complex(" 3 - i ") == Complex(3, -1));
  CHECK_THROWS_AS(parse_complex("abc"), ConfigError);
  CHECK_THROWS_AS(parse_complex(""), ConfigError);
  CHECK_THROWS_AS(parse_complex("1+xi"), ConfigError);
}

TEST_CASE("config errors name the offending field") {
  CHECK(config_field(R"({"bogus": 1})") == "bogus");
  CHECK(config_field(R"({"scenario": {"name": "spin-half", "q": 1}})") == "scenario.q");
  CHECK(config_field(R"({"scenario": {"name": "nope"}})") == "scenario.name");
  CHECK(config_field(R"({"path": {"generator": [[1,0],[0,-1]]}})") == "path.tau");
  CHECK(config_field(R"({"path": {"generator": [[1,0],[0,-1]], "tau": -1}})") == "path.tau");
  CHECK(config_field(R"({"steps": 1})") == "steps");
  CHECK(config_field(R"({"gauge": {"kind": "twist"}})") == "gauge.kind");
  CHECK(config_field(R"({"tolerances": {"pass": -1}})") == "tolerances.pass");
  CHECK(config_field(R"({"output": {"format": "xml"}})") == "output.format");
  CHECK(config_field(R"({"scenario": {"name": "su3"}, "state": [[1]]})") == "state");
  CHECK(config_field(R"({"path": {"table": "/nonexistent/table.csv"}})") == "path.table");
  CHECK(config_field(R"({"sweep": {"axes": [{"name": "r", "start": 0, "count": 0}]}})") == "sweep.axes[0].count");
  CHECK(config_field(R"({"state": [1, 0, 0]})") == "state");
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
}

TEST_CASE("config matrices accept rows, flat arrays and complex strings") {
  const RunConfig a = parse_config(R"({"state": [[0.5, "0.1-0.2i"], ["0.1+0.2i", 0.5]],
                                       "path": {"generator": [0.5, 0, 0, -0.5], "tau": 6.283185307179586}})");
  REQUIRE(a.state);
  CHECK((*a.state)(0, 1) == Complex(0.1, -0.2));
  REQUIRE(a.path);
  CHECK((a.path->end() + ComplexMatrix::Identity(2, 2)).norm() < 1e-12);
  CHECK(a.path_source == "generator");
}

TEST_CASE("parse_axis") {
  const SweepAxis ax = parse_axis("theta:0.1:3.0:30");
  CHECK(ax.name == "theta");
  CHECK(ax.count == 30);
  CHECK(ax.value(0) == 0.1);
  CHECK(ax.value(29) == doctest::Approx(3.0));
  CHECK(parse_axis("r:0.5:0.5:1").value(0) == 0.5);
  CHECK_THROWS_AS(parse_axis("theta:0:1"), ConfigError);
  CHECK_THROWS_AS(parse_axis("theta:a:1:3"), ConfigError);
  CHECK_THROWS_AS(parse_axis("theta:0:1:0"), ConfigError);
}

TEST_CASE("compute on the spin-1/2 scenario") {
  const Result r = invoke({"compute", "spin-half", "--r", "0.5", "--theta", "1.0471975511965976"});
  REQUIRE(r.code == 0);
  const Table t = parse_csv(r.out);
  REQUIRE(t.rows.size() == 1);
  CHECK(std::find(t.header.begin(), t.header.end(), "gamma_geometric[rad]") != t.header.end());
  CHECK(std::find(t.header.begin(), t.header.end(), "transport_residual[1/t]") != t.header.end());
  const double g = std::stod(t.rows[0].at("gamma_geometric[rad]"));
  CHECK(oracle::circle(g, -pi / 2) < 1e-9);
  CHECK(t.rows[0].at("cyclic") == "true");
  CHECK(std::stod(t.rows[0].at("convergence_estimate[rad]")) < 1e-9);

  const Result rec = invoke({"compute", "--format", "records", "spin-half"});
  REQUIRE(rec.code == 0);
  const auto lines = parse_lines(rec.out);
  REQUIRE(lines.size() == 1);
  CHECK(oracle::circle(lines[0]["gamma_geometric"].get<double>(), -pi / 2) < 1e-9);
}

TEST_CASE("compute with an explicit state and identity path") {
  const auto cfg = write_file("identity.json", R"({
    "state": [[0.7, 0], [0, 0.3]],
    "path": {"generator": [[0, 0], [0, 0]], "tau": 1.0},
    "steps": 16
  })");
  const Result r = invoke({"compute", "--config", cfg.string()});
  REQUIRE(r.code == 0);
  const Table t = parse_csv(r.out);
  REQUIRE(t.rows.size() == 1);
  CHECK(std::stod(t.rows[0].at("gamma_total[rad]")) == 0.0);
  CHECK(std::stod(t.rows[0].at("gamma_dynamical[rad]")) == 0.0);
  CHECK(std::stod(t.rows[0].at("gamma_geometric[rad]")) == 0.0);
}

TEST_CASE("compute from a sampled table uses the table grid") {
  std::ostringstream table;
  table << "# spin-1/2 precession\nt,e00,e01,e10,e11\n";
  const std::size_t m = 2048;
  for (std::size_t j = 0; j <= m; ++j) {
    const double t = 2 * pi * static_cast<double>(j) / m;
    char line[256];
    std::snprintf(line, sizeof line, "%.17g,%.17g%+.17gi,0,0,%.17g%+.17gi\n", t, std::cos(t / 2),
                  -std::sin(t / 2), std::cos(t / 2), std::sin(t / 2));
    table << (j == 0 ? "0,1,0,0,1\n" : line);
  }
  write_file("precession.csv", table.str());
  const auto cfg = write_file("table.json", R"({
    "state": [[0.625, 0.21650635094610965], [0.21650635094610965, 0.375]],
    "path": {"table": "precession.csv"}
  })");
  const Result r = invoke({"compute", "--config", cfg.string()});
  REQUIRE(r.code == 0);
  const Table t = parse_csv(r.out);
  CHECK(t.rows[0].at("steps[1]") == "2048");
  CHECK(oracle::circle(std::stod(t.rows[0].at("gamma_geometric[rad]")), -pi / 2) < 1e-5);
}

TEST_CASE("the lambda1 gauge leaves the three-level phase unchanged") {
  const Result a = invoke({"compute", "su3", "--omega", "0.3", "--a", "1", "--b", "1"});
  const Result b = invoke({"compute", "su3", "--omega", "0.3", "--a", "1", "--b", "1", "--gauge-d", "0.7"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  const double ga = std::stod(parse_csv(a.out).rows[0].at("gamma_geometric[rad]"));
  const double gb = std::stod(parse_csv(b.out).rows[0].at("gamma_geometric[rad]"));
  CHECK(oracle::circle(ga, gb) < 1e-6);
  CHECK(oracle::circle(ga, su3_closed_reduction(0.3, 1, 1)) < 1e-6);
}

TEST_CASE("sweep over theta matches the closed form") {
  const Result r = invoke({"sweep", "spin-half", "--r", "0.5", "--axis", "theta:0.02:3.12:64"});
  REQUIRE(r.code == 0);
  const Table t = parse_csv(r.out);
  REQUIRE(t.rows.size() == 64);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double th = 0.02 + (3.12 - 0.02) * static_cast<double>(i) / 63.0;
    const double g = std::stod(t.rows[i].at("gamma_geometric[rad]"));
    CHECK(oracle::circle(g, spin_half_closed_form(0.5, th).gamma_bracket) < 1e-6);
    CHECK(t.rows[i].at("error").empty());
  }
}

TEST_CASE("sweep edge cases") {
  const Result one = invoke({"sweep", "spin-half", "--axis", "r:0.3:0.9:1"});
  REQUIRE(one.code == 0);
  CHECK(parse_csv(one.out).rows.size() == 1);

  // r = 0 is out of range: the row is kept with an error message.
  const Result bad = invoke({"sweep", "spin-half", "--axis", "r:0:1:3"});
  REQUIRE(bad.code == 0);
  const Table t = parse_csv(bad.out);
  REQUIRE(t.rows.size() == 3);
  CHECK_FALSE(t.rows[0].at("error").empty());
  CHECK(t.rows[1].at("error").empty());
  CHECK(t.rows[2].at("error").empty());

  const Result two = invoke({"sweep", "su3", "--axis", "a:0.5:1.5:3", "--axis", "b:0.5:1:2"});
  REQUIRE(two.code == 0);
  CHECK(parse_csv(two.out).rows.size() == 6);

  const Result unwrap = invoke({"sweep", "spin-half", "--axis", "theta:0.1:3.0:40", "--unwrap"});
  REQUIRE(unwrap.code == 0);
  const Table u = parse_csv(unwrap.out);
  double prev = std::stod(u.rows[0].at("gamma_geometric_unwrapped[rad]"));
  for (std::size_t i = 1; i < u.rows.size(); ++i) {
    const double cur = std::stod(u.rows[i].at("gamma_geometric_unwrapped[rad]"));
    CHECK(std::abs(cur - prev) < pi);
    CHECK(oracle::circle(cur, std::stod(u.rows[i].at("gamma_geometric[rad]"))) < 1e-12);
    prev = cur;
  }

  CHECK(invoke({"sweep", "spin-half", "--axis", "omega:0.1:0.2:2"}).code == kExitConfig);
}

TEST_CASE("verify") {
  // Fewer gauges than this may not show the naive-subtraction violation.
  const Result r = invoke({"verify", "--trials", "20", "--steps", "2048"});
  CHECK(r.code == 0);
  const auto lines = parse_lines(r.out);
  REQUIRE_FALSE(lines.empty());
  std::map<std::string, int> seen;
  for (const auto& l : lines) {
    seen[l["check"].get<std::string>()]++;
    if (l.contains("pass") && l["pass"].is_boolean()) CHECK_MESSAGE(l["pass"].get<bool>(), l.dump());
  }
  for (const char* c : {"gauge_invariance", "lemma_1a", "lemma_1b", "lemma_2a", "lemma_2b",
                        "naive_subtraction", "parallel_transport", "f_unitarity"})
    CHECK_MESSAGE(seen[c] > 0, c);

  const Result again = invoke({"verify", "--trials", "20", "--steps", "2048"});
  CHECK(again.out == r.out);

  const Result csv = invoke({"verify", "spin-half", "--trials", "1", "--steps", "256", "--format", "csv"});
  const Table t = parse_csv(csv.out);
  REQUIRE_FALSE(t.header.empty());
  CHECK(t.header.front() == "check");
}

TEST_CASE("exit codes") {
  CHECK(invoke({}).code == kExitConfig);
  CHECK(invoke({"frobnicate"}).code == kExitConfig);
  CHECK(invoke({"compute", "--config", "/nonexistent.json"}).code == kExitConfig);
  CHECK(invoke({"compute", "spin-half", "--r", "2"}).code == kExitConfig);
  CHECK(invoke({"compute", "--steps", "1", "spin-half"}).code == kExitConfig);
  CHECK(invoke({"compute", "--help"}).code == kExitOk);

  const auto cfg = write_file("undefined.json", R"({
    "state": [[0.75, 0], [0, 0.25]],
    "path": {"generator": [[0, 0.5], [0.5, 0]], "tau": 3.141592653589793}
  })");
  const Result u = invoke({"compute", "--config", cfg.string()});
  CHECK(u.code == kExitUndefinedPhase);
  CHECK(u.err.find("UndefinedPhase") != std::string::npos);
}

TEST_CASE("output file") {
  const auto target = scratch("compute_out.csv");
  std::filesystem::remove(target);
  const Result r = invoke({"compute", "spin-half", "--out", target.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(target);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(parse_csv(ss.str()).rows.size() == 1);
}

TEST_CASE("scenario list") {
  const Result r = invoke({"scenario", "list"});
  REQUIRE(r.code == 0);
  const Table t = parse_csv(r.out);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].at("name") == "spin-half");
  CHECK(t.rows[1].at("parameters") == "omega a b gauge_d");
  const Result rec = invoke({"scenario", "list", "--format", "records"});
  CHECK(parse_lines(rec.out).size() == 2);
}

TEST_CASE("tool binary") {
  const std::string out = scratch("tool_list.csv").string();
  const std::string cmd = std::string(MIXEDPHASE_TOOL_PATH) + " scenario list > " + out;
  CHECK(std::system(cmd.c_str()) == 0);
  const std::string bad = std::string(MIXEDPHASE_TOOL_PATH) + " compute spin-half --r 5 2>/dev/null";
  const int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == kExitConfig);
}
