#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mixedphase/cli.hpp"
#include "mixedphase/scenarios.hpp"

namespace mixedphase::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw ConfigError(field + ": " + msg);
}

bool parse_real(std::string_view s, double& out) {
  if (s.empty()) return false;
  const std::string buf(s);
  char* end = nullptr;
  out = std::strtod(buf.c_str(), &end);
  return end == buf.c_str() + buf.size() && std::isfinite(out);
}

void check_keys(const json& j, const std::string& field, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(field, "expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) fail(field.empty() ? k : field + "." + k, "unknown key");
  }
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(field, "must be finite");
  return v;
}

std::uint64_t unsigned_int(const json& j, const std::string& field) {
  if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<long long>() < 0)) {
    fail(field, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

double positive(const json& j, const std::string& field) {
  const double v = number(j, field);
  if (!(v > 0.0)) fail(field, "must be > 0");
  return v;
}

Complex complex_entry(const json& j, const std::string& field) {
  if (j.is_number()) return Complex(number(j, field), 0.0);
  if (!j.is_string()) fail(field, "expected a number or a \"re+imi\" string");
  try {
    return parse_complex(j.get<std::string>());
  } catch (const ConfigError& e) {
    fail(field, e.what());
  }
}

ComplexMatrix matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) fail(field, "expected a non-empty array");
  std::vector<Complex> flat;
  Eigen::Index n = 0;
  if (j.front().is_array()) {
    n = static_cast<Eigen::Index>(j.size());
    for (std::size_t r = 0; r < j.size(); ++r) {
      const std::string rf = field + "[" + std::to_string(r) + "]";
      if (!j[r].is_array() || j[r].size() != j.size()) fail(rf, "rows must have " + std::to_string(n) + " entries");
      for (std::size_t c = 0; c < j[r].size(); ++c) {
        flat.push_back(complex_entry(j[r][c], rf + "[" + std::to_string(c) + "]"));
      }
    }
  } else {
    n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(j.size()))));
    if (static_cast<std::size_t>(n * n) != j.size()) {
      fail(field, "flat matrix needs N^2 entries, got " + std::to_string(j.size()));
    }
    for (std::size_t k = 0; k < j.size(); ++k) {
      flat.push_back(complex_entry(j[k], field + "[" + std::to_string(k) + "]"));
    }
  }
  ComplexMatrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = flat[static_cast<std::size_t>(r * n + c)];
  return m;
}

template <typename F>
auto wrap_domain(const std::string& field, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    fail(field, e.what());
  }
}

const ScenarioInfo* find_scenario(const std::string& name) {
  static const std::vector<ScenarioInfo> catalog = scenario_catalog();
  for (const auto& s : catalog)
    if (s.name == name) return &s;
  return nullptr;
}

void parse_scenario(const json& j, RunConfig& cfg) {
  if (!j.is_object()) fail("scenario", "expected an object");
  if (!j.contains("name") || !j["name"].is_string()) fail("scenario.name", "required string");
  ScenarioSpec spec;
  spec.name = j["name"].get<std::string>();
  const ScenarioInfo* info = find_scenario(spec.name);
  if (!info) fail("scenario.name", "unknown scenario '" + spec.name + "'");
  for (const auto& [k, v] : j.items()) {
    if (k == "name") continue;
    if (std::find(info->parameters.begin(), info->parameters.end(), k) == info->parameters.end()) {
      fail("scenario." + k, "not a parameter of " + spec.name);
    }
    spec.params[k] = number(v, "scenario." + k);
  }
  cfg.scenario = std::move(spec);
}

void parse_path(const json& j, RunConfig& cfg, const std::filesystem::path& base_dir) {
  check_keys(j, "path", {"generator", "tau", "segments", "table"});
  const int forms = static_cast<int>(j.contains("generator")) + static_cast<int>(j.contains("segments")) +
                    static_cast<int>(j.contains("table"));
  if (forms != 1) fail("path", "give exactly one of generator (+ tau), segments, table");
  if (j.contains("generator")) {
    if (!j.contains("tau")) fail("path.tau", "required with path.generator");
    const ComplexMatrix h = matrix(j["generator"], "path.generator");
    const double tau = positive(j["tau"], "path.tau");
    cfg.path = wrap_domain("path.generator", [&] { return UnitaryPath::constant(h, tau); });
    cfg.path_source = "generator";
  } else if (j.contains("segments")) {
    if (j.contains("tau")) fail("path.tau", "only used with path.generator");
    const json& segs = j["segments"];
    if (!segs.is_array() || segs.empty()) fail("path.segments", "expected a non-empty array");
    std::vector<GeneratorSegment> out;
    for (std::size_t k = 0; k < segs.size(); ++k) {
      const std::string f = "path.segments[" + std::to_string(k) + "]";
      check_keys(segs[k], f, {"generator", "duration"});
      if (!segs[k].contains("generator")) fail(f + ".generator", "required");
      if (!segs[k].contains("duration")) fail(f + ".duration", "required");
      out.push_back({matrix(segs[k]["generator"], f + ".generator"),
                     positive(segs[k]["duration"], f + ".duration")});
    }
    cfg.path = wrap_domain("path.segments", [&] { return UnitaryPath::piecewise(std::move(out)); });
    cfg.path_source = "segments";
  } else {
    if (j.contains("tau")) fail("path.tau", "only used with path.generator");
    if (!j["table"].is_string()) fail("path.table", "expected a file name");
    std::filesystem::path file = j["table"].get<std::string>();
    if (file.is_relative()) file = base_dir / file;
    try {
      cfg.path = load_unitary_table(file);
    } catch (const ConfigError& e) {
      fail("path.table", e.what());
    } catch (const Error& e) {
      fail("path.table", e.what());
    }
    cfg.path_source = j["table"].get<std::string>();
  }
}

void parse_gauge(const json& j, RunConfig& cfg) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    fail("gauge.kind", "required string (lambda1, random or generator)");
  }
  GaugeSpec g;
  g.kind = j["kind"].get<std::string>();
  if (g.kind == "lambda1") {
    check_keys(j, "gauge", {"kind", "d"});
    if (!j.contains("d")) fail("gauge.d", "required for kind lambda1");
    g.d = number(j["d"], "gauge.d");
  } else if (g.kind == "random") {
    check_keys(j, "gauge", {"kind", "seed", "segments", "amplitude"});
    if (j.contains("seed")) g.seed = unsigned_int(j["seed"], "gauge.seed");
    if (j.contains("segments")) {
      g.segments = unsigned_int(j["segments"], "gauge.segments");
      if (g.segments < 1) fail("gauge.segments", "must be >= 1");
    }
    if (j.contains("amplitude")) {
      g.amplitude = number(j["amplitude"], "gauge.amplitude");
      if (g.amplitude < 0.0) fail("gauge.amplitude", "must be >= 0");
    }
  } else if (g.kind == "generator") {
    check_keys(j, "gauge", {"kind", "matrix"});
    if (!j.contains("matrix")) fail("gauge.matrix", "required for kind generator");
    g.generator = matrix(j["matrix"], "gauge.matrix");
  } else {
    fail("gauge.kind", "unknown kind '" + g.kind + "'");
  }
  cfg.gauge = std::move(g);
}

void parse_sweep(const json& j, RunConfig& cfg) {
  check_keys(j, "sweep", {"axes", "unwrap"});
  if (j.contains("unwrap")) {
    if (!j["unwrap"].is_boolean()) fail("sweep.unwrap", "expected true or false");
    cfg.unwrap = j["unwrap"].get<bool>();
  }
  if (!j.contains("axes")) return;
  const json& axes = j["axes"];
  if (!axes.is_array()) fail("sweep.axes", "expected an array");
  for (std::size_t k = 0; k < axes.size(); ++k) {
    const std::string f = "sweep.axes[" + std::to_string(k) + "]";
    check_keys(axes[k], f, {"name", "start", "stop", "count"});
    SweepAxis ax;
    if (!axes[k].contains("name") || !axes[k]["name"].is_string()) fail(f + ".name", "required string");
    ax.name = axes[k]["name"].get<std::string>();
    if (!axes[k].contains("start")) fail(f + ".start", "required");
    ax.start = number(axes[k]["start"], f + ".start");
    ax.stop = axes[k].contains("stop") ? number(axes[k]["stop"], f + ".stop") : ax.start;
    ax.count = axes[k].contains("count") ? unsigned_int(axes[k]["count"], f + ".count") : 1;
    if (ax.count < 1) fail(f + ".count", "must be >= 1");
    cfg.axes.push_back(ax);
  }
}

Format parse_format(const std::string& s, const std::string& field) {
  if (s == "csv") return Format::Csv;
  if (s == "records") return Format::Records;
  fail(field, "expected csv or records, got '" + s + "'");
}

}  // namespace

double SweepAxis::value(std::size_t i) const {
  if (count <= 1) return start;
  return start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
}

Complex parse_complex(std::string_view text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  if (s.empty()) throw ConfigError("empty complex number");
  const auto bad = [&]() -> ConfigError {
    return ConfigError("cannot parse '" + std::string(text) + "' as re+imi");
  };
  double re = 0.0;
  if (s.back() != 'i' && s.back() != 'j') {
    if (!parse_real(s, re)) throw bad();
    return {re, 0.0};
  }
  s.pop_back();
  // Split at the last sign that is not an exponent sign.
  std::size_t split = std::string::npos;
  for (std::size_t k = s.size(); k-- > 1;) {
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  std::string re_part = split == std::string::npos ? "" : s.substr(0, split);
  std::string im_part = split == std::string::npos ? s : s.substr(split);
  if (!re_part.empty() && !parse_real(re_part, re)) throw bad();
  double im = 0.0;
  if (im_part.empty() || im_part == "+") {
    im = 1.0;
  } else if (im_part == "-") {
    im = -1.0;
  } else if (!parse_real(im_part, im)) {
    throw bad();
  }
  return {re, im};
}

SweepAxis parse_axis(std::string_view spec) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : spec) {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  if (parts.size() != 4 || parts[0].empty()) {
    throw ConfigError("--axis: expected name:start:stop:count, got '" + std::string(spec) + "'");
  }
  SweepAxis ax;
  ax.name = parts[0];
  double count = 0.0;
  if (!parse_real(parts[1], ax.start) || !parse_real(parts[2], ax.stop) || !parse_real(parts[3], count) ||
      count < 1.0 || count != std::floor(count)) {
    throw ConfigError("--axis: bad numbers in '" + std::string(spec) + "'");
  }
  ax.count = static_cast<std::size_t>(count);
  return ax;
}

UnitaryPath load_unitary_table(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open " + file.string());
  std::vector<double> times;
  std::vector<ComplexMatrix> mats;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    double t = 0.0;
    if (!parse_real(cells.empty() ? "" : cells[0], t)) {
      if (times.empty()) continue;  // header
      throw ConfigError("line " + std::to_string(lineno) + ": bad time value");
    }
    if (width == 0) width = cells.size();
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(cells.size() - 1))));
    if (cells.size() != width || static_cast<std::size_t>(n * n) + 1 != cells.size()) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected t followed by N^2 entries");
    }
    ComplexMatrix m(n, n);
    for (Eigen::Index k = 0; k < n * n; ++k) {
      try {
        m(k / n, k % n) = parse_complex(cells[static_cast<std::size_t>(k) + 1]);
      } catch (const ConfigError& e) {
        throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    times.push_back(t);
    mats.push_back(std::move(m));
  }
  return UnitaryPath::sampled(std::move(times), std::move(mats));
}

RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  check_keys(j, "", {"scenario", "state", "path", "steps", "tolerances", "gauge", "sweep", "verify",
                     "output"});
  RunConfig cfg;
  if (j.contains("scenario")) parse_scenario(j["scenario"], cfg);
  if (j.contains("state")) cfg.state = matrix(j["state"], "state");
  if (j.contains("path")) parse_path(j["path"], cfg, base_dir);
  if (cfg.scenario && (cfg.state || cfg.path)) {
    fail(cfg.state ? "state" : "path", "cannot be combined with scenario");
  }
  if (j.contains("steps")) {
    cfg.steps = unsigned_int(j["steps"], "steps");
    if (*cfg.steps < 2) fail("steps", "must be >= 2");
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    check_keys(t, "tolerances",
               {"degeneracy", "eps_phase", "cyclic", "pass", "lemma_split", "lemma_law", "unitarity"});
    const auto set = [&](const char* key, double& dst) {
      if (t.contains(key)) dst = positive(t[key], std::string("tolerances.") + key);
    };
    set("degeneracy", cfg.tol.degeneracy);
    set("eps_phase", cfg.tol.eps_phase);
    set("cyclic", cfg.tol.cyclic);
    set("pass", cfg.tol.pass);
    set("lemma_split", cfg.tol.lemma_split);
    set("lemma_law", cfg.tol.lemma_law);
    set("unitarity", cfg.tol.unitarity);
  }
  if (j.contains("gauge")) parse_gauge(j["gauge"], cfg);
  if (j.contains("sweep")) parse_sweep(j["sweep"], cfg);
  if (j.contains("verify")) {
    check_keys(j["verify"], "verify", {"seed", "trials"});
    if (j["verify"].contains("seed")) cfg.seed = unsigned_int(j["verify"]["seed"], "verify.seed");
    if (j["verify"].contains("trials")) cfg.trials = unsigned_int(j["verify"]["trials"], "verify.trials");
  }
  if (j.contains("output")) {
    check_keys(j["output"], "output", {"format", "path"});
    if (j["output"].contains("format")) {
      if (!j["output"]["format"].is_string()) fail("output.format", "expected a string");
      cfg.format = parse_format(j["output"]["format"].get<std::string>(), "output.format");
    }
    if (j["output"].contains("path")) {
      if (!j["output"]["path"].is_string()) fail("output.path", "expected a string");
      cfg.out = j["output"]["path"].get<std::string>();
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("--config: cannot open " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), file.parent_path());
}

}  // namespace mixedphase::cli
