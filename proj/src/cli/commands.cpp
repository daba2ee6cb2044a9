#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <thread>
#include <variant>

#include "CLI11.hpp"
#include "json.hpp"
#include "mixedphase/cli.hpp"
#include "mixedphase/holonomy.hpp"
#include "mixedphase/lemmas.hpp"
#include "mixedphase/scenarios.hpp"

namespace mixedphase::cli {

namespace {

using std::numbers::pi;

// ---- records and writers --------------------------------------------------

using Value = std::variant<std::monostate, double, std::int64_t, bool, std::string>;

struct Field {
  std::string key;
  std::string unit;
  Value value;
};

using Record = std::vector<Field>;

Value opt(const std::optional<double>& v) { return v ? Value(*v) : Value(); }

std::string format_double(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_cell(const Value& v) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(double d) const { return format_double(d); }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string q = "\"";
      for (char c : s) {
        if (c == '"') q += '"';
        q += c;
      }
      return q + "\"";
    }
  };
  return std::visit(Visitor{}, v);
}

nlohmann::json json_value(const Value& v) {
  struct Visitor {
    nlohmann::json operator()(std::monostate) const { return nullptr; }
    nlohmann::json operator()(double d) const {
      return std::isfinite(d) ? nlohmann::json(d) : nlohmann::json(nullptr);
    }
    nlohmann::json operator()(std::int64_t i) const { return i; }
    nlohmann::json operator()(bool b) const { return b; }
    nlohmann::json operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, v);
}

void write_records(const std::vector<Record>& rows, Format format, std::ostream& out) {
  if (format == Format::Records) {
    for (const auto& row : rows) {
      nlohmann::ordered_json j = nlohmann::ordered_json::object();
      for (const auto& f : row) j[f.key] = json_value(f.value);
      out << j.dump() << '\n';
    }
    return;
  }
  if (rows.empty()) return;
  const Record& head = rows.front();
  for (std::size_t k = 0; k < head.size(); ++k) {
    if (k) out << ',';
    out << head[k].key;
    if (!head[k].unit.empty()) out << '[' << head[k].unit << ']';
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out << ',';
      out << csv_cell(row[k].value);
    }
    out << '\n';
  }
}

// Runs body(i) for i in [0, n) on a small pool; results are stored by index
// so completion order never leaks into the output.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

// ---- problems ---------------------------------------------------------------

struct Problem {
  std::string label;
  std::vector<std::pair<std::string, double>> params;
  DensityMatrix state;
  UnitaryPath path;
  std::optional<GaugeSpec> gauge;
};

const std::vector<std::pair<std::string, double>>& scenario_defaults(const std::string& name) {
  static const std::vector<std::pair<std::string, double>> spin = {{"r", 0.5}, {"theta", pi / 3.0}};
  static const std::vector<std::pair<std::string, double>> su3 = {
      {"omega", 0.3}, {"a", 1.0}, {"b", 1.0}};
  return name == "spin-half" ? spin : su3;
}

std::string param_unit(const std::string& name) {
  if (name == "theta") return "rad";
  if (name == "a" || name == "b" || name == "gauge_d") return "rad/t";
  return "1";
}

bool is_input_error(ErrorKind k) {
  switch (k) {
    case ErrorKind::UndefinedPhase:
    case ErrorKind::BranchAmbiguity:
    case ErrorKind::NonRealAccumulation:
      return false;
    default:
      return true;
  }
}

std::vector<std::pair<std::string, double>> scenario_params(
    const RunConfig& cfg, const std::map<std::string, double>& overrides) {
  std::map<std::string, double> values;
  for (const auto& [k, v] : scenario_defaults(cfg.scenario->name)) values[k] = v;
  for (const auto& [k, v] : cfg.scenario->params) values[k] = v;
  for (const auto& [k, v] : overrides) values[k] = v;
  std::vector<std::pair<std::string, double>> echo;
  for (const auto& info : scenario_catalog()) {
    if (info.name != cfg.scenario->name) continue;
    for (const auto& key : info.parameters)
      if (values.count(key)) echo.emplace_back(key, values[key]);
  }
  return echo;
}

Problem build_problem(const RunConfig& cfg, const std::map<std::string, double>& overrides = {}) {
  if (cfg.scenario) {
    const std::string& name = cfg.scenario->name;
    const auto echo = scenario_params(cfg, overrides);
    std::map<std::string, double> values(echo.begin(), echo.end());
    try {
      if (name == "spin-half") {
        SpinHalfScenario s = build_spin_half(values["r"], values["theta"]);
        return {name, echo, s.state, s.path, cfg.gauge};
      }
      SU3Scenario s = build_su3(values["omega"], values["a"], values["b"]);
      std::optional<GaugeSpec> gauge = cfg.gauge;
      if (values.count("gauge_d")) {
        if (cfg.gauge) throw ConfigError("gauge: cannot be combined with scenario.gauge_d");
        GaugeSpec g;
        g.kind = "lambda1";
        g.d = values["gauge_d"];
        gauge = g;
      }
      return {name, echo, s.state, s.path, gauge};
    } catch (const Error& e) {
      throw ConfigError("scenario: " + std::string(e.what()));
    }
  }
  if (!overrides.empty()) throw ConfigError("sweep.axes: sweeps need a scenario");
  if (!cfg.state) throw ConfigError("state: required unless a scenario is given");
  if (!cfg.path) throw ConfigError("path: required unless a scenario is given");
  std::optional<DensityMatrix> rho;
  try {
    rho = DensityMatrix::validate(*cfg.state);
  } catch (const Error& e) {
    throw ConfigError("state: " + std::string(e.what()));
  }
  if (rho->dim() != cfg.path->dim()) {
    throw ConfigError("path: dimension " + std::to_string(cfg.path->dim()) +
                      " does not match state dimension " + std::to_string(rho->dim()));
  }
  return {"custom", {}, *rho, *cfg.path, cfg.gauge};
}

TimeGrid problem_grid(const RunConfig& cfg, const Problem& p) {
  if (!cfg.steps) return natural_grid(p.path);
  return TimeGrid(p.path.duration(), *cfg.steps);
}

GaugeTransformation make_gauge(const GaugeSpec& g, const SpectralDecomposition& decomp,
                               double duration) {
  if (g.kind == "lambda1") {
    if (decomp.eigenbasis.rows() != 3) {
      throw Error(ErrorKind::StructureMismatch, "lambda1 gauge needs a three-level system");
    }
    return su3_lambda1_gauge(decomp, g.d, duration);
  }
  if (g.kind == "random") {
    return random_gauge(decomp.structure, g.seed, g.segments, g.amplitude, duration);
  }
  return constant_gauge(decomp, g.generator, duration);
}

HolonomyOptions holonomy_options(const RunConfig& cfg, bool convergence) {
  HolonomyOptions o;
  o.eps_phase = cfg.tol.eps_phase;
  o.cyclic_tol = cfg.tol.cyclic;
  o.convergence_estimate = convergence;
  return o;
}

// ---- compute / sweep ----------------------------------------------------------

struct Computed {
  Problem problem;
  std::size_t steps;
  PhaseReport report;
};

Computed compute_problem(const RunConfig& cfg, Problem p) {
  const TimeGrid grid = problem_grid(cfg, p);
  SpectralDecomposition decomp = spectral_decompose(p.state, cfg.tol.degeneracy);
  std::optional<UnitaryPath> gauged;
  if (p.gauge) {
    try {
      gauged = apply_gauge(p.path, make_gauge(*p.gauge, decomp, grid.duration()), decomp, grid);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::StructureMismatch) throw ConfigError("gauge: " + std::string(e.what()));
      throw;
    }
  }
  PhaseReport rep = geometric_phase_general(decomp, gauged ? *gauged : p.path, grid,
                                            holonomy_options(cfg, true));
  return {std::move(p), grid.steps(), rep};
}

Record report_record(const std::string& label,
                     const std::vector<std::pair<std::string, double>>& params,
                     const Computed* c) {
  Record r;
  r.push_back({"scenario", "", label});
  for (const auto& [k, v] : params) r.push_back({k, param_unit(k), v});
  if (!c) {
    for (const char* key : {"dim", "tau", "steps", "gamma_total", "visibility_total",
                            "gamma_dynamical", "gamma_geometric", "visibility_geometric",
                            "naive_subtraction", "cyclic", "cyclicity_residual",
                            "transport_residual", "weak_transport_residual",
                            "convergence_estimate"}) {
      r.push_back({key, "", Value()});
    }
    return r;
  }
  const PhaseReport& rep = c->report;
  r.push_back({"dim", "1", static_cast<std::int64_t>(c->problem.state.dim())});
  r.push_back({"tau", "t", c->problem.path.duration()});
  r.push_back({"steps", "1", static_cast<std::int64_t>(c->steps)});
  r.push_back({"gamma_total", "rad", opt(rep.gamma_total)});
  r.push_back({"visibility_total", "1", rep.visibility_total});
  r.push_back({"gamma_dynamical", "rad", rep.gamma_dynamical});
  r.push_back({"gamma_geometric", "rad", rep.gamma_geometric});
  r.push_back({"visibility_geometric", "1", rep.visibility_geometric});
  r.push_back({"naive_subtraction", "rad", opt(rep.naive_subtraction)});
  r.push_back({"cyclic", "", rep.cyclic});
  r.push_back({"cyclicity_residual", "1", rep.cyclicity_residual});
  r.push_back({"transport_residual", "1/t", rep.transport_residual});
  r.push_back({"weak_transport_residual", "1/t", rep.weak_transport_residual});
  r.push_back({"convergence_estimate", "rad", opt(rep.convergence_estimate)});
  return r;
}

Record report_record(const Computed& c) {
  return report_record(c.problem.label, c.problem.params, &c);
}

Format pick(const RunConfig& cfg, Format fallback) { return cfg.format.value_or(fallback); }

// ---- verify --------------------------------------------------------------------

struct Check {
  std::string check;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string quantity;
  std::string unit;
  double value = 0.0;
  std::optional<double> reference;
  std::optional<double> difference;
  std::optional<double> threshold;
  std::optional<bool> pass;
  std::string note;
};

Record check_record(const Check& c) {
  return {{"check", "", c.check},
          {"scenario", "", c.scenario},
          {"seed", "", c.seed ? Value(static_cast<std::int64_t>(*c.seed)) : Value()},
          {"quantity", "", c.quantity},
          {"unit", "", c.unit},
          {"value", "", c.value},
          {"reference", "", opt(c.reference)},
          {"difference", "", opt(c.difference)},
          {"threshold", "", opt(c.threshold)},
          {"pass", "", c.pass ? Value(*c.pass) : Value()},
          {"note", "", c.note}};
}

Check below(std::string check, const std::string& scenario, std::string quantity, std::string unit,
            double value, double threshold) {
  Check c;
  c.check = std::move(check);
  c.scenario = scenario;
  c.quantity = std::move(quantity);
  c.unit = std::move(unit);
  c.value = value;
  c.threshold = threshold;
  c.pass = value < threshold;
  return c;
}

double sampled_gamma(const SpectralDecomposition& decomp, const UnitaryPath& path, std::size_t m,
                     const HolonomyOptions& o) {
  const TimeGrid g(path.duration(), m);
  const UnitaryPath s =
      apply_gauge(path, GaugeTransformation::identity(decomp.structure), decomp, g);
  return geometric_phase_general(decomp, s, g, o).gamma_geometric;
}

void reproduction_checks(const RunConfig& cfg, const Problem& p, double gamma,
                         const PhaseReport& rep, const SpectralDecomposition& decomp,
                         const TimeGrid& grid, std::vector<Check>& out) {
  std::map<std::string, double> v(p.params.begin(), p.params.end());
  const auto add = [&](std::string quantity, double value, double reference, double diff,
                       std::optional<double> threshold, std::string note) {
    Check c;
    c.check = "reproduction";
    c.scenario = p.label;
    c.quantity = std::move(quantity);
    c.unit = "rad";
    c.value = value;
    c.reference = reference;
    c.difference = diff;
    c.threshold = threshold;
    if (threshold) c.pass = diff < *threshold;
    c.note = std::move(note);
    out.push_back(std::move(c));
  };
  if (p.label == "spin-half") {
    const SpinHalfClosedForm cf = spin_half_closed_form(v["r"], v["theta"], cfg.tol.eps_phase);
    add("gamma_geometric_vs_bracket", gamma, cf.gamma_bracket,
        circle_distance(gamma, cf.gamma_bracket), cfg.tol.pass, "weighted phase-factor bracket");
    add("arctan_form_vs_bracket", cf.gamma_arctan, cf.gamma_bracket,
        half_circle_distance(cf.gamma_arctan, cf.gamma_bracket), 1e-9,
        "arctan form agrees only modulo pi (principal arctan branch)");
    if (rep.gamma_total) {
      add("gamma_total_vs_pi", *rep.gamma_total, pi, circle_distance(*rep.gamma_total, pi), 1e-9,
          "U(2pi) = -I");
    }
  } else if (p.label == "su3") {
    const double w = v["omega"], a = v["a"], b = v["b"];
    const double red = su3_closed_reduction(w, a, b);
    add("gamma_geometric_vs_reduction", gamma, red, circle_distance(gamma, red), cfg.tol.pass,
        "arg[w(1-e^{i psi}) - (1-2w)e^{-i psi}], psi = sqrt(3) pi a/c");
    const double lit = geometric_phase_literal(decomp, p.path, grid, cfg.tol.eps_phase);
    const double lit_red = su3_literal_reduction(w, a, b);
    add("literal_projection_vs_reduction", lit, lit_red, circle_distance(lit, lit_red),
        cfg.tol.pass,
        "full-space P-exp projected on the degenerate block; not gauge covariant");
    const double printed = su3_paper_closed_form(w, a, b);
    add("printed_arctan_formula_vs_pipeline", printed, gamma, circle_distance(printed, gamma),
        std::nullopt, "printed closed form with k = sqrt(3)a/c, phi = (pi-2c)/(c sqrt(3)); "
                      "difference reported, agreement not expected");
  }
}

std::vector<Check> verify_problem(const RunConfig& cfg, const Problem& p) {
  std::vector<Check> out;
  const TimeGrid grid = problem_grid(cfg, p);
  const double tau = grid.duration();
  const SpectralDecomposition decomp = spectral_decompose(p.state, cfg.tol.degeneracy);
  const HolonomyOptions o = holonomy_options(cfg, false);
  const UnitaryPath base =
      apply_gauge(p.path, GaugeTransformation::identity(decomp.structure), decomp, grid);
  const PhaseReport r0 = geometric_phase_general(decomp, base, grid, o);
  bool has_singleton = false, has_degenerate = false;
  for (const auto& b : decomp.structure.blocks) (b.multiplicity == 1 ? has_singleton : has_degenerate) = true;

  struct Trial {
    std::vector<Check> checks;
    double delta_naive = 0.0;
    double delta_geometric = 0.0;
    std::string error;
  };
  std::vector<Trial> trials(cfg.trials);
  parallel_for(cfg.trials, [&](std::size_t k) {
    Trial& t = trials[k];
    const std::uint64_t seed = cfg.seed + k;
    try {
      const GaugeTransformation v = random_gauge(decomp.structure, seed, 8, 1.0, tau);
      const UnitaryPath gauged = apply_gauge(p.path, v, decomp, grid);
      const PhaseReport r1 = geometric_phase_general(decomp, gauged, grid, o);
      t.delta_geometric = circle_distance(r1.gamma_geometric, r0.gamma_geometric);
      if (r0.naive_subtraction && r1.naive_subtraction) {
        t.delta_naive = circle_distance(*r1.naive_subtraction, *r0.naive_subtraction);
      }
      const Lemma1Report l1 = lemma_1_from_samples(decomp, base, gauged, v, grid,
                                                   cfg.tol.lemma_split, cfg.tol.lemma_law);
      const Lemma2Report l2 = lemma_2_from_samples(decomp, base, gauged, v, grid, cfg.tol.lemma_law);
      auto push = [&](Check c) {
        c.seed = seed;
        t.checks.push_back(std::move(c));
      };
      push(below("gauge_invariance", p.label, "delta_gamma_geometric", "rad", t.delta_geometric,
                 cfg.tol.pass));
      Check naive;
      naive.check = "naive_subtraction";
      naive.scenario = p.label;
      naive.quantity = "delta_total_minus_dynamical";
      naive.unit = "rad";
      naive.value = t.delta_naive;
      push(naive);
      push(below("lemma_1a", p.label, "trace_split_residual", "1", l1.trace_split_residual,
                 cfg.tol.lemma_split));
      push(below("lemma_1b", p.label, "x_block_law_residual", "1", l1.x_law_residual,
                 cfg.tol.lemma_law));
      if (has_singleton) {
        push(below("lemma_2a", p.label, "singleton_f_law_residual", "1", l2.singleton_residual,
                   cfg.tol.lemma_law));
      }
      if (has_degenerate) {
        push(below("lemma_2b", p.label, "block_f_law_residual", "1", l2.degenerate_residual,
                   cfg.tol.lemma_law));
      }
      push(below("f_initial", p.label, "f_at_zero_minus_identity", "1", l2.initial_residual,
                 cfg.tol.lemma_law));
    } catch (const Error& e) {
      Check c;
      c.check = "gauge_trial";
      c.scenario = p.label;
      c.seed = seed;
      c.quantity = "error";
      c.pass = false;
      c.note = e.what();
      t.checks.push_back(std::move(c));
    }
  });
  double max_naive = 0.0, max_geom = 0.0;
  for (auto& t : trials) {
    max_naive = std::max(max_naive, t.delta_naive);
    max_geom = std::max(max_geom, t.delta_geometric);
    for (auto& c : t.checks) out.push_back(std::move(c));
  }
  if (cfg.trials > 0) {
    out.push_back(below("gauge_invariance", p.label, "max_delta_gamma_geometric", "rad", max_geom,
                        cfg.tol.pass));
    Check c;
    c.check = "naive_subtraction";
    c.scenario = p.label;
    c.quantity = "max_delta_total_minus_dynamical";
    c.unit = "rad";
    c.value = max_naive;
    c.threshold = 0.1;
    c.pass = max_naive > 0.1 && max_geom < cfg.tol.pass;
    c.note = "must exceed threshold while gamma_geometric stays invariant";
    out.push_back(std::move(c));
  }

  // Parallel transport of the gauge-fixed path, and the same check with F = I.
  const PhaseReport direct = geometric_phase_general(decomp, p.path, grid, o);
  out.push_back(below("parallel_transport", p.label, "transport_residual", "1/t",
                      direct.transport_residual, cfg.tol.pass));
  {
    Check c;
    c.check = "parallel_transport";
    c.scenario = p.label;
    c.quantity = "transport_residual_with_identity_f";
    c.unit = "1/t";
    c.value = parallel_transport_residual(
        decomp, p.path, HolonomyFunctional::identity(decomp.structure, grid.nodes()), grid);
    c.note = "diagnostic: nonzero unless the bare path is already parallel";
    out.push_back(std::move(c));
  }

  for (std::size_t m : {std::size_t{64}, std::size_t{256}, std::size_t{1024}, grid.steps()}) {
    const TimeGrid g(tau, m);
    double defect = f_functional(decomp, p.path, g).max_unitarity_defect();
    if (!p.path.is_sampled()) {
      const UnitaryPath s =
          apply_gauge(p.path, GaugeTransformation::identity(decomp.structure), decomp, g);
      defect = std::max(defect, f_functional(decomp, s, g).max_unitarity_defect());
    }
    Check c = below("f_unitarity", p.label, "max_block_unitarity_defect_M" + std::to_string(m),
                    "1", defect, cfg.tol.unitarity);
    out.push_back(std::move(c));
  }

  if (!p.path.is_sampled()) {
    const double g64 = sampled_gamma(decomp, p.path, 64, o);
    const double g128 = sampled_gamma(decomp, p.path, 128, o);
    const double g256 = sampled_gamma(decomp, p.path, 256, o);
    const double d1 = circle_distance(g64, g128), d2 = circle_distance(g128, g256);
    Check c;
    c.check = "convergence";
    c.scenario = p.label;
    c.quantity = "ratio_M64_M128_M256";
    c.unit = "1";
    if (d1 < 1e-12) {
      c.value = 0.0;
      c.pass = true;
      c.note = "differences at roundoff; no discretisation error to measure";
    } else {
      c.value = d2 > 0.0 ? d1 / d2 : std::numeric_limits<double>::infinity();
      c.reference = 4.0;
      c.pass = c.value >= 3.0 && c.value <= 5.0;
      c.note = "sampled representation; expected ~4 for a second-order scheme";
    }
    out.push_back(std::move(c));

    Check route;
    route.check = "route_discrepancy";
    route.scenario = p.label;
    route.quantity = "generator_vs_sampled_gamma";
    route.unit = "rad";
    route.value = circle_distance(direct.gamma_geometric, r0.gamma_geometric);
    route.note = "diagnostic: exact-connection product vs sampled transport at the same grid";
    out.push_back(std::move(route));
  }

  reproduction_checks(cfg, p, direct.gamma_geometric, direct, decomp, grid, out);
  return out;
}

// ---- output plumbing -------------------------------------------------------------

int emit(const RunConfig& cfg, const std::vector<Record>& rows, Format fallback, std::ostream& out) {
  if (cfg.out.empty()) {
    write_records(rows, pick(cfg, fallback), out);
    return kExitOk;
  }
  std::ostringstream buf;
  write_records(rows, pick(cfg, fallback), buf);
  std::ofstream file(cfg.out, std::ios::binary);
  if (!file) throw ConfigError("--out: cannot open " + cfg.out);
  file << buf.str();
  return kExitOk;
}

}  // namespace

int cmd_compute(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.axes.empty()) throw ConfigError("sweep.axes: only used by sweep");
  const Computed c = compute_problem(cfg, build_problem(cfg));
  return emit(cfg, {report_record(c)}, Format::Csv, out);
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  if (cfg.axes.size() > 2) throw ConfigError("sweep.axes: at most two axes");
  if (!cfg.axes.empty()) {
    if (!cfg.scenario) throw ConfigError("sweep.axes: sweeps need a scenario");
    const auto catalog = scenario_catalog();
    const auto it = std::find_if(catalog.begin(), catalog.end(),
                                 [&](const ScenarioInfo& s) { return s.name == cfg.scenario->name; });
    for (std::size_t k = 0; k < cfg.axes.size(); ++k) {
      const auto& params = it->parameters;
      if (std::find(params.begin(), params.end(), cfg.axes[k].name) == params.end()) {
        throw ConfigError("sweep.axes[" + std::to_string(k) + "].name: '" + cfg.axes[k].name +
                          "' is not a parameter of " + cfg.scenario->name);
      }
    }
    if (cfg.axes.size() == 2 && cfg.axes[0].name == cfg.axes[1].name) {
      throw ConfigError("sweep.axes[1].name: duplicates axis 0");
    }
  }
  const std::size_t n0 = cfg.axes.empty() ? 1 : cfg.axes[0].count;
  const std::size_t n1 = cfg.axes.size() < 2 ? 1 : cfg.axes[1].count;
  std::vector<Record> rows(n0 * n1);
  std::vector<std::optional<double>> gammas(n0 * n1);
  parallel_for(n0 * n1, [&](std::size_t idx) {
    std::map<std::string, double> overrides;
    if (!cfg.axes.empty()) overrides[cfg.axes[0].name] = cfg.axes[0].value(idx / n1);
    if (cfg.axes.size() == 2) overrides[cfg.axes[1].name] = cfg.axes[1].value(idx % n1);
    Record r;
    try {
      const Computed c = compute_problem(cfg, build_problem(cfg, overrides));
      r = report_record(c);
      gammas[idx] = c.report.gamma_geometric;
      r.push_back({"error", "", std::string()});
    } catch (const std::exception& e) {
      r = cfg.scenario ? report_record(cfg.scenario->name, scenario_params(cfg, overrides), nullptr)
                       : report_record("custom", {}, nullptr);
      r.push_back({"error", "", std::string(e.what())});
    }
    rows[idx] = std::move(r);
  });
  // Failed rows have no units on their template; borrow them from a good row.
  for (const auto& good : rows) {
    if (std::get<std::string>(good.back().value).empty()) {
      for (auto& row : rows)
        for (std::size_t k = 0; k < row.size() && k < good.size(); ++k) row[k].unit = good[k].unit;
      break;
    }
  }

  if (cfg.unwrap) {
    for (std::size_t j = 0; j < n1; ++j) {
      std::optional<double> prev_raw, prev_unwrapped;
      for (std::size_t i = 0; i < n0; ++i) {
        const std::size_t idx = i * n1 + j;
        Value u;
        if (gammas[idx]) {
          const double g = *gammas[idx];
          const double uw = prev_raw ? *prev_unwrapped + wrap_angle(g - *prev_raw) : g;
          prev_raw = g;
          prev_unwrapped = uw;
          u = uw;
        } else {
          prev_raw.reset();
          prev_unwrapped.reset();
        }
        auto& r = rows[idx];
        const auto pos = std::find_if(r.begin(), r.end(),
                                      [](const Field& f) { return f.key == "gamma_geometric"; });
        r.insert(pos + 1, Field{"gamma_geometric_unwrapped", "rad", u});
      }
    }
  }
  return emit(cfg, rows, Format::Csv, out);
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  std::vector<Problem> problems;
  if (cfg.scenario || cfg.state || cfg.path) {
    problems.push_back(build_problem(cfg));
  } else {
    for (const char* name : {"spin-half", "su3"}) {
      RunConfig c = cfg;
      c.scenario = ScenarioSpec{name, {}};
      problems.push_back(build_problem(c));
    }
  }
  std::vector<Record> rows;
  bool ok = true;
  for (const auto& p : problems) {
    for (const auto& c : verify_problem(cfg, p)) {
      if (c.pass && !*c.pass) ok = false;
      rows.push_back(check_record(c));
    }
  }
  emit(cfg, rows, Format::Records, out);
  return ok ? kExitOk : kExitVerifyFailed;
}

int cmd_scenario_list(std::optional<Format> format, std::ostream& out) {
  std::vector<Record> rows;
  for (const auto& s : scenario_catalog()) {
    std::string params;
    for (const auto& p : s.parameters) params += (params.empty() ? "" : " ") + p;
    rows.push_back({{"name", "", s.name}, {"parameters", "", params}, {"description", "", s.description}});
  }
  write_records(rows, format.value_or(Format::Csv), out);
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixed-state geometric phases under unitary evolution", "mixedphase"};
  app.require_subcommand(1);

  std::string config_file, out_file, format_name;
  std::size_t steps = 0;
  std::uint64_t seed = 1;
  std::size_t trials = 100;
  std::vector<std::string> axis_specs;
  bool unwrap = false;
  double r = 0, theta = 0, omega = 0, a = 0, b = 0, gauge_d = 0;

  struct Shortcut {
    CLI::App* spin;
    CLI::App* su3;
    CLI::Option* r;
    CLI::Option* theta;
    CLI::Option* omega;
    CLI::Option* a;
    CLI::Option* b;
    CLI::Option* d;
  };
  std::map<CLI::App*, Shortcut> shortcuts;
  std::map<CLI::App*, CLI::Option*> steps_opt, seed_opt, trials_opt;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "JSON run configuration");
    steps_opt[sub] = sub->add_option("--steps", steps, "grid steps M (>= 2)");
    sub->add_option("--out", out_file, "write output to this file");
    sub->add_option("--format", format_name, "csv or records")->check(CLI::IsMember({"csv", "records"}));
    Shortcut s{};
    s.spin = sub->add_subcommand("spin-half", "spin-1/2 precession scenario");
    s.r = s.spin->add_option("--r", r, "Bloch radius in (0, 1]");
    s.theta = s.spin->add_option("--theta", theta, "polar angle [rad]");
    s.su3 = sub->add_subcommand("su3", "three-level scenario with a degenerate pair");
    s.omega = s.su3->add_option("--omega", omega, "degenerate eigenvalue in (0, 1/2)");
    s.a = s.su3->add_option("--a", a, "lambda8 coefficient");
    s.b = s.su3->add_option("--b", b, "lambda4 coefficient");
    s.d = s.su3->add_option("--gauge-d", gauge_d, "apply exp(-i d lambda1 t)");
    s.spin->fallthrough();
    s.su3->fallthrough();
    sub->require_subcommand(0, 1);
    shortcuts[sub] = s;
  };

  CLI::App* compute = app.add_subcommand("compute", "phases for one configuration");
  common(compute);
  CLI::App* sweep = app.add_subcommand("sweep", "phases over a parameter grid");
  common(sweep);
  sweep->add_option("--axis", axis_specs, "name:start:stop:count (up to two)");
  sweep->add_flag("--unwrap", unwrap, "add a continuity-unwrapped gamma_geometric column");
  CLI::App* verify = app.add_subcommand("verify", "gauge-invariance and consistency suite");
  common(verify);
  seed_opt[verify] = verify->add_option("--seed", seed, "first random-gauge seed");
  trials_opt[verify] = verify->add_option("--trials", trials, "random gauges per scenario");
  CLI::App* scenario = app.add_subcommand("scenario", "built-in scenarios");
  CLI::App* list = scenario->add_subcommand("list", "list scenarios and parameters");
  list->add_option("--format", format_name, "csv or records")->check(CLI::IsMember({"csv", "records"}));
  scenario->require_subcommand(1);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    std::optional<Format> format;
    if (!format_name.empty()) format = format_name == "csv" ? Format::Csv : Format::Records;
    if (scenario->parsed()) return cmd_scenario_list(format, out);

    CLI::App* cmd = compute->parsed() ? compute : sweep->parsed() ? sweep : verify;
    RunConfig cfg = config_file.empty() ? RunConfig{} : load_config(config_file);
    if (steps_opt[cmd]->count()) {
      if (steps < 2) throw ConfigError("--steps: must be >= 2");
      cfg.steps = steps;
    }
    if (format) cfg.format = format;
    if (!out_file.empty()) cfg.out = out_file;
    if (cmd == verify) {
      if (seed_opt[cmd]->count()) cfg.seed = seed;
      if (trials_opt[cmd]->count()) cfg.trials = trials;
    }
    if (cmd == sweep) {
      if (!axis_specs.empty()) {
        cfg.axes.clear();
        for (const auto& s : axis_specs) cfg.axes.push_back(parse_axis(s));
      }
      if (unwrap) cfg.unwrap = true;
    }
    const Shortcut& s = shortcuts[cmd];
    const auto apply_shortcut = [&](const std::string& name,
                                    std::vector<std::pair<std::string, CLI::Option*>> opts,
                                    std::vector<double> values) {
      if (cfg.state || cfg.path) throw ConfigError(name + ": cannot be combined with state/path in --config");
      if (!cfg.scenario || cfg.scenario->name != name) cfg.scenario = ScenarioSpec{name, {}};
      for (std::size_t k = 0; k < opts.size(); ++k) {
        if (opts[k].second->count()) cfg.scenario->params[opts[k].first] = values[k];
      }
    };
    if (s.spin->parsed()) apply_shortcut("spin-half", {{"r", s.r}, {"theta", s.theta}}, {r, theta});
    if (s.su3->parsed()) {
      apply_shortcut("su3", {{"omega", s.omega}, {"a", s.a}, {"b", s.b}, {"gauge_d", s.d}},
                     {omega, a, b, gauge_d});
    }
    if (cmd == compute) return cmd_compute(cfg, out);
    if (cmd == sweep) return cmd_sweep(cfg, out);
    return cmd_verify(cfg, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    if (e.kind() == ErrorKind::UndefinedPhase) return kExitUndefinedPhase;
    return is_input_error(e.kind()) ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace mixedphase::cli
