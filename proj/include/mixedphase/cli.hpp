#pragma once

// Batch front-end: JSON run configs, compute / sweep / verify, CSV or
// JSON-lines output.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mixedphase/paths.hpp"

namespace mixedphase::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitUndefinedPhase = 3;
inline constexpr int kExitVerifyFailed = 4;

/// Message starts with the offending field path, e.g. "path.tau: must be > 0".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioSpec {
  std::string name;
  std::map<std::string, double> params;
};

struct GaugeSpec {
  std::string kind;  // lambda1 | random | generator
  double d = 0.0;
  std::uint64_t seed = 0;
  std::size_t segments = 8;
  double amplitude = 1.0;
  ComplexMatrix generator;
};

struct SweepAxis {
  std::string name;
  double start = 0.0;
  double stop = 0.0;
  std::size_t count = 1;

  double value(std::size_t i) const;
};

struct Tolerances {
  double degeneracy = kDefaultDegeneracyTol;
  double eps_phase = kDefaultEpsPhase;
  double cyclic = 1e-9;
  double pass = 1e-6;
  double lemma_split = 1e-10;
  double lemma_law = 1e-7;
  double unitarity = 1e-10;
};

enum class Format { Csv, Records };

struct RunConfig {
  std::optional<ScenarioSpec> scenario;
  std::optional<ComplexMatrix> state;
  std::optional<UnitaryPath> path;
  std::string path_source;  // echo: "generator", "segments" or the table file
  std::optional<std::size_t> steps;  // default: the table's own grid, else 4096
  Tolerances tol;
  std::optional<GaugeSpec> gauge;
  std::vector<SweepAxis> axes;
  bool unwrap = false;
  std::uint64_t seed = 1;
  std::size_t trials = 100;
  std::optional<Format> format;
  std::string out;
};

Complex parse_complex(std::string_view text);

RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& file);

/// Rows "t,e00,e01,..." (row-major complex entries); '#' lines and a
/// non-numeric header row are skipped.
UnitaryPath load_unitary_table(const std::filesystem::path& file);

SweepAxis parse_axis(std::string_view spec);  // name:start:stop:count

int cmd_compute(const RunConfig& cfg, std::ostream& out);
int cmd_sweep(const RunConfig& cfg, std::ostream& out);
int cmd_verify(const RunConfig& cfg, std::ostream& out);
int cmd_scenario_list(std::optional<Format> format, std::ostream& out);

/// Full command-line entry point; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mixedphase::cli
