#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crmlab/bounds.hpp"
#include "crmlab/certificate.hpp"
#include "crmlab/cmrac.hpp"
#include "crmlab/json_io.hpp"
#include "crmlab/scenario.hpp"
#include "crmlab/svg_plot.hpp"
#include "crmlab/trajectory.hpp"

namespace crmlab {

struct RunResult {
  Trajectory trajectory;
  std::vector<BoundCertificate> certificates;
  std::vector<Measurement> measurements;
  // CMRAC families with comparison enabled: the other variant's run.
  std::optional<Trajectory> paired;
  std::optional<ComparisonReport> comparison;

  bool passed() const { return all_pass(certificates); }
  // NaN when absent.
  double measurement(const std::string& name) const;
};

// Simulates the scenario and evaluates the family's certificates.
// Throws the family's validation errors, Divergence, PreconditionViolated.
RunResult run_scenario(const ScenarioConfig& cfg);

std::vector<PlotPanel> plot_panels(const ScenarioConfig& cfg, const RunResult& result);

Json certificates_json(const ScenarioConfig& cfg, const RunResult& result);
Json resolved_config_json(const ScenarioConfig& cfg);

// trajectory.csv, certificates.json, config.json and one SVG per panel, each
// written atomically. Returns the paths written.
std::vector<std::filesystem::path> write_run_artifacts(const ScenarioConfig& cfg,
                                                       const RunResult& result,
                                                       const std::filesystem::path& dir);

// CRMLAB_THREADS when set to a positive integer, else the hardware
// concurrency (at least 1).
unsigned thread_cap();

struct SweepOptions {
  std::string axis;
  std::vector<double> values;
  bool couple_gamma = false;
  unsigned threads = 0;  // 0: thread_cap()
};

struct SweepPoint {
  std::size_t index = 0;
  double value = 0.0;
  std::optional<double> gamma;  // set when coupled
  bool ok = false;
  std::string error;
  bool passed = false;
  std::vector<BoundCertificate> certificates;
  std::vector<Measurement> measurements;
  std::string directory;  // relative to the sweep directory
};

struct SweepResult {
  std::string family;
  std::string axis;  // resolved dotted path
  bool couple_gamma = false;
  std::vector<SweepPoint> points;  // in input order
  std::optional<PeakingFit> fit;
  std::string fit_note;

  bool passed() const;
};

// Runs every point (in parallel) and fits the peaking exponent of
// sup|Δx_m| against |ℓ| when the axis is ℓ. Point failures are recorded and
// the sweep continues. With a non-empty out_dir each point's artifacts go to
// out_dir/point_NNN and the manifest to out_dir/sweep.json.
// Throws InvalidConfig for an invalid axis or empty value list.
SweepResult run_sweep(const ScenarioConfig& base, const SweepOptions& options,
                      const std::filesystem::path& out_dir = {});

Json sweep_manifest(const ScenarioConfig& base, const SweepResult& result);

struct ReportSummary {
  std::string markdown;
  int runs = 0;
  int sweeps = 0;
  int failing = 0;  // failed runs plus failed sweep points
  bool passed() const { return failing == 0 && runs + sweeps > 0; }
};

// Collects every certificates.json and sweep.json below `dir` (sorted
// paths). Throws InvalidConfig when dir does not exist.
ReportSummary build_report(const std::filesystem::path& dir);

}  // namespace crmlab
