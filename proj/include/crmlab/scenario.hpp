#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "crmlab/cmrac.hpp"
#include "crmlab/json_io.hpp"
#include "crmlab/mimo_crm.hpp"
#include "crmlab/nonlinear.hpp"
#include "crmlab/scalar_crm.hpp"

namespace crmlab {

enum class Family { kOrmScalar, kCrmScalar, kMimo, kCmrac, kCmracCo, kBackstepping, kRobot };

std::string to_string(Family family);
// Throws InvalidConfig.
Family parse_family(const std::string& name);

struct CertificationOptions {
  bool enabled = true;
  // Scalar: tail certificates start here when set (projected, γ = |ℓ| runs).
  std::optional<double> t1;
  // MIMO tail start.
  double t2 = 1.0;
  // CMRAC-CO tail start.
  double t3 = 4.0;
  // Robot skew-symmetry samples.
  int skew_samples = 100;
};

using FamilyModel = std::variant<ScalarScenario, MimoScenario, CmracConfig,
                                 BacksteppingScenario, RobotScenario>;

struct ScenarioConfig {
  Family family = Family::kCrmScalar;
  std::string name;
  std::uint64_t seed = 42;
  // Empty means "runs/<name>".
  std::string output;
  FamilyModel model;
  CertificationOptions certification;
  // Start of the window for tail measurements in run summaries and sweeps.
  double tail_start = 5.0;
  // CMRAC families: also run the other variant on the same scenario.
  bool compare = false;
  // The document the config was parsed from; sweeps edit and re-parse it.
  Json document;

  const IntegratorConfig& integrator() const;
  std::filesystem::path output_dir() const;
  // Family-specific preconditions. Throws InvalidConfig, UnstableGain,
  // ZeroInputGain, AssumptionViolated, NoMatch, UnsupportedOrder.
  void validate() const;
};

// Field-level errors name the offending key ("plant.k_p: expected a number").
// Unknown keys are rejected. Validates the result.
ScenarioConfig parse_scenario(const Json& document);
ScenarioConfig parse_scenario_toml(std::string_view text,
                                   const std::string& source = "<toml>");
// .toml or .json by extension.
ScenarioConfig load_scenario(const std::filesystem::path& path);
Json toml_to_json(std::string_view text, const std::string& source = "<toml>");

// Numeric parameters a sweep may vary for the family, as dotted paths.
const std::vector<std::string>& sweep_axes(Family family);
// Alias ("ell", "gamma", "seed") or dotted path to the dotted path. Throws
// InvalidConfig when the family has no such axis.
std::string resolve_axis(Family family, const std::string& axis);
// True when the axis is the reference/observer feedback gain ℓ (or g).
bool is_ell_axis(Family family, const std::string& path);
// Copy of `base` with the dotted path set to `value`, re-parsed. With
// couple_gamma the adaptation gain is also set to |value|.
ScenarioConfig with_parameter(const ScenarioConfig& base, const std::string& path,
                              double value, bool couple_gamma = false);

}  // namespace crmlab
