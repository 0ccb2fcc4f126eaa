#include "crmlab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "crmlab/error.hpp"

namespace crmlab {
namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::kInvalidConfig, where + ": " + what);
}

// One table of the config document. Reads record which keys were consumed
// so finish() can reject the rest as unknown.
class Fields {
 public:
  Fields(const Json* obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (obj_ && !obj_->is_object()) bad(label(), "expected a table");
  }

  bool present() const { return obj_ != nullptr; }
  bool has(const std::string& key) const { return obj_ && obj_->contains(key); }
  std::string where(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const Json* get(const std::string& key) {
    if (!has(key)) return nullptr;
    used_.insert(key);
    return &(*obj_)[key];
  }

  std::optional<double> opt_number(const std::string& key) {
    const Json* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) bad(where(key), "expected a number");
    const double d = v->get<double>();
    if (!std::isfinite(d)) bad(where(key), "must be finite");
    return d;
  }
  double number(const std::string& key, double def) {
    return opt_number(key).value_or(def);
  }

  long integer(const std::string& key, long def) {
    const auto d = opt_number(key);
    if (!d) return def;
    if (std::floor(*d) != *d || std::abs(*d) > 9.0e15) bad(where(key), "expected an integer");
    return static_cast<long>(*d);
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t def) {
    const Json* v = get(key);
    if (!v) return def;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (v->is_number_integer()) {
      if (v->get<std::int64_t>() < 0) bad(where(key), "must be >= 0");
      return static_cast<std::uint64_t>(v->get<std::int64_t>());
    }
    if (v->is_number_float()) {
      const double d = v->get<double>();
      if (!(d >= 0.0) || std::floor(d) != d || d > 9.0e15) {
        bad(where(key), "expected a non-negative integer");
      }
      return static_cast<std::uint64_t>(d);
    }
    bad(where(key), "expected a non-negative integer");
  }

  bool boolean(const std::string& key, bool def) {
    const Json* v = get(key);
    if (!v) return def;
    if (!v->is_boolean()) bad(where(key), "expected true or false");
    return v->get<bool>();
  }

  std::string text(const std::string& key, const std::string& def) {
    const Json* v = get(key);
    if (!v) return def;
    if (!v->is_string()) bad(where(key), "expected a string");
    return v->get<std::string>();
  }

  // A number becomes a constant vector of length `fill` when fill > 0.
  std::optional<Vec> vector(const std::string& key, Eigen::Index fill = 0) {
    const Json* v = get(key);
    if (!v) return std::nullopt;
    if (v->is_number() && fill > 0) return Vec::Constant(fill, v->get<double>());
    if (!v->is_array()) bad(where(key), "expected an array of numbers");
    Vec out(static_cast<Eigen::Index>(v->size()));
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number()) bad(where(key), "expected an array of numbers");
      out[static_cast<Eigen::Index>(i)] = (*v)[i].get<double>();
    }
    return out;
  }

  // Rows as nested arrays. A number becomes that multiple of the identity of
  // size `identity` when identity > 0.
  std::optional<Mat> matrix(const std::string& key, Eigen::Index identity = 0) {
    const Json* v = get(key);
    if (!v) return std::nullopt;
    if (v->is_number() && identity > 0) {
      return Mat(v->get<double>() * Mat::Identity(identity, identity));
    }
    if (!v->is_array() || v->empty()) bad(where(key), "expected an array of rows");
    const auto rows = static_cast<Eigen::Index>(v->size());
    Eigen::Index cols = -1;
    Mat out;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const Json& row = (*v)[static_cast<std::size_t>(i)];
      if (!row.is_array()) bad(where(key), "expected an array of rows");
      if (cols < 0) {
        cols = static_cast<Eigen::Index>(row.size());
        out.resize(rows, cols);
      }
      if (static_cast<Eigen::Index>(row.size()) != cols) bad(where(key), "rows differ in length");
      for (Eigen::Index j = 0; j < cols; ++j) {
        const Json& x = row[static_cast<std::size_t>(j)];
        if (!x.is_number()) bad(where(key), "expected numbers");
        out(i, j) = x.get<double>();
      }
    }
    return out;
  }

  Fields table(const std::string& key) {
    const Json* v = get(key);
    return Fields(v, where(key));
  }

  void finish() const {
    if (!obj_) return;
    for (const auto& [key, value] : obj_->items()) {
      if (!used_.count(key)) bad(where(key), "unknown field");
    }
  }

 private:
  std::string label() const { return path_.empty() ? "<root>" : path_; }

  const Json* obj_;
  std::string path_;
  std::set<std::string> used_;
};

IntegratorConfig parse_integrator(Fields f, IntegratorConfig cfg, double fastest_gain) {
  const std::string method = f.text("method", to_string(cfg.method));
  try {
    cfg.method = parse_method(method);
  } catch (const Error&) {
    bad(f.where("method"), "expected rk4 or rk45, got '" + method + "'");
  }
  const auto dt = f.opt_number("dt");
  if (dt) {
    cfg.dt = *dt;
  } else if (cfg.method == Method::kRk4) {
    cfg.dt = std::min(cfg.dt, 0.1 / std::max(1.0, std::abs(fastest_gain)));
  }
  cfg.abs_tol = f.number("abs_tol", cfg.abs_tol);
  cfg.rel_tol = f.number("rel_tol", cfg.rel_tol);
  cfg.dt_max = f.number("dt_max", cfg.dt_max);
  cfg.horizon = f.number("horizon", cfg.horizon);
  cfg.record_dt = f.number("record_dt", cfg.record_dt);
  cfg.hold_period = f.number("hold_period", cfg.hold_period);
  f.finish();
  return cfg;
}

IntegratorConfig fixed_step_default() {
  IntegratorConfig cfg;
  cfg.method = Method::kRk4;
  cfg.dt = 1e-3;
  cfg.horizon = 15.0;
  cfg.record_dt = 0.01;
  return cfg;
}

std::optional<ProjectionSet> parse_projection(Fields f, std::optional<ProjectionSet> def) {
  if (!f.present()) return def;
  if (!f.boolean("enabled", true)) {
    f.finish();
    return std::nullopt;
  }
  ProjectionSet set = def.value_or(ProjectionSet{});
  set.theta_bound = f.number("theta_bound", set.theta_bound);
  set.smoothing = f.number("smoothing", set.smoothing);
  f.finish();
  return set;
}

ReferenceInput parse_input(Fields f, ReferenceInput r) {
  const std::string kind = f.text("kind", ReferenceInput::kind_name(r.kind));
  try {
    r.kind = ReferenceInput::parse_kind(kind);
  } catch (const Error&) {
    bad(f.where("kind"), "expected zero, step or sine, got '" + kind + "'");
  }
  r.amplitude = f.number("amplitude", r.amplitude);
  r.t_on = f.number("t_on", r.t_on);
  r.frequency = f.number("frequency", r.frequency);
  r.offset = f.number("offset", r.offset);
  f.finish();
  return r;
}

SmoothSignal parse_signal(Fields f, SmoothSignal s) {
  s.amplitude = f.number("amplitude", s.amplitude);
  s.omega = f.number("omega", s.omega);
  s.phase = f.number("phase", s.phase);
  s.offset = f.number("offset", s.offset);
  f.finish();
  return s;
}

void parse_certification(Fields f, Family family, CertificationOptions& c) {
  c.enabled = f.boolean("enabled", c.enabled);
  switch (family) {
    case Family::kOrmScalar:
    case Family::kCrmScalar:
      c.t1 = f.opt_number("t1");
      break;
    case Family::kMimo:
      c.t2 = f.number("t2", c.t2);
      break;
    case Family::kCmracCo:
      c.t3 = f.number("t3", c.t3);
      break;
    case Family::kRobot:
      c.skew_samples = static_cast<int>(f.integer("skew_samples", c.skew_samples));
      break;
    default:
      break;
  }
  f.finish();
}

ScalarScenario parse_scalar(Fields& root, Family family, const std::string& name) {
  ScalarScenario s;
  s.name = name;
  {
    Fields f = root.table("plant");
    s.plant.a_p = f.number("a_p", s.plant.a_p);
    s.plant.k_p = f.number("k_p", s.plant.k_p);
    f.finish();
  }
  {
    Fields f = root.table("reference");
    s.ref.a_m = f.number("a_m", s.ref.a_m);
    s.ref.k_m = f.number("k_m", s.ref.k_m);
    s.ref.ell = f.number("ell", family == Family::kCrmScalar ? -10.0 : 0.0);
    if (family == Family::kOrmScalar && s.ref.ell != 0.0) {
      bad(f.where("ell"), "orm-scalar requires ell = 0 (use family crm-scalar)");
    }
    if (family == Family::kCrmScalar && !(s.ref.ell < 0.0)) {
      bad(f.where("ell"), "crm-scalar requires ell < 0, got " + format_double(s.ref.ell));
    }
    f.finish();
  }
  {
    Fields f = root.table("adaptation");
    s.adapt.gamma = f.number("gamma", s.adapt.gamma);
    s.adapt.theta0 = f.number("theta0", s.adapt.theta0);
    s.adapt.k0 = f.number("k0", s.adapt.k0);
    f.finish();
  }
  s.adapt.projection = parse_projection(root.table("projection"), std::nullopt);
  s.input = parse_input(root.table("input"), s.input);
  {
    Fields f = root.table("initial");
    s.x_p0 = f.number("x_p0", s.x_p0);
    s.x_m0 = f.number("x_m0", s.x_m0);
    f.finish();
  }
  s.integrator = parse_integrator(root.table("integrator"), fixed_step_default(),
                                  std::max(s.adapt.gamma, std::abs(s.ref.ell)));
  return s;
}

MimoScenario parse_mimo(Fields& root, const std::string& name) {
  MimoScenario s = mimo_demo_scenario();
  s.name = name;
  {
    Fields f = root.table("plant");
    if (auto A = f.matrix("A")) s.plant.A = *A;
    if (auto B = f.matrix("B")) s.plant.B = *B;
    if (auto L = f.matrix("Lambda", s.plant.B.cols())) s.plant.Lambda = *L;
    s.plant.lambda_bar = f.number("lambda_bar", s.plant.lambda_bar);
    f.finish();
  }
  const Eigen::Index n = s.plant.A.rows();
  const Eigen::Index m = s.plant.B.cols();
  {
    Fields f = root.table("reference");
    if (auto Am = f.matrix("A_m")) s.ref.A_m = *Am;
    s.ref.g = f.number("g", s.ref.g);
    if (auto L = f.matrix("L")) s.ref.L_override = *L;
    f.finish();
  }
  {
    Fields f = root.table("adaptation");
    s.adapt.gamma = f.number("gamma", s.adapt.gamma);
    if (auto T = f.matrix("Theta0")) s.adapt.Theta0 = *T;
    if (auto K = f.matrix("K0", m)) s.adapt.K0 = *K;
    f.finish();
  }
  {
    Fields f = root.table("projection");
    if (f.present()) {
      if (!f.boolean("enabled", true)) {
        s.adapt.theta_projection.reset();
        s.adapt.k_projection.reset();
      } else {
        ProjectionSet theta = s.adapt.theta_projection.value_or(ProjectionSet{});
        ProjectionSet k = s.adapt.k_projection.value_or(ProjectionSet{2.0, 0.1});
        theta.theta_bound = f.number("theta_bound", theta.theta_bound);
        k.theta_bound = f.number("k_bound", k.theta_bound);
        theta.smoothing = k.smoothing = f.number("smoothing", theta.smoothing);
        s.adapt.theta_projection = theta;
        s.adapt.k_projection = k;
      }
      f.finish();
    }
  }
  if (root.has("inputs")) {
    const Json* arr = root.get("inputs");
    if (!arr->is_array()) bad("inputs", "expected an array of tables");
    s.inputs.clear();
    for (std::size_t i = 0; i < arr->size(); ++i) {
      s.inputs.push_back(
          parse_input(Fields(&(*arr)[i], "inputs[" + std::to_string(i) + "]"), ReferenceInput{}));
    }
  } else {
    const ReferenceInput r = parse_input(root.table("input"), ReferenceInput{});
    s.inputs.assign(static_cast<std::size_t>(m), r);
  }
  if (static_cast<Eigen::Index>(s.inputs.size()) != m) {
    bad("inputs", "expected " + std::to_string(m) + " entries (one per input channel)");
  }
  {
    Fields f = root.table("initial");
    s.x_p0 = f.vector("x_p0", n).value_or(Vec::Zero(n));
    s.x_m0 = f.vector("x_m0", n).value_or(Vec::Zero(n));
    f.finish();
  }
  s.integrator = parse_integrator(root.table("integrator"), fixed_step_default(),
                                  std::max(s.adapt.gamma, std::abs(s.ref.g)));
  return s;
}

CmracConfig parse_cmrac(Fields& root, Family family, const std::string& name,
                        std::uint64_t seed) {
  CmracConfig c;
  c.name = name;
  c.variant = family == Family::kCmracCo ? CmracVariant::kCmracCo : CmracVariant::kCmrac;
  {
    Fields f = root.table("plant");
    c.plant.a_p = f.number("a_p", c.plant.a_p);
    c.plant.k_p = f.number("k_p", c.plant.k_p);
    f.finish();
  }
  {
    Fields f = root.table("reference");
    c.a_m = f.number("a_m", c.a_m);
    c.k_m = f.number("k_m", c.k_m);
    f.finish();
  }
  {
    Fields f = root.table("observer");
    c.ell = f.number("ell", c.ell);
    if (!(c.ell < 0.0)) bad(f.where("ell"), "must be < 0, got " + format_double(c.ell));
    f.finish();
  }
  {
    Fields f = root.table("adaptation");
    c.gamma = f.number("gamma", c.gamma);
    c.eta = f.number("eta", c.eta);
    c.theta0 = f.number("theta0", c.theta0);
    c.theta_hat0 = f.number("theta_hat0", c.theta_hat0);
    f.finish();
  }
  c.projection = parse_projection(root.table("projection"), c.projection);
  {
    Fields f = root.table("regions");
    c.regions.t_switch = f.number("t_switch", c.regions.t_switch);
    c.regions.amplitude = f.number("amplitude", c.regions.amplitude);
    c.regions.filter_tau = f.number("filter_tau", c.regions.filter_tau);
    f.finish();
  }
  {
    Fields f = root.table("noise");
    c.noise.enabled = f.boolean("enabled", c.noise.enabled);
    c.noise.seed = f.unsigned_integer("seed", seed);
    c.noise.rate = f.number("rate", c.noise.rate);
    c.noise.raw_variance = f.number("raw_variance", c.noise.raw_variance);
    c.noise.clamp = f.number("clamp", c.noise.clamp);
    f.finish();
  }
  {
    Fields f = root.table("initial");
    c.x_a0 = f.number("x_a0", c.x_a0);
    c.x_m0 = f.number("x_m0", c.x_m0);
    c.x_o0 = f.number("x_o0", c.x_o0);
    f.finish();
  }
  c.integrator = parse_integrator(root.table("integrator"), CmracConfig::default_integrator(),
                                  std::max({c.gamma, std::abs(c.ell), c.eta}));
  return c;
}

BacksteppingScenario parse_backstepping(Fields& root, const std::string& name) {
  BacksteppingScenario s;
  s.name = name;
  std::string regressor = "x1_squared";
  int n = 2;
  double theta_star = 1.0, beta0 = 1.0, beta1 = 0.0;
  {
    Fields f = root.table("system");
    regressor = f.text("regressor", regressor);
    n = static_cast<int>(f.integer("n", n));
    theta_star = f.number("theta_star", theta_star);
    beta0 = f.number("beta0", beta0);
    beta1 = f.number("beta1", beta1);
    f.finish();
  }
  if (n < 1 || n > 3) {
    throw Error(ErrorKind::kUnsupportedOrder,
                "system.n: orders 1..3 are supported, got " + std::to_string(n));
  }
  const SmoothSignal y_r = parse_signal(root.table("reference"), SmoothSignal{});
  try {
    s.system = strict_feedback_preset(regressor, n, theta_star, beta0, beta1, y_r);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kInvalidConfig) throw;
    bad("system.regressor", "expected x1_squared or squares, got '" + regressor + "'");
  }
  const Eigen::Index p = s.system.p;
  {
    Fields f = root.table("design");
    s.design.c = f.vector("c", n).value_or(Vec::Constant(n, 2.0));
    s.design.Gamma = f.matrix("gamma", p).value_or(Mat::Identity(p, p));
    f.finish();
  }
  {
    Fields f = root.table("initial");
    s.x0 = f.vector("x0", n).value_or(Vec::Zero(n));
    s.theta0 = f.vector("theta0", p).value_or(Vec::Zero(p));
    f.finish();
  }
  s.integrator = parse_integrator(root.table("integrator"),
                                  BacksteppingScenario::default_integrator(), 0.0);
  return s;
}

RobotScenario parse_robot(Fields& root, const std::string& name) {
  RobotScenario s;
  s.name = name;
  {
    Fields f = root.table("model");
    s.model.m1 = f.number("m1", s.model.m1);
    s.model.m2 = f.number("m2", s.model.m2);
    s.model.l1 = f.number("l1", s.model.l1);
    s.model.l2 = f.number("l2", s.model.l2);
    s.model.gravity = f.number("gravity", s.model.gravity);
    f.finish();
  }
  {
    Fields f = root.table("controller");
    if (auto kd = f.matrix("k_d", 2)) s.controller.k_d = *kd;
    s.controller.lambda = f.number("lambda", s.controller.lambda);
    if (auto g = f.matrix("gamma", 3)) s.controller.Gamma = *g;
    f.finish();
  }
  {
    Fields f = root.table("trajectory");
    s.desired.q1 = parse_signal(f.table("q1"), s.desired.q1);
    s.desired.q2 = parse_signal(f.table("q2"), s.desired.q2);
    f.finish();
  }
  {
    Fields f = root.table("initial");
    s.q0 = f.vector("q0", 2).value_or(s.q0);
    s.qd0 = f.vector("qd0", 2).value_or(s.qd0);
    s.a_hat0 = f.vector("a_hat0", 3).value_or(s.a_hat0);
    f.finish();
  }
  s.integrator = parse_integrator(root.table("integrator"), RobotScenario::default_integrator(), 0.0);
  return s;
}

Json toml_node_to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    Json obj = Json::object();
    for (const auto& [key, value] : *t) obj[std::string(key.str())] = toml_node_to_json(value);
    return obj;
  }
  if (const auto* a = node.as_array()) {
    Json arr = Json::array();
    for (const auto& value : *a) arr.push_back(toml_node_to_json(value));
    return arr;
  }
  if (const auto* v = node.as_integer()) return Json(v->get());
  if (const auto* v = node.as_floating_point()) return Json(v->get());
  if (const auto* v = node.as_boolean()) return Json(v->get());
  if (const auto* v = node.as_string()) return Json(v->get());
  throw Error(ErrorKind::kInvalidConfig, "date and time values are not supported in scenarios");
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::kOrmScalar: return "orm-scalar";
    case Family::kCrmScalar: return "crm-scalar";
    case Family::kMimo: return "mimo";
    case Family::kCmrac: return "cmrac";
    case Family::kCmracCo: return "cmrac-co";
    case Family::kBackstepping: return "backstepping";
    case Family::kRobot: return "robot";
  }
  return "crm-scalar";
}

Family parse_family(const std::string& name) {
  for (Family f : {Family::kOrmScalar, Family::kCrmScalar, Family::kMimo, Family::kCmrac,
                   Family::kCmracCo, Family::kBackstepping, Family::kRobot}) {
    if (to_string(f) == name) return f;
  }
  bad("family",
      "expected one of orm-scalar, crm-scalar, mimo, cmrac, cmrac-co, backstepping, robot; got '" +
          name + "'");
}

const IntegratorConfig& ScenarioConfig::integrator() const {
  return std::visit([](const auto& m) -> const IntegratorConfig& { return m.integrator; },
                    model);
}

std::filesystem::path ScenarioConfig::output_dir() const {
  return output.empty() ? std::filesystem::path("runs") / name : std::filesystem::path(output);
}

void ScenarioConfig::validate() const {
  std::visit([](const auto& m) { m.validate(); }, model);
  if (family == Family::kRobot && certification.skew_samples < 1) {
    bad("certificates.skew_samples", "must be >= 1");
  }
  if (certification.t1 && !(*certification.t1 > 0.0)) bad("certificates.t1", "must be > 0");
  if (!(certification.t2 > 0.0)) bad("certificates.t2", "must be > 0");
  if (!(certification.t3 > 0.0)) bad("certificates.t3", "must be > 0");
  if (!(tail_start >= 0.0)) bad("analysis.tail_start", "must be >= 0");
}

ScenarioConfig parse_scenario(const Json& document) {
  if (!document.is_object()) bad("<root>", "expected a table");
  ScenarioConfig cfg;
  cfg.document = document;
  Fields root(&document, "");
  const Json* fam = root.get("family");
  if (!fam) bad("family", "missing");
  if (!fam->is_string()) bad("family", "expected a string");
  cfg.family = parse_family(fam->get<std::string>());
  cfg.name = root.text("name", to_string(cfg.family));
  if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos) {
    bad("name", "must be a non-empty name without path separators");
  }
  cfg.seed = root.unsigned_integer("seed", cfg.seed);
  cfg.output = root.text("output", "");

  switch (cfg.family) {
    case Family::kOrmScalar:
    case Family::kCrmScalar:
      cfg.model = parse_scalar(root, cfg.family, cfg.name);
      break;
    case Family::kMimo:
      cfg.model = parse_mimo(root, cfg.name);
      break;
    case Family::kCmrac:
    case Family::kCmracCo: {
      cfg.model = parse_cmrac(root, cfg.family, cfg.name, cfg.seed);
      Fields f = root.table("comparison");
      cfg.compare = f.boolean("enabled", cfg.compare);
      f.finish();
      break;
    }
    case Family::kBackstepping:
      cfg.model = parse_backstepping(root, cfg.name);
      break;
    case Family::kRobot:
      cfg.model = parse_robot(root, cfg.name);
      break;
  }
  parse_certification(root.table("certificates"), cfg.family, cfg.certification);
  {
    Fields f = root.table("analysis");
    cfg.tail_start = f.number("tail_start", cfg.tail_start);
    f.finish();
  }
  root.finish();
  cfg.validate();
  return cfg;
}

Json toml_to_json(std::string_view text, const std::string& source) {
  try {
    const toml::table table = toml::parse(text, source);
    return toml_node_to_json(table);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
        << e.description();
    throw Error(ErrorKind::kInvalidConfig, msg.str());
  }
}

ScenarioConfig parse_scenario_toml(std::string_view text, const std::string& source) {
  return parse_scenario(toml_to_json(text, source));
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".json") return parse_scenario(read_json_file(path));
  if (ext == ".toml") return parse_scenario_toml(read_text_file(path), path.string());
  throw Error(ErrorKind::kInvalidConfig,
              path.string() + ": config must end in .toml or .json");
}

const std::vector<std::string>& sweep_axes(Family family) {
  static const std::vector<std::string> scalar = {
      "plant.a_p",          "plant.k_p",         "reference.a_m",      "reference.k_m",
      "reference.ell",      "adaptation.gamma",  "adaptation.theta0",  "adaptation.k0",
      "projection.theta_bound", "input.amplitude", "input.frequency", "input.t_on",
      "initial.x_p0",       "initial.x_m0",      "integrator.dt",      "integrator.horizon"};
  static const std::vector<std::string> mimo = {
      "reference.g",         "adaptation.gamma", "projection.theta_bound", "projection.k_bound",
      "input.amplitude",     "integrator.dt",    "integrator.horizon"};
  static const std::vector<std::string> cmrac = {
      "plant.a_p",        "plant.k_p",          "reference.a_m",     "reference.k_m",
      "observer.ell",     "adaptation.gamma",   "adaptation.eta",    "projection.theta_bound",
      "regions.t_switch", "regions.amplitude",  "regions.filter_tau", "noise.seed",
      "noise.rate",       "noise.clamp",        "noise.raw_variance", "initial.x_a0",
      "integrator.dt",    "integrator.horizon"};
  static const std::vector<std::string> backstepping = {
      "system.theta_star", "system.beta0",  "system.beta1",      "design.c",
      "design.gamma",      "reference.amplitude", "reference.omega", "integrator.dt",
      "integrator.horizon"};
  static const std::vector<std::string> robot = {
      "model.m1",   "model.m2",         "controller.lambda", "controller.k_d",
      "controller.gamma", "integrator.dt", "integrator.horizon", "seed"};
  switch (family) {
    case Family::kOrmScalar:
    case Family::kCrmScalar: return scalar;
    case Family::kMimo: return mimo;
    case Family::kCmrac:
    case Family::kCmracCo: return cmrac;
    case Family::kBackstepping: return backstepping;
    case Family::kRobot: return robot;
  }
  return scalar;
}

std::string resolve_axis(Family family, const std::string& axis) {
  std::string path = axis;
  const bool cmrac = family == Family::kCmrac || family == Family::kCmracCo;
  if (axis == "ell") {
    if (family == Family::kMimo) path = "reference.g";
    else if (cmrac) path = "observer.ell";
    else path = "reference.ell";
  } else if (axis == "gamma") {
    if (family == Family::kBackstepping) path = "design.gamma";
    else if (family == Family::kRobot) path = "controller.gamma";
    else path = "adaptation.gamma";
  } else if (axis == "seed" && cmrac) {
    path = "noise.seed";
  }
  const auto& axes = sweep_axes(family);
  if (std::find(axes.begin(), axes.end(), path) == axes.end()) {
    std::string list;
    for (const auto& a : axes) list += (list.empty() ? "" : ", ") + a;
    throw Error(ErrorKind::kInvalidConfig, "axis '" + axis + "' is not valid for family " +
                                               to_string(family) + " (valid: " + list + ")");
  }
  return path;
}

bool is_ell_axis(Family family, const std::string& path) {
  switch (family) {
    case Family::kOrmScalar:
    case Family::kCrmScalar: return path == "reference.ell";
    case Family::kMimo: return path == "reference.g";
    case Family::kCmrac:
    case Family::kCmracCo: return path == "observer.ell";
    default: return false;
  }
}

ScenarioConfig with_parameter(const ScenarioConfig& base, const std::string& path,
                              double value, bool couple_gamma) {
  Json doc = base.document;
  const auto set = [&doc](const std::string& dotted, double v) {
    Json* node = &doc;
    std::size_t start = 0;
    while (true) {
      const std::size_t dot = dotted.find('.', start);
      const std::string key = dotted.substr(start, dot - start);
      if (dot == std::string::npos) {
        if (std::floor(v) == v && std::abs(v) < 9.0e15) {
          (*node)[key] = static_cast<std::int64_t>(v);
        } else {
          (*node)[key] = v;
        }
        return;
      }
      if (!node->contains(key) || !(*node)[key].is_object()) (*node)[key] = Json::object();
      node = &(*node)[key];
      start = dot + 1;
    }
  };
  set(path, value);
  if (couple_gamma) {
    if (!is_ell_axis(base.family, path)) {
      throw Error(ErrorKind::kInvalidConfig, "--couple-gamma requires the ell axis");
    }
    set("adaptation.gamma", std::abs(value));
  }
  return parse_scenario(doc);
}

}  // namespace crmlab
