#include "crmlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "crmlab/error.hpp"
#include "crmlab/signal_ops.hpp"

namespace crmlab {
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double tail_of(const Trajectory& traj, const std::string& channel, double t_start) {
  const double T = traj.back_time();
  if (t_start >= T) return 0.0;
  return sample_at(traj, channel, T) - sample_at(traj, channel, t_start);
}

double final_abs(const Trajectory& traj, const std::string& channel) {
  return std::abs(traj.channel(channel).back());
}

std::vector<std::string> indexed(const std::string& stem, int count) {
  std::vector<std::string> out;
  for (int i = 1; i <= count; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

std::vector<std::string> prefixed(const Trajectory& traj, const std::string& prefix) {
  std::vector<std::string> out;
  for (const auto& c : traj.channel_names()) {
    if (c.rfind(prefix, 0) == 0) out.push_back(c);
  }
  return out;
}

void run_scalar(const ScenarioConfig& cfg, const ScalarScenario& s, RunResult& out) {
  out.trajectory = simulate_scalar(s);
  const Trajectory& traj = out.trajectory;
  if (cfg.certification.enabled) {
    out.certificates = certify_scalar_run(traj, s);
    if (cfg.certification.t1) {
      TailReport tail = truncated_certificates(traj, s, *cfg.certification.t1);
      out.certificates.insert(out.certificates.end(), tail.certificates.begin(),
                              tail.certificates.end());
      out.measurements.insert(out.measurements.end(), tail.measurements.begin(),
                              tail.measurements.end());
    }
  }
  const OscillationMetrics osc = oscillation_metrics(traj, "theta");
  out.measurements.push_back({"e_final", final_abs(traj, "e"), ""});
  out.measurements.push_back({"V0", s.initial_lyapunov(), ""});
  out.measurements.push_back({"delta_xm_sup", delta_xm_sup(traj), "sup |x_m - x_m_o|"});
  out.measurements.push_back({"theta_dot_zero_crossings",
                              static_cast<double>(osc.zero_crossings), ""});
  out.measurements.push_back({"theta_dot_L2", osc.l2_of_derivative, ""});
  out.measurements.push_back({"theta_dot_tail_L2", tail_of(traj, "int_theta_dot2", cfg.tail_start),
                              "from t=" + format_double(cfg.tail_start)});
}

void run_mimo(const ScenarioConfig& cfg, const MimoScenario& s, RunResult& out) {
  out.trajectory = simulate_mimo(s);
  const Trajectory& traj = out.trajectory;
  if (cfg.certification.enabled) {
    MimoCertification c = certify_mimo_run(traj, s, cfg.certification.t2);
    out.certificates = std::move(c.certificates);
    out.measurements = std::move(c.measurements);
  }
  const int n = static_cast<int>(s.plant.n());
  double sup = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    double d2 = 0.0;
    for (int i = 1; i <= n; ++i) {
      const std::string idx = std::to_string(i);
      const double d = traj.channel("x_m_" + idx)[k] - traj.channel("x_m_o_" + idx)[k];
      d2 += d * d;
    }
    sup = std::max(sup, std::sqrt(d2));
  }
  out.measurements.push_back({"e_norm_final", final_abs(traj, "e_norm"), ""});
  out.measurements.push_back({"V0", s.initial_lyapunov(), ""});
  out.measurements.push_back({"delta_xm_sup", sup, "sup ||x_m - x_m_o||"});
  out.measurements.push_back({"theta_dot_tail_L2", tail_of(traj, "int_Theta_dot2", cfg.tail_start),
                              "from t=" + format_double(cfg.tail_start)});
}

void push_summary(const VariantSummary& v, const std::string& prefix, RunResult& out) {
  out.measurements.push_back({prefix + "max_du_dt_region2", v.max_du_dt_region2, ""});
  out.measurements.push_back({prefix + "l2_du_dt_region2", v.l2_du_dt_region2, ""});
  out.measurements.push_back({prefix + "max_e_region1", v.max_e_region1, ""});
  out.measurements.push_back({prefix + "max_e_region2", v.max_e_region2, ""});
}

void run_cmrac(const ScenarioConfig& cfg, const CmracConfig& c, RunResult& out) {
  out.trajectory = simulate_cmrac(c);
  const Trajectory& traj = out.trajectory;
  if (cfg.certification.enabled && c.variant == CmracVariant::kCmracCo) {
    CmracCertification cert = certify_cmracco_run(traj, c, cfg.certification.t3);
    out.certificates = std::move(cert.certificates);
    out.measurements = std::move(cert.measurements);
  }
  out.measurements.push_back({"e_m_final", final_abs(traj, "e_m"), ""});
  out.measurements.push_back({"e_o_final", final_abs(traj, "e_o"), ""});
  out.measurements.push_back({"eps_theta_final", final_abs(traj, "eps_theta"), ""});
  out.measurements.push_back({"theta_dot_tail_L2", tail_of(traj, "int_theta_dot2", cfg.tail_start),
                              "from t=" + format_double(cfg.tail_start)});
  const VariantSummary own = summarize_variant(traj, c);
  push_summary(own, "", out);
  if (cfg.compare) {
    CmracConfig other = c;
    other.variant = c.variant == CmracVariant::kCmracCo ? CmracVariant::kCmrac
                                                        : CmracVariant::kCmracCo;
    out.paired = simulate_cmrac(other);
    const VariantSummary theirs = summarize_variant(*out.paired, other);
    ComparisonReport rep;
    rep.cmrac = c.variant == CmracVariant::kCmrac ? own : theirs;
    rep.cmrac_co = c.variant == CmracVariant::kCmracCo ? own : theirs;
    rep.cmrac_co_wins = rep.cmrac_co.max_du_dt_region2 < rep.cmrac.max_du_dt_region2;
    push_summary(theirs, to_string(other.variant) + "_", out);
    out.comparison = rep;
  }
}

void run_backstepping(const ScenarioConfig& cfg, const BacksteppingScenario& s, RunResult& out) {
  out.trajectory = simulate_backstepping(s);
  const Trajectory& traj = out.trajectory;
  if (cfg.certification.enabled) out.certificates = certify_backstepping_run(traj, s);
  out.measurements.push_back({"V0", s.initial_lyapunov(), ""});
  out.measurements.push_back({"z_1_final", final_abs(traj, "z_1"), ""});
  out.measurements.push_back({"int_z2", traj.channel("int_z2").back(), ""});
}

void run_robot(const ScenarioConfig& cfg, const RobotScenario& s, RunResult& out) {
  out.trajectory = simulate_robot(s);
  const Trajectory& traj = out.trajectory;
  if (cfg.certification.enabled) {
    out.certificates = certify_robot_run(traj, s);
    const double skew =
        skew_symmetry_residual(s.model, cfg.certification.skew_samples, cfg.seed);
    BoundCertificate c = make_certificate("skew_symmetry", skew, 1e-8, 0.0,
                                          std::to_string(cfg.certification.skew_samples) +
                                              " random samples");
    c.pass = skew < 1e-8;
    out.certificates.push_back(c);
  }
  const double q1 = traj.channel("q_tilde_1").back();
  const double q2 = traj.channel("q_tilde_2").back();
  out.measurements.push_back({"q_tilde_final", std::hypot(q1, q2), ""});
}

Json certificate_entry(const BoundCertificate& c) {
  Json j = Json::object();
  j["name"] = c.name;
  j["measured"] = c.measured;
  j["bound"] = c.bound;
  j["margin"] = c.margin;
  j["pass"] = c.pass;
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

Json measurement_entry(const Measurement& m) {
  Json j = Json::object();
  j["name"] = m.name;
  j["value"] = m.value;
  if (!m.note.empty()) j["note"] = m.note;
  return j;
}

Json summary_json(const VariantSummary& v) {
  Json j = Json::object();
  j["variant"] = v.variant;
  j["max_du_dt_region2"] = v.max_du_dt_region2;
  j["l2_du_dt_region2"] = v.l2_du_dt_region2;
  j["max_e_region1"] = v.max_e_region1;
  j["l2_e_region1"] = v.l2_e_region1;
  j["max_e_region2"] = v.max_e_region2;
  j["l2_e_region2"] = v.l2_e_region2;
  return j;
}

Json integrator_json(const IntegratorConfig& c) {
  Json j = Json::object();
  j["method"] = to_string(c.method);
  j["dt"] = c.dt;
  if (c.method == Method::kRk45) {
    j["abs_tol"] = c.abs_tol;
    j["rel_tol"] = c.rel_tol;
    j["dt_max"] = c.dt_max;
  }
  j["horizon"] = c.horizon;
  j["record_dt"] = c.record_dt;
  j["hold_period"] = c.hold_period;
  return j;
}

std::string point_dir_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "point_%03zu", index);
  return buf;
}

}  // namespace

double RunResult::measurement(const std::string& name) const {
  for (const auto& m : measurements) {
    if (m.name == name) return m.value;
  }
  return kNaN;
}

RunResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  RunResult out;
  std::visit(
      [&](const auto& model) {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, ScalarScenario>) run_scalar(cfg, model, out);
        if constexpr (std::is_same_v<T, MimoScenario>) run_mimo(cfg, model, out);
        if constexpr (std::is_same_v<T, CmracConfig>) run_cmrac(cfg, model, out);
        if constexpr (std::is_same_v<T, BacksteppingScenario>) run_backstepping(cfg, model, out);
        if constexpr (std::is_same_v<T, RobotScenario>) run_robot(cfg, model, out);
      },
      cfg.model);
  return out;
}

std::vector<PlotPanel> plot_panels(const ScenarioConfig& cfg, const RunResult& result) {
  const Trajectory& tr = result.trajectory;
  const std::string& nm = cfg.name;
  std::vector<PlotPanel> panels;
  switch (cfg.family) {
    case Family::kOrmScalar:
    case Family::kCrmScalar:
      panels.push_back(channel_panel(tr, "states", nm + ": states", "x",
                                     {"x_p", "x_m", "x_m_o"}));
      panels.push_back(channel_panel(tr, "error", nm + ": tracking error", "e", {"e"}));
      panels.push_back(channel_panel(tr, "parameters", nm + ": adaptive parameters",
                                     "gain", {"theta", "k"}));
      panels.push_back(channel_panel(tr, "control", nm + ": control input", "u", {"u"}));
      panels.push_back(channel_panel(tr, "lyapunov", nm + ": Lyapunov function", "V", {"V"}));
      break;
    case Family::kMimo: {
      std::vector<std::string> states = prefixed(tr, "x_p_");
      for (const auto& c : prefixed(tr, "x_m_")) {
        if (c.rfind("x_m_o_", 0) != 0) states.push_back(c);
      }
      panels.push_back(channel_panel(tr, "states", nm + ": states", "x", states));
      panels.push_back(channel_panel(tr, "error", nm + ": tracking error norm", "|e|",
                                     {"e_norm"}));
      std::vector<std::string> gains = prefixed(tr, "Theta_");
      for (const auto& c : prefixed(tr, "K_")) gains.push_back(c);
      panels.push_back(channel_panel(tr, "parameters", nm + ": adaptive gains", "gain", gains));
      panels.push_back(channel_panel(tr, "lyapunov", nm + ": Lyapunov function", "V", {"V"}));
      break;
    }
    case Family::kCmrac:
    case Family::kCmracCo: {
      const std::string model = tr.has_channel("x_m") ? "x_m" : "x_m_o";
      panels.push_back(channel_panel(tr, "states", nm + ": states", "x",
                                     {model, "x_a", "x_o"}));
      panels.push_back(channel_panel(tr, "errors", nm + ": errors", "e", {"e_m", "e_o"}));
      panels.push_back(channel_panel(tr, "control", nm + ": control input", "u", {"u"}));
      PlotPanel du = channel_panel(tr, "du_dt", nm + ": discrete control rate", "du/dt",
                                   {"du_dt"});
      if (result.paired) {
        const std::string own = to_string(std::get<CmracConfig>(cfg.model).variant);
        const std::string other = own == "cmrac" ? "cmrac-co" : "cmrac";
        du.series.front().label = own;
        du.series.insert(du.series.begin(), {other, result.paired->channel("du_dt")});
      }
      panels.push_back(std::move(du));
      panels.push_back(channel_panel(tr, "theta", nm + ": direct parameter", "theta", {"theta"}));
      panels.push_back(channel_panel(tr, "theta_hat", nm + ": indirect parameter", "theta_hat",
                                     {"theta_hat"}));
      break;
    }
    case Family::kBackstepping: {
      const int n = std::get<BacksteppingScenario>(cfg.model).system.n;
      const int p = std::get<BacksteppingScenario>(cfg.model).system.p;
      panels.push_back(channel_panel(tr, "states", nm + ": states", "x", indexed("x_", n)));
      panels.push_back(channel_panel(tr, "errors", nm + ": error coordinates", "z",
                                     indexed("z_", n)));
      panels.push_back(channel_panel(tr, "parameters", nm + ": parameter estimate", "theta",
                                     indexed("theta_", p)));
      panels.push_back(channel_panel(tr, "control", nm + ": control input", "u", {"u"}));
      panels.push_back(channel_panel(tr, "lyapunov", nm + ": Lyapunov function", "V", {"V"}));
      break;
    }
    case Family::kRobot:
      panels.push_back(channel_panel(tr, "joints", nm + ": joint angles", "q",
                                     {"q_1", "q_d_1", "q_2", "q_d_2"}));
      panels.push_back(channel_panel(tr, "tracking", nm + ": tracking error", "q_tilde",
                                     {"q_tilde_1", "q_tilde_2"}));
      panels.push_back(channel_panel(tr, "parameters", nm + ": parameter estimates", "a_hat",
                                     {"a_hat_1", "a_hat_2", "a_hat_3"}));
      panels.push_back(channel_panel(tr, "torque", nm + ": joint torques", "tau",
                                     {"tau_1", "tau_2"}));
      panels.push_back(channel_panel(tr, "lyapunov", nm + ": Lyapunov function", "V", {"V"}));
      break;
  }
  return panels;
}

Json certificates_json(const ScenarioConfig& cfg, const RunResult& result) {
  Json j = Json::object();
  j["name"] = cfg.name;
  j["family"] = to_string(cfg.family);
  j["passed"] = result.passed();
  j["integrator"] = cfg.integrator().describe();
  Json certs = Json::array();
  for (const auto& c : result.certificates) certs.push_back(certificate_entry(c));
  j["certificates"] = std::move(certs);
  Json meas = Json::array();
  for (const auto& m : result.measurements) meas.push_back(measurement_entry(m));
  j["measurements"] = std::move(meas);
  if (result.comparison) {
    Json cmp = Json::object();
    cmp["cmrac"] = summary_json(result.comparison->cmrac);
    cmp["cmrac_co"] = summary_json(result.comparison->cmrac_co);
    cmp["cmrac_co_wins"] = result.comparison->cmrac_co_wins;
    j["comparison"] = std::move(cmp);
  }
  return j;
}

Json resolved_config_json(const ScenarioConfig& cfg) {
  Json j = Json::object();
  j["family"] = to_string(cfg.family);
  j["name"] = cfg.name;
  j["seed"] = cfg.seed;
  j["integrator"] = integrator_json(cfg.integrator());
  j["source"] = cfg.document;
  return j;
}

std::vector<fs::path> write_run_artifacts(const ScenarioConfig& cfg, const RunResult& result,
                                          const fs::path& dir) {
  std::vector<fs::path> written;
  const auto emit = [&](const fs::path& p, const std::string& content) {
    write_file_atomic(p, content);
    written.push_back(p);
  };
  emit(dir / "trajectory.csv", result.trajectory.to_csv());
  if (result.paired) {
    const auto& c = std::get<CmracConfig>(cfg.model);
    const std::string other = c.variant == CmracVariant::kCmracCo ? "cmrac" : "cmrac-co";
    emit(dir / ("trajectory_" + other + ".csv"), result.paired->to_csv());
  }
  emit(dir / "certificates.json", dump_json(certificates_json(cfg, result)));
  emit(dir / "config.json", dump_json(resolved_config_json(cfg)));
  for (const auto& panel : plot_panels(cfg, result)) {
    emit(dir / (panel.file_stem + ".svg"), render_svg(result.trajectory.times(), panel));
  }
  return written;
}

unsigned thread_cap() {
  if (const char* env = std::getenv("CRMLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

bool SweepResult::passed() const {
  return std::all_of(points.begin(), points.end(),
                     [](const SweepPoint& p) { return p.ok && p.passed; });
}

SweepResult run_sweep(const ScenarioConfig& base, const SweepOptions& options,
                      const fs::path& out_dir) {
  if (options.values.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "sweep needs at least one value");
  }
  SweepResult result;
  result.family = to_string(base.family);
  result.axis = resolve_axis(base.family, options.axis);
  result.couple_gamma = options.couple_gamma;
  const bool ell_axis = is_ell_axis(base.family, result.axis);
  if (options.couple_gamma && !ell_axis) {
    throw Error(ErrorKind::kInvalidConfig, "--couple-gamma requires the ell axis");
  }
  result.points.resize(options.values.size());
  for (std::size_t i = 0; i < options.values.size(); ++i) {
    result.points[i].index = i;
    result.points[i].value = options.values[i];
    if (options.couple_gamma) result.points[i].gamma = std::abs(options.values[i]);
    if (!out_dir.empty()) result.points[i].directory = point_dir_name(i);
  }

  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < result.points.size(); i = next.fetch_add(1)) {
      SweepPoint& p = result.points[i];
      try {
        ScenarioConfig cfg = with_parameter(base, result.axis, p.value, options.couple_gamma);
        cfg.name = base.name + "_" + point_dir_name(i);
        const RunResult run = run_scenario(cfg);
        p.ok = true;
        p.passed = run.passed();
        p.certificates = run.certificates;
        p.measurements = run.measurements;
        if (!out_dir.empty()) write_run_artifacts(cfg, run, out_dir / p.directory);
      } catch (const std::exception& e) {
        p.ok = false;
        p.error = e.what();
      }
    }
  };
  const unsigned cap = options.threads > 0 ? options.threads : thread_cap();
  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::size_t>(cap, result.points.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  if (!ell_axis) {
    result.fit_note = "no fit: axis is not ell";
  } else {
    std::vector<double> ells, peaks;
    for (const auto& p : result.points) {
      if (!p.ok) continue;
      double peak = kNaN;
      for (const auto& m : p.measurements) {
        if (m.name == "delta_xm_sup") peak = m.value;
      }
      if (std::isfinite(peak) && peak > 0.0 && p.value != 0.0) {
        ells.push_back(std::abs(p.value));
        peaks.push_back(peak);
      }
    }
    if (ells.empty()) {
      result.fit_note = "no fit: no point reports sup |x_m - x_m_o| with ell != 0";
    } else {
      try {
        result.fit = fit_peaking_exponent(ells, peaks);
      } catch (const Error& e) {
        result.fit_note = std::string("no fit: ") + e.what();
      }
    }
  }
  if (!out_dir.empty()) {
    write_file_atomic(out_dir / "sweep.json", dump_json(sweep_manifest(base, result)));
  }
  return result;
}

Json sweep_manifest(const ScenarioConfig& base, const SweepResult& result) {
  Json j = Json::object();
  j["name"] = base.name;
  j["family"] = result.family;
  j["axis"] = result.axis;
  j["couple_gamma"] = result.couple_gamma;
  j["passed"] = result.passed();
  Json points = Json::array();
  for (const auto& p : result.points) {
    Json e = Json::object();
    e["index"] = p.index;
    e["value"] = p.value;
    if (p.gamma) e["gamma"] = *p.gamma;
    e["ok"] = p.ok;
    if (!p.ok) e["error"] = p.error;
    e["passed"] = p.ok && p.passed;
    if (!p.directory.empty()) e["directory"] = p.directory;
    Json failed = Json::array();
    for (const auto& c : p.certificates) {
      if (!c.pass) failed.push_back(c.name);
    }
    e["certificates"] = p.certificates.size();
    e["failed_certificates"] = std::move(failed);
    Json meas = Json::object();
    for (const auto& m : p.measurements) meas[m.name] = m.value;
    e["measurements"] = std::move(meas);
    points.push_back(std::move(e));
  }
  j["points"] = std::move(points);
  if (result.fit) {
    Json fit = Json::object();
    fit["exponent"] = result.fit->exponent;
    fit["intercept"] = result.fit->intercept;
    fit["ell_abs"] = result.fit->ell_values;
    fit["peaks"] = result.fit->peaks;
    j["peaking_fit"] = std::move(fit);
  } else {
    j["peaking_fit"] = nullptr;
    j["fit_note"] = result.fit_note;
  }
  return j;
}

ReportSummary build_report(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorKind::kInvalidConfig, dir.string() + " is not a directory");
  }
  std::vector<fs::path> cert_files, sweep_files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string fname = entry.path().filename().string();
    if (fname == "certificates.json") cert_files.push_back(entry.path());
    if (fname == "sweep.json") sweep_files.push_back(entry.path());
  }
  std::sort(cert_files.begin(), cert_files.end());
  std::sort(sweep_files.begin(), sweep_files.end());
  std::set<fs::path> sweep_dirs;
  for (const auto& s : sweep_files) sweep_dirs.insert(s.parent_path());
  const auto inside_sweep = [&](const fs::path& p) {
    for (fs::path d = p.parent_path(); d.has_relative_path() && d != d.parent_path();
         d = d.parent_path()) {
      if (sweep_dirs.count(d)) return true;
    }
    return false;
  };

  ReportSummary out;
  std::ostringstream md;
  md << "# crmlab report: " << dir.filename().string() << "\n\n";
  std::ostringstream runs_md;
  for (const auto& file : cert_files) {
    if (inside_sweep(file)) continue;
    const Json j = read_json_file(file);
    ++out.runs;
    const bool passed = j.value("passed", false);
    if (!passed) ++out.failing;
    const fs::path rel = fs::relative(file.parent_path(), dir);
    runs_md << "## " << j.value("name", rel.string()) << " (" << j.value("family", "?")
            << "): " << (passed ? "PASS" : "FAIL") << "\n\n";
    runs_md << "Directory `" << rel.generic_string() << "`, " << j.value("integrator", "")
            << "\n\n";
    if (j.contains("certificates") && !j["certificates"].empty()) {
      runs_md << "| certificate | measured | bound | margin | result |\n|---|---|---|---|---|\n";
      for (const auto& c : j["certificates"]) {
        const auto num = [&](const char* k) {
          return c.contains(k) && c[k].is_number() ? format_double(c[k].get<double>())
                                                   : std::string("-");
        };
        runs_md << "| " << c.value("name", "") << " | " << num("measured") << " | "
                << num("bound") << " | " << num("margin") << " | "
                << (c.value("pass", false) ? "pass" : "FAIL") << " |\n";
      }
      runs_md << "\n";
    }
    if (j.contains("comparison")) {
      const auto& cmp = j["comparison"];
      runs_md << "CMRAC-CO max |du/dt| in region 2: "
              << format_double(cmp["cmrac_co"].value("max_du_dt_region2", 0.0))
              << ", CMRAC: " << format_double(cmp["cmrac"].value("max_du_dt_region2", 0.0))
              << (cmp.value("cmrac_co_wins", false) ? " (CMRAC-CO smaller)" : "") << "\n\n";
    }
    std::vector<std::string> svgs;
    for (const auto& e : fs::directory_iterator(file.parent_path())) {
      if (e.path().extension() == ".svg") svgs.push_back(e.path().filename().string());
    }
    std::sort(svgs.begin(), svgs.end());
    for (const auto& s : svgs) {
      runs_md << "![" << s << "](" << (rel / s).generic_string() << ")\n";
    }
    if (!svgs.empty()) runs_md << "\n";
  }
  std::ostringstream sweeps_md;
  for (const auto& file : sweep_files) {
    const Json j = read_json_file(file);
    ++out.sweeps;
    const fs::path rel = fs::relative(file.parent_path(), dir);
    int failed = 0;
    for (const auto& p : j["points"]) {
      if (!p.value("passed", false)) ++failed;
    }
    out.failing += failed;
    sweeps_md << "## Sweep " << j.value("name", rel.string()) << " over " << j.value("axis", "?")
              << (j.value("couple_gamma", false) ? " (gamma = |ell|)" : "") << ": "
              << (failed == 0 ? "PASS" : "FAIL") << "\n\n";
    sweeps_md << "| value | ok | certificates | delta_xm_sup | theta_dot_tail_L2 |\n"
                 "|---|---|---|---|---|\n";
    for (const auto& p : j["points"]) {
      const auto meas = [&](const char* k) {
        if (!p.contains("measurements") || !p["measurements"].contains(k) ||
            !p["measurements"][k].is_number()) {
          return std::string("-");
        }
        return format_double(p["measurements"][k].get<double>());
      };
      std::string status = p.value("ok", false) ? (p.value("passed", false) ? "pass" : "FAIL")
                                                : "error: " + p.value("error", "");
      sweeps_md << "| " << format_double(p.value("value", 0.0)) << " | " << status << " | "
                << p.value("certificates", 0) << " | " << meas("delta_xm_sup") << " | "
                << meas("theta_dot_tail_L2") << " |\n";
    }
    sweeps_md << "\n";
    if (j.contains("peaking_fit") && j["peaking_fit"].is_object()) {
      sweeps_md << "Peaking exponent: "
                << format_double(j["peaking_fit"].value("exponent", 0.0)) << "\n\n";
    } else {
      sweeps_md << j.value("fit_note", std::string("no fit")) << "\n\n";
    }
  }
  md << "Runs: " << out.runs << ", sweeps: " << out.sweeps << ", failing: " << out.failing
     << "\n\n";
  md << runs_md.str() << sweeps_md.str();
  out.markdown = md.str();
  return out;
}

}  // namespace crmlab
