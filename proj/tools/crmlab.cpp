#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crmlab/error.hpp"
#include "crmlab/experiment.hpp"
#include "crmlab/json_io.hpp"
#include "crmlab/scenario.hpp"

namespace fs = std::filesystem;
using namespace crmlab;

namespace {

// Exit codes: 0 all certificates pass, 1 a certificate failed, 2 invalid
// input, 3 the simulation itself failed.
constexpr int kFailed = 1;
constexpr int kInvalid = 2;
constexpr int kRuntime = 3;

bool is_input_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDivergence:
    case ErrorKind::kStepUnderflow:
    case ErrorKind::kOutsideSet:
    case ErrorKind::kSingularBeta:
    case ErrorKind::kSingularInertia:
      return false;
    default:
      return true;
  }
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    item = item.substr(first, item.find_last_not_of(" \t") - first + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || !std::isfinite(v)) {
      throw Error(ErrorKind::kInvalidConfig, "--values: '" + item + "' is not a number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorKind::kInvalidConfig, "--values: no values given");
  return out;
}

void print_certificates(const std::vector<BoundCertificate>& certs) {
  for (const auto& c : certs) {
    std::printf("  %-4s %-28s measured %-24s bound %s\n", c.pass ? "ok" : "FAIL", c.name.c_str(),
                format_double(c.measured).c_str(), format_double(c.bound).c_str());
  }
}

int cmd_run(const std::string& config_path, const std::string& out_override, bool quiet) {
  const ScenarioConfig cfg = load_scenario(config_path);
  const fs::path dir = out_override.empty() ? cfg.output_dir() : fs::path(out_override);
  const RunResult result = run_scenario(cfg);
  const auto files = write_run_artifacts(cfg, result, dir);
  if (!quiet) {
    std::printf("%s (%s): %zu certificates, %s\n", cfg.name.c_str(), to_string(cfg.family).c_str(),
                result.certificates.size(), result.passed() ? "all pass" : "FAILED");
    print_certificates(result.certificates);
    std::printf("wrote %zu files to %s\n", files.size(), dir.string().c_str());
  }
  return result.passed() ? 0 : kFailed;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::string& values, bool couple, unsigned threads,
              const std::string& out_override, bool quiet) {
  const ScenarioConfig base = load_scenario(config_path);
  SweepOptions opts;
  opts.axis = axis;
  opts.values = parse_values(values);
  opts.couple_gamma = couple;
  opts.threads = threads;
  const std::string suffix = "_sweep_" + axis + (couple ? "_coupled" : "");
  const fs::path dir = out_override.empty()
                           ? fs::path("runs") / (base.name + suffix)
                           : fs::path(out_override);
  const SweepResult result = run_sweep(base, opts, dir);
  if (!quiet) {
    std::printf("sweep %s over %s (%zu points)%s\n", base.name.c_str(), result.axis.c_str(),
                result.points.size(), couple ? ", gamma = |ell|" : "");
    for (const auto& p : result.points) {
      const double peak = [&] {
        for (const auto& m : p.measurements) {
          if (m.name == "delta_xm_sup") return m.value;
        }
        return std::nan("");
      }();
      if (!p.ok) {
        std::printf("  %-14s error: %s\n", format_double(p.value).c_str(), p.error.c_str());
      } else {
        std::printf("  %-14s %-6s sup|x_m - x_m_o| %s\n", format_double(p.value).c_str(),
                    p.passed ? "pass" : "FAIL",
                    std::isfinite(peak) ? format_double(peak).c_str() : "-");
      }
    }
    if (result.fit) {
      std::printf("peaking exponent %s\n", format_double(result.fit->exponent).c_str());
    } else {
      std::printf("%s\n", result.fit_note.c_str());
    }
    std::printf("manifest %s\n", (dir / "sweep.json").string().c_str());
  }
  return result.passed() ? 0 : kFailed;
}

int cmd_report(const std::string& dir, const std::string& out_file, bool quiet) {
  const ReportSummary rep = build_report(dir);
  const fs::path target = out_file.empty() ? fs::path(dir) / "report.md" : fs::path(out_file);
  write_file_atomic(target, rep.markdown);
  if (!quiet) {
    std::printf("%d runs, %d sweeps, %d failing; wrote %s\n", rep.runs, rep.sweeps, rep.failing,
                target.string().c_str());
  }
  return rep.passed() ? 0 : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crmlab: adaptive control with closed-loop reference models"};
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress the summary on stdout");

  std::string config, out, axis, values, dir;
  bool couple = false;
  unsigned threads = 0;

  auto* run = app.add_subcommand("run", "Simulate one scenario and write CSV, JSON and SVG");
  run->add_option("config", config, "Scenario file (.toml or .json)")->required();
  run->add_option("-o,--out", out, "Output directory (default: the config's output)");

  auto* sweep = app.add_subcommand("sweep", "Run a scenario over values of one parameter");
  sweep->add_option("config", config, "Base scenario file")->required();
  sweep->add_option("--axis", axis, "Parameter: ell, gamma, seed or a dotted path")->required();
  sweep->add_option("--values", values, "Comma-separated values, e.g. -10,-100,-1000")
      ->required()
      ->allow_extra_args(false);
  sweep->add_flag("--couple-gamma", couple, "Set the adaptation gain to |ell| at each point");
  sweep->add_option("--threads", threads, "Worker threads (default: CRMLAB_THREADS or all cores)");
  sweep->add_option("-o,--out", out, "Output directory");

  auto* report = app.add_subcommand("report", "Summarize the runs and sweeps under a directory");
  report->add_option("dir", dir, "Directory with run outputs")->required();
  report->add_option("-o,--out", out, "Report file (default: <dir>/report.md)");

  // Negative sweep values look like flags; glue them to --values.
  std::vector<std::string> args(argv, argv + argc);
  for (std::size_t i = 1; i + 1 < args.size(); ++i) {
    if (args[i] == "--values") {
      args[i] = "--values=" + args[i + 1];
      args.erase(args.begin() + static_cast<long>(i) + 1);
    }
  }
  std::vector<char*> argp;
  for (auto& a : args) argp.push_back(a.data());

  try {
    app.parse(static_cast<int>(argp.size()), argp.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInvalid;
  }

  try {
    if (*run) return cmd_run(config, out, quiet);
    if (*sweep) return cmd_sweep(config, axis, values, couple, threads, out, quiet);
    if (*report) return cmd_report(dir, out, quiet);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return is_input_error(e.kind()) ? kInvalid : kRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
  return kInvalid;
}
