// Command-line front end: run, verify, oracle, plotdata.
//
// Exit codes: 0 success, 1 invalid input, 2 runtime failure, 3 failed
// verification criteria.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "uzawa/analysis.hpp"
#include "uzawa/config.hpp"
#include "uzawa/io.hpp"
#include "verify/criteria.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace uzawa;

namespace {

constexpr int kOk = 0, kInvalid = 1, kRuntime = 2, kVerifyFailed = 3;

std::string fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) h = (h ^ c) * 1099511628211ull;
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json config_json(const AlgorithmConfig& c) {
  json j = json::object();
  for (const auto& [k, v] : config_entries(c)) j[k] = v;
  return j;
}

json versions() {
  return {{"program", "uzawa 1.0"},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"compiler", __VERSION__}};
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << s;
}

json optional_number(const std::function<double()>& f) {
  try {
    return f();
  } catch (const std::invalid_argument&) {
    return nullptr;  // too few records for the fit
  }
}

struct RunArgs {
  std::string config, out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_elements;
  std::optional<double> mu_tol;
  bool timings = false, mesh = false;
};

int cmd_run(const RunArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  AlgorithmConfig c;
  std::string raw;
  try {
    raw = slurp(a.config);
    std::istringstream in(raw);
    c = parse_config(in);
    if (a.seed) c.seed = *a.seed;
    if (a.max_elements) c.max_elements = *a.max_elements;
    if (a.mu_tol) c.mu_tol = *a.mu_tol;
    validate(c);
    make_problem(c.problem);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }

  fs::create_directories(a.out);
  const fs::path csv = fs::path(a.out) / "runlog.csv", summary = fs::path(a.out) / "summary.json",
                 manifest = fs::path(a.out) / "manifest.json", mesh = fs::path(a.out) / "mesh.txt",
                 indicators = fs::path(a.out) / "indicators.csv";
  json outputs = json::array();
  const auto write_log = [&](const RunLog& log) {
    std::ostringstream os;
    write_csv(os, log, a.timings);
    write_text(csv, os.str());
    outputs.push_back(csv.string());
  };
  const auto finish = [&](const std::string& status, double run_seconds) {
    outputs.push_back(manifest.string());
    json m = {{"status", status},
              {"config", config_json(c)},
              {"input_hash", "fnv1a64:" + fnv1a(raw)},
              {"outputs", outputs},
              {"versions", versions()},
              {"wall_clock", {{"run_seconds", run_seconds},
                              {"total_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}}}};
    write_text(manifest, m.dump(2) + "\n");
  };

  const auto r0 = std::chrono::steady_clock::now();
  RunResult result;
  try {
    result = run(c);
  } catch (const RunFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    write_log(e.log());
    finish("failed", std::chrono::duration<double>(std::chrono::steady_clock::now() - r0).count());
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    finish("failed", std::chrono::duration<double>(std::chrono::steady_clock::now() - r0).count());
    return kRuntime;
  }
  const double run_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - r0).count();

  const auto& log = result.log;
  write_log(log);
  json s = {{"mu_final", log.records.back().mu},
            {"s_hat", optional_number([&] { return fit_rate(log).s; })},
            {"q_hat", optional_number([&] { return fit_linear_convergence(log).q_hat; })},
            {"n_steps", log.records.size()},
            {"elements_final", result.tri.size()},
            {"pressure_elements_final", result.p.partition.size()},
            {"stop_reason", log.stop_reason},
            {"config", config_json(c)}};
  write_text(summary, s.dump(2) + "\n");
  outputs.push_back(summary.string());
  {
    std::ostringstream os;
    write_indicators_csv(os, result.estimate);
    write_text(indicators, os.str());
    outputs.push_back(indicators.string());
  }
  if (a.mesh) {
    MeshBundle b;
    b.forest = result.tri.forest;
    b.views = {{"T", result.tri}, {"P", result.p.partition}};
    b.pressures = {{"P", result.p}};
    b.velocities = {{"T", result.u}};
    std::ostringstream os;
    write_mesh(os, b);
    write_text(mesh, os.str());
    outputs.push_back(mesh.string());
  }
  finish("ok", run_seconds);
  std::cout << "mu_final " << format_double(log.records.back().mu) << ", " << log.records.size() << " steps, #T "
            << result.tri.size() << " (" << log.stop_reason << ")\n";
  return kOk;
}

int cmd_verify(const std::vector<int>& only) {
  int failed = 0;
  for (const auto& c : verify::criteria()) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto r = verify::run_criterion(c.id);
    std::cout << verify::format(r) << std::endl;
    failed += !r.passed;
  }
  if (failed) {
    std::cerr << failed << " criteria failed\n";
    return kVerifyFailed;
  }
  return kOk;
}

int cmd_oracle(const std::string& problem, int n_max, double s, int depth, const std::string& out) {
  ApproxClassReport r;
  try {
    if (n_max < 0 || n_max > 12) throw ValidationError("--n-max must lie in [0, 12]");
    r = approx_class_oracle(make_problem(problem), n_max, s, depth);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  fs::create_directories(out);
  std::ostringstream csv;
  csv << "n,rho_min,osc_at_min,meshes\n";
  for (const auto& p : r.envelope)
    csv << p.n << ',' << format_double(p.rho_min) << ',' << format_double(p.osc_at_min) << ',' << p.meshes << '\n';
  write_text(fs::path(out) / "envelope.csv", csv.str());
  json j = {{"problem", problem},
            {"n_max", n_max},
            {"s", s},
            {"surrogate_depth", depth},
            {"meshes_total", r.meshes_total},
            {"budget_overflow", r.budget_overflow},
            {"envelope_rate", r.rate.s},
            {"a_s_envelope", r.a_s_envelope},
            {"a_s_accuracy", r.a_s_accuracy}};
  write_text(fs::path(out) / "oracle.json", j.dump(2) + "\n");
  std::cout << r.meshes_total << " meshes, envelope rate " << format_double(r.rate.s) << '\n';
  return r.budget_overflow ? kRuntime : kOk;
}

int cmd_plotdata(const std::string& log_path, const std::string& out) {
  RunLog log;
  try {
    std::istringstream in(slurp(log_path));
    log = read_csv(in);
    if (log.records.empty()) throw ValidationError("run log has no records");
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  fs::create_directories(out);
  std::vector<double> x, y;
  mesh_change_points(log, x, y);
  std::ostringstream mu, steps;
  mu << "# x=#T-#T_init+1 mu\n";
  for (std::size_t i = 0; i < x.size(); ++i) mu << format_double(x[i]) << ' ' << format_double(y[i]) << '\n';
  steps << "# n mu eta div_norm proj_div_norm\n";
  for (const auto& r : log.records)
    steps << r.n << ' ' << format_double(r.mu) << ' ' << format_double(r.eta) << ' ' << format_double(r.div_norm)
          << ' ' << format_double(r.proj_div_norm) << '\n';
  write_text(fs::path(out) / "mu_vs_elements.dat", mu.str());
  write_text(fs::path(out) / "mu_vs_step.dat", steps.str());
  std::cout << x.size() << " mesh points, " << log.records.size() << " steps\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive Uzawa FEM for the Stokes problem"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "run the adaptive algorithm");
  run_cmd->add_option("--config", ra.config, "configuration file")->required();
  run_cmd->add_option("--out", ra.out, "output directory");
  run_cmd->add_option("--seed", ra.seed, "override the configured seed");
  run_cmd->add_option("--max-elements", ra.max_elements, "override the element budget");
  run_cmd->add_option("--mu-tol", ra.mu_tol, "override the target mu");
  run_cmd->add_flag("--timings", ra.timings, "add wall_time to the run log");
  run_cmd->add_flag("--mesh", ra.mesh, "write the final mesh and fields");

  std::vector<int> only;
  auto* verify_cmd = app.add_subcommand("verify", "run the acceptance criteria");
  verify_cmd->add_option("--only", only, "criterion ids");

  std::string problem = "smooth", oracle_out = ".";
  int n_max = 10, depth = 3;
  double s = 0.5;
  auto* oracle_cmd = app.add_subcommand("oracle", "exhaustive approximation-class envelope");
  oracle_cmd->add_option("--problem", problem);
  oracle_cmd->add_option("--n-max", n_max, "added elements, at most 12");
  oracle_cmd->add_option("--s", s, "rate used for the A_s estimates");
  oracle_cmd->add_option("--depth", depth, "reference refinement depth for p_T");
  oracle_cmd->add_option("--out", oracle_out);

  std::string log_path, plot_out = ".";
  auto* plot_cmd = app.add_subcommand("plotdata", "log-log data files from a run log");
  plot_cmd->add_option("--log", log_path, "runlog.csv")->required();
  plot_cmd->add_option("--out", plot_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (*run_cmd) return cmd_run(ra);
    if (*verify_cmd) return cmd_verify(only);
    if (*oracle_cmd) return cmd_oracle(problem, n_max, s, depth, oracle_out);
    if (*plot_cmd) return cmd_plotdata(log_path, plot_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kInvalid;
}
