#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <contour/config.hpp>
#include <contour/evolution.hpp>
#include <contour/io.hpp>
#include <contour/validation.hpp>

namespace fs = std::filesystem;
using namespace contour;

namespace {

enum Exit { ok = 0, config_error = 1, collision = 2, solver = 3 };

fs::path prepare_dir(const SimConfig& c, const std::string& override_dir) {
  const fs::path dir = override_dir.empty() ? fs::path(c.out_dir) : fs::path(override_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io::IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw io::IoError("cannot write " + p.string());
  return f;
}

int cmd_simulate(const std::string& cfg_path, const std::string& out_override) {
  const SimConfig cfg = load_config(cfg_path);
  const fs::path dir = prepare_dir(cfg, out_override);
  std::ofstream traj = open_out(dir / "trajectory.jsonl");
  std::ofstream diag = open_out(dir / "diagnostics.csv");
  diag << io::diagnostics_header() << '\n';
  SimState s;
  s.pair = cfg.initial_pair();
  bool initial = true;
  try {
    run(s, cfg.model(), cfg.run_options(), [&](const SimState& st) {
      // one line per output step; the initial state is fixed by the config
      if (initial) {
        initial = false;
        return;
      }
      traj << io::state_json(st) << '\n';
      diag << io::diagnostics_row(st) << '\n';
    });
  } catch (const RunError& e) {
    traj.flush();
    diag.flush();
    std::cerr << (e.kind == RunError::Kind::collision ? "collision: " : "solver failure: ") << e.what()
              << " (last good state at t = " << io::num(e.last_good.time) << ")\n";
    return e.kind == RunError::Kind::collision ? collision : solver;
  }
  if (!traj || !diag) throw io::IoError("write failed in " + dir.string());
  return ok;
}

int cmd_dispersion(const std::string& cfg_path, const std::string& out_override) {
  const SimConfig cfg = load_config(cfg_path);
  const fs::path dir = prepare_dir(cfg, out_override);
  double c_star = 0.0;
  try {
    c_star = solve_radial(cfg.growth(), cfg.mu, cfg.nu, cfg.r0, cfg.R0, cfg.N_rho).c_star;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return solver;
  }
  const double A = mobility_contrast(cfg.mu, cfg.nu);
  std::ofstream out = open_out(dir / "dispersion.csv");
  out << io::dispersion_header() << '\n';
  int unstable = 0;
  for (int k = 1; k <= cfg.k_max; ++k) {
    const auto row = io::dispersion_row(k, A, c_star, cfg.r0, cfg.R0);
    unstable += row.unstable;
    out << io::dispersion_csv_row(row) << '\n';
  }
  if (!out) throw io::IoError("write failed in " + dir.string());
  if (unstable) std::cout << unstable << " of " << cfg.k_max << " modes have a positive real part\n";
  return ok;
}

int cmd_validate(bool list, const std::vector<std::string>& only) {
  const auto& all = validation::suites();
  if (list) {
    for (const auto& s : all) std::cout << s.name << "  " << s.summary << '\n';
    return ok;
  }
  for (const auto& name : only) {
    bool known = false;
    for (const auto& s : all) known |= s.name == name;
    if (!known) {
      std::cerr << "unknown suite " << name << '\n';
      return config_error;
    }
  }
  (void)validation::tol_scale();
  bool all_pass = true;
  for (const auto& s : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), s.name) == only.end()) continue;
    const auto r = validation::run_suite(s);
    all_pass &= r.pass();
    std::printf("%-4s  %-18s %7.1fs\n", r.pass() ? "PASS" : "FAIL", r.name.c_str(), r.seconds);
    if (!r.error.empty()) std::printf("      error: %s\n", r.error.c_str());
    for (const auto& c : r.checks)
      std::printf("      %s %s\n", c.pass ? "ok  " : "FAIL", validation::describe(c).c_str());
    std::fflush(stdout);
  }
  return all_pass ? ok : 1;
}

int cmd_render(const std::string& traj_path, const std::string& out_dir) {
  const auto frames = io::read_trajectory(traj_path);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw io::IoError("cannot create " + out_dir + ": " + ec.message());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05zu.svg", i);
    std::ofstream f = open_out(fs::path(out_dir) / name);
    f << io::render_svg(frames[i]);
    if (!f) throw io::IoError(std::string("write failed for ") + name);
  }
  std::cout << "wrote " << frames.size() << " frames to " << out_dir << '\n';
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contour: two-interface tumor growth simulator"};
  app.require_subcommand(1);

  std::string cfg, out, traj, render_dir;
  auto* sim = app.add_subcommand("simulate", "run a configured simulation");
  sim->add_option("config", cfg, "INI config file")->required();
  sim->add_option("-o,--out", out, "output directory (overrides output.dir)");

  auto* disp = app.add_subcommand("dispersion", "tabulate eigenvalues of the dispersion matrix");
  disp->add_option("config", cfg, "INI config file")->required();
  disp->add_option("-o,--out", out, "output directory (overrides output.dir)");

  bool list = false;
  std::vector<std::string> only;
  auto* val = app.add_subcommand("validate", "run the built-in validation suites");
  val->add_flag("--list", list, "print suite names without running them");
  val->add_option("--suite", only, "run only the named suite (repeatable)");

  auto* ren = app.add_subcommand("render", "write one SVG per trajectory state");
  ren->add_option("trajectory", traj, "trajectory.jsonl")->required();
  ren->add_option("outdir", render_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(cfg, out);
    if (*disp) return cmd_dispersion(cfg, out);
    if (*val) return cmd_validate(list, only);
    if (*ren) return cmd_render(traj, render_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
  } catch (const io::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
  }
  return config_error;
}
