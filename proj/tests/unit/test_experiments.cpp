#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "collapse/experiments.hpp"

namespace collapse {
namespace {

namespace fs = std::filesystem;

std::string header(const std::string& csv) { return csv.substr(0, csv.find('\n')); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("collapse_tests_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Config, ParsesModesAndDefaults) {
  const RunConfig c = parse_run_config("mode=simulate2d\nmass_fraction=0.8\n");
  EXPECT_EQ(c.mode, Mode::Simulate2D);
  EXPECT_EQ(c.dimension, 2);
  EXPECT_DOUBLE_EQ(c.mass_m, 0.8 * kCriticalMass2D);
  EXPECT_EQ(c.n, 2048);
  EXPECT_EQ(c.initial, InitialKind::Mobius);
  EXPECT_DOUBLE_EQ(c.theta, 0.05);
  EXPECT_DOUBLE_EQ(c.solver.snapshot_dt, c.t_end / 20.0);
  EXPECT_EQ(c.solver.scheme, TransportScheme::ImplicitFitted);

  const RunConfig d = parse_run_config("mode=simulate4d\nmass_m=700\nkappa=2\n");
  EXPECT_EQ(d.initial, InitialKind::Constructed);
  EXPECT_DOUBLE_EQ(d.kappa, 2.0);

  const RunConfig s = parse_run_config("mode=sweep\ndimension=2\nfraction_lo=0.5\nfraction_hi=2\n");
  EXPECT_DOUBLE_EQ(s.t_end, 20.0);
  EXPECT_DOUBLE_EQ(s.theta, default_probe_theta(2));
  EXPECT_DOUBLE_EQ(s.mass_hi, 2.0 * kCriticalMass2D);
  EXPECT_DOUBLE_EQ(s.solver.blowup.max_slope, 1e8);
  EXPECT_DOUBLE_EQ(parse_run_config("mode=sweep\nmass_lo=1\nmass_hi=2\n").theta,
                   default_probe_theta(4));
}

TEST(Config, RejectsInvalidInput) {
  EXPECT_THROW(parse_run_config("mass_m=700\n"), InputError);
  EXPECT_THROW(parse_run_config("mode=simulate4d\nmass_m=700\nbogus=1\n"), InputError);
  EXPECT_THROW(parse_run_config("mode=simulate4d\nmass_m=700\nn=32\n"), InputError);
  EXPECT_THROW(parse_run_config("mode=simulate4d\nmass_m=700\nn=100.5\n"), InputError);
  EXPECT_THROW(parse_run_config("mode=simulate4d\n"), InputError);
  EXPECT_THROW(parse_run_config("mode=simulate4d\nmass_m=700\nmass_fraction=1.1\n"), InputError);
  EXPECT_THROW(parse_run_config("mode=simulate4d\nmass_m=700\ndimension=2\n"), InputError);
  EXPECT_THROW(parse_run_config("mode=collapse\ndimension=3\nmass_m=1\n"), InputError);
  EXPECT_THROW(parse_run_config("mode=simulate4d\nmass_m=-1\n"), InputError);
  EXPECT_THROW(parse_run_config("mode=simulate4d\nmass_m=700\nscheme=magic\n"), InputError);
  EXPECT_THROW(parse_run_config("mode=sweep\nmass_lo=1\nmass_hi=2\nmax_bisections=13\n"),
               InputError);
  EXPECT_THROW(parse_run_config("mode=sweep\nmass_lo=1\nmass_hi=2\ninitial=constructed\n"),
               InputError);
  EXPECT_THROW(parse_run_config("mode=simulate4d\nmass_m=700\nt_end=0\n"), InputError);
  EXPECT_THROW(parse_run_config("mode=teleport\n"), InputError);
}

TEST(Config, CommandDerivesMode) {
  EXPECT_EQ(parse_command_config("certify", "dimension=2\nmass_m=60\n").mode, Mode::Certify2D);
  EXPECT_EQ(parse_command_config("simulate", "mass_m=700\n").mode, Mode::Simulate4D);
  EXPECT_EQ(parse_command_config("energy", "mass_m=500\n").mode, Mode::Energy);
  EXPECT_THROW(parse_command_config("certify", "mode=simulate4d\nmass_m=700\n"), InputError);
}

TEST(Csv, TrajectoryAndMonitorFormats) {
  RunConfig c = parse_run_config("mode=simulate4d\nmass_m=700\nn=64\nt_end=1\n");
  const Simulation4D sim = simulate_4d(c);
  const std::string csv = trajectory_csv(sim, c);
  EXPECT_EQ(header(csv), "t,s,U,W,u_reconstructed,w_reconstructed");
  EXPECT_NE(csv.find("# termination=blowup detected\n"), std::string::npos);
  EXPECT_NE(csv.find("# mu_star="), std::string::npos);
  EXPECT_NE(csv.find("# t_star="), std::string::npos);
  EXPECT_EQ(header(monitor_csv(sim)), "t,max_violation");

  RunConfig c2 = parse_run_config("mode=simulate2d\nmass_fraction=0.8\nn=64\nt_end=0.01\n");
  const Simulation2D sim2 = simulate_2d(c2);
  const std::string csv2 = trajectory_csv(sim2, c2);
  EXPECT_EQ(header(csv2), "t,s,U,W,u_reconstructed,w_reconstructed");
  EXPECT_NE(csv2.find("# termination=reached t_end\n"), std::string::npos);
  // W and w are empty in 2D.
  const std::string row = csv2.substr(csv2.find('\n') + 1, csv2.find('\n', csv2.find('\n') + 1) - csv2.find('\n') - 1);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 5);
  EXPECT_NE(row.find(",,"), std::string::npos);
}

const char* kTinySweep =
    "mode=sweep\ndimension=2\nfraction_lo=0.5\nfraction_hi=2\nn=64\nt_end=0.5\n"
    "max_bisections=4\ntheta=0.05\n";

TEST(Sweep, DeterministicAcrossThreadCounts) {
  const RunConfig c = parse_run_config(kTinySweep);
  const SweepResult one = run_sweep(c, 1);
  const SweepResult four = run_sweep(c, 4);
  EXPECT_EQ(one.to_csv(), four.to_csv());
  EXPECT_EQ(one.to_csv(), run_sweep(c, 1).to_csv());
  EXPECT_LT(one.bounded_max, one.blowup_min);
  EXPECT_GE(one.estimate, one.bounded_max);
  EXPECT_LE(one.estimate, one.blowup_min);
  EXPECT_EQ(one.bisections, 4);
  EXPECT_EQ(one.probes.size(), 6u);
  EXPECT_EQ(header(one.to_csv()), "step,mass,verdict,termination,t_final,accepted_steps");
}

TEST(Sweep, BracketErrors) {
  RunConfig c = parse_run_config(kTinySweep);
  c.mass_lo = c.mass_hi;
  EXPECT_THROW(run_sweep(c, 1), BracketError);
  c = parse_run_config(kTinySweep);
  c.mass_hi = 0.6 * kCriticalMass2D;
  EXPECT_THROW(run_sweep(c, 1), BracketError);
}

TEST(Commands, ExitCodesAndFiles) {
  const fs::path dir = scratch_dir("commands");
  RunConfig cert = parse_run_config("mode=certify2d\nmass_m=50.26548245743669\ngrid_n=128\ntime_n=32\n");
  EXPECT_EQ(cmd_certify(cert, dir / "cert", 1), kExitOk);
  EXPECT_EQ(header(slurp(dir / "cert" / "certificate.csv")),
            "check_name,max_residual_or_slack,grid_n,verdict");
  EXPECT_NE(slurp(dir / "cert" / "summary.txt").find("PASS certificate verdict"),
            std::string::npos);

  RunConfig low = parse_run_config("mode=certify4d\nmass_m=600\n");
  EXPECT_EQ(cmd_certify(low, dir / "low", 1), kExitConfig);

  RunConfig bounded = parse_run_config("mode=collapse\ndimension=2\nmass_fraction=0.8\nn=64\nt_end=0.1\n");
  EXPECT_EQ(cmd_collapse(bounded, dir / "bounded", 1), kExitPrecondition);

  RunConfig blow = parse_run_config("mode=collapse\ndimension=4\nmass_m=700\nn=64\nt_end=1\n");
  EXPECT_EQ(cmd_collapse(blow, dir / "blow", 1), kExitOk);
  EXPECT_EQ(header(slurp(dir / "blow" / "collapse.csv")), "section,r,value");

  RunConfig sweep = parse_run_config(kTinySweep);
  sweep.mass_hi = sweep.mass_lo;
  EXPECT_EQ(cmd_sweep(sweep, dir / "sweep", 1), kExitBracket);

  RunConfig sim = parse_run_config("mode=simulate4d\nmass_fraction=0.8\nn=64\nt_end=0.01\n");
  EXPECT_EQ(cmd_simulate(sim, dir / "sim", 1), kExitOk);
  for (const char* f : {"trajectory.csv", "audit.csv", "summary.txt"}) {
    EXPECT_TRUE(fs::exists(dir / "sim" / f)) << f;
  }

  RunConfig energy = parse_run_config("mode=energy\nmass_fraction=0.8\nn=64\nt_end=0.01\ntheta=0.3\n");
  EXPECT_EQ(cmd_energy(energy, dir / "energy", 1), kExitOk);
  EXPECT_EQ(header(slurp(dir / "energy" / "energy.csv")),
            "t,F,entropy,coupling,half_laplacian_sq,half_delta_gradient_sq,dissipation,"
            "identity_residual");

  RunConfig collapse_step = parse_run_config(
      "mode=simulate2d\nmass_fraction=0.8\nn=64\nt_end=1\ndt_initial=1e-2\ndt_min=1e-3\n"
      "max_change=1e-9\n");
  EXPECT_EQ(cmd_simulate(collapse_step, dir / "stall", 1), kExitSolver);
  fs::remove_all(dir);
}

#ifdef COLLAPSE_CLI_PATH
int run_cli(const std::string& args) {
  const int status = std::system((std::string(COLLAPSE_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodeContract) {
  const fs::path dir = scratch_dir("cli");
  const auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream(dir / name) << body;
    return (dir / name).string();
  };
  const std::string good = write("good.cfg", "dimension=2\nmass_m=50.26548245743669\ngrid_n=128\ntime_n=32\n");
  const std::string low = write("low.cfg", "mass_m=600\n");
  const std::string bad = write("bad.cfg", "mass_m 700\n");
  const std::string out = (dir / "out").string();
  EXPECT_EQ(run_cli("certify --config " + good + " --out " + out + " --threads 2"), 0);
  EXPECT_EQ(run_cli("certify --config " + low + " --out " + out), 2);
  EXPECT_EQ(run_cli("simulate --config " + bad + " --out " + out), 2);
  EXPECT_EQ(run_cli("simulate --config " + (dir / "missing.cfg").string() + " --out " + out), 2);
  EXPECT_EQ(run_cli("simulate --out " + out), 2);
  EXPECT_EQ(run_cli("teleport --config " + good + " --out " + out), 2);
  EXPECT_EQ(run_cli("sweep --config " + good + " --out " + out), 2);
  fs::remove_all(dir);
}
#endif

}  // namespace
}  // namespace collapse
