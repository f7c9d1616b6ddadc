#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "collapse/experiments.hpp"

int main(int argc, char** argv) {
  using namespace collapse;
  CLI::App app{"Radial chemotaxis collapse experiments"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  for (const char* name : {"certify", "simulate", "sweep", "collapse", "energy"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "key=value config file")->required();
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--threads", threads, "worker threads (0: all cores)")
        ->check(CLI::NonNegativeNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig config;
  try {
    std::ifstream in(config_path);
    if (!in) throw InputError("cannot read config '" + config_path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    config = parse_command_config(command, text.str());
  } catch (const InputError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  }
  try {
    return run_command(config, out_dir, threads);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFail;
  }
}
