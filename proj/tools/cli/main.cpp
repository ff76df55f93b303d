// cfrelax run|study|validate <config.json> [--output-dir DIR] [--quiet]

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "config.hpp"
#include "pipeline.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace cfrelax::cli;

  CLI::App app{"Relaxation solver for constrained Friedrichs systems"};
  app.require_subcommand(1);
  std::string config_path;
  std::string output_dir;
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only print errors");

  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "Run configuration (JSON)")->required();
    if (std::string(name) != "validate")
      sub->add_option("-o,--output-dir", output_dir, "Output directory (overrides output_dir)");
    sub->add_flag("-q,--quiet", quiet, "Only print errors");
    return sub;
  };
  CLI::App* run_cmd = add("run", "Run the simulation and every requested check");
  CLI::App* study_cmd = add("study", "Run only the convergence studies");
  add("validate", "Parse and validate the configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitPass : kExitError;
  }

  ExecuteOptions options;
  options.command = run_cmd->parsed() ? Command::Run : study_cmd->parsed() ? Command::Study : Command::Validate;
  options.output_dir = output_dir;
  options.log = quiet ? nullptr : &std::cout;

  RunConfig cfg;
  try {
    cfg = parse_config(read_file(config_path));
  } catch (const std::exception& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return kExitError;
  }
  if (options.command == Command::Validate) {
    if (!quiet) std::cout << to_canonical_json(cfg);
    return kExitPass;
  }

  const ExecuteResult result = execute(cfg, options);
  if (!result.error.empty()) std::cerr << "error: " << result.error << '\n';
  if (!quiet) {
    for (const auto& v : result.verdicts)
      if (!v.pass) std::cout << "failed: " << v.check << " (" << v.parameters << ")\n";
    std::cout << "wrote " << result.outputs.size() << " files; exit " << result.exit_code << '\n';
  }
  return result.exit_code;
}
