#include <CLI11.hpp>

#include <iostream>

#include "nvdephase/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"NV ensemble dephasing toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(nvd::kToolVersion));

  std::string scenario, out_dir, format = "text", data_dir = nvd::default_data_dir(), target;
  std::uint64_t seed = 0;
  int threads = 1;

  std::vector<CLI::Option*> seed_options;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "Output directory");
    seed_options.push_back(sub->add_option("--seed", seed, "Override the scenario seed"));
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--format", format, "Stdout format")->check(CLI::IsMember({"text", "records"}));
  };

  const std::vector<std::string> tasks{"spectrum", "budget", "ramsey", "drive-fit", "montecarlo", "sensitivity"};
  for (const auto& name : tasks) {
    auto* sub = app.add_subcommand(name, "Run a " + name + " scenario");
    sub->add_option("--scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    add_common(sub);
  }
  auto* validate = app.add_subcommand("validate", "Check a scenario file without running it");
  validate->add_option("--scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  auto* reproduce = app.add_subcommand("reproduce", "Run bundled scenarios and compare with reference values");
  reproduce->add_option("target", target, "Target name")->required()->check(CLI::IsMember(nvd::reproduce_targets()));
  reproduce->add_option("--data-dir", data_dir, "Bundled data directory")->check(CLI::ExistingDirectory);
  add_common(reproduce);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : nvd::kExitInputError;
  }

  nvd::RunOptions options;
  options.out_dir = out_dir;
  for (const auto* opt : seed_options) {
    if (opt->count() > 0) options.seed = seed;
  }
  options.threads = threads;
  options.records = format == "records";

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "validate") return nvd::validate_command(scenario, std::cout, std::cerr);
    if (name == "reproduce") return nvd::reproduce_command(target, data_dir, options, std::cout, std::cerr);
    return nvd::run_command(name, scenario, options, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return nvd::kExitInputError;
  }
}
