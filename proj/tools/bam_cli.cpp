#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "bam/bam.h"

int main(int argc, char** argv) {
  CLI::App app{"Block alternating minimization with Bregman proximity terms"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool quiet = false;

  const std::pair<const char*, const char*> commands[] = {
      {"run", "Run one preset and its diagnostics"},
      {"compare", "Run several presets on the same problem"},
      {"check", "Oracle checks, then a diagnosed run per preset"}};
  for (const auto& [name, about] : commands) {
    CLI::App* sub = app.add_subcommand(name, about);
    sub->add_option("config", config, "JSON experiment config")->required();
    sub->add_option("--out-dir", out_dir, "Directory for trace and report files");
    sub->add_option("--seed", seed, "Overrides problem.seed and solver.seed");
    sub->add_flag("--quiet", quiet, "Only print errors");
  }
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const int code = bam_cli_execute(command.c_str(), config.c_str(), out_dir.c_str(),
                                   seed.has_value() ? 1 : 0, seed.value_or(0), quiet ? 1 : 0);
  if (code == 1 && bam_last_error()[0] != '\0') std::fprintf(stderr, "error: %s\n", bam_last_error());
  return code;
}
