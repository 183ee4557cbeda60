#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "cellhom/fixtures.hpp"
#include "cellhom/runconfig.hpp"

int main(int argc, char** argv) {
  CLI::App app{"cellhom: periodic cell-problem solver and homogenized-integrand tables"};

  cellhom::RunOptions opts;
  std::uint64_t seed = 0;
  bool list_fixtures = false;

  auto* config_opt =
      app.add_option("--config", opts.config_path, "path to a JSON run configuration");
  config_opt->check(CLI::ExistingFile);
  app.add_option("--fixture", opts.fixture, "name of a built-in run configuration");
  auto* seed_opt = app.add_option("--seed", seed, "seed override for all randomized stages");
  app.add_option("--out", opts.out_dir, "directory for run artifacts")->capture_default_str();
  app.add_option("--tasks", opts.tasks,
                 "worker count for independent sub-problems (default: available parallelism)");
  app.add_flag("--check", opts.check, "fail (exit 3) when a configured tolerance check fails");
  app.add_flag("--list-fixtures", list_fixtures, "print built-in configuration names and exit");

  CLI11_PARSE(app, argc, argv);

  if (list_fixtures) {
    for (const auto& name : cellhom::fixture_names()) std::cout << name << "\n";
    return 0;
  }
  if (seed_opt->count() > 0) {
    opts.has_seed_override = true;
    opts.seed_override = seed;
  }
  return cellhom::run_from_options(opts);
}
