// liestyle: batch front-end. Each subcommand reads one run config.

#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "liestyle/errors.hpp"
#include "liestyle/parallel.hpp"
#include "liestyle/pipeline.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kData = 3, kNumeric = 4 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Artistic style from learned symmetry generators and Gram textures"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 0;
  bool strict = false;
  app.add_option("--config", config_path, "Run config (TOML subset)")->required();
  app.add_option("--seed", seed, "Override the master seed");
  app.add_option("--jobs", jobs, "Worker cap (0 = all cores)");
  app.add_flag("--strict", strict, "Require artists from the built-in movement table");

  struct Command {
    const char* name;
    const char* help;
    bool needs_inputs;
  };
  const Command commands[] = {
      {"synth", "Write the synthetic style corpus to the manifest location", false},
      {"train", "Train one classifier per artist", true},
      {"generators", "Extract symmetry generators per artist", true},
      {"gram", "Compute Gram signatures per painting and per artist", true},
      {"distances", "Assemble texture, global and combined distance matrices", true},
      {"cluster", "Average-linkage dendrogram and nearest-neighbor purity", true},
      {"bootstrap", "Clade confidence by resampling paintings", true},
      {"mantel", "Mantel test against art-historical ground truth", true},
      {"flow", "Render a generator flow strip", true},
  };
  for (const auto& c : commands) app.add_subcommand(c.name, c.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    liestyle::RunConfig cfg = liestyle::load_run_config(config_path);
    if (seed) cfg.seed = *seed;
    if (strict) cfg.strict = true;
    liestyle::worker_limit() = jobs;
    bool needs_inputs = true;
    for (const auto& c : commands)
      if (cmd == c.name) needs_inputs = c.needs_inputs;
    cfg.validate(needs_inputs);

    if (cmd == "synth") liestyle::cmd_synth(cfg);
    else if (cmd == "train") liestyle::cmd_train(cfg);
    else if (cmd == "generators") liestyle::cmd_generators(cfg);
    else if (cmd == "gram") liestyle::cmd_gram(cfg);
    else if (cmd == "distances") liestyle::cmd_distances(cfg);
    else if (cmd == "cluster") liestyle::cmd_cluster(cfg);
    else if (cmd == "bootstrap") liestyle::cmd_bootstrap(cfg);
    else if (cmd == "mantel") liestyle::cmd_mantel(cfg);
    else if (cmd == "flow") std::cout << liestyle::cmd_flow(cfg).string() << "\n";
  } catch (const liestyle::ConfigError& e) {
    std::cerr << "liestyle " << cmd << ": config error: " << e.what() << "\n";
    return kConfig;
  } catch (const liestyle::DataError& e) {
    std::cerr << "liestyle " << cmd << ": data error: " << e.what() << "\n";
    return kData;
  } catch (const liestyle::NumericError& e) {
    std::cerr << "liestyle " << cmd << ": numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "liestyle " << cmd << ": data error: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}
