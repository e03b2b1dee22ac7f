#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "paratime/errors.hpp"
#include "paratime/experiment.hpp"

namespace {

int cmd_run(const std::string& target, const std::string& out, int workers,
            const std::vector<std::string>& overrides) {
  using namespace paratime;
  ExperimentConfig cfg;
  try {
    if (std::filesystem::exists(target) && !std::filesystem::is_directory(target)) {
      cfg = load_config(target);
    } else {
      cfg = preset(target);
    }
    for (const auto& ov : overrides) {
      const auto eq = ov.find('=');
      if (eq == std::string::npos)
        throw ConfigError("override must look like key=value: " + ov);
      apply_override(cfg, ov.substr(0, eq), ov.substr(eq + 1));
    }
    if (!out.empty()) cfg.out = out;
    if (workers > 0) cfg.workers = workers;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  return run_experiment(cfg);
}

int cmd_presets() {
  using namespace paratime;
  for (const auto& name : preset_names())
    std::cout << name << "  -  " << preset_description(name) << "\n";
  return 0;
}

int cmd_ingest(const std::string& path, const std::string& target,
               const std::string& out) {
  using namespace paratime;
  try {
    SpeedField field = [&]() {
      if (target.empty()) return ingest_speed_model(path);
      const auto comma = target.find(',');
      if (comma == std::string::npos)
        throw ConfigError("--target must look like ny,nx");
      const long ny = std::stol(target.substr(0, comma));
      const long nx = std::stol(target.substr(comma + 1));
      if (ny < 1 || nx < 4) throw ConfigError("--target shape too small");
      SpeedField probe = ingest_speed_model(path);  // validates the file as-is
      const Grid target_grid =
          ny == 1 ? Grid({static_cast<std::size_t>(nx)},
                         {probe.grid.extent(probe.grid.dim() - 1) / static_cast<double>(nx)})
                  : Grid({static_cast<std::size_t>(ny), static_cast<std::size_t>(nx)},
                         {probe.grid.extent(0) / static_cast<double>(ny),
                          probe.grid.extent(probe.grid.dim() - 1) / static_cast<double>(nx)});
      return ingest_speed_model(path, target_grid);
    }();
    const auto minmax = std::minmax_element(field.c.begin(), field.c.end());
    std::cout << "speed model: " << (field.grid.dim() == 1 ? 1 : field.grid.points(0))
              << " x " << field.grid.points(field.grid.dim() - 1) << ", min "
              << *minmax.first << ", max " << *minmax.second << "\n";
    if (!out.empty()) {
      std::ofstream os(out);
      if (!os) throw ConfigError("cannot write: " + out);
      write_speed_model(field, os);
      std::cout << "wrote " << out << "\n";
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"paratime: parallel-in-time wave-equation studies"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a preset or a config file");
  std::string target, out;
  int workers = 0;
  std::vector<std::string> overrides;
  run->add_option("target", target, "preset name or config path")->required();
  run->add_option("--out", out, "output directory");
  run->add_option("--workers", workers, "stage worker threads (0 = hardware)");
  run->add_option("--override", overrides, "key=value config override")
      ->take_all();

  auto* presets = app.add_subcommand("presets", "list experiment presets");

  auto* ingest = app.add_subcommand("ingest", "validate/resample a speed model file");
  std::string speed_path, ingest_target, ingest_out;
  ingest->add_option("speedfile", speed_path, "speed model path")->required();
  ingest->add_option("--target", ingest_target, "resample shape ny,nx");
  ingest->add_option("--out", ingest_out, "write the (resampled) model here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad usage is a config error
  }

  if (run->parsed()) return cmd_run(target, out, workers, overrides);
  if (presets->parsed()) return cmd_presets();
  if (ingest->parsed()) return cmd_ingest(speed_path, ingest_target, ingest_out);
  return 2;
}
