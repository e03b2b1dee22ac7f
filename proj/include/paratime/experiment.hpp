#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "paratime/grid.hpp"
#include "paratime/parareal.hpp"

namespace paratime {

enum class Variant { plain, theta, corrected_coarse_only, omega_identity };

Variant variant_from_string(const std::string& name);
std::string to_string(Variant v);

/// Everything needed to reproduce one study run. Serializes to a flat
/// "key = value" text file (arrays comma-separated) that round-trips
/// losslessly.
struct ExperimentConfig {
  std::string name;
  int dimension = 1;
  std::vector<double> extent{1.0};   // per axis, axis order (y,x) in 2D
  std::vector<double> origin{-0.5};  // coordinate of node 0 per axis
  std::string ic = "gaussian-cosine-pulse";
  std::vector<double> ic_params{10.0, 100.0};
  std::string speed = "constant";  // preset id or "file"
  std::vector<double> speed_params{1.0};
  std::string speed_file;
  double T = 5.0;
  double dt_com = 0.05;
  std::vector<double> dx{0.01};  // coarse spacing per axis (size 1 = all axes)
  double dt_over_dx = 0.5;       // coarse step over min coarse spacing
  std::size_t ratio = 1;         // coarse/fine spatial ratio m_s
  std::size_t m_t = 20;          // coarse/fine time-step ratio
  InterpKind interp = InterpKind::fourier;
  GradientScheme gradient = GradientScheme::fd2;
  double tol = 1e-15;
  int iterations = 10;  // correction passes K
  Variant variant = Variant::theta;
  int remove_count = 0;
  std::string out;  // output directory; empty = runs/<name>
  int workers = 0;
};

/// Named parameter sets of the reproduced studies.
ExperimentConfig preset(const std::string& name);
const std::vector<std::string>& preset_names();
std::string preset_description(const std::string& name);

ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, std::ostream& os);
/// Set one field from its config-file key.
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);

/// Fully built solver inputs for a config.
struct ExperimentSetup {
  Grid fine_grid;
  Grid coarse_grid;
  SpeedField fine_speed;
  SpeedField coarse_speed;
  WaveState init;
  CouplingSchedule schedule;
  GridTransfer transfer;
  std::size_t m_coarse_steps;  // coarse steps per coupling
};

ExperimentSetup build_setup(const ExperimentConfig& cfg);

/// Run and write errors.csv, residuals.csv, summary.csv, config.txt and
/// meta.txt under the output directory. Returns the process exit status:
/// 0 on success (including flagged divergence), 1 on numerical setup
/// errors, 2 on config/IO errors.
int run_experiment(const ExperimentConfig& cfg);

/// Ablation entry point: remove_count must be one of {0,1,3,5}.
int singular_removal_run(ExperimentConfig cfg, int remove_count);

/// Executes the run and returns the history instead of an exit code.
ParaRun run_to_history(const ExperimentConfig& cfg);

/// Read a speed model in the text format ("ny nx dy dx" header, ny rows of
/// nx values); validates positivity.
SpeedField read_speed_model(std::istream& is);
SpeedField ingest_speed_model(const std::string& path);
/// Same, then bilinear resample onto the target grid.
SpeedField ingest_speed_model(const std::string& path, const Grid& target);
void write_speed_model(const SpeedField& field, std::ostream& os);

}  // namespace paratime
