#include "paratime/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "paratime/errors.hpp"

namespace paratime {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += fmt(v[i]);
  }
  return out;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("bad numeric list entry: '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty numeric list");
  return out;
}

double parse_double(const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw ConfigError("trailing characters in number: " + text);
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("bad number: '" + text + "'");
  }
}

long parse_int(const std::string& text) {
  try {
    std::size_t used = 0;
    const long v = std::stol(text, &used);
    if (used != text.size()) throw ConfigError("trailing characters in integer: " + text);
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("bad integer: '" + text + "'");
  }
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

InterpKind interp_from_string(const std::string& name) {
  if (name == "fourier") return InterpKind::fourier;
  if (name == "linear") return InterpKind::linear;
  throw ConfigError("unknown interpolation kind: " + name);
}

std::string to_string(InterpKind kind) {
  return kind == InterpKind::fourier ? "fourier" : "linear";
}

}  // namespace

Variant variant_from_string(const std::string& name) {
  if (name == "plain") return Variant::plain;
  if (name == "theta") return Variant::theta;
  if (name == "corrected-coarse-only") return Variant::corrected_coarse_only;
  if (name == "omega-identity") return Variant::omega_identity;
  throw ConfigError("unknown variant: " + name);
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::plain: return "plain";
    case Variant::theta: return "theta";
    case Variant::corrected_coarse_only: return "corrected-coarse-only";
    case Variant::omega_identity: return "omega-identity";
  }
  return "?";
}

void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value) {
  if (key == "name") cfg.name = value;
  else if (key == "dimension") cfg.dimension = static_cast<int>(parse_int(value));
  else if (key == "extent") cfg.extent = parse_list(value);
  else if (key == "origin") cfg.origin = parse_list(value);
  else if (key == "ic") cfg.ic = value;
  else if (key == "ic_params") cfg.ic_params = parse_list(value);
  else if (key == "speed") cfg.speed = value;
  else if (key == "speed_params") cfg.speed_params = parse_list(value);
  else if (key == "speed_file") cfg.speed_file = value;
  else if (key == "T") cfg.T = parse_double(value);
  else if (key == "dt_com") cfg.dt_com = parse_double(value);
  else if (key == "dx") cfg.dx = parse_list(value);
  else if (key == "dt_over_dx") cfg.dt_over_dx = parse_double(value);
  else if (key == "ratio") cfg.ratio = static_cast<std::size_t>(parse_int(value));
  else if (key == "m_t") cfg.m_t = static_cast<std::size_t>(parse_int(value));
  else if (key == "interp") cfg.interp = interp_from_string(value);
  else if (key == "gradient") {
    try {
      cfg.gradient = gradient_scheme_from_string(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "tol") cfg.tol = parse_double(value);
  else if (key == "iterations") cfg.iterations = static_cast<int>(parse_int(value));
  else if (key == "variant") cfg.variant = variant_from_string(value);
  else if (key == "remove_count") cfg.remove_count = static_cast<int>(parse_int(value));
  else if (key == "out") cfg.out = value;
  else if (key == "workers") cfg.workers = static_cast<int>(parse_int(value));
  else throw ConfigError("unknown config key: " + key);
}

void save_config(const ExperimentConfig& cfg, std::ostream& os) {
  os << "name = " << cfg.name << "\n";
  os << "dimension = " << cfg.dimension << "\n";
  os << "extent = " << fmt_list(cfg.extent) << "\n";
  os << "origin = " << fmt_list(cfg.origin) << "\n";
  os << "ic = " << cfg.ic << "\n";
  os << "ic_params = " << fmt_list(cfg.ic_params) << "\n";
  os << "speed = " << cfg.speed << "\n";
  os << "speed_params = " << fmt_list(cfg.speed_params) << "\n";
  os << "speed_file = " << cfg.speed_file << "\n";
  os << "T = " << fmt(cfg.T) << "\n";
  os << "dt_com = " << fmt(cfg.dt_com) << "\n";
  os << "dx = " << fmt_list(cfg.dx) << "\n";
  os << "dt_over_dx = " << fmt(cfg.dt_over_dx) << "\n";
  os << "ratio = " << cfg.ratio << "\n";
  os << "m_t = " << cfg.m_t << "\n";
  os << "interp = " << to_string(cfg.interp) << "\n";
  os << "gradient = " << to_string(cfg.gradient) << "\n";
  os << "tol = " << fmt(cfg.tol) << "\n";
  os << "iterations = " << cfg.iterations << "\n";
  os << "variant = " << to_string(cfg.variant) << "\n";
  os << "remove_count = " << cfg.remove_count << "\n";
  os << "out = " << cfg.out << "\n";
  os << "workers = " << cfg.workers << "\n";
}

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    apply_override(cfg, key, value);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  return parse_config(is);
}

// ---------------------------------------------------------------------------
// presets

namespace {

ExperimentConfig base_1d() {
  ExperimentConfig c;
  c.dimension = 1;
  c.extent = {1.0};
  c.origin = {-0.5};
  c.ic = "gaussian-cosine-pulse";
  c.ic_params = {10.0, 100.0};
  c.speed = "constant";
  c.speed_params = {1.0};
  c.dt_com = 0.05;
  c.dx = {0.01};
  c.dt_over_dx = 0.5;
  c.ratio = 1;
  c.m_t = 20;
  c.interp = InterpKind::fourier;
  c.gradient = GradientScheme::fd2;
  return c;
}

ExperimentConfig base_2d_strip() {
  // xy-domain [-1,1] x [-0.5,0.5]; axis order (y, x)
  ExperimentConfig c;
  c.dimension = 2;
  c.extent = {1.0, 2.0};
  c.origin = {-0.5, -1.0};
  c.dx = {0.005};
  c.ratio = 1;
  c.interp = InterpKind::fourier;
  c.gradient = GradientScheme::fd4;
  return c;
}

const std::map<std::string, std::string>& preset_table() {
  static const std::map<std::string, std::string> table{
      {"rank-tolerance", "1D constant medium, corrector rank-truncation sweep"},
      {"omega-identity", "1D constant medium, no phase correction (identity corrector) at T=50"},
      {"gradient-order", "1D constant medium, gradient-order study (override gradient=fd4/fd6/fd8/spectral)"},
      {"singular-removal", "1D constant medium, leading singular triplets removed (override remove_count)"},
      {"no-correction", "1D constant medium, corrected coarse propagator without additive correction"},
      {"interpolation", "1D constant medium, coarse/fine ratio 10 (override interp=linear for contrast)"},
      {"oned-variable", "1D variable medium c=1+0.25cos(4pi x), ratio 10"},
      {"waveguide", "2D waveguide c=1-0.3cos(2pi y), plane-wave initial data"},
      {"inclusion", "2D disc inclusion with 0.9 speed contrast, modulated plane wave"},
      {"marmousi-small", "2D layered-wedge stand-in for the Marmousi model, desk scale"},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, desc] : preset_table()) out.push_back(name);
    return out;
  }();
  return names;
}

std::string preset_description(const std::string& name) {
  const auto it = preset_table().find(name);
  if (it == preset_table().end()) throw ConfigError("unknown preset: " + name);
  return it->second;
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  if (name == "rank-tolerance") {
    c = base_1d();
    c.T = 5.0;
    c.tol = 1e-15;
    c.iterations = 15;
    c.variant = Variant::theta;
  } else if (name == "omega-identity") {
    c = base_1d();
    c.T = 50.0;
    c.tol = 1e-14;
    c.iterations = 15;
    c.variant = Variant::omega_identity;
  } else if (name == "gradient-order") {
    c = base_1d();
    c.T = 10.0;
    c.tol = 1e-14;
    c.iterations = 10;
    c.variant = Variant::theta;
  } else if (name == "singular-removal") {
    c = base_1d();
    c.T = 10.0;
    c.tol = 1e-14;
    c.iterations = 10;
    c.variant = Variant::theta;
    c.remove_count = 0;
  } else if (name == "no-correction") {
    c = base_1d();
    c.T = 10.0;
    c.tol = 1e-14;
    c.gradient = GradientScheme::fd4;
    c.iterations = 10;
    c.variant = Variant::corrected_coarse_only;
  } else if (name == "interpolation") {
    c = base_1d();
    c.T = 10.0;
    c.tol = 1e-14;
    c.gradient = GradientScheme::fd4;
    c.ratio = 10;
    c.m_t = 200;
    c.iterations = 10;
    c.variant = Variant::theta;
  } else if (name == "oned-variable") {
    c = base_1d();
    c.T = 10.0;
    c.tol = 1e-14;
    c.gradient = GradientScheme::fd4;
    c.speed = "cosine";
    c.speed_params = {0.25, 4.0};
    c.ratio = 10;
    c.m_t = 100;
    c.iterations = 10;
    c.variant = Variant::theta;
  } else if (name == "waveguide") {
    c = base_2d_strip();
    c.ic = "plane-wave";
    c.ic_params = {50.0, -0.5, 100.0};
    c.speed = "waveguide";
    c.speed_params = {-0.3, 2.0};
    c.T = 5.0;
    c.dt_com = 0.05;
    c.dt_over_dx = 0.25;
    c.m_t = 5;  // fine Courant number 5x smaller at equal grids
    c.tol = 1e-13;
    c.iterations = 10;
    c.variant = Variant::theta;
  } else if (name == "inclusion") {
    c = base_2d_strip();
    c.ic = "modulated-plane-wave";
    c.ic_params = {4.0, 50.0, -0.5};
    c.speed = "inclusion";
    c.speed_params = {0.9, -0.1, 0.5, 0.002};
    c.T = 4.0;
    c.dt_com = 0.02;
    c.dt_over_dx = 0.5;
    c.m_t = 5;
    c.tol = 1e-13;
    c.iterations = 10;
    c.variant = Variant::theta;
  } else if (name == "marmousi-small") {
    // 121 x 368 desk-scale grid over the 3022m x 9192m Marmousi extents,
    // same-grid coarse/fine with a 10x time-step ratio. The default speed is
    // a synthetic layered-wedge stand-in; supply the real model with
    //   --override speed=file --override speed_file=PATH
    c.dimension = 2;
    c.extent = {3022.0, 9192.0};
    c.origin = {0.0, 0.0};
    c.ic = "radial-pulse";
    c.ic_params = {0.01, 1.6e-5, 400.0, 3880.0};
    c.speed = "marmousi-proxy";
    c.speed_params = {0.0};
    c.T = 2.0;
    c.dt_com = 0.05;
    c.dx = {3022.0 / 121.0, 9192.0 / 368.0};
    c.dt_over_dx = 1.25e-3 / (3022.0 / 121.0);  // 40 coarse steps per coupling
    c.ratio = 1;
    c.m_t = 10;
    c.interp = InterpKind::fourier;
    c.gradient = GradientScheme::fd4;
    c.tol = 1e-10;
    c.iterations = 6;
    c.variant = Variant::theta;
  } else {
    std::string msg = "unknown preset: " + name + "; available:";
    for (const auto& n : preset_names()) msg += " " + n;
    throw ConfigError(msg);
  }
  c.name = name;
  return c;
}

// ---------------------------------------------------------------------------
// samplers

namespace {

double need_param(const std::vector<double>& params, std::size_t i, const char* what) {
  if (i >= params.size())
    throw ConfigError(std::string(what) + ": missing parameter " + std::to_string(i));
  return params[i];
}

// coordinate of node i along an axis
double coord(const Grid& g, const std::vector<double>& origin, int axis, std::size_t i) {
  return origin[static_cast<std::size_t>(axis)] + static_cast<double>(i) * g.spacing(axis);
}

template <typename Fn>
void for_each_node(const Grid& g, const std::vector<double>& origin, Fn&& fn) {
  if (g.dim() == 1) {
    for (std::size_t i = 0; i < g.points(0); ++i) fn(i, 0.0, coord(g, origin, 0, i));
    return;
  }
  const std::size_t ny = g.points(0), nx = g.points(1);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    const double y = coord(g, origin, 0, iy);
    for (std::size_t ix = 0; ix < nx; ++ix)
      fn(iy * nx + ix, y, coord(g, origin, 1, ix));
  }
}

WaveState sample_initial_state(const ExperimentConfig& cfg, const Grid& grid) {
  WaveState s(grid);
  const auto& p = cfg.ic_params;
  if (cfg.ic == "gaussian-cosine-pulse") {
    const double f = need_param(p, 0, "gaussian-cosine-pulse");
    const double decay = need_param(p, 1, "gaussian-cosine-pulse");
    for_each_node(grid, cfg.origin, [&](std::size_t i, double, double x) {
      s.u[i] = std::cos(f * M_PI * x) * std::exp(-decay * x * x);
    });
  } else if (cfg.ic == "plane-wave") {
    const double decay = need_param(p, 0, "plane-wave");
    const double x0 = need_param(p, 1, "plane-wave");
    const double amp = need_param(p, 2, "plane-wave");
    for_each_node(grid, cfg.origin, [&](std::size_t i, double, double x) {
      const double g = std::exp(-decay * (x - x0) * (x - x0));
      s.u[i] = g;
      s.udot[i] = amp * g;
    });
  } else if (cfg.ic == "modulated-plane-wave") {
    const double k = need_param(p, 0, "modulated-plane-wave");
    const double decay = need_param(p, 1, "modulated-plane-wave");
    const double x0 = need_param(p, 2, "modulated-plane-wave");
    for_each_node(grid, cfg.origin, [&](std::size_t i, double, double x) {
      const double X = x - x0;
      const double g = std::exp(-decay * X * X);
      s.u[i] = std::cos(k * M_PI * X) * g;
      s.udot[i] = (-k * M_PI * std::sin(k * M_PI * X) +
                   2.0 * decay * X * std::cos(k * M_PI * X)) * g;
    });
  } else if (cfg.ic == "radial-pulse") {
    const double k = need_param(p, 0, "radial-pulse");
    const double decay = need_param(p, 1, "radial-pulse");
    const double cy = need_param(p, 2, "radial-pulse");
    const double cx = need_param(p, 3, "radial-pulse");
    for_each_node(grid, cfg.origin, [&](std::size_t i, double y, double x) {
      const double r2 = grid.dim() == 1 ? (x - cx) * (x - cx)
                                        : (y - cy) * (y - cy) + (x - cx) * (x - cx);
      s.u[i] = std::cos(k * std::sqrt(r2)) * std::exp(-decay * r2);
    });
  } else {
    throw ConfigError("unknown initial-condition preset: " + cfg.ic);
  }
  return s;
}

SpeedField sample_speed(const ExperimentConfig& cfg, const Grid& grid) {
  std::vector<double> c(grid.size(), 1.0);
  const auto& p = cfg.speed_params;
  if (cfg.speed == "constant") {
    const double c0 = need_param(p, 0, "constant speed");
    std::fill(c.begin(), c.end(), c0);
  } else if (cfg.speed == "cosine") {
    const double amp = need_param(p, 0, "cosine speed");
    const double f = need_param(p, 1, "cosine speed");
    for_each_node(grid, cfg.origin, [&](std::size_t i, double, double x) {
      c[i] = 1.0 + amp * std::cos(f * M_PI * x);
    });
  } else if (cfg.speed == "waveguide") {
    const double amp = need_param(p, 0, "waveguide speed");
    const double f = need_param(p, 1, "waveguide speed");
    for_each_node(grid, cfg.origin, [&](std::size_t i, double y, double) {
      c[i] = 1.0 + amp * std::cos(f * M_PI * y);
    });
  } else if (cfg.speed == "inclusion") {
    const double contrast = need_param(p, 0, "inclusion speed");
    const double cy = need_param(p, 1, "inclusion speed");
    const double cx = need_param(p, 2, "inclusion speed");
    const double r2 = need_param(p, 3, "inclusion speed");
    for_each_node(grid, cfg.origin, [&](std::size_t i, double y, double x) {
      const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      c[i] = d2 < r2 ? 1.0 - contrast : 1.0;
    });
  } else if (cfg.speed == "marmousi-proxy") {
    // deterministic layered wedge spanning roughly 900..4700 m/s
    const double ey = cfg.extent[0], ex = cfg.extent.back();
    for_each_node(grid, cfg.origin, [&](std::size_t i, double y, double x) {
      const double yf = (y - cfg.origin[0]) / ey;
      const double xf = (x - cfg.origin.back()) / ex;
      c[i] = 1500.0 + 2600.0 * yf + 350.0 * std::sin(2.0 * M_PI * (4.0 * yf + 2.0 * xf)) +
             250.0 * std::sin(2.0 * M_PI * (9.0 * yf - 3.0 * xf +
                                            0.5 * std::sin(2.0 * M_PI * xf)));
    });
  } else if (cfg.speed == "file") {
    if (cfg.speed_file.empty()) throw ConfigError("speed=file requires speed_file");
    return ingest_speed_model(cfg.speed_file, grid);
  } else {
    throw ConfigError("unknown speed preset: " + cfg.speed);
  }
  return SpeedField(grid, std::move(c));
}

}  // namespace

// ---------------------------------------------------------------------------
// setup and run

ExperimentSetup build_setup(const ExperimentConfig& cfg) {
  if (cfg.dimension != 1 && cfg.dimension != 2)
    throw ConfigError("dimension must be 1 or 2");
  const std::size_t d = static_cast<std::size_t>(cfg.dimension);
  if (cfg.extent.size() != d || cfg.origin.size() != d)
    throw ConfigError("extent/origin must list one value per axis");
  std::vector<double> dx = cfg.dx;
  if (dx.size() == 1 && d == 2) dx.push_back(dx[0]);
  if (dx.size() != d) throw ConfigError("dx must list one value per axis (or a single value)");
  if (cfg.ratio == 0 || cfg.m_t == 0) throw ConfigError("ratio and m_t must be positive");
  if (cfg.iterations < 0) throw ConfigError("iterations must be nonnegative");
  if (cfg.remove_count < 0) throw ConfigError("remove_count must be nonnegative");
  if (!(cfg.T > 0.0) || !(cfg.dt_com > 0.0) || !(cfg.dt_over_dx > 0.0))
    throw ConfigError("T, dt_com, dt_over_dx must be positive");

  std::vector<std::size_t> coarse_n(d), fine_n(d);
  std::vector<double> fine_h(d);
  for (std::size_t a = 0; a < d; ++a) {
    const double n_exact = cfg.extent[a] / dx[a];
    const auto n = static_cast<std::size_t>(std::llround(n_exact));
    if (n < 4 || std::abs(n_exact - static_cast<double>(n)) > 1e-6 * n_exact)
      throw ConfigError("extent/dx must give an integer number (>=4) of coarse points");
    coarse_n[a] = n;
    fine_n[a] = n * cfg.ratio;
    fine_h[a] = dx[a] / static_cast<double>(cfg.ratio);
  }
  Grid coarse_grid(coarse_n, dx);
  Grid fine_grid(fine_n, fine_h);

  const double n_coup = cfg.T / cfg.dt_com;
  const auto N = static_cast<std::size_t>(std::llround(n_coup));
  if (N == 0 || std::abs(n_coup - static_cast<double>(N)) > 1e-9 * n_coup)
    throw ConfigError("T must be an integer multiple of dt_com");

  const double min_dx = *std::min_element(dx.begin(), dx.end());
  const double dt_requested = cfg.dt_over_dx * min_dx;
  const auto m_coarse =
      static_cast<std::size_t>(std::max(1.0, std::round(cfg.dt_com / dt_requested)));
  const double dt_coarse = cfg.dt_com / static_cast<double>(m_coarse);
  const double dt_fine = dt_coarse / static_cast<double>(cfg.m_t);
  const std::size_t m_fine = m_coarse * cfg.m_t;

  SpeedField fine_speed = sample_speed(cfg, fine_grid);
  SpeedField coarse_speed = resize_speed(fine_speed, coarse_grid);
  WaveState init = sample_initial_state(cfg, fine_grid);

  PropagatorConfig fine_cfg(fine_grid, fine_speed, dt_fine, m_fine);
  PropagatorConfig coarse_cfg(coarse_grid, coarse_speed, dt_coarse, m_coarse);
  CouplingSchedule schedule(cfg.T, cfg.dt_com, N, std::move(fine_cfg), std::move(coarse_cfg));
  GridTransfer transfer(coarse_grid, fine_grid, cfg.interp);

  return ExperimentSetup{std::move(fine_grid), std::move(coarse_grid),
                         std::move(fine_speed), std::move(coarse_speed), std::move(init),
                         std::move(schedule), std::move(transfer), m_coarse};
}

ParaRun run_to_history(const ExperimentConfig& cfg) {
  const ExperimentSetup setup = build_setup(cfg);
  DriverOptions driver;
  driver.metric_scheme = cfg.gradient;
  driver.workers = cfg.workers;
  driver.keep_states = false;

  switch (cfg.variant) {
    case Variant::plain:
      return plain_parareal(setup.init, setup.schedule, setup.transfer, cfg.iterations,
                            driver);
    case Variant::theta:
    case Variant::omega_identity: {
      ThetaOptions opts;
      opts.scheme = cfg.gradient;
      opts.tol = cfg.tol;
      opts.omega_identity = cfg.variant == Variant::omega_identity;
      opts.remove_leading = cfg.remove_count;
      opts.driver = driver;
      return theta_parareal(setup.init, setup.schedule, setup.transfer, cfg.iterations,
                            opts);
    }
    case Variant::corrected_coarse_only: {
      ThetaOptions opts;
      opts.scheme = cfg.gradient;
      opts.tol = cfg.tol;
      opts.remove_leading = cfg.remove_count;
      opts.driver = driver;
      return corrected_coarse_only(setup.init, setup.schedule, setup.transfer,
                                   cfg.iterations, opts);
    }
  }
  throw ConfigError("unhandled variant");
}

namespace {

void write_run_files(const ExperimentConfig& cfg, const ExperimentSetup& setup,
                     const ParaRun& run, const std::filesystem::path& dir,
                     double wall_ms) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  {
    std::ofstream os(dir / "errors.csv");
    os << "iteration,coupling,energy_error,l2_error,diverged\n";
    for (std::size_t k = 0; k < run.iterations.size(); ++k) {
      const IterationRecord& rec = run.iterations[k];
      for (std::size_t n = 0; n < rec.energy_err.size(); ++n)
        os << k << "," << n << "," << fmt(rec.energy_err[n]) << ","
           << fmt(rec.l2_err[n]) << "," << (rec.diverged ? 1 : 0) << "\n";
    }
  }
  {
    std::ofstream os(dir / "residuals.csv");
    os << "iteration,residual,rank\n";
    if (cfg.variant != Variant::plain)
      for (std::size_t k = 1; k < run.iterations.size(); ++k)
        os << k << "," << fmt(run.iterations[k].residual) << ","
           << run.iterations[k].rank << "\n";
  }
  {
    std::ofstream os(dir / "summary.csv");
    os << "iteration,energy_error,l2_error,diverged\n";
    for (std::size_t k = 0; k < run.iterations.size(); ++k) {
      const IterationRecord& rec = run.iterations[k];
      os << k << "," << fmt(rec.energy_err.back()) << "," << fmt(rec.l2_err.back())
         << "," << (rec.diverged ? 1 : 0) << "\n";
    }
  }
  {
    std::ofstream os(dir / "config.txt");
    save_config(cfg, os);
  }
  {
    std::ofstream os(dir / "meta.txt");
    const auto minmax =
        std::minmax_element(setup.fine_speed.c.begin(), setup.fine_speed.c.end());
    bool any_diverged = false;
    for (const auto& rec : run.iterations) any_diverged |= rec.diverged;
    os << "coarse_points = " << setup.coarse_grid.size() << "\n";
    os << "fine_points = " << setup.fine_grid.size() << "\n";
    os << "n_couplings = " << setup.schedule.n_couplings << "\n";
    os << "coarse_steps_per_coupling = " << setup.m_coarse_steps << "\n";
    os << "fine_steps_per_coupling = " << setup.schedule.fine_cfg.steps_per_coupling
       << "\n";
    os << "dt_coarse = " << fmt(setup.schedule.coarse_cfg.dt) << "\n";
    os << "dt_fine = " << fmt(setup.schedule.fine_cfg.dt) << "\n";
    os << "speed_min = " << fmt(*minmax.first) << "\n";
    os << "speed_max = " << fmt(*minmax.second) << "\n";
    os << "diverged = " << (any_diverged ? 1 : 0) << "\n";
    os << "wall_ms = " << fmt(wall_ms) << "\n";
    if (cfg.iterations > 0)
      os << "speedup_estimate = "
         << fmt(speedup_estimate(
                std::max(1, cfg.workers), static_cast<double>(cfg.ratio),
                static_cast<double>(cfg.m_t), cfg.dimension,
                static_cast<double>(setup.schedule.n_couplings), cfg.iterations))
         << "\n";
  }
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  try {
    const ExperimentSetup setup = build_setup(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const ParaRun run = run_to_history(cfg);
    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    const fs::path dir = cfg.out.empty() ? fs::path("runs") / cfg.name : fs::path(cfg.out);
    write_run_files(cfg, setup, run, dir, wall_ms);
    bool any_diverged = false;
    for (const auto& rec : run.iterations) any_diverged |= rec.diverged;
    std::cout << cfg.name << ": " << run.iterations.size() - 1 << " iterations, final "
              << "energy error " << fmt(run.iterations.back().energy_err.back())
              << (any_diverged ? " [diverged]" : "") << ", wrote " << dir.string()
              << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "setup error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 1;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 1;
  }
}

int singular_removal_run(ExperimentConfig cfg, int remove_count) {
  if (remove_count != 0 && remove_count != 1 && remove_count != 3 && remove_count != 5)
    throw ConfigError("singular_removal_run: remove_count must be one of 0, 1, 3, 5");
  cfg.variant = Variant::theta;
  cfg.remove_count = remove_count;
  if (cfg.out.empty())
    cfg.out = (std::filesystem::path("runs") /
               (cfg.name + "-r" + std::to_string(remove_count))).string();
  return run_experiment(cfg);
}

// ---------------------------------------------------------------------------
// speed-model text format

namespace {

struct RawSpeed {
  std::size_t ny, nx;
  double dy, dx;
  std::vector<double> values;
};

RawSpeed parse_speed_text(std::istream& is) {
  RawSpeed raw;
  long ny = 0, nx = 0;
  if (!(is >> ny >> nx >> raw.dy >> raw.dx))
    throw ConfigError("speed model: bad header (want: ny nx dy dx)");
  if (ny < 1 || nx < 1) throw ConfigError("speed model: nonpositive shape");
  if (!(raw.dx > 0.0) || (ny > 1 && !(raw.dy > 0.0)))
    throw ConfigError("speed model: nonpositive spacing");
  raw.ny = static_cast<std::size_t>(ny);
  raw.nx = static_cast<std::size_t>(nx);
  raw.values.resize(raw.ny * raw.nx);
  for (double& v : raw.values) {
    if (!(is >> v)) throw ConfigError("speed model: truncated value table");
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError("speed model: wave speed entries must be positive and finite");
  }
  double extra;
  if (is >> extra) throw ConfigError("speed model: trailing values beyond ny*nx");
  return raw;
}

SpeedField raw_to_field(RawSpeed raw) {
  if (raw.nx < 4 || (raw.ny > 1 && raw.ny < 4))
    throw ConfigError("speed model: too few points for a grid; resample to a target size");
  if (raw.ny == 1)
    return SpeedField(Grid({raw.nx}, {raw.dx}), std::move(raw.values));
  return SpeedField(Grid({raw.ny, raw.nx}, {raw.dy, raw.dx}), std::move(raw.values));
}

}  // namespace

SpeedField read_speed_model(std::istream& is) { return raw_to_field(parse_speed_text(is)); }

SpeedField ingest_speed_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open speed model: " + path);
  return read_speed_model(is);
}

SpeedField ingest_speed_model(const std::string& path, const Grid& target) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open speed model: " + path);
  RawSpeed raw = parse_speed_text(is);
  const std::size_t ty = target.dim() == 1 ? 1 : target.points(0);
  const std::size_t tx = target.dim() == 1 ? target.points(0) : target.points(1);
  if (target.dim() == 2 && raw.ny == 1)
    throw ConfigError("speed model: 1D file cannot fill a 2D grid");
  std::vector<double> resized = bilinear_resample(raw.values, raw.ny, raw.nx, ty, tx);
  return SpeedField(target, std::move(resized));
}

void write_speed_model(const SpeedField& field, std::ostream& os) {
  const Grid& g = field.grid;
  const std::size_t ny = g.dim() == 1 ? 1 : g.points(0);
  const std::size_t nx = g.dim() == 1 ? g.points(0) : g.points(1);
  const double dy = g.dim() == 1 ? 1.0 : g.spacing(0);
  const double dx = g.dim() == 1 ? g.spacing(0) : g.spacing(1);
  os << ny << " " << nx << " " << fmt(dy) << " " << fmt(dx) << "\n";
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix)
      os << (ix ? " " : "") << fmt(field.c[iy * nx + ix]);
    os << "\n";
  }
}

}  // namespace paratime
