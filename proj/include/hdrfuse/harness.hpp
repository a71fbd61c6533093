#pragma once

// Static-camera controller race: each controller drives its own simulated
// camera over the same scene and seed; after every fused frame the harness
// records the fraction of complete points and the mean relative error
// against a batch-merged ground truth.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hdrfuse/controller.hpp"
#include "hdrfuse/map_buffer.hpp"
#include "hdrfuse/radiometry.hpp"
#include "hdrfuse/sensorsim.hpp"

namespace hdrfuse {

struct CameraSpec {
  std::string curve = "linear";        // linear | gamma:<g> | <curve file>
  std::string vignetting = "radial";   // none | radial | <PFM file>
  double vignetting_corner = 0.5;
  Rgb noise{0.0005, 0.0008, 0.0015};
  std::vector<double> times = ExposureProgram::geometric_times(1.0, 1000.0, 16);
  int z_lo = 4;
  int z_hi = 250;
  int lag = 3;
};

enum class ControllerKind { proposed, sweep };

struct ControllerSpec {
  std::string name;
  ControllerKind kind = ControllerKind::proposed;
  SweepKind sweep = SweepKind::multiplicative_up;
};

struct ExperimentConfig {
  SceneKind scene_kind = SceneKind::log_gradient;
  SceneParams scene{64, 16, 1e-4, 1e-1, 8, {}};
  CameraSpec camera;
  std::vector<ControllerSpec> controllers;
  ControllerConfig controller;
  int throttle = 3;          // the controller acts every `throttle` frames
  bool lag_aware = false;    // skip decisions while a command is still pending
  double sweep_factor = 2.0;
  std::optional<double> sweep_step;  // default: spacing of an even additive sweep
  int frames = 30;
  std::uint64_t seed = 1;
};

/// Assembled camera model for an experiment.
struct Camera {
  ResponseCurve curve;
  VignettingMap vignetting;
  NoiseModel noise;
  ExposureProgram program;
};

struct FrameRecord {
  int frame = 0;
  std::string controller;
  double t_cmd = 0.0;  // most recent command after this frame was processed
  double t_eff = 0.0;  // exposure the frame was captured with
  double frac_complete = 0.0;
  double mean_rel_err = 0.0;  // NaN while no point is complete
  FusionStats stats;
};

struct TraceRow {
  int frame = 0;
  std::string controller;
  UtilityTerms terms;
  bool chosen = false;
};

struct ControllerRun {
  std::string controller;
  MapBuffer map;
};

struct ExperimentResult {
  std::vector<FrameRecord> records;
  std::vector<TraceRow> trace;
  std::vector<ControllerRun> runs;
  GroundTruth ground_truth;
  PackScale scale;
};

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

inline long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    long long d = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  }
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + key + "' expects true/false, got '" + v + "'");
}

inline std::vector<double> parse_times(const std::string& key, const std::string& v) {
  if (v.rfind("geometric:", 0) == 0) {
    auto parts = split(v.substr(10), ':');
    if (parts.size() != 3) throw ConfigError("'" + key + "' expects geometric:<min>:<max>:<count>");
    try {
      return ExposureProgram::geometric_times(to_double(key, parts[0]), to_double(key, parts[1]),
                                              static_cast<int>(to_int(key, parts[2])));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("'" + key + "': " + e.what());
    }
  }
  std::vector<double> out;
  for (const auto& p : split(v, ',')) out.push_back(to_double(key, p));
  return out;
}

inline ControllerSpec parse_controller(const std::string& name) {
  if (name == "proposed") return {name, ControllerKind::proposed, {}};
  if (name == "mult-up") return {name, ControllerKind::sweep, SweepKind::multiplicative_up};
  if (name == "mult-down") return {name, ControllerKind::sweep, SweepKind::multiplicative_down};
  if (name == "add-up") return {name, ControllerKind::sweep, SweepKind::additive_up};
  if (name == "add-down") return {name, ControllerKind::sweep, SweepKind::additive_down};
  throw ConfigError("unknown controller '" + name + "'");
}

}  // namespace detail

/// Default controller set: the map-aware controller and the four sweeps.
inline std::vector<ControllerSpec> default_controllers() {
  std::vector<ControllerSpec> out;
  for (const char* n : {"proposed", "mult-up", "mult-down", "add-up", "add-down"})
    out.push_back(detail::parse_controller(n));
  return out;
}

/// Parses the plain-text key = value experiment config. Relative file paths
/// are resolved against `base_dir`. Throws ConfigError.
inline ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  ExperimentConfig cfg;
  cfg.controllers = default_controllers();
  auto resolve = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string v = detail::trim(line.substr(eq + 1));
    if (key == "scene") {
      if (v == "log-gradient") cfg.scene_kind = SceneKind::log_gradient;
      else if (v == "checkerboard") cfg.scene_kind = SceneKind::checkerboard;
      else if (v == "bright-dark-split") cfg.scene_kind = SceneKind::bright_dark_split;
      else if (v == "file") cfg.scene_kind = SceneKind::from_file;
      else throw ConfigError("unknown scene kind '" + v + "'");
    } else if (key == "scene.width") {
      cfg.scene.width = static_cast<int>(detail::to_int(key, v));
    } else if (key == "scene.height") {
      cfg.scene.height = static_cast<int>(detail::to_int(key, v));
    } else if (key == "scene.low") {
      cfg.scene.low = detail::to_double(key, v);
    } else if (key == "scene.high") {
      cfg.scene.high = detail::to_double(key, v);
    } else if (key == "scene.cell") {
      cfg.scene.cell = static_cast<int>(detail::to_int(key, v));
    } else if (key == "scene.file") {
      cfg.scene.file = resolve(v);
    } else if (key == "camera.curve") {
      cfg.camera.curve = (v == "linear" || v.rfind("gamma:", 0) == 0) ? v : resolve(v).string();
    } else if (key == "camera.vignetting") {
      cfg.camera.vignetting = (v == "none" || v == "radial") ? v : resolve(v).string();
    } else if (key == "camera.vignetting_corner") {
      cfg.camera.vignetting_corner = detail::to_double(key, v);
    } else if (key == "camera.noise") {
      auto parts = detail::split(v, ',');
      if (parts.size() == 1) parts = {parts[0], parts[0], parts[0]};
      if (parts.size() != 3) throw ConfigError("'camera.noise' expects 1 or 3 values");
      for (int c = 0; c < kChannels; ++c) cfg.camera.noise[c] = detail::to_double(key, parts[c]);
    } else if (key == "camera.times") {
      cfg.camera.times = detail::parse_times(key, v);
    } else if (key == "camera.z_lo") {
      cfg.camera.z_lo = static_cast<int>(detail::to_int(key, v));
    } else if (key == "camera.z_hi") {
      cfg.camera.z_hi = static_cast<int>(detail::to_int(key, v));
    } else if (key == "camera.lag") {
      cfg.camera.lag = static_cast<int>(detail::to_int(key, v));
    } else if (key == "controllers") {
      cfg.controllers.clear();
      for (const auto& n : detail::split(v, ',')) cfg.controllers.push_back(detail::parse_controller(n));
    } else if (key == "controller.beta") {
      cfg.controller.beta = detail::to_double(key, v);
    } else if (key == "controller.throttle") {
      cfg.throttle = static_cast<int>(detail::to_int(key, v));
    } else if (key == "controller.lag_aware") {
      cfg.lag_aware = detail::to_bool(key, v);
    } else if (key == "sweep.factor") {
      cfg.sweep_factor = detail::to_double(key, v);
    } else if (key == "sweep.step") {
      cfg.sweep_step = detail::to_double(key, v);
    } else if (key == "frames") {
      cfg.frames = static_cast<int>(detail::to_int(key, v));
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(detail::to_int(key, v));
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_config(in, path.parent_path());
}

inline Camera build_camera(const CameraSpec& spec, int width, int height) {
  try {
    ResponseCurve curve;
    if (spec.curve == "linear")
      curve = ResponseCurve::linear();
    else if (spec.curve.rfind("gamma:", 0) == 0)
      curve = ResponseCurve::gamma(detail::to_double("camera.curve", spec.curve.substr(6)));
    else
      curve = read_response_curve(spec.curve);

    VignettingMap vmap;
    if (spec.vignetting == "none")
      vmap = VignettingMap::uniform(width, height);
    else if (spec.vignetting == "radial")
      vmap = VignettingMap::radial(width, height, spec.vignetting_corner);
    else
      vmap = read_vignetting(spec.vignetting);
    if (vmap.width() != width || vmap.height() != height)
      throw ConfigError("vignetting map size does not match the scene");

    for (double a : spec.noise)
      if (!(a >= 0.0)) throw ConfigError("noise coefficients must be non-negative");
    ExposureProgram program(spec.times, curve, spec.z_lo, spec.z_hi);
    if (spec.lag < 0) throw ConfigError("camera.lag must be non-negative");
    return {std::move(curve), std::move(vmap), NoiseModel{spec.noise}, std::move(program)};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.frames < 1) throw ConfigError("frames must be at least 1");
  if (cfg.controllers.empty()) throw ConfigError("at least one controller is required");
  if (cfg.throttle < 1) throw ConfigError("controller.throttle must be at least 1");
  if (!(cfg.controller.beta >= 0.0)) throw ConfigError("controller.beta must be non-negative");
  if (!(cfg.sweep_factor > 1.0)) throw ConfigError("sweep.factor must exceed 1");
  if (cfg.sweep_step && !(*cfg.sweep_step > 0.0)) throw ConfigError("sweep.step must be positive");
  std::map<std::string, int> seen;
  for (const auto& c : cfg.controllers)
    if (seen[c.name]++) throw ConfigError("controller '" + c.name + "' listed twice");
}

/// Ground truth: a noise-free camera captures one frame at every program
/// time, merged in batch. With a noise-free configuration the scene itself
/// is used.
inline GroundTruth experiment_ground_truth(const Scene& scene, const Camera& cam) {
  if (cam.noise.a == Rgb{0.0, 0.0, 0.0}) {
    GroundTruth gt{scene.width, scene.height, scene.radiance, std::vector<bool>(scene.pixel_count(), true)};
    for (std::size_t i = 0; i < scene.pixel_count(); ++i)
      for (int c = 0; c < kChannels; ++c) gt.valid[i] = gt.valid[i] && scene.radiance[i][c] > 0.0;
    return gt;
  }
  CameraSim sim(cam.curve, cam.vignetting, NoiseModel{}, cam.program, cam.program.min_time(), 0, 0);
  std::vector<LdrFrame> sweep;
  for (double t : cam.program.times()) {
    sim.command_exposure(t);
    sweep.push_back(sim.capture(scene));
  }
  return batch_ground_truth(sweep, cam.curve, cam.vignetting, cam.noise, cam.program);
}

/// Mean over complete points and channels of |L - L*| / L*, skipping points
/// without a valid ground truth. NaN when nothing qualifies.
inline double mean_relative_error(const MapBuffer& map, const GroundTruth& gt) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (!map.at(i).complete() || !gt.valid[i]) continue;
    const auto& cc = map.at(i).complete_state();
    for (int c = 0; c < kChannels; ++c) {
      if (!(gt.radiance[i][c] > 0.0)) continue;
      sum += std::abs(cc.radiance(c) - gt.radiance[i][c]) / gt.radiance[i][c];
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const Scene scene = make_scene(cfg.scene_kind, cfg.scene);
  const Camera cam = build_camera(cfg.camera, scene.width, scene.height);
  const auto& times = cam.program.times();
  const double step = cfg.sweep_step.value_or(
      times.size() > 1 ? (times.back() - times.front()) / static_cast<double>(times.size() - 1) : 1.0);

  ExperimentResult result{{}, {}, {}, experiment_ground_truth(scene, cam), PackScale::from(cam.program)};

  for (const auto& spec : cfg.controllers) {
    MapBuffer map(scene.width, scene.height, cam.program);
    std::optional<SweepController> sweep;

    auto decide = [&](int frame) {
      if (spec.kind == ControllerKind::sweep) return frame < 0 ? sweep->current() : sweep->advance();
      ExposureDecision d = select_exposure(map, cam.vignetting, cam.program, cfg.controller);
      for (const auto& u : d.trace) result.trace.push_back({frame, spec.name, u, u.t == d.t});
      return d.t;
    };

    if (spec.kind == ControllerKind::sweep) {
      const bool additive = spec.sweep == SweepKind::additive_up || spec.sweep == SweepKind::additive_down;
      sweep.emplace(spec.sweep, cam.program, additive ? step : cfg.sweep_factor);
    }
    double t_cmd = decide(-1);  // initial exposure, logged as frame -1
    CameraSim sim(cam.curve, cam.vignetting, cam.noise, cam.program, t_cmd, cfg.camera.lag, cfg.seed);

    for (int f = 0; f < cfg.frames; ++f) {
      LdrFrame frame = sim.capture(scene);
      FusionStats stats = fuse_frame(map, frame, cam.vignetting, cam.curve, cam.program);
      if (f % cfg.throttle == 0 && !(cfg.lag_aware && sim.pending() > 0)) {
        t_cmd = decide(f);
        sim.command_exposure(t_cmd);
      }
      result.records.push_back(
          {f, spec.name, t_cmd, frame.exposure, map.complete_fraction(), mean_relative_error(map, result.ground_truth), stats});
    }
    result.runs.push_back({spec.name, std::move(map)});
  }
  return result;
}

}  // namespace hdrfuse
