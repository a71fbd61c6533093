// hdrfuse command line: run controller experiments, calibrate a response
// curve from an exposure stack, fit the noise coefficient, and dump
// simulated frames.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "hdrfuse/hdrfuse.hpp"

namespace fs = std::filesystem;
using namespace hdrfuse;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

int cmd_run(const fs::path& config_path, const fs::path& out_dir, std::optional<std::uint64_t> seed,
            std::optional<int> frames, std::optional<double> beta, bool plot) {
  ExperimentConfig cfg = load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (frames) cfg.frames = *frames;
  if (beta) cfg.controller.beta = *beta;
  ExperimentResult result = run_experiment(cfg);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  emit_csv(result.records, out_dir / "frames.csv");
  std::map<std::string, std::vector<TraceRow>> traces;
  for (const auto& row : result.trace) traces[row.controller].push_back(row);
  for (const auto& [name, rows] : traces) emit_trace_csv(rows, out_dir / (name + "_utility.csv"));
  for (const auto& run : result.runs) {
    PackStats stats;
    write_snapshot(out_dir / (run.controller + ".hdrmap"), run.map, result.scale, &stats);
    if (stats.clamped) std::cerr << run.controller << ": " << stats.clamped << " colors clamped when packing\n";
  }
  if (plot) emit_plot(result.records, out_dir / "frames.svg");

  std::map<std::string, const FrameRecord*> last;
  for (const auto& r : result.records) last[r.controller] = &r;
  for (const auto& spec : cfg.controllers) {
    int first_full = -1;
    for (const auto& r : result.records)
      if (r.controller == spec.name && r.frac_complete == 1.0) {
        first_full = r.frame + 1;
        break;
      }
    const FrameRecord* r = last[spec.name];
    std::printf("%-10s complete=%6.2f%%  mean_rel_err=%.4f  frames_to_complete=%s\n", spec.name.c_str(),
                100.0 * r->frac_complete, r->mean_rel_err,
                first_full < 0 ? "-" : std::to_string(first_full).c_str());
  }
  return kOk;
}

int cmd_calibrate(const fs::path& stack_dir, const fs::path& out, double smoothness, int sites) {
  std::vector<LdrFrame> stack = read_frame_dir(stack_dir);
  CrfFit fit = fit_response_curve(stack, {smoothness, sites});
  write_response_curve(out, fit.curve);
  std::printf("frames=%zu residual=%.6g\n", stack.size(), fit.residual);
  return kOk;
}

int cmd_fit_noise(const fs::path& frames_dir, const fs::path& curve_path, const fs::path& out, int bins, int z_hi) {
  ResponseCurve curve = read_response_curve(curve_path);
  std::vector<LdrFrame> frames = read_frame_dir(frames_dir);
  std::map<double, std::vector<LdrFrame>> by_time;
  for (auto& f : frames) by_time[f.exposure].push_back(std::move(f));
  std::vector<std::vector<LdrFrame>> settings;
  for (auto& [t, group] : by_time) settings.push_back(std::move(group));
  NoiseFit fit = fit_noise_coefficient(settings, curve, {bins, z_hi, 0.95});
  std::ofstream o(out);
  if (!o) throw IoError("cannot open " + out.string() + " for writing");
  o << std::setprecision(17) << "a_r=" << fit.model.a[0] << "\na_g=" << fit.model.a[1] << "\na_b=" << fit.model.a[2]
    << '\n';
  if (!o) throw IoError("write failed: " + out.string());
  std::printf("a = %.6g %.6g %.6g%s\n", fit.model.a[0], fit.model.a[1], fit.model.a[2],
              fit.model.degenerate() ? "  (degenerate: zero variance)" : "");
  return kOk;
}

int cmd_simulate(const fs::path& config_path, const fs::path& out_dir, int repeats, std::optional<std::uint64_t> seed) {
  ExperimentConfig cfg = load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (repeats < 1) throw ConfigError("--repeats must be at least 1");
  const Scene scene = make_scene(cfg.scene_kind, cfg.scene);
  const Camera cam = build_camera(cfg.camera, scene.width, scene.height);
  CameraSim sim(cam.curve, cam.vignetting, cam.noise, cam.program, cam.program.min_time(), 0, cfg.seed);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  const auto& times = cam.program.times();
  for (std::size_t k = 0; k < times.size(); ++k) {
    sim.command_exposure(times[k]);
    for (int r = 0; r < repeats; ++r) {
      char name[64];
      std::snprintf(name, sizeof name, "t%03zu_r%04d.ppm", k, r);
      write_frame_dump(out_dir / name, sim.capture(scene));
    }
  }
  std::printf("wrote %zu frames to %s\n", times.size() * static_cast<std::size_t>(repeats), out_dir.string().c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HDR color fusion and exposure control experiments"};
  app.require_subcommand(1);

  fs::path config, out_dir, stack_dir, frames_dir, curve_path, out_file;
  std::optional<std::uint64_t> seed;
  std::optional<int> frames;
  std::optional<double> beta;
  bool plot = false;
  double smoothness = 50.0;
  int sites = 256, bins = 100, z_hi = 250, repeats = 1;

  auto* run = app.add_subcommand("run", "Race the exposure controllers on a simulated static scene");
  run->add_option("--config", config, "Experiment config file")->required();
  run->add_option("--out-dir", out_dir, "Output directory")->required();
  run->add_option("--seed", seed, "Override the RNG seed");
  run->add_option("--frames", frames, "Override the frame budget");
  run->add_option("--beta", beta, "Override the exploration scale");
  run->add_flag("--plot", plot, "Also write frames.svg");

  auto* cal = app.add_subcommand("calibrate-crf", "Fit an inverse response curve to an exposure stack");
  cal->add_option("--stack", stack_dir, "Directory of PPM frames with t=<seconds> sidecars")->required();
  cal->add_option("--out", out_file, "Response curve output file")->required();
  cal->add_option("--smoothness", smoothness, "Smoothness weight");
  cal->add_option("--sites", sites, "Number of sample sites");

  auto* noise = app.add_subcommand("fit-noise", "Fit the signal-dependent noise coefficient");
  noise->add_option("--frames", frames_dir, "Directory of repeated PPM frames with sidecars")->required();
  noise->add_option("--curve", curve_path, "Response curve file")->required();
  noise->add_option("--out", out_file, "Noise model output file")->required();
  noise->add_option("--bins", bins, "Number of exposure bins");
  noise->add_option("--z-hi", z_hi, "Over-exposure threshold");

  auto* sim = app.add_subcommand("simulate", "Dump simulated frames at every program exposure time");
  sim->add_option("--config", config, "Experiment config file")->required();
  sim->add_option("--out-dir", out_dir, "Output directory")->required();
  sim->add_option("--repeats", repeats, "Frames per exposure time");
  sim->add_option("--seed", seed, "Override the RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(config, out_dir, seed, frames, beta, plot);
    if (*cal) return cmd_calibrate(stack_dir, out_file, smoothness, sites);
    if (*noise) return cmd_fit_noise(frames_dir, curve_path, out_file, bins, z_hi);
    if (*sim) return cmd_simulate(config, out_dir, repeats, seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
