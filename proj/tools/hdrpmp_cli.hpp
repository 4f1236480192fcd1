#pragma once

// Subcommand driver behind the `hdrpmp` executable. Kept in a header so the
// test suites can run it in-process.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hdrpmp/hdrpmp.hpp"

namespace hdrpmp::cli {

namespace fs = std::filesystem;

struct SceneOptions {
  std::string config;
  std::optional<std::size_t> width, height;
  std::optional<double> extent, period, noise_mean, noise_variance, saturation_level;
  std::optional<std::string> steps;
  std::optional<std::uint64_t> seed;
  bool quantize = false;

  void attach(CLI::App& app) {
    app.add_option("--config", config, "key = value experiment config; flags override it")->check(CLI::ExistingFile);
    app.add_option("--width", width, "scene width in pixels");
    app.add_option("--height", height, "scene height in pixels");
    app.add_option("--extent", extent, "peaks grid half-width");
    app.add_option("--period", period, "fringe period in pixels");
    app.add_option("--steps", steps, "phase steps, e.g. \"5pi/2, -pi/6, 5pi/4, -4pi/5\"");
    app.add_option("--noise-mean", noise_mean, "additive noise mean");
    app.add_option("--noise-variance", noise_variance, "additive noise variance");
    app.add_option("--saturation-level", saturation_level, "camera saturation level");
    app.add_option("--seed", seed, "noise seed");
    app.add_flag("--quantize", quantize, "round intensities to integers before clipping");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg;
    if (!config.empty()) cfg = io::apply_key_values(cfg, io::KeyValueFile::read(config));
    if (width) cfg.width = *width;
    if (height) cfg.height = *height;
    if (extent) cfg.extent = *extent;
    if (period) cfg.period = *period;
    if (steps) cfg.schedule.steps = io::parse_angle_list(*steps);
    if (noise_mean) cfg.noise_mean = *noise_mean;
    if (noise_variance) cfg.noise_variance = *noise_variance;
    if (saturation_level) cfg.saturation_level = *saturation_level;
    if (seed) cfg.seed = *seed;
    if (quantize) cfg.quantize = true;
    cfg.validate();
    return cfg;
  }
};

inline io::KeyValueFile scene_metadata(const ExperimentConfig& cfg, double scale) {
  io::KeyValueFile kv = io::to_key_values(cfg);
  kv.set("scale_factor", scale);
  return kv;
}

inline void write_rmse(const fs::path& path, const std::vector<std::pair<std::string, RmseResult>>& results,
                       const io::KeyValueFile& metadata) {
  io::KeyValueFile kv;
  for (const auto& [name, r] : results) {
    kv.set(name + "_rmse_rad", io::format_double(r.value));
    kv.set(name + "_pixels", r.pixels);
    kv.set(name + "_comparison", to_string(r.mode.comparison));
    kv.set(name + "_offset_removal", to_string(r.mode.offset));
    kv.set(name + "_removed_offset", r.removed_offset);
  }
  kv.merge(metadata);
  kv.write(path, "phase error against ground truth");
}

/// Writes synthesized stacks and ground truth into `dir`; returns the scene.
inline SimulatedScene write_synth(const fs::path& dir, const ExperimentConfig& cfg, double scale) {
  SimulatedScene scene = simulate(cfg, scale);
  fs::create_directories(dir);
  io::save_phase_map(dir / "object_phase.pfm", scene.object_phase);
  io::save_phase_map(dir / "fringe_phase.pfm", scene.fringe_phase);
  io::save_stack(dir, scene.regular, scene.inverted, cfg.quantize ? io::FrameFormat::pgm : io::FrameFormat::pfm,
                 cfg.saturation_level, scene_metadata(cfg, scale), std::string("fringe_phase.pfm"));
  return scene;
}

inline PhaseMap unwrap_result(const RetrievalResult& r) { return unwrap_quality_guided(r.wrapped, quality_map(r)); }

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"High-dynamic-range fringe-projection phase retrieval from regular and inverted fringe stacks"};
  app.name("hdrpmp");
  app.require_subcommand(1);

  // synth
  SceneOptions synth_scene;
  double synth_scale = 1.0;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "simulate regular and inverted fringe stacks of the peaks scene");
  synth_scene.attach(*synth);
  synth->add_option("--scale", synth_scale, "saturation scale factor S")->capture_default_str();
  synth->add_option("--out", synth_out, "output directory")->required();

  // retrieve
  std::string manifest_path, retrieve_method = "proposed", retrieve_out;
  std::optional<double> threshold;
  auto* retrieve = app.add_subcommand("retrieve", "recover wrapped phase from a stack manifest");
  retrieve->add_option("--manifest", manifest_path, "stack manifest (key = value)")->required()->check(CLI::ExistingFile);
  retrieve->add_option("--method", retrieve_method, "proposed | conventional | jiang")
      ->check(CLI::IsMember({"proposed", "conventional", "jiang"}))
      ->capture_default_str();
  retrieve->add_option("--threshold", threshold, "saturation threshold; overrides the manifest");
  retrieve->add_option("--out", retrieve_out, "output directory")->required();

  // unwrap
  std::string unwrap_maps, unwrap_wrapped, unwrap_modulation, unwrap_out;
  auto* unwrap = app.add_subcommand("unwrap", "quality-guided unwrapping of a wrapped phase map");
  auto* maps_opt = unwrap->add_option("--maps", unwrap_maps, "directory written by retrieve")->check(CLI::ExistingDirectory);
  auto* wrapped_opt = unwrap->add_option("--wrapped", unwrap_wrapped, "wrapped phase float map")->check(CLI::ExistingFile);
  unwrap->add_option("--modulation", unwrap_modulation, "modulation float map for --wrapped")
      ->check(CLI::ExistingFile)
      ->needs(wrapped_opt);
  maps_opt->excludes(wrapped_opt);
  unwrap->add_option("--out", unwrap_out, "output directory")->required();

  // evaluate
  std::string eval_estimate, eval_truth, eval_out, eval_offset = "none";
  std::optional<std::size_t> eval_row;
  bool eval_unwrapped = false;
  auto* evaluate = app.add_subcommand("evaluate", "RMSE and middle-row residual against a ground-truth map");
  evaluate->add_option("--estimate", eval_estimate, "estimated phase float map")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--truth", eval_truth, "ground-truth phase float map")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--row", eval_row, "residual profile row (default: middle row)");
  evaluate->add_flag("--unwrapped", eval_unwrapped, "compare raw differences instead of wrapped ones");
  evaluate->add_option("--offset", eval_offset, "offset removal: none | two-pi | constant")
      ->check(CLI::IsMember({"none", "two-pi", "constant"}))
      ->capture_default_str();
  evaluate->add_option("--out", eval_out, "output directory")->required();

  // table1
  SceneOptions table_scene;
  std::optional<std::string> table_scales, table_methods;
  std::string table_out;
  auto* table1 = app.add_subcommand("table1", "RMSE of every method over a saturation sweep");
  table_scene.attach(*table1);
  table1->add_option("--scales", table_scales, "comma-separated scale factors");
  table1->add_option("--methods", table_methods, "comma-separated methods");
  table1->add_option("--out", table_out, "output directory")->required();

  // pipeline
  SceneOptions pipe_scene;
  double pipe_scale = 1.0;
  std::string pipe_method = "proposed", pipe_out;
  auto* pipeline = app.add_subcommand("pipeline", "synth -> retrieve -> unwrap -> evaluate in one run");
  pipe_scene.attach(*pipeline);
  pipeline->add_option("--scale", pipe_scale, "saturation scale factor S")->capture_default_str();
  pipeline->add_option("--method", pipe_method, "proposed | conventional | jiang")
      ->check(CLI::IsMember({"proposed", "conventional", "jiang"}))
      ->capture_default_str();
  pipeline->add_option("--out", pipe_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*synth) {
      const ExperimentConfig cfg = synth_scene.resolve();
      const SimulatedScene scene = write_synth(synth_out, cfg, synth_scale);
      out << "wrote " << scene.regular.count() << "+" << scene.inverted.count() << " frames to " << synth_out << "\n";
    } else if (*retrieve) {
      io::StackManifest m = io::read_manifest(manifest_path);
      if (threshold) m.saturation_threshold = *threshold;
      const auto [reg, inv] = io::load_stack(m);
      const RetrievalResult r = run_method(parse_method(retrieve_method), reg, inv);
      io::KeyValueFile meta = m.metadata;
      meta.set("steps", io::join_doubles(m.schedule.steps));
      meta.set("saturation_threshold", m.saturation_threshold);
      io::save_maps(retrieve_out, r, meta);
      out << r.method << ": " << r.count(InvalidReason::none) << " of " << r.wrapped.size() << " pixels valid\n";
    } else if (*unwrap) {
      if (unwrap_maps.empty() && unwrap_wrapped.empty())
        throw Error(ErrorCode::invalid_argument, "unwrap needs --maps or --wrapped");
      PhaseMap wrapped;
      Grid<double> modulation;
      io::KeyValueFile meta;
      if (!unwrap_maps.empty()) {
        RetrievalResult r = io::load_maps(unwrap_maps);
        wrapped = std::move(r.wrapped);
        modulation = std::move(r.modulation);
        meta = io::KeyValueFile::read(fs::path(unwrap_maps) / "maps.txt");
      } else {
        wrapped = io::load_phase_map(unwrap_wrapped);
        modulation = unwrap_modulation.empty() ? Grid<double>(wrapped.width(), wrapped.height(), 1.0)
                                               : io::read_pfm(unwrap_modulation);
      }
      const QualityMap q = quality_map(wrapped, modulation);
      const PhaseMap unwrapped = unwrap_quality_guided(wrapped, q);
      fs::create_directories(unwrap_out);
      io::save_phase_map(fs::path(unwrap_out) / "unwrapped_phase.pfm", unwrapped);
      io::write_pfm(fs::path(unwrap_out) / "quality.pfm", q.scores);
      meta.set("unwrapped_valid_pixels", unwrapped.valid_count());
      meta.write(fs::path(unwrap_out) / "unwrap.txt", "quality-guided unwrapping");
      out << "unwrapped " << unwrapped.valid_count() << " pixels\n";
    } else if (*evaluate) {
      const PhaseMap est = io::load_phase_map(eval_estimate);
      const PhaseMap truth = io::load_phase_map(eval_truth);
      RmseOptions opts;
      opts.comparison = eval_unwrapped ? PhaseComparison::unwrapped : PhaseComparison::wrapped;
      opts.offset = eval_offset == "two-pi"     ? OffsetRemoval::two_pi_multiple
                    : eval_offset == "constant" ? OffsetRemoval::constant
                                                : OffsetRemoval::none;
      const RmseResult r = rmse(est, truth, opts);
      const ResidualProfile profile = residual_row(est, truth, eval_row.value_or(est.height() / 2));
      io::KeyValueFile meta;
      meta.set("estimate", fs::path(eval_estimate).filename().string());
      meta.set("truth", fs::path(eval_truth).filename().string());
      fs::create_directories(eval_out);
      write_rmse(fs::path(eval_out) / "rmse.txt", {{"estimate", r}}, meta);
      meta.set("max_abs_residual_rad", profile.max_abs());
      io::write_profile(fs::path(eval_out) / "residual_row.txt", profile, meta);
      out << "rmse " << io::format_short(r.value) << " rad over " << r.pixels << " pixels\n";
    } else if (*table1) {
      ExperimentConfig cfg = table_scene.resolve();
      io::KeyValueFile overrides;
      if (table_scales) overrides.set("scale_factors", *table_scales);
      if (table_methods) overrides.set("methods", *table_methods);
      cfg = io::apply_key_values(cfg, overrides);
      cfg.output_dir = table_out;
      const RmseTable t = run_table1(cfg);
      fs::create_directories(table_out);
      io::write_table(fs::path(table_out) / "table1.csv", t);
      io::to_key_values(cfg).write(fs::path(table_out) / "table1_config.txt", "saturation sweep config");
      out << "wrote " << (fs::path(table_out) / "table1.csv").string() << "\n";
    } else if (*pipeline) {
      const ExperimentConfig cfg = pipe_scene.resolve();
      const fs::path dir = pipe_out;
      const SimulatedScene scene = write_synth(dir / "stack", cfg, pipe_scale);
      const io::KeyValueFile meta = scene_metadata(cfg, pipe_scale);

      const RetrievalResult r = run_method(parse_method(pipe_method), scene.regular, scene.inverted);
      io::save_maps(dir / "maps", r, meta);
      const PhaseMap unwrapped = unwrap_result(r);
      io::save_phase_map(dir / "unwrapped_phase.pfm", unwrapped);

      const RmseResult wrapped_rmse = rmse(r.wrapped, scene.fringe_phase);
      const RmseResult unwrapped_rmse =
          rmse(unwrapped, scene.fringe_phase, {PhaseComparison::unwrapped, OffsetRemoval::two_pi_multiple});
      io::KeyValueFile rmeta = meta;
      rmeta.set("method", r.method);
      write_rmse(dir / "rmse.txt", {{"wrapped", wrapped_rmse}, {"unwrapped", unwrapped_rmse}}, rmeta);
      const ResidualProfile profile = residual_row(r.wrapped, scene.fringe_phase, cfg.height / 2);
      rmeta.set("max_abs_residual_rad", profile.max_abs());
      io::write_profile(dir / "residual_row.txt", profile, rmeta);
      out << r.method << ": wrapped rmse " << io::format_short(wrapped_rmse.value) << " rad, unwrapped rmse "
          << io::format_short(unwrapped_rmse.value) << " rad\n";
    }
  } catch (const std::exception& e) {
    err << "hdrpmp: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace hdrpmp::cli
