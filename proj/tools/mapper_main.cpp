#include <iostream>

#include <CLI11.hpp>

#include "sdm/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Semi-dense depth mapping and pipeline exploration"};
  app.require_subcommand(1);

  sdm::RunOptions run_opts;
  CLI::App* run = app.add_subcommand("run", "Estimate depth over a sequence");
  run->add_option("--dataset", run_opts.image_dir, "Directory of grayscale frames")
      ->required();
  run->add_option("--trajectory", run_opts.trajectory, "Trajectory file")
      ->required();
  run->add_option("--calib", run_opts.calib, "Calibration file")->required();
  run->add_option("--config", run_opts.config, "Run configuration file");
  run->add_option("--out", run_opts.out_dir, "Output directory")->required();
  run->add_option("--max-frames", run_opts.max_frames,
                  "Stop after this many frames (0 = all)");

  sdm::AnalyzeOptions analyze_opts;
  CLI::App* analyze =
      app.add_subcommand("analyze", "Workload statistics over recorded traces");
  analyze->add_option("--dataset", analyze_opts.traces_dir,
                      "Directory of trace CSVs")
      ->required();
  analyze->add_option("--out", analyze_opts.out_dir,
                      "Directory for heatmap artifacts");

  sdm::SimulateOptions sim_opts;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Replay traces through the pipeline model");
  simulate->add_option("--dataset", sim_opts.traces_dir,
                       "Directory of trace CSVs")
      ->required();
  simulate->add_option("--config", sim_opts.config, "Run configuration file");
  simulate->add_option("--out", sim_opts.out_dir,
                       "Directory for per-frame report CSV");
  simulate->add_option("--clock-mhz", sim_opts.clock_mhz,
                       "Override the modelled clock");

  sdm::TuneOptions tune_opts;
  CLI::App* tune =
      app.add_subcommand("tune", "Pick stage rates for a target frame rate");
  tune->add_option("--dataset", tune_opts.traces_dir,
                   "Directory of trace CSVs")
      ->required();
  tune->add_option("--config", tune_opts.config, "Run configuration file");
  tune->add_option("--target-fps", tune_opts.target_fps, "Frame-rate target");
  tune->add_option("--clock-mhz", tune_opts.clock_mhz,
                   "Override the modelled clock");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return sdm::cmd_run(run_opts, std::cout);
    if (analyze->parsed()) return sdm::cmd_analyze(analyze_opts, std::cout);
    if (simulate->parsed()) return sdm::cmd_simulate(sim_opts, std::cout);
    if (tune->parsed()) return sdm::cmd_tune(tune_opts, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
