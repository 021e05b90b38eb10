#pragma once

// Parameter sweeps on synthetic phantoms. Each driver writes its data files
// into an output directory and returns per-run statistics.

#include <cstdint>
#include <string>
#include <vector>

#include "krtv/io.hpp"
#include "krtv/saddle.hpp"

namespace krtv {

/// Restarted solver with a large iteration budget; 1D sweeps are cheap per
/// iteration but need many iterations to move mass across the interval.
SolverConfig default_1d_config();
SolverConfig default_2d_config();

struct ExperimentOptions {
  /// Samples of the 1D phantoms on [-1, 1].
  std::size_t samples = 256;
  /// Side length of the 2D phantoms in pixels.
  std::size_t image_size = 64;
  std::uint64_t seed = 7;
  SolverConfig config_1d = default_1d_config();
  SolverConfig config_2d = default_2d_config();
  /// Append one RunReport per solve to report_path, which defaults to
  /// <outdir>/runs.jsonl.
  bool write_reports = true;
  std::string report_path;
};

struct SweepRun {
  std::string model;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::string file;
  int iterations = 0;
  bool converged = false;
  double relative_gap = 0.0;
  double objective = 0.0;
  double mass_in = 0.0;
  double mass_out = 0.0;
  /// Shape counts use 5% of the input data range as the gap threshold.
  int levels = 0;
  int plateaus = 0;
  int jumps = 0;
  bool pure_jump = false;
  /// Length where u exceeds the data minimum by 5% of the data range.
  double support = 0.0;
  /// ||u - reference||_1 for 2D runs with a known clean image, else 0.
  double l1_error = 0.0;
  double tv = 0.0;
  double texture_l1 = 0.0;
  /// Correlations of the texture part u0 - u with the planted parts.
  double texture_vs_planted_texture = 0.0;
  double texture_vs_planted_cartoon = 0.0;
};

struct ExperimentResult {
  std::string name;
  std::vector<SweepRun> runs;
  /// Every file written, in order (excluding runs.jsonl).
  std::vector<std::string> files;

  std::vector<SweepRun> runs_of(const std::string& model) const;
};

/// Valid names: plateau, ramp, hat, denoise2d, cartoon2d.
const std::vector<std::string>& experiment_names();

/// Runs one experiment, creating `outdir` if needed, and writes
/// <name>_summary.json next to the data files. Output files depend only on
/// the name and the options.
ExperimentResult run_experiment(const std::string& name, const std::string& outdir,
                                const ExperimentOptions& options = {});

}  // namespace krtv
