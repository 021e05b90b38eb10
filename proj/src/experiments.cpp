#include "krtv/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>

#include "json.hpp"
#include "krtv/models.hpp"
#include "krtv/objectives.hpp"
#include "krtv/phantoms.hpp"

namespace krtv {
namespace {

namespace fs = std::filesystem;

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct Sweep1d {
  std::function<Signal(std::size_t)> phantom;
  std::vector<double> l1tv_lambda1;
  double krtv_lambda1 = 0.0;
  std::vector<double> krtv_lambda2;
};

const std::map<std::string, Sweep1d>& sweeps_1d() {
  static const std::map<std::string, Sweep1d> table = {
      {"plateau", {[](std::size_t n) { return plateau_signal(n); }, {10, 2}, 100, {80, 40, 20, 10, 5}}},
      {"ramp",
       {[](std::size_t n) { return ramp_signal(n); }, {2, 1.8, 1.6, 1.4, 1.2, 1}, 100, {6, 5, 4, 3, 2, 1}}},
      {"hat",
       {[](std::size_t n) { return hat_signal(n); },
        {300, 10, 5, 4, 3, 2},
        300,
        {1e5, 1e4, 1e3, 100, 10, 1}}},
  };
  return table;
}

class Recorder {
 public:
  Recorder(std::string name, fs::path dir, const ExperimentOptions& opt)
      : dir_(std::move(dir)), opt_(opt) {
    result_.name = std::move(name);
  }

  std::string path(const std::string& file) const { return (dir_ / file).string(); }

  void wrote(const std::string& file) { result_.files.push_back(path(file)); }

  void add(SweepRun run, const SolveReport& report, double wall_ms) {
    run.iterations = report.iterations;
    run.converged = report.converged;
    run.relative_gap = report.relative_gap;
    run.objective = report.primal;
    run.mass_in = report.mass_in;
    run.mass_out = report.mass_out;
    if (opt_.write_reports) {
      RunReport r;
      r.command = "experiment " + result_.name;
      r.params = {{"model", run.model}, {"lambda1", label(run.lambda1)}, {"lambda2", label(run.lambda2)}};
      r.iterations = report.iterations;
      r.converged = report.converged;
      r.final_gap = report.relative_gap;
      r.objective = report.primal;
      r.mass_in = report.mass_in;
      r.mass_out = report.mass_out;
      r.wall_time_ms = wall_ms;
      r.outputs = {path(run.file)};
      append_report(opt_.report_path.empty() ? path("runs.jsonl") : opt_.report_path, r);
    }
    result_.runs.push_back(std::move(run));
  }

  ExperimentResult finish() {
    nlohmann::ordered_json j;
    j["experiment"] = result_.name;
    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    for (const SweepRun& r : result_.runs) {
      runs.push_back({{"model", r.model},
                      {"lambda1", r.lambda1},
                      {"lambda2", r.lambda2},
                      {"file", r.file},
                      {"iterations", r.iterations},
                      {"converged", r.converged},
                      {"relative_gap", r.relative_gap},
                      {"objective", r.objective},
                      {"mass_in", r.mass_in},
                      {"mass_out", r.mass_out},
                      {"levels", r.levels},
                      {"plateaus", r.plateaus},
                      {"jumps", r.jumps},
                      {"pure_jump", r.pure_jump},
                      {"support", r.support},
                      {"l1_error", r.l1_error},
                      {"tv", r.tv},
                      {"texture_l1", r.texture_l1},
                      {"texture_vs_planted_texture", r.texture_vs_planted_texture},
                      {"texture_vs_planted_cartoon", r.texture_vs_planted_cartoon}});
    }
    j["runs"] = runs;
    const std::string file = result_.name + "_summary.json";
    std::ofstream out(path(file), std::ios::trunc);
    if (!out) throw Error("cannot write " + path(file));
    out << j.dump(2) << '\n';
    wrote(file);
    return std::move(result_);
  }

 private:
  fs::path dir_;
  const ExperimentOptions& opt_;
  ExperimentResult result_;
};

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void describe_shape_1d(SweepRun& run, const GridFunction& u, const GridFunction& u0) {
  const double scale = u0.max() - u0.min();
  run.levels = count_levels(u, 0.05, scale);
  run.plateaus = count_plateaus(u, 0.05, scale);
  run.jumps = count_jumps(u, 0.05, scale);
  run.pure_jump = is_pure_jump(u, 0.05, scale);
  run.support = support_length(u, u0.min(), 0.05 * (u0.max() - u0.min()));
  run.tv = tv_value(u);
}

void run_sweep_1d(const Sweep1d& sweep, Recorder& rec, const ExperimentOptions& opt,
                  const std::string& name) {
  const Signal data = sweep.phantom(opt.samples);
  write_signal(rec.path(name + ".dat"), data);
  rec.wrote(name + ".dat");

  for (double l1 : sweep.l1tv_lambda1) {
    const auto t0 = std::chrono::steady_clock::now();
    L1TvResult r = l1tv_denoise(data.values, l1, opt.config_1d);
    SweepRun run;
    run.model = "l1tv";
    run.lambda1 = l1;
    run.lambda2 = kInfinity;
    run.file = name + "_l1tv_lambda1_" + label(l1) + ".dat";
    write_signal(rec.path(run.file), Signal{r.u, data.origin});
    rec.wrote(run.file);
    describe_shape_1d(run, r.u, data.values);
    rec.add(std::move(run), r.report, elapsed_ms(t0));
  }
  for (double l2 : sweep.krtv_lambda2) {
    const auto t0 = std::chrono::steady_clock::now();
    KrTvResult r = krtv_denoise(data.values, RegParams{sweep.krtv_lambda1, l2}, opt.config_1d);
    SweepRun run;
    run.model = "krtv";
    run.lambda1 = sweep.krtv_lambda1;
    run.lambda2 = l2;
    run.file = name + "_krtv_lambda1_" + label(sweep.krtv_lambda1) + "_lambda2_" + label(l2) + ".dat";
    write_signal(rec.path(run.file), Signal{r.u, data.origin});
    rec.wrote(run.file);
    describe_shape_1d(run, r.u, data.values);
    rec.add(std::move(run), r.report, elapsed_ms(t0));
  }
}

void run_denoise_2d(Recorder& rec, const ExperimentOptions& opt) {
  const GridFunction clean = disk_on_gradient(opt.image_size);
  const GridFunction noisy = salt_and_pepper(clean, 0.15, opt.seed);
  write_pgm(rec.path("denoise2d_clean.pgm"), clean);
  rec.wrote("denoise2d_clean.pgm");
  write_pgm(rec.path("denoise2d_noisy.pgm"), noisy);
  rec.wrote("denoise2d_noisy.pgm");

  auto finish = [&](SweepRun run, const GridFunction& u, const SolveReport& report, double ms) {
    write_pgm(rec.path(run.file), u);
    rec.wrote(run.file);
    double err = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) err += std::abs(u[k] - clean[k]);
    run.l1_error = err * u.shape().cell_volume();
    run.tv = tv_value(u);
    rec.add(std::move(run), report, ms);
  };
  for (double l1 : {1.2, 0.6, 0.3}) {
    const auto t0 = std::chrono::steady_clock::now();
    L1TvResult r = l1tv_denoise(noisy, l1, opt.config_2d);
    finish(SweepRun{"l1tv", l1, kInfinity, "denoise2d_l1tv_lambda1_" + label(l1) + ".pgm"}, r.u,
           r.report, elapsed_ms(t0));
  }
  const double big = effectively_infinite(noisy);
  for (double l2 : {1.0, 0.5, 0.25}) {
    const auto t0 = std::chrono::steady_clock::now();
    KrTvResult r = krtv_denoise(noisy, RegParams{big, l2}, opt.config_2d);
    finish(SweepRun{"krtv", big, l2, "denoise2d_krtv_lambda2_" + label(l2) + ".pgm"}, r.u, r.report,
           elapsed_ms(t0));
  }
}

void run_cartoon_2d(Recorder& rec, const ExperimentOptions& opt) {
  const Composite comp = cartoon_sinusoid(opt.image_size);
  write_pgm(rec.path("cartoon2d_input.pgm"), comp.image);
  rec.wrote("cartoon2d_input.pgm");

  auto record = [&](const std::string& model, const ModelParams& params, const Decomposition& d,
                    double ms) {
    SweepRun run;
    run.model = model;
    run.lambda1 = params.kind == ModelKind::gtv ? params.g_lambda : params.lam.lambda1;
    run.lambda2 = params.kind == ModelKind::gtv ? 0.0 : params.lam.lambda2;
    run.file = "cartoon2d_" + model + "_cartoon.pgm";
    write_pgm(rec.path(run.file), d.cartoon);
    rec.wrote(run.file);
    const std::string texture_file = "cartoon2d_" + model + "_texture.pgm";
    write_pgm(rec.path(texture_file), d.texture, PgmScaling::stretch);
    rec.wrote(texture_file);
    run.tv = d.cartoon_tv;
    run.texture_l1 = d.texture_l1;
    run.texture_vs_planted_texture = correlation(d.texture, comp.texture);
    run.texture_vs_planted_cartoon = correlation(d.texture, comp.cartoon);
    rec.add(std::move(run), d.report, ms);
  };

  ModelParams l1tv;
  l1tv.kind = ModelKind::l1tv;
  l1tv.lam = RegParams{0.6, kInfinity};
  auto t0 = std::chrono::steady_clock::now();
  const Decomposition base = cartoon_texture(comp.image, l1tv, opt.config_2d);
  record("l1tv", l1tv, base, elapsed_ms(t0));

  ModelParams gtv;
  gtv.kind = ModelKind::gtv;
  t0 = std::chrono::steady_clock::now();
  const TvMatch g = match_tv_parameter(comp.image, gtv, base.cartoon_tv, 10.0, 1e5, opt.config_2d);
  record("gtv", g.params, cartoon_texture(comp.image, g.params, opt.config_2d), elapsed_ms(t0));

  ModelParams krtv;
  krtv.kind = ModelKind::krtv;
  krtv.lam = RegParams{effectively_infinite(comp.image), 1.0};
  t0 = std::chrono::steady_clock::now();
  const TvMatch k = match_tv_parameter(comp.image, krtv, base.cartoon_tv, 1e-3, 10.0, opt.config_2d);
  record("krtv", k.params, cartoon_texture(comp.image, k.params, opt.config_2d), elapsed_ms(t0));
}

}  // namespace

SolverConfig default_1d_config() {
  SolverConfig cfg;
  cfg.max_iters = 400000;
  cfg.restart = true;
  cfg.check_every = 50;
  return cfg;
}

SolverConfig default_2d_config() {
  SolverConfig cfg;
  cfg.max_iters = 20000;
  cfg.check_every = 20;
  return cfg;
}

std::vector<SweepRun> ExperimentResult::runs_of(const std::string& model) const {
  std::vector<SweepRun> out;
  for (const SweepRun& r : runs) {
    if (r.model == model) out.push_back(r);
  }
  return out;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"plateau", "ramp", "hat", "denoise2d", "cartoon2d"};
  return names;
}

ExperimentResult run_experiment(const std::string& name, const std::string& outdir,
                                const ExperimentOptions& options) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw InvalidArgument("unknown experiment '" + name +
                          "' (expected plateau, ramp, hat, denoise2d or cartoon2d)");
  }
  fs::create_directories(outdir);
  Recorder rec(name, outdir, options);
  const auto sweep = sweeps_1d().find(name);
  if (sweep != sweeps_1d().end()) {
    run_sweep_1d(sweep->second, rec, options, name);
  } else if (name == "denoise2d") {
    run_denoise_2d(rec, options);
  } else {
    run_cartoon_2d(rec, options);
  }
  return rec.finish();
}

}  // namespace krtv
