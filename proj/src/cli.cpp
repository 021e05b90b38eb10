#include "krtv/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "krtv/experiments.hpp"
#include "krtv/io.hpp"
#include "krtv/krnorm.hpp"
#include "krtv/models.hpp"
#include "krtv/objectives.hpp"
#include "krtv/selftest.hpp"

namespace krtv {
namespace {

using Json = nlohmann::ordered_json;

class UsageError : public Error {
 public:
  using Error::Error;
};

double parse_lambda(const std::string& text, const char* flag) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "inf" || t == "infinity") return kInfinity;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !(v > 0.0) || std::isnan(v)) {
    throw UsageError(std::string(flag) + " must be a positive number or 'inf', got '" + text + "'");
  }
  return v;
}

bool is_pgm(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pgm";
}

struct Input {
  GridFunction values;
  double origin = 0.0;
};

Input load_grid(const std::string& path, double h) {
  if (is_pgm(path)) return {read_pgm(path, h), 0.0};
  Signal s = read_signal(path);
  return {std::move(s.values), s.origin};
}

void save_grid(const std::string& path, const GridFunction& u, double origin, PgmScaling scaling) {
  if (is_pgm(path)) {
    if (u.shape().dim() != 2) throw UsageError("cannot write a 1D signal as PGM: " + path);
    write_pgm(path, u, scaling);
  } else {
    if (u.shape().dim() != 1) throw UsageError("2D output needs a .pgm path: " + path);
    write_signal(path, Signal{u, origin});
  }
}

// Options shared by every solver-backed subcommand.
struct SolverFlags {
  int max_iters = SolverConfig{}.max_iters;
  double gap_tol = SolverConfig{}.gap_tol;
  double alpha = SolverConfig{}.alpha;
  int check_every = SolverConfig{}.check_every;
  bool restart = false;

  void attach(CLI::App* app) {
    app->add_option("--max-iters", max_iters, "Iteration budget")->check(CLI::PositiveNumber);
    app->add_option("--gap-tol", gap_tol, "Relative duality gap tolerance")->check(CLI::PositiveNumber);
    app->add_option("--alpha", alpha, "Inertial parameter in [0, 1/3)");
    app->add_option("--check-every", check_every, "Iterations between gap evaluations")
        ->check(CLI::PositiveNumber);
    app->add_flag("--restart", restart, "Restart from the running average when it is better");
  }

  SolverConfig config() const {
    SolverConfig cfg;
    cfg.max_iters = max_iters;
    cfg.gap_tol = gap_tol;
    cfg.alpha = alpha;
    cfg.check_every = check_every;
    cfg.restart = restart;
    return cfg;
  }
};

struct Globals {
  bool json = false;
  std::string report;
};

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

RunReport solve_report(const std::string& command, const SolveReport& r) {
  RunReport rep;
  rep.command = command;
  rep.iterations = r.iterations;
  rep.converged = r.converged;
  rep.final_gap = r.relative_gap;
  rep.objective = r.primal;
  rep.mass_in = r.mass_in;
  rep.mass_out = r.mass_out;
  return rep;
}

void emit(const Globals& g, std::ostream& out, const RunReport& rep, const Json& extra = Json::object()) {
  if (!g.report.empty()) append_report(g.report, rep);
  if (g.json) {
    Json j = Json::parse(rep.to_json());
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    out << j.dump() << '\n';
    return;
  }
  out << rep.command << ": " << (rep.converged ? "converged" : "not converged") << " after "
      << rep.iterations << " iterations, relative gap " << format_number(rep.final_gap) << ", objective "
      << format_number(rep.objective) << '\n';
  out << "mass in " << format_number(rep.mass_in) << ", mass out " << format_number(rep.mass_out) << '\n';
  for (auto it = extra.begin(); it != extra.end(); ++it) out << it.key() << ' ' << it.value().dump() << '\n';
  for (const std::string& p : rep.outputs) out << "wrote " << p << '\n';
}

struct DenoiseCmd {
  std::string model = "krtv";
  std::string lambda1 = "inf";
  std::string lambda2 = "inf";
  std::string in, out;
  double h = 1.0;
  SolverFlags solver;

  void attach(CLI::App* app) {
    app->add_option("--model", model, "krtv or l1tv")->check(CLI::IsMember({"krtv", "l1tv"}));
    app->add_option("--lambda1", lambda1, "Pointwise bound weight (number or inf)");
    app->add_option("--lambda2", lambda2, "Transport weight (number or inf)");
    app->add_option("--in", in, "Input .pgm image or two-column signal")->required();
    app->add_option("--out", out, "Output path; .pgm for images, otherwise a signal file")->required();
    app->add_option("--h", h, "Grid spacing for PGM input")->check(CLI::PositiveNumber);
    solver.attach(app);
  }

  void run(const Globals& g, std::ostream& os) const {
    const RegParams lam{parse_lambda(lambda1, "--lambda1"), parse_lambda(lambda2, "--lambda2")};
    if (model == "l1tv" && !lam.lambda1_finite()) throw UsageError("l1tv needs a finite --lambda1");
    const Input data = load_grid(in, h);
    const auto t0 = std::chrono::steady_clock::now();
    GridFunction u;
    SolveReport r;
    if (model == "l1tv") {
      L1TvResult res = l1tv_denoise(data.values, lam.lambda1, solver.config());
      u = std::move(res.u);
      r = std::move(res.report);
    } else {
      KrTvResult res = krtv_denoise(data.values, lam, solver.config());
      u = std::move(res.u);
      r = std::move(res.report);
    }
    const double ms = elapsed_ms(t0);
    save_grid(out, u, data.origin, PgmScaling::clamp);
    RunReport rep = solve_report("denoise", r);
    rep.params = {{"model", model}, {"lambda1", lambda1}, {"lambda2", lambda2}, {"in", in}};
    rep.wall_time_ms = ms;
    rep.outputs = {out};
    emit(g, os, rep);
  }
};

struct DecomposeCmd {
  std::string model = "krtv";
  std::string lambda1 = "inf";
  std::string lambda2 = "1";
  double lambda = 1.0;
  std::string in, cartoon_out, texture_out;
  std::optional<double> match_tv;
  std::vector<double> bracket;
  double h = 1.0;
  SolverFlags solver;

  void attach(CLI::App* app) {
    app->add_option("--model", model, "krtv, l1tv or gtv")->check(CLI::IsMember({"krtv", "l1tv", "gtv"}));
    app->add_option("--lambda1", lambda1, "KR-TV / L1-TV bound weight (number or inf)");
    app->add_option("--lambda2", lambda2, "KR-TV transport weight (number or inf)");
    app->add_option("--lambda", lambda, "G-TV weight")->check(CLI::PositiveNumber);
    app->add_option("--in", in, "Input .pgm image or signal")->required();
    app->add_option("--cartoon-out", cartoon_out, "Cartoon output path")->required();
    app->add_option("--texture-out", texture_out, "Texture output path (PGM is min-max stretched)")
        ->required();
    app->add_option("--match-tv", match_tv, "Tune the model parameter until TV(cartoon) hits this value");
    app->add_option("--bracket", bracket, "Search interval LO HI for --match-tv")->expected(2);
    app->add_option("--h", h, "Grid spacing for PGM input")->check(CLI::PositiveNumber);
    solver.attach(app);
  }

  void run(const Globals& g, std::ostream& os) const {
    ModelParams params;
    params.kind = parse_model(model);
    params.lam = RegParams{parse_lambda(lambda1, "--lambda1"), parse_lambda(lambda2, "--lambda2")};
    const Input data = load_grid(in, h);
    if (params.kind == ModelKind::l1tv) params.lam.lambda2 = kInfinity;
    params.g_lambda = lambda;
    if (params.kind == ModelKind::krtv && !params.lam.lambda1_finite() && match_tv) {
      params.lam.lambda1 = effectively_infinite(data.values);
    }
    const SolverConfig cfg = solver.config();
    const auto t0 = std::chrono::steady_clock::now();
    Json extra = Json::object();
    if (match_tv) {
      double lo = 1e-3, hi = 1e3;
      if (params.kind == ModelKind::gtv) hi = 1e5;
      if (params.kind == ModelKind::krtv) lo = 1e-4, hi = 1e2;
      if (bracket.size() == 2) lo = bracket[0], hi = bracket[1];
      const TvMatch m = match_tv_parameter(data.values, params, *match_tv, lo, hi, cfg);
      params = m.params;
      Json trace = Json::array();
      for (const TvSample& s : m.trace) trace.push_back({{"parameter", s.parameter}, {"tv", s.tv}});
      extra["matched_parameter"] = params.tuned();
      extra["tv_trace"] = trace;
    }
    const Decomposition d = cartoon_texture(data.values, params, cfg);
    const double ms = elapsed_ms(t0);
    save_grid(cartoon_out, d.cartoon, data.origin, PgmScaling::clamp);
    save_grid(texture_out, d.texture, data.origin, PgmScaling::stretch);
    RunReport rep = solve_report("decompose", d.report);
    rep.params = {{"model", model}, {"in", in}};
    if (params.kind == ModelKind::gtv) {
      rep.params["lambda"] = format_number(params.g_lambda);
    } else {
      rep.params["lambda1"] = format_number(params.lam.lambda1);
      rep.params["lambda2"] = format_number(params.lam.lambda2);
    }
    if (match_tv) rep.params["match_tv"] = format_number(*match_tv);
    rep.wall_time_ms = ms;
    rep.outputs = {cartoon_out, texture_out};
    extra["cartoon_tv"] = d.cartoon_tv;
    extra["texture_l1"] = d.texture_l1;
    emit(g, os, rep, extra);
  }
};

struct KrNormCmd {
  std::string points, in;
  std::string lambda1, lambda2 = "inf";
  double h = 1.0;
  SolverFlags solver;

  void attach(CLI::App* app) {
    auto* p = app->add_option("--points", points, "CSV point measure x[,y],weight");
    auto* g = app->add_option("--in", in, "Grid density (.pgm or signal file)");
    p->excludes(g);
    app->add_option("--lambda1", lambda1, "Bound on |f| (finite)")->required();
    app->add_option("--lambda2", lambda2, "Lipschitz bound on f (number or inf)");
    app->add_option("--h", h, "Grid spacing for PGM input")->check(CLI::PositiveNumber);
    solver.attach(app);
  }

  void run(const Globals& g, std::ostream& os) const {
    if (points.empty() == in.empty()) throw UsageError("krnorm needs exactly one of --points or --in");
    const RegParams lam{parse_lambda(lambda1, "--lambda1"), parse_lambda(lambda2, "--lambda2")};
    if (!lam.lambda1_finite()) throw UsageError("krnorm needs a finite --lambda1");
    const auto t0 = std::chrono::steady_clock::now();
    RunReport rep;
    rep.command = "krnorm";
    rep.params = {{"lambda1", lambda1}, {"lambda2", lambda2}};
    Json extra = Json::object();
    double value = 0.0, certificate = 0.0;
    if (!points.empty()) {
      const DiscreteMeasure mu = read_points(points);
      const KrNormExact r = kr_norm_exact(mu, lam);
      value = r.value;
      certificate = r.certificate;
      rep.params["points"] = points;
      rep.converged = true;
      rep.mass_in = mu.total_mass();
      extra["method"] = "exact";
    } else {
      const Input data = load_grid(in, h);
      const KrNormGrid r = kr_norm_grid(data.values, lam, solver.config());
      value = r.value;
      certificate = r.value - r.dual;
      rep.params["in"] = in;
      rep.iterations = r.iterations;
      rep.converged = r.converged;
      rep.final_gap = r.relative_gap;
      rep.mass_in = data.values.integral();
      extra["method"] = "grid";
      extra["dual"] = r.dual;
    }
    rep.objective = value;
    rep.wall_time_ms = elapsed_ms(t0);
    extra["value"] = value;
    extra["certificate"] = certificate;
    if (!g.report.empty()) append_report(g.report, rep);
    if (g.json) {
      Json j = Json::parse(rep.to_json());
      for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
      os << j.dump() << '\n';
    } else {
      os << "value " << format_number(value) << '\n' << "certificate " << format_number(certificate) << '\n';
    }
  }
};

struct ExperimentCmd {
  std::string name;
  std::string outdir = ".";
  ExperimentOptions options;

  void attach(CLI::App* app) {
    app->add_option("name", name, "plateau, ramp, hat, denoise2d or cartoon2d")
        ->required()
        ->check(CLI::IsMember(experiment_names()));
    app->add_option("--outdir", outdir, "Directory for the generated files");
    app->add_option("--samples", options.samples, "Samples of the 1D phantoms")->check(CLI::Range(8, 1 << 20));
    app->add_option("--size", options.image_size, "Side of the 2D phantoms")->check(CLI::Range(8, 4096));
    app->add_option("--seed", options.seed, "Noise seed");
  }

  void run(const Globals& g, std::ostream& os) {
    if (!g.report.empty()) options.report_path = g.report;
    const ExperimentResult r = run_experiment(name, outdir, options);
    if (g.json) {
      Json runs = Json::array();
      for (const SweepRun& s : r.runs) {
        runs.push_back({{"model", s.model},
                        {"lambda1", s.lambda1},
                        {"lambda2", s.lambda2},
                        {"file", s.file},
                        {"converged", s.converged},
                        {"relative_gap", s.relative_gap}});
      }
      os << Json{{"experiment", r.name}, {"files", r.files}, {"runs", runs}}.dump() << '\n';
      return;
    }
    for (const SweepRun& s : r.runs) {
      os << s.model << " lambda1=" << format_number(s.lambda1) << " lambda2=" << format_number(s.lambda2)
         << (s.converged ? " converged" : " not converged") << " gap=" << format_number(s.relative_gap)
         << " -> " << s.file << '\n';
    }
    for (const std::string& f : r.files) os << "wrote " << f << '\n';
  }
};

int selftest(const Globals& g, std::ostream& os) {
  std::ostream* log = g.json ? nullptr : &os;
  const std::vector<CheckResult> results = run_selftest(log);
  const bool ok = std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
  if (g.json) {
    Json arr = Json::array();
    for (const CheckResult& r : results) {
      arr.push_back({{"check", r.name}, {"passed", r.passed}, {"detail", r.detail}, {"wall_time_ms", r.wall_ms}});
    }
    os << Json{{"passed", ok}, {"checks", arr}}.dump() << '\n';
  } else {
    os << (ok ? "selftest passed" : "selftest FAILED") << '\n';
  }
  return ok ? kExitOk : kExitFailure;
}

int fail(const Globals& g, std::ostream& err, int code, const std::string& kind, const std::string& msg) {
  if (g.json) {
    err << Json{{"error", kind}, {"message", msg}, {"exit_code", code}}.dump() << '\n';
  } else {
    err << "krtv: " << msg << '\n';
  }
  return code;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"KR-TV denoising and cartoon-texture decomposition", "krtv"};
  // --h is the grid spacing, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  Globals g;
  app.add_flag("--json", g.json, "Machine-readable output; errors go to stderr as JSON");
  app.add_option("--report", g.report, "Append a JSON-lines run report to this file");

  DenoiseCmd denoise;
  DecomposeCmd decompose;
  KrNormCmd krnorm;
  ExperimentCmd experiment;
  auto* c_denoise = app.add_subcommand("denoise", "Denoise an image or signal")->fallthrough();
  auto* c_decompose = app.add_subcommand("decompose", "Cartoon-texture decomposition")->fallthrough();
  auto* c_krnorm = app.add_subcommand("krnorm", "Kantorovich-Rubinstein norm of a measure")->fallthrough();
  auto* c_experiment = app.add_subcommand("experiment", "Parameter sweeps on synthetic phantoms")->fallthrough();
  auto* c_selftest = app.add_subcommand("selftest", "Run the invariant suite")->fallthrough();
  denoise.attach(c_denoise);
  decompose.attach(c_decompose);
  krnorm.attach(c_krnorm);
  experiment.attach(c_experiment);

  std::vector<std::string> storage = {"krtv"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : storage) argv.push_back(s.data());
  // --json must be known before parsing finishes so parse errors honour it.
  g.json = std::find(args.begin(), args.end(), "--json") != args.end();
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
      return kExitOk;
    }
    return fail(g, err, kExitUsage, "usage", e.what());
  }

  try {
    if (c_denoise->parsed()) denoise.run(g, out);
    if (c_decompose->parsed()) decompose.run(g, out);
    if (c_krnorm->parsed()) krnorm.run(g, out);
    if (c_experiment->parsed()) experiment.run(g, out);
    if (c_selftest->parsed()) return selftest(g, out);
  } catch (const UsageError& e) {
    return fail(g, err, kExitUsage, "usage", e.what());
  } catch (const InvalidArgument& e) {
    return fail(g, err, kExitUsage, "invalid_argument", e.what());
  } catch (const ParseError& e) {
    return fail(g, err, kExitFailure, "parse", e.what());
  } catch (const std::exception& e) {
    return fail(g, err, kExitFailure, "runtime", e.what());
  }
  return kExitOk;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace krtv
