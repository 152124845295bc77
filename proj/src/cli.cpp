#include "pbf/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "pbf/error.hpp"
#include "pbf/persist.hpp"
#include "pbf/risk.hpp"

namespace pbf {

namespace fs = std::filesystem;

namespace {

fs::path out_dir(const PipelineConfig& cfg) { return fs::path(cfg.output_dir); }

void write_err_csv(const fs::path& path, const std::vector<double>& errs) {
  std::string s;
  for (std::size_t k = 0; k < errs.size(); ++k) {
    s += std::to_string(k + 1) + ',' + format_double(errs[k]) + '\n';
  }
  write_text(path, s);
}

json err_json(const std::vector<double>& errs, int k) {
  json a = json::array();
  for (double e : errs) a.push_back(e);
  return {{"err", a}, {"k", k}};
}

}  // namespace

TrainingData stage_simulate(const PipelineConfig& cfg) {
  const auto model = make_response_model(cfg);
  auto data = simulate_doe(cfg, *model);
  const auto dir = out_dir(cfg);
  write_csv(dir / "doe.csv", to_matrix(data.doe));
  write_csv(dir / "T.csv", data.temperature);
  write_csv(dir / "S.csv", data.stress);
  return data;
}

TrainingResult stage_train(const PipelineConfig& cfg, bool plot_data) {
  const auto dir = out_dir(cfg);
  TrainingData data;
  data.doe = to_inputs(read_csv(dir / "doe.csv"));
  data.temperature = read_csv(dir / "T.csv");
  data.stress = read_csv(dir / "S.csv");
  auto result = train(cfg, data);
  save_bundle(dir / "bundle.json", result.bundle);
  write_json(dir / "err_curve.json",
             {{"schema_version", kSchemaVersion},
              {"kind", "err_curve"},
              {"temperature", err_json(result.err_temperature, result.bundle.temperature.k())},
              {"stress", err_json(result.err_stress, result.bundle.stress.k())}});
  if (plot_data) {
    write_err_csv(dir / "err_T.csv", result.err_temperature);
    write_err_csv(dir / "err_S.csv", result.err_stress);
  }
  return result;
}

OptimizationSummary stage_optimize(const PipelineConfig& cfg, std::optional<DesignPoint> d0,
                                   bool plot_data) {
  const auto dir = out_dir(cfg);
  const auto bundle = load_bundle(dir / "bundle.json");
  PipelineConfig run_cfg = cfg;
  if (d0) run_cfg.starts = {*d0};
  const auto summary = optimize_all(bundle, run_cfg);
  write_json(dir / "optimize.json", summary_to_json(summary, run_cfg.optimize));
  write_text(dir / "optimize_history.csv", "");
  for (std::size_t i = 0; i < summary.runs.size(); ++i) {
    write_history_csv(dir / "optimize_history.csv", summary.runs[i], static_cast<int>(i), true);
  }
  if (plot_data) {
    std::string s = "run,iteration,speed,power,zeta,energy,risk,t_max_hat,feasible\n";
    std::ifstream is(dir / "optimize_history.csv", std::ios::binary);
    std::ostringstream body;
    body << is.rdbuf();
    write_text(dir / "optimize_plot.csv", s + body.str());
  }
  return summary;
}

ValidationReport stage_validate(const PipelineConfig& cfg, bool self_validation) {
  const auto dir = out_dir(cfg);
  const auto opt = read_json(dir / "optimize.json");
  const int best = opt.at("best").get<int>();
  require(best >= 0, "optimize.json holds no feasible design to validate");
  const auto r = result_from_json(opt.at("runs").at(static_cast<std::size_t>(best)));
  const auto model = make_response_model(cfg);
  ValidationReport report;
  if (self_validation) {
    report = self_validate(r.d_star, r.zeta_star, cfg, *model);
  } else {
    const auto bundle = load_bundle(dir / "bundle.json");
    report = validate(r.d_star, r.zeta_star, bundle, cfg, *model);
  }
  write_json(dir / (self_validation ? "self_validation.json" : "validation.json"),
             report_to_json(report));
  return report;
}

void run_pipeline(const PipelineConfig& cfg) {
  stage_simulate(cfg);
  stage_train(cfg);
  stage_optimize(cfg);
  stage_validate(cfg);
}

// ---------------------------------------------------------------------------

namespace {

struct Common {
  std::string config;
  std::string out;
  int workers = 0;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config, "pipeline config (JSON)");
  app->add_option("-o,--out", c.out, "output directory");
  app->add_option("--workers", c.workers, "worker threads for model runs")->check(CLI::PositiveNumber);
}

PipelineConfig resolve(const Common& c) {
  PipelineConfig cfg = load_config(c.config);
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (c.workers > 0) cfg.workers = c.workers;
  return cfg;
}

DesignPoint parse_design(const std::string& s) {
  const auto comma = s.find(',');
  require(comma != std::string::npos, "design must be given as speed,power");
  try {
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw Error("malformed design '" + s + "'");
  }
}

std::vector<double> read_samples(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), "cannot open sample file " + path);
  std::vector<double> v;
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    const std::string cell = line.substr(b, e - b + 1);
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == cell.size(), path + ":" + std::to_string(n) + ": malformed number '" + cell + "'");
    v.push_back(x);
  }
  require(!v.empty(), "sample file " + path + " holds no values");
  return v;
}

void print_info(std::ostream& out, const SurrogateBundle& b) {
  out << "schema_version: " << kSchemaVersion << "\n";
  out << "provenance.seed: " << b.provenance.seed << "\n";
  out << "provenance.runs: " << b.provenance.runs << "\n";
  out << "provenance.config_hash: " << b.provenance.config_hash << "\n";
  auto component = [&](const char* name, const ComponentModel& c) {
    out << name << ".K: " << c.k() << "\n";
    for (int j = 0; j < c.k(); ++j) {
      const auto& f = c.features[static_cast<std::size_t>(j)];
      out << name << ".feature" << j + 1 << ": r=" << f.subspace.r << " degree=" << f.poly.degree()
          << " r2=" << format_double(f.poly.r2()) << "\n";
    }
  };
  component("temperature", b.temperature);
  component("stress", b.stress);
}

void print_summary(std::ostream& out, const OptimizationSummary& s, const OptimizeConfig& cfg) {
  out << "tau: " << format_double(cfg.tau) << " MPa, alpha_T: " << format_double(cfg.alpha_t)
      << ", n_mc: " << cfg.n_mc << ", constraint: " << to_string(cfg.constraint) << "\n";
  for (std::size_t i = 0; i < s.runs.size(); ++i) {
    const auto& r = s.runs[i];
    out << "run " << i << ": d0=(" << r.d0.speed << ", " << r.d0.power << ") d*=("
        << r.d_star.speed << ", " << r.d_star.power << ") zeta*=" << r.zeta_star
        << " E*=" << r.energy << " J risk=" << r.bpof_lhs << " Tmax=" << r.t_max_hat
        << " feasible=" << (r.feasible ? "yes" : "no") << " iterations=" << r.iterations << "\n";
  }
  out << "best: " << s.best << "\n";
}

void print_report(std::ostream& out, const ValidationReport& r) {
  out << "d*: (" << r.d_star.speed << ", " << r.d_star.power << ")\n";
  out << "zeta*: " << r.zeta_star << "\n";
  out << "q_sim: " << r.q_sim << " (n=" << r.n_sim << ")\n";
  out << "q_surr: " << r.q_surr << " (n=" << r.n_surr << ")\n";
  out << "rel_diff: " << r.rel_diff << " (std error " << r.rel_std_error << ")\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Risk-based design optimization for a powder-bed-fusion scan", "pbfopt"};
  app.require_subcommand(1);

  Common c_sim, c_train, c_opt, c_val, c_info, c_run;
  bool train_plot = false, opt_plot = false, self_val = false;
  int m_override = 0;
  std::string d0_text, solver_text, constraint_text;
  double alpha_t = 0.0, tau = 0.0;
  int n_mc = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double risk_alpha = 0.95, risk_tau = 825.0;
  std::string risk_file;

  auto* sim = app.add_subcommand("simulate", "run the DOE through the model; write doe/T/S matrices");
  add_common(sim, c_sim);
  sim->add_option("--M", m_override, "training-run count")->check(CLI::PositiveNumber);

  auto* tr = app.add_subcommand("train", "reduce outputs and fit surrogates");
  add_common(tr, c_train);
  tr->add_flag("--plot-data", train_plot, "also write err-vs-k CSVs");

  auto* opt = app.add_subcommand("optimize", "minimize energy under the risk and temperature constraints");
  add_common(opt, c_opt);
  opt->add_option("--d0", d0_text, "single initial design speed,power");
  opt->add_option("--alpha-T", alpha_t, "target reliability");
  opt->add_option("--tau", tau, "failure threshold [MPa]");
  opt->add_option("--n-mc", n_mc, "Monte Carlo sample count");
  auto* seed_opt = opt->add_option("--seed", seed, "Monte Carlo seed");
  opt->add_option("--solver", solver_text, "penalty-nelder-mead | cobyla-like");
  opt->add_option("--constraint", constraint_text, "bpof | pof");
  opt->add_flag("--plot-data", opt_plot, "also write a headed iteration-history CSV");

  auto* val = app.add_subcommand("validate", "compare simulator and surrogate superquantiles at the optimum");
  add_common(val, c_val);
  val->add_flag("--self", self_val, "replace the surrogate by further model runs");

  auto* rk = app.add_subcommand("risk", "risk measures of a one-value-per-line sample file");
  rk->add_option("--alpha", risk_alpha, "reliability level")->check(CLI::Range(0.0, 1.0));
  rk->add_option("--tau", risk_tau, "failure threshold");
  rk->add_option("samples", risk_file, "sample file")->required();

  auto* model = app.add_subcommand("model", "surrogate bundle utilities");
  model->require_subcommand(1);
  auto* info = model->add_subcommand("info", "print K_T, K_S, degrees, r2 and provenance");
  add_common(info, c_info);

  auto* run = app.add_subcommand("run", "simulate, train, optimize and validate in one go");
  add_common(run, c_run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) {
      auto cfg = resolve(c_sim);
      if (m_override > 0) cfg.m = m_override;
      const auto data = stage_simulate(cfg);
      out << "wrote " << data.doe.size() << " runs to " << cfg.output_dir << "\n";
    } else if (tr->parsed()) {
      const auto cfg = resolve(c_train);
      const auto r = stage_train(cfg, train_plot);
      print_info(out, r.bundle);
    } else if (opt->parsed()) {
      auto cfg = resolve(c_opt);
      seed_set = seed_opt->count() > 0;
      if (alpha_t != 0.0) cfg.optimize.alpha_t = alpha_t;
      if (tau != 0.0) cfg.optimize.tau = tau;
      if (n_mc != 0) cfg.optimize.n_mc = n_mc;
      if (seed_set) cfg.optimize.seed = seed;
      if (!solver_text.empty()) cfg.optimize.solver = solver_from_string(solver_text);
      if (!constraint_text.empty()) {
        cfg.optimize.constraint = risk_constraint_from_string(constraint_text);
      }
      std::optional<DesignPoint> d0;
      if (!d0_text.empty()) d0 = parse_design(d0_text);
      const auto s = stage_optimize(cfg, d0, opt_plot);
      print_summary(out, s, cfg.optimize);
    } else if (val->parsed()) {
      const auto cfg = resolve(c_val);
      print_report(out, stage_validate(cfg, self_val));
    } else if (rk->parsed()) {
      require(risk_alpha > 0.0 && risk_alpha < 1.0, "alpha must lie in (0, 1)");
      const risk::SampleSet s(read_samples(risk_file));
      const auto e = risk::estimate(s, risk_alpha, risk_tau);
      out << std::setprecision(17);
      out << "quantile: " << e.quantile << "\n";
      out << "superquantile: " << e.superquantile << "\n";
      out << "pof: " << e.pof << "\n";
      out << "bpof: " << e.bpof << "\n";
      out << "zeta: " << e.zeta << "\n";
    } else if (info->parsed()) {
      const auto cfg = resolve(c_info);
      print_info(out, load_bundle(out_dir(cfg) / "bundle.json"));
    } else if (run->parsed()) {
      const auto cfg = resolve(c_run);
      run_pipeline(cfg);
      out << "artifacts written to " << cfg.output_dir << "\n";
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace pbf
