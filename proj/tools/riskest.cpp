// riskest: command-line front end for the risk-estimator studies.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "riskest/alpha_grid.hpp"
#include "riskest/io.hpp"
#include "riskest/l2_rules.hpp"
#include "riskest/lasso.hpp"
#include "riskest/numeric.hpp"
#include "riskest/problem.hpp"
#include "riskest/spectral.hpp"
#include "riskest/statistics.hpp"
#include "riskest/study.hpp"

namespace fs = std::filesystem;
using namespace riskest;

namespace {

// ---- configuration files ----

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\'')))
    return v.substr(1, v.size() - 2);
  return v;
}

// Flat "key = value" text (# comments), or a run manifest whose "config" object is used.
std::map<std::string, std::string> load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  std::map<std::string, std::string> out;
  if (trim(text).starts_with("{")) return parse_manifest_json(text).config;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    out[key] = unquote(trim(line.substr(eq + 1)));
  }
  return out;
}

// Precedence: flags given on the command line > config file > defaults.
void apply_config(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  for (const auto& [key, value] : load_config(path)) {
    if (key == "config") continue;
    CLI::Option* opt = nullptr;
    try {
      opt = sub->get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw CLI::ValidationError("--config", "unknown key '" + key + "' in " + path);
    }
    if (opt->count() > 0) continue;
    opt->clear();
    if (opt->get_expected_max() == 0) {  // flag
      if (value == "true" || value == "1") opt->add_result("true");
      else continue;
    } else {
      opt->add_result(value);
    }
    opt->run_callback();
  }
}

std::map<std::string, std::string> echo_options(const CLI::App* sub) {
  std::map<std::string, std::string> out;
  for (const CLI::Option* opt : sub->get_options()) {
    const auto& names = opt->get_lnames();
    if (names.empty() || names[0] == "help" || names[0] == "config") continue;
    std::string v;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      for (std::size_t k = 0; k < res.size(); ++k) v += (k ? "," : "") + res[k];
      if (opt->get_expected_max() == 0) v = "true";
    } else {
      v = opt->get_expected_max() == 0 ? "false" : opt->get_default_str();
    }
    out[names[0]] = v;
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(std::stoi(tok));
  }
  return out;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

// ---- shared option groups ----

struct ProblemOpts {
  int m = 64;
  int n = 0;  // 0: same as m
  double l = 0.06;
  double sigma = 0.1;
  int cell_nodes = 100;
  int norm_nodes = 100000;
  std::string problem_file;
  std::string decomposition_file;

  void add(CLI::App* app, bool require_mnl) {
    auto* om = app->add_option("--m", m, "number of measurements");
    auto* ol = app->add_option("--l", l, "kernel half-width l in (0, 1/2]");
    if (require_mnl) {
      om->required();
      ol->required();
    }
    app->add_option("--n", n, "number of unknowns (default: m)");
    app->add_option("--sigma", sigma, "noise standard deviation");
    app->add_option("--cell-nodes", cell_nodes, "trapezoid nodes per axis per matrix entry");
    app->add_option("--norm-nodes", norm_nodes, "trapezoid nodes for the kernel normalization");
  }
  void add_files(CLI::App* app) {
    app->add_option("--problem", problem_file, "problem file written by build-problem");
    app->add_option("--decomposition", decomposition_file, "decomposition file written by build-problem");
  }
  int nn() const { return n > 0 ? n : m; }
  QuadratureSettings quad() const { return {cell_nodes, norm_nodes}; }

  ProblemInstance load_problem() const {
    if (!problem_file.empty()) {
      ProblemInstance p = read_problem_file(problem_file);
      p.sigma = sigma;
      return p;
    }
    return ProblemInstance::build(m, nn(), l, sigma, quad());
  }
  SpectralDecomposition load_decomposition(const ProblemInstance& p) const {
    if (!decomposition_file.empty()) return read_decomposition_file(decomposition_file);
    return decompose(p.A);
  }
};

struct GridOpts {
  double min = -40.0;
  double max = 40.0;
  double step = 0.01;
  bool no_infinity = false;

  void add(CLI::App* app, bool allow_infinity) {
    app->add_option("--grid-min", min, "log10 of the smallest alpha");
    app->add_option("--grid-max", max, "log10 of the largest alpha");
    app->add_option("--grid-step", step, "log10 step of the alpha grid");
    if (allow_infinity) app->add_flag("--no-infinity", no_infinity, "omit alpha = inf from the grid");
  }
  AlphaGrid grid(bool infinity_allowed) const {
    return AlphaGrid::logarithmic(min, max, step, infinity_allowed && !no_infinity);
  }
};

struct AdmmOpts {
  AdmmParams p;
  bool no_adapt = false;
  void add(CLI::App* app) {
    app->add_option("--rho", p.rho, "initial ADMM penalty parameter");
    app->add_option("--tau", p.tau, "rho adaptation factor");
    app->add_option("--mu", p.mu, "residual ratio triggering adaptation");
    app->add_option("--max-iter", p.max_iter, "maximal ADMM iterations");
    app->add_option("--tol", p.tol, "ADMM stopping tolerance");
    app->add_flag("--no-adapt", no_adapt, "keep rho fixed");
  }
  AdmmParams params() const {
    AdmmParams q = p;
    q.adapt = !no_adapt;
    return q;
  }
};

struct StudyOpts {
  int draws = 10000;
  std::uint64_t seed = 1;
  std::string rules = "oracle,dp,psure,sure";
  std::string metric = "l2_estimation";
  bool sup_stats = false;
  int workers = 1;
  int bins = 200;
  std::string out_dir = ".";

  void add(CLI::App* app) {
    app->add_option("--draws", draws, "number of noise realizations");
    app->add_option("--seed", seed, "master seed");
    app->add_option("--rules", rules, "comma-separated rules: oracle,dp,psure,sure,mspe_oracle,msee_oracle");
    app->add_option("--metric", metric, "oracle metric: l2_estimation, l2_prediction or l1");
    app->add_flag("--sup-stats", sup_stats, "record sup-deviation statistics per draw");
    app->add_option("--workers", workers, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
    app->add_option("--bins", bins, "histogram bins for the log10 error axis");
    app->add_option("--out-dir", out_dir, "output directory");
  }
};

std::string problem_hash_of(const ProblemOpts& po) {
  return hex64(problem_key(po.m, po.nn(), po.l, po.quad()));
}

Manifest make_manifest(const std::string& command, const CLI::App* sub, std::uint64_t seed,
                       const std::string& problem_hash, const std::string& started) {
  Manifest m;
  m.command = command;
  m.config = echo_options(sub);
  m.master_seed = seed;
  m.problem_hash = problem_hash;
  m.started = started;
  return m;
}

void finish_manifest(Manifest& m, const fs::path& dir, const std::vector<std::string>& outputs) {
  m.outputs = outputs;
  m.finished = utc_timestamp();
  write_text(dir / "manifest.json", manifest_json(m));
}

// ---- commands ----

int cmd_build_problem(const ProblemOpts& po, double rank_tol, bool skip_decomposition,
                      const std::string& out_dir, const CLI::App* sub) {
  const std::string started = utc_timestamp();
  const ProblemInstance p = ProblemInstance::build(po.m, po.nn(), po.l, po.sigma, po.quad());
  const Eigen::VectorXd g = singular_values(p.A);
  int rank = 0;
  for (Eigen::Index i = 0; i < g.size(); ++i) rank += g[i] > rank_tol * g[0];
  const double cond = g[0] / g[rank - 1];

  fs::create_directories(out_dir);
  const std::string key = problem_hash_of(po);
  const fs::path dir(out_dir);
  std::vector<std::string> outputs = {"problem_" + key + ".txt"};
  write_problem_file((dir / outputs[0]).string(), p);
  if (!skip_decomposition) {
    outputs.push_back("decomposition_" + key + ".txt");
    write_decomposition_file((dir / outputs[1]).string(), decompose(p.A, rank_tol));
  }
  Manifest man = make_manifest("build-problem", sub, 0, key, started);
  finish_manifest(man, dir, outputs);

  std::printf("%-6s %-6s %-8s %-14s %-12s %s\n", "m", "n", "l", "cond(A)", "gamma_1", "rank");
  std::printf("%-6d %-6d %-8g %-14.6e %-12.9f %d\n", p.m, p.n, p.l, cond, g[0], rank);
  for (const auto& o : outputs) std::printf("wrote %s\n", (dir / o).string().c_str());
  return 0;
}

StudyConfig study_config(const ProblemOpts& po, const GridOpts& go, const StudyOpts& so,
                         Regularizer reg, const AdmmParams& admm) {
  StudyConfig c;
  c.m = po.m;
  c.n = po.nn();
  c.l = po.l;
  c.sigma = po.sigma;
  c.grid = go.grid(reg == Regularizer::Quadratic);
  c.n_draws = so.draws;
  c.master_seed = so.seed;
  c.rules = parse_rules(so.rules);
  c.regularizer = reg;
  c.oracle_metric = parse_metric(so.metric);
  c.workers = so.workers;
  c.compute_sup_stats = so.sup_stats;
  c.admm = admm;
  c.quad = po.quad();
  return c;
}

void print_study(const StudyResult& r) {
  std::printf("m=%d n=%d l=%g sigma=%g draws=%d cond(A)=%.6e\n", r.config.m, r.config.n, r.config.l,
              r.config.sigma, r.config.n_draws, r.cond);
  std::printf("%-12s %10s %10s %10s %10s %10s\n", "rule", "min", "max", "mean", "median", "std");
  for (Rule rule : r.config.rules) {
    const auto errs = rule_errors(r, rule);
    if (std::any_of(errs.begin(), errs.end(), [](double v) { return !std::isfinite(v); })) continue;
    const ErrorStats s = describe(errs);
    std::printf("%-12s %10.4f %10.4f %10.4f %10.4f %10.4f\n", std::string(rule_name(rule)).c_str(), s.min,
                s.max, s.mean, s.median, s.std);
  }
  const bool has_dp = std::find(r.config.rules.begin(), r.config.rules.end(), Rule::DP) != r.config.rules.end();
  if (has_dp) {
    for (Rule rule : r.config.rules) {
      if (rule == Rule::DP || rule == Rule::Oracle || rule == Rule::MSPEOracle || rule == Rule::MSEEOracle) continue;
      std::printf("%s beats dp on %.2f%% of draws\n", std::string(rule_name(rule)).c_str(),
                  100.0 * win_fraction(r, rule, Rule::DP));
    }
  }
}

int cmd_study(const ProblemOpts& po, const GridOpts& go, const StudyOpts& so, Regularizer reg,
              const AdmmParams& admm, const std::string& means_file, const CLI::App* sub) {
  const std::string started = utc_timestamp();
  const StudyConfig cfg = study_config(po, go, so, reg, admm);
  cfg.validate();
  const ProblemInstance p = po.load_problem();
  require(p.m == cfg.m && p.n == cfg.n, "problem file dimensions do not match --m/--n");
  const SpectralDecomposition dec = po.load_decomposition(p);

  StudyResult res;
  if (reg == Regularizer::Lasso && !means_file.empty()) {
    std::ifstream f(means_file);
    if (!f) throw std::runtime_error("cannot read " + means_file);
    auto cols = read_curve_csv(f);
    require(cols.count("mean_psure") && cols.count("mean_gsure"), "means file lacks mean_psure/mean_gsure columns");
    res = run_lasso_study(cfg, p, dec, &cols["mean_psure"], &cols["mean_gsure"]);
  } else {
    res = run_study(cfg, p, dec);
  }

  const fs::path dir(so.out_dir);
  fs::create_directories(dir);
  std::vector<std::string> outputs = {"records.csv", "summary.json"};
  {
    std::ofstream f(dir / "records.csv");
    write_records_csv(f, cfg.rules, res.records);
  }
  write_text(dir / "summary.json", study_summary_json(res, so.bins));
  if (reg == Regularizer::Lasso) {
    outputs.push_back("means.csv");
    std::ofstream f(dir / "means.csv");
    write_curve_csv(f, {"alpha", "mean_psure", "mean_gsure"},
                    {cfg.grid.finite_part().values(), res.mean_psure, res.mean_gsure});
  }
  Manifest man = make_manifest(reg == Regularizer::Lasso ? "lasso-study" : "run-study", sub, cfg.master_seed,
                               problem_hash_of(po), started);
  finish_manifest(man, dir, outputs);
  print_study(res);
  if (reg == Regularizer::Lasso && res.admm_unconverged_draws > 0)
    std::printf("note: ADMM hit max-iter before the tolerance on %d draws\n", res.admm_unconverged_draws);
  std::printf("wrote %s\n", dir.string().c_str());
  return 0;
}

// Study reloaded from a run directory (records.csv + summary.json).
StudyResult load_study_dir(const fs::path& dir) {
  std::ifstream fr(dir / "records.csv");
  if (!fr) throw std::runtime_error("cannot read " + (dir / "records.csv").string());
  CsvStudy csv = read_records_csv(fr);
  std::ifstream fs_(dir / "summary.json");
  if (!fs_) throw std::runtime_error("cannot read " + (dir / "summary.json").string());
  const auto j = nlohmann::json::parse(fs_);
  StudyResult r;
  r.config.m = j.at("m").get<int>();
  r.config.n = j.at("n").get<int>();
  r.config.rules = csv.rules;
  r.config.n_draws = static_cast<int>(csv.records.size());
  r.cond = j.at("cond").get<double>();
  r.scaling.c_m = j.at("c_m").get<double>();
  r.scaling.d_m = j.at("d_m").get<double>();
  r.records = std::move(csv.records);
  return r;
}

int cmd_rate_check(const ProblemOpts& po, const GridOpts& go, const StudyOpts& so, const std::string& ms_list,
                   const std::vector<std::string>& study_dirs, const CLI::App* sub) {
  const std::string started = utc_timestamp();
  std::vector<StudyResult> studies;
  if (!study_dirs.empty()) {
    for (const auto& d : study_dirs) studies.push_back(load_study_dir(d));
  } else {
    for (int m : parse_int_list(ms_list)) {
      ProblemOpts pm = po;
      pm.m = m;
      pm.n = m;
      StudyOpts sm = so;
      sm.sup_stats = true;
      sm.rules = "psure";
      StudyConfig cfg = study_config(pm, go, sm, Regularizer::Quadratic, {});
      std::fprintf(stderr, "rate-check: m = %d (%d draws)\n", m, cfg.n_draws);
      studies.push_back(run_study(cfg));
    }
  }
  require(studies.size() >= 2, "rate-check needs at least two values of m");

  nlohmann::json out;
  out["schema_version"] = kSchemaVersion;
  std::vector<const StudyResult*> ptrs;
  for (const auto& s : studies) ptrs.push_back(&s);
  std::printf("%-12s %8s %14s %14s %10s\n", "statistic", "m", "cond", "value", "");
  for (auto norm : {RateNormalization::PSURE, RateNormalization::GSURECond, RateNormalization::GSUREPlain}) {
    std::vector<RateSample> samples;
    for (const auto& s : studies) samples.push_back(rate_sample(s, norm));
    const RateFit fit = rate_check(samples, norm);
    const std::string name(normalization_name(norm));
    out["fits"][name] = {{"ms", fit.ms},
                         {"statistics", fit.statistics},
                         {"second_moments", fit.second_moments},
                         {"slope", fit.fit.slope},
                         {"intercept", fit.fit.intercept}};
    for (std::size_t k = 0; k < fit.ms.size(); ++k)
      std::printf("%-12s %8d %14.6e %14.6e\n", name.c_str(), fit.ms[k], samples[k].cond, fit.statistics[k]);
    std::printf("%-12s slope %.4f\n", name.c_str(), fit.fit.slope);
  }
  const LossCloseness lc = loss_closeness_stats(ptrs);
  for (const auto& row : lc.rows) {
    out["loss_closeness"]["rows"].push_back({{"m", row.m},
                                             {"psure_q10", row.psure_q10},
                                             {"psure_median", row.psure_median},
                                             {"psure_q90", row.psure_q90},
                                             {"gsure_q10", row.gsure_q10},
                                             {"gsure_median", row.gsure_median},
                                             {"gsure_q90", row.gsure_q90},
                                             {"rate_psure", row.rate_psure},
                                             {"rate_gsure", row.rate_gsure}});
  }
  out["loss_closeness"]["psure_median_slope"] = lc.psure_median_fit.slope;
  out["loss_closeness"]["gsure_median_slope"] = lc.gsure_median_fit.slope;
  std::printf("median sup|(1/m)PSURE - L| slope %.4f\n", lc.psure_median_fit.slope);

  const fs::path dir(so.out_dir);
  fs::create_directories(dir);
  write_text(dir / "rate.json", out.dump(2));
  Manifest man = make_manifest("rate-check", sub, so.seed, "", started);
  finish_manifest(man, dir, {"rate.json"});
  std::printf("wrote %s\n", (dir / "rate.json").string().c_str());
  return 0;
}

int cmd_grid_demo(const std::string& mode, const ProblemOpts& po, const GridOpts& go, const StudyOpts& so,
                  const AdmmParams& admm, int draw, int sweep, const CLI::App* sub) {
  const std::string started = utc_timestamp();
  const bool lasso = mode == "lasso";
  require(lasso || mode == "quadratic", "--mode must be quadratic or lasso");
  const ProblemInstance p = po.load_problem();
  const SpectralDecomposition dec = po.load_decomposition(p);
  const AlphaGrid log_grid = go.grid(!lasso);
  const fs::path dir(so.out_dir);
  fs::create_directories(dir);

  auto run = [&](int d, std::vector<double>* short_run) {
    return lasso ? grid_demo_lasso(p, dec, log_grid, so.seed, d, admm, short_run)
                 : grid_demo_quadratic(p, dec, log_grid, so.seed, d);
  };

  nlohmann::json out;
  out["schema_version"] = kSchemaVersion;
  out["mode"] = mode;
  std::vector<std::string> outputs = {"grid_demo.json"};
  std::printf("%-5s %-12s %-12s %-12s %-10s %-12s %-12s\n", "draw", "alpha_dp", "alpha_lin", "alpha_log", "ratio",
              "loss_lin", "loss_log");
  const int first = sweep > 0 ? 0 : draw;
  const int last = sweep > 0 ? sweep - 1 : draw;
  for (int d = first; d <= last; ++d) {
    std::vector<double> short_run;
    const GridDemoResult r = run(d, lasso ? &short_run : nullptr);
    std::printf("%-5d %-12.4e %-12.4e %-12.4e %-10.3g %-12.5g %-12.5g\n", d, r.alpha_dp, r.linear.argmin.alpha_hat,
                r.log.argmin.alpha_hat, r.alpha_ratio(), r.loss_at_linear_argmin(), r.loss_at_log_argmin());
    nlohmann::json e = {{"draw", d},
                        {"seed", r.seed},
                        {"data_hash", hex64(r.data_hash)},
                        {"alpha_dp", r.alpha_dp},
                        {"delta", r.delta},
                        {"linear_argmin_alpha", r.linear.argmin.alpha_hat},
                        {"linear_argmin_sure", r.linear.argmin.objective_value},
                        {"log_argmin_alpha", std::isinf(r.log.argmin.alpha_hat) ? nlohmann::json("inf")
                                                                               : nlohmann::json(r.log.argmin.alpha_hat)},
                        {"log_argmin_sure", r.log.argmin.objective_value},
                        {"alpha_ratio", r.alpha_ratio()},
                        {"loss_at_linear_argmin", r.loss_at_linear_argmin()},
                        {"loss_at_log_argmin", r.loss_at_log_argmin()}};
    out["draws"].push_back(e);
    const std::string tag = "draw" + std::to_string(d);
    {
      std::ofstream f(dir / (tag + "_linear.csv"));
      std::vector<std::string> names = {"alpha", "sure", "true_loss"};
      std::vector<std::vector<double>> cols = {r.linear.grid.values(), r.linear.sure, r.linear.true_loss};
      if (lasso) {
        names.push_back("sure_short_run");
        cols.push_back(short_run);
      }
      write_curve_csv(f, names, cols);
    }
    {
      std::ofstream f(dir / (tag + "_log.csv"));
      write_curve_csv(f, {"alpha", "sure", "true_loss"}, {r.log.grid.values(), r.log.sure, r.log.true_loss});
    }
    outputs.push_back(tag + "_linear.csv");
    outputs.push_back(tag + "_log.csv");
  }
  write_text(dir / "grid_demo.json", out.dump(2));
  Manifest man = make_manifest("grid-demo", sub, so.seed, problem_hash_of(po), started);
  finish_manifest(man, dir, outputs);
  return 0;
}

int cmd_stats(const std::string& records_path, const std::string& json_out) {
  std::ifstream f(records_path);
  if (!f) throw std::runtime_error("cannot read " + records_path);
  CsvStudy csv = read_records_csv(f);
  StudyResult r;
  r.config.rules = csv.rules;
  r.config.n_draws = static_cast<int>(csv.records.size());
  r.records = std::move(csv.records);
  require(!r.records.empty(), "records file has no rows");

  nlohmann::json out;
  out["schema_version"] = kSchemaVersion;
  std::printf("%-12s %10s %10s %10s %10s %10s\n", "rule", "min", "max", "mean", "median", "std");
  for (Rule rule : r.config.rules) {
    const auto errs = rule_errors(r, rule);
    if (std::any_of(errs.begin(), errs.end(), [](double v) { return !std::isfinite(v); })) continue;
    const ErrorStats s = describe(errs);
    std::printf("%-12s %10.4f %10.4f %10.4f %10.4f %10.4f\n", std::string(rule_name(rule)).c_str(), s.min, s.max,
                s.mean, s.median, s.std);
    out["rules"][std::string(rule_name(rule))] = {
        {"min", s.min}, {"max", s.max}, {"mean", s.mean}, {"median", s.median}, {"std", s.std}, {"count", s.count}};
  }
  for (Rule a : r.config.rules)
    for (Rule b : r.config.rules) {
      if (a == b || b != Rule::DP) continue;
      const double w = win_fraction(r, a, b);
      out["win_fractions"][std::string(rule_name(a)) + "_vs_dp"] = w;
      std::printf("%s beats dp on %.2f%% of draws\n", std::string(rule_name(a)).c_str(), 100.0 * w);
    }
  if (!json_out.empty()) write_text(json_out, out.dump(2));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-estimator based parameter choice for ill-posed linear problems"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", std::string(kToolVersion));

  // build-problem
  ProblemOpts bp_po;
  double bp_rank_tol = kDefaultRankTol;
  bool bp_no_dec = false;
  std::string bp_out = ".", bp_config;
  auto* bp = app.add_subcommand("build-problem", "build A and x*, write them with the SVD, report cond(A)");
  bp_po.add(bp, true);
  bp->add_option("--rank-tol", bp_rank_tol, "relative singular-value cutoff for the effective rank");
  bp->add_flag("--no-decomposition", bp_no_dec, "skip writing the decomposition file");
  bp->add_option("--out-dir", bp_out, "output directory");
  bp->add_option("--config", bp_config, "flat key = value file or run manifest");

  // run-study
  ProblemOpts rs_po;
  GridOpts rs_go;
  StudyOpts rs_so;
  std::string rs_config;
  auto* rs = app.add_subcommand("run-study", "Monte-Carlo study of the quadratic (Tikhonov) rules");
  rs_po.add(rs, false);
  rs_po.add_files(rs);
  rs_go.add(rs, true);
  rs_so.add(rs);
  rs->add_option("--config", rs_config, "flat key = value file or run manifest");

  // lasso-study
  ProblemOpts ls_po;
  GridOpts ls_go{-10.0, 10.0, 0.01, true};
  StudyOpts ls_so;
  ls_so.metric = "l1";
  AdmmOpts ls_admm;
  std::string ls_means, ls_config;
  auto* ls = app.add_subcommand("lasso-study", "Monte-Carlo study of the LASSO rules (all-at-once ADMM)");
  ls_po.add(ls, false);
  ls_po.add_files(ls);
  ls_go.add(ls, false);
  ls_so.add(ls);
  ls_admm.add(ls);
  ls->add_option("--means", ls_means, "means.csv of a first run; enables single-pass sup statistics");
  ls->add_option("--config", ls_config, "flat key = value file or run manifest");

  // rate-check
  ProblemOpts rc_po;
  GridOpts rc_go;
  StudyOpts rc_so;
  rc_so.draws = 1000;
  std::string rc_ms = "16,32,64,128,256,512", rc_config;
  std::vector<std::string> rc_dirs;
  auto* rc = app.add_subcommand("rate-check", "log-log rate fits of the sup-deviation statistics over m");
  rc->add_option("--l", rc_po.l, "kernel half-width");
  rc->add_option("--sigma", rc_po.sigma, "noise standard deviation");
  rc->add_option("--cell-nodes", rc_po.cell_nodes, "trapezoid nodes per axis per matrix entry");
  rc->add_option("--norm-nodes", rc_po.norm_nodes, "trapezoid nodes for the kernel normalization");
  rc->add_option("--ms", rc_ms, "comma-separated values of m = n");
  rc->add_option("--study-dirs", rc_dirs, "reuse run-study outputs (run with --sup-stats) instead of sampling");
  rc->add_option("--draws", rc_so.draws, "noise realizations per m");
  rc->add_option("--seed", rc_so.seed, "master seed");
  rc->add_option("--workers", rc_so.workers, "worker threads")->check(CLI::PositiveNumber);
  rc->add_option("--out-dir", rc_so.out_dir, "output directory");
  rc_go.add(rc, true);
  rc->add_option("--config", rc_config, "flat key = value file or run manifest");

  // grid-demo
  ProblemOpts gd_po;
  GridOpts gd_go;
  StudyOpts gd_so;
  AdmmOpts gd_admm;
  std::string gd_mode = "quadratic", gd_config;
  int gd_draw = 0, gd_sweep = 0;
  auto* gd = app.add_subcommand("grid-demo", "SURE on a coarse linear grid vs the fine logarithmic grid");
  gd->add_option("--mode", gd_mode, "quadratic or lasso")->check(CLI::IsMember({"quadratic", "lasso"}));
  gd_po.add(gd, false);
  gd_po.add_files(gd);
  gd_go.add(gd, true);
  gd->add_option("--seed", gd_so.seed, "master seed");
  gd->add_option("--draw", gd_draw, "noise realization index");
  gd->add_option("--sweep", gd_sweep, "run draws 0 .. sweep-1 instead of a single draw");
  gd->add_option("--out-dir", gd_so.out_dir, "output directory");
  gd_admm.add(gd);
  gd->add_option("--config", gd_config, "flat key = value file or run manifest");

  // stats
  std::string st_records, st_json;
  auto* st = app.add_subcommand("stats", "error statistics and win fractions of a records.csv");
  st->add_option("records", st_records, "records.csv written by run-study or lasso-study")->required();
  st->add_option("--json", st_json, "also write the statistics as JSON");

  try {
    app.parse(argc, argv);
    if (*bp) apply_config(bp, bp_config);
    if (*rs) apply_config(rs, rs_config);
    if (*ls) apply_config(ls, ls_config);
    if (*rc) apply_config(rc, rc_config);
    if (*gd) apply_config(gd, gd_config);
    if (*bp) {
      if (bp_po.m < 1 || !(bp_po.l > 0.0)) throw CLI::ValidationError("--m/--l", "must be positive");
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*bp) return cmd_build_problem(bp_po, bp_rank_tol, bp_no_dec, bp_out, bp);
    if (*rs) return cmd_study(rs_po, rs_go, rs_so, Regularizer::Quadratic, {}, "", rs);
    if (*ls) return cmd_study(ls_po, ls_go, ls_so, Regularizer::Lasso, ls_admm.params(), ls_means, ls);
    if (*rc) return cmd_rate_check(rc_po, rc_go, rc_so, rc_ms, rc_dirs, rc);
    if (*gd) {
      if (gd_mode == "lasso" && gd->get_option("--grid-min")->count() == 0 && gd_config.empty()) {
        gd_go.min = -10.0;
        gd_go.max = 10.0;
      }
      return cmd_grid_demo(gd_mode, gd_po, gd_go, gd_so, gd_admm.params(), gd_draw, gd_sweep, gd);
    }
    if (*st) return cmd_stats(st_records, st_json);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
