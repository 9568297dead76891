#include "riskest/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "riskest/noise.hpp"
#include "riskest/numeric.hpp"
#include "riskest/risk_curves.hpp"

namespace riskest {

namespace {

// Runs body(0..count-1) on `workers` threads. Results must be written by index;
// the first failing index (lowest) is rethrown with its index attached.
void parallel_for(int count, int workers, const std::function<void(int)>& body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto run = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const int nthreads = std::max(1, std::min(workers, count));
  if (nthreads == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(run);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

template <class F>
auto with_draw_context(int draw, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const NumericError& e) {
    throw NumericError("draw " + std::to_string(draw) + ": " + e.what());
  }
}

int argmin_index(const std::vector<double>& v) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(v.size()); ++k)
    if (v[static_cast<std::size_t>(k)] <= v[static_cast<std::size_t>(best)]) best = k;
  return best;
}

constexpr int kBlock = 32;

// ---------------------------------------------------------------- quadratic

struct QuadraticContext {
  const StudyConfig& cfg;
  const ProblemInstance& problem;
  const SpectralDecomposition& dec;
  RiskCurves curves;
  SpectralCoords xstar_only;
  std::optional<RuleSelection> mspe_oracle;
  std::optional<RuleSelection> msee_oracle;
};

RuleOutcome outcome_at(const SpectralDecomposition& dec, const SpectralCoords& c,
                       const RuleSelection& s) {
  RuleOutcome o;
  o.alpha = s.alpha_hat;
  o.index = s.index;
  o.at_boundary = s.at_boundary;
  o.objective = s.objective_value;
  o.error_l2 = std::sqrt(estimation_error_sq(dec, c, s.alpha_hat));
  o.error_l1 = l1_error(dec, c, s.alpha_hat);
  return o;
}

StudyRecord quadratic_draw(const QuadraticContext& ctx, int d) {
  const auto& cfg = ctx.cfg;
  const auto& dec = ctx.dec;
  const NoiseDraw noise = study_noise(cfg.sigma, cfg.m, cfg.master_seed, d);
  const Eigen::VectorXd y = ctx.problem.clean_data() + noise.eps;
  const SpectralCoords c = to_spectral(dec, y, ctx.problem.x_star);

  StudyRecord rec;
  rec.draw_index = d;
  rec.seed = noise.seed;
  for (Rule rule : cfg.rules) {
    RuleSelection s;
    switch (rule) {
      case Rule::Oracle:
        if (cfg.oracle_metric == ErrorMetric::L2Estimation)
          s = select_by_minimization(ctx.curves.estimation_error_sq(c), cfg.grid, Rule::Oracle);
        else if (cfg.oracle_metric == ErrorMetric::L2Prediction)
          s = select_by_minimization(ctx.curves.prediction_error_sq(c), cfg.grid, Rule::Oracle);
        else
          s = oracle_select(dec, c, cfg.grid, ErrorMetric::L1);
        break;
      case Rule::DP: s = dp_select(dec, c, cfg.grid, cfg.sigma); break;
      case Rule::PSURE: s = select_by_minimization(ctx.curves.psure(c), cfg.grid, Rule::PSURE); break;
      case Rule::SURE: s = select_by_minimization(ctx.curves.gsure(c), cfg.grid, Rule::SURE); break;
      case Rule::MSPEOracle: s = *ctx.mspe_oracle; break;
      case Rule::MSEEOracle: s = *ctx.msee_oracle; break;
    }
    rec.outcomes.push_back(outcome_at(dec, c, s));
  }
  if (cfg.compute_sup_stats) {
    const auto dev = ctx.curves.sup_deviation(c);
    rec.sup_dev_psure = dev.psure;
    rec.sup_dev_gsure = dev.gsure;
    const auto loss = ctx.curves.sup_loss_deviation(c);
    rec.sup_loss_psure = loss.psure;
    rec.sup_loss_gsure = loss.gsure;
  }
  return rec;
}

StudyResult run_quadratic(const StudyConfig& cfg, const ProblemInstance& problem,
                          const SpectralDecomposition& dec) {
  SpectralCoords xs;
  xs.x_star = dec.V.transpose() * problem.x_star;
  QuadraticContext ctx{cfg, problem, dec, RiskCurves(dec, cfg.grid, cfg.sigma), xs, {}, {}};
  auto has = [&](Rule r) { return std::find(cfg.rules.begin(), cfg.rules.end(), r) != cfg.rules.end(); };
  if (has(Rule::MSPEOracle)) ctx.mspe_oracle = select_by_minimization(ctx.curves.mspe(xs), cfg.grid, Rule::MSPEOracle);
  if (has(Rule::MSEEOracle)) ctx.msee_oracle = select_by_minimization(ctx.curves.msee(xs), cfg.grid, Rule::MSEEOracle);

  StudyResult res;
  res.records.resize(static_cast<std::size_t>(cfg.n_draws));
  parallel_for(cfg.n_draws, cfg.workers, [&](int d) {
    res.records[static_cast<std::size_t>(d)] = with_draw_context(d, [&] { return quadratic_draw(ctx, d); });
  });
  return res;
}

// ---------------------------------------------------------------- lasso

struct LassoCurves {
  std::vector<double> residual;   // ||y - A z||^2
  std::vector<double> psure;
  std::vector<double> gsure;
  std::vector<double> err_l2_sq;  // ||z - x*||^2
  std::vector<double> err_l1;
  std::vector<double> pred_sq;    // ||A(z - x*)||^2
  std::vector<double> proj_sq;    // ||Pi(z - x*)||^2
  bool converged = true;
};

struct LassoContext {
  const StudyConfig& cfg;
  const ProblemInstance& problem;
  LassoRiskContext risk;
  std::vector<double> alphas;
  LossScaling scaling;
};

LassoCurves lasso_curves(const LassoContext& ctx, int d, std::uint64_t* seed_out) {
  const auto& cfg = ctx.cfg;
  const Eigen::MatrixXd& A = ctx.problem.A;
  const NoiseDraw noise = study_noise(cfg.sigma, cfg.m, cfg.master_seed, d);
  if (seed_out) *seed_out = noise.seed;
  const Eigen::VectorXd y = ctx.problem.clean_data() + noise.eps;
  const LassoPath path = admm_all_at_once(A, y, ctx.alphas, cfg.admm);
  const Eigen::VectorXd x_ml = ctx.risk.pinv() * y;
  const double s2 = cfg.sigma * cfg.sigma;

  const std::size_t na = ctx.alphas.size();
  LassoCurves out;
  out.converged = path.all_converged();
  for (auto* v : {&out.residual, &out.psure, &out.gsure, &out.err_l2_sq, &out.err_l1, &out.pred_sq, &out.proj_sq})
    v->resize(na);

  std::vector<int> last_support{-1};
  double last_gdf = 0.0;
  for (std::size_t k = 0; k < na; ++k) {
    const Eigen::VectorXd z = path.Z.col(static_cast<Eigen::Index>(k));
    const std::vector<int> support = support_of(z);
    if (support != last_support) {
      last_gdf = ctx.risk.gdf(support);
      last_support = support;
    }
    const Eigen::VectorXd err = z - ctx.problem.x_star;
    out.residual[k] = (y - A * z).squaredNorm();
    out.psure[k] = out.residual[k] - cfg.m * s2 + 2.0 * s2 * static_cast<double>(support.size());
    out.gsure[k] = (x_ml - z).squaredNorm() - s2 * ctx.risk.trace_pinv_gram() + 2.0 * s2 * last_gdf;
    out.err_l2_sq[k] = err.squaredNorm();
    out.err_l1[k] = err.lpNorm<1>();
    out.pred_sq[k] = (A * err).squaredNorm();
    out.proj_sq[k] = (ctx.risk.projector() * err).squaredNorm();
  }
  return out;
}

RuleOutcome lasso_outcome(const LassoCurves& c, const std::vector<double>& alphas, int k,
                          double objective, bool boundary) {
  RuleOutcome o;
  o.alpha = alphas[static_cast<std::size_t>(k)];
  o.index = k;
  o.error_l2 = std::sqrt(c.err_l2_sq[static_cast<std::size_t>(k)]);
  o.error_l1 = c.err_l1[static_cast<std::size_t>(k)];
  o.at_boundary = boundary;
  o.objective = objective;
  return o;
}

// Per-draw outcomes that need no knowledge of the true risks.
void lasso_fill_record(const LassoContext& ctx, const LassoCurves& c, StudyRecord& rec,
                       const std::vector<double>* mean_psure, const std::vector<double>* mean_gsure) {
  const auto& cfg = ctx.cfg;
  const int na = static_cast<int>(ctx.alphas.size());
  auto argmin_outcome = [&](const std::vector<double>& objective, const std::vector<double>& value) {
    const int k = argmin_index(objective);
    for (double v : objective)
      if (!std::isfinite(v)) throw NumericError("lasso study: non-finite risk value");
    return lasso_outcome(c, ctx.alphas, k, value[static_cast<std::size_t>(k)], k == 0 || k == na - 1);
  };
  rec.outcomes.clear();
  for (Rule rule : cfg.rules) {
    switch (rule) {
      case Rule::Oracle: {
        const auto& crit = cfg.oracle_metric == ErrorMetric::L1 ? c.err_l1
                           : cfg.oracle_metric == ErrorMetric::L2Prediction ? c.pred_sq
                                                                            : c.err_l2_sq;
        rec.outcomes.push_back(argmin_outcome(crit, crit));
        break;
      }
      case Rule::DP: {
        const double target = cfg.m * cfg.sigma * cfg.sigma;
        int k = 0;
        while (k < na && c.residual[static_cast<std::size_t>(k)] - target < 0.0) ++k;
        const bool boundary = k == 0 || k == na;
        k = std::min(k, na - 1);
        rec.outcomes.push_back(lasso_outcome(c, ctx.alphas, k, c.residual[static_cast<std::size_t>(k)] - target, boundary));
        break;
      }
      case Rule::PSURE: rec.outcomes.push_back(argmin_outcome(c.psure, c.psure)); break;
      case Rule::SURE: rec.outcomes.push_back(argmin_outcome(c.gsure, c.gsure)); break;
      case Rule::MSPEOracle:
      case Rule::MSEEOracle: {
        const auto* mean = rule == Rule::MSPEOracle ? mean_psure : mean_gsure;
        if (!mean) {
          rec.outcomes.push_back(RuleOutcome{std::numeric_limits<double>::quiet_NaN(), -1,
                                             std::numeric_limits<double>::quiet_NaN(),
                                             std::numeric_limits<double>::quiet_NaN(), false,
                                             std::numeric_limits<double>::quiet_NaN()});
        } else {
          const int k = argmin_index(*mean);
          rec.outcomes.push_back(lasso_outcome(c, ctx.alphas, k, (*mean)[static_cast<std::size_t>(k)], k == 0 || k == na - 1));
        }
        break;
      }
    }
  }
  if (cfg.compute_sup_stats && mean_psure && mean_gsure) {
    double dp = 0.0, dg = 0.0, lp = 0.0, lg = 0.0;
    for (std::size_t k = 0; k < c.psure.size(); ++k) {
      dp = std::max(dp, std::abs(c.psure[k] - (*mean_psure)[k]));
      dg = std::max(dg, std::abs(c.gsure[k] - (*mean_gsure)[k]));
      lp = std::max(lp, std::abs(c.psure[k] - c.pred_sq[k]) / cfg.m);
      lg = std::max(lg, ctx.scaling.c_m * std::abs(c.gsure[k] - c.proj_sq[k]));
    }
    rec.sup_dev_psure = dp;
    rec.sup_dev_gsure = dg;
    rec.sup_loss_psure = lp;
    rec.sup_loss_gsure = lg;
  }
}

// Upper bound on cached per-draw curve values kept between the two passes.
constexpr std::size_t kCacheLimit = 40'000'000;

}  // namespace

std::string_view regularizer_name(Regularizer r) {
  return r == Regularizer::Quadratic ? "quadratic" : "lasso";
}

Regularizer parse_regularizer(std::string_view name) {
  if (name == "quadratic" || name == "l2" || name == "tikhonov") return Regularizer::Quadratic;
  if (name == "lasso" || name == "l1") return Regularizer::Lasso;
  throw std::invalid_argument("unknown regularizer '" + std::string(name) + "'");
}

void StudyConfig::validate() const {
  require(m >= 1 && n >= 8, "StudyConfig: need m >= 1 and n >= 8");
  require(l > 0.0 && l <= 0.5, "StudyConfig: l must lie in (0, 1/2]");
  require(sigma >= 0.0 && std::isfinite(sigma), "StudyConfig: sigma must be finite and >= 0");
  require(n_draws >= 1, "StudyConfig: n_draws must be >= 1");
  require(workers >= 1, "StudyConfig: workers must be >= 1");
  if (regularizer == Regularizer::Lasso) {
    require(!grid.includes_infinity(), "StudyConfig: the LASSO grid cannot contain infinity");
    admm.validate();
  }
}

int StudyResult::rule_column(Rule rule) const {
  for (std::size_t k = 0; k < config.rules.size(); ++k)
    if (config.rules[k] == rule) return static_cast<int>(k);
  throw std::invalid_argument("study has no rule '" + std::string(rule_name(rule)) + "'");
}

NoiseDraw study_noise(double sigma, int m, std::uint64_t master_seed, int index) {
  const std::uint64_t seed = derive_seed(master_seed, static_cast<std::uint64_t>(index));
  if (sigma == 0.0) return NoiseDraw{Eigen::VectorXd::Zero(m), seed};
  return sample_noise(sigma, m, seed);
}

Eigen::VectorXd study_data(const ProblemInstance& problem, std::uint64_t master_seed, int index) {
  return problem.clean_data() + study_noise(problem.sigma, problem.m, master_seed, index).eps;
}

StudyResult run_study(const StudyConfig& config) {
  config.validate();
  const ProblemInstance problem = ProblemInstance::build(config.m, config.n, config.l, config.sigma, config.quad);
  const SpectralDecomposition dec = decompose(problem.A);
  return run_study(config, problem, dec);
}

StudyResult run_study(const StudyConfig& config, const ProblemInstance& problem,
                      const SpectralDecomposition& dec) {
  if (config.regularizer == Regularizer::Lasso) return run_lasso_study(config, problem, dec, nullptr, nullptr);
  config.validate();
  require(problem.m == config.m && problem.n == config.n, "run_study: problem does not match config");
  StudyResult res = run_quadratic(config, problem, dec);
  res.config = config;
  res.cond = dec.cond;
  res.gamma1 = dec.q() > 0 ? dec.gammas[0] : 0.0;
  res.rank = dec.rank;
  res.scaling = loss_scaling(dec);
  return res;
}

StudyResult run_lasso_study(const StudyConfig& config, const ProblemInstance& problem,
                            const SpectralDecomposition& dec,
                            const std::vector<double>* known_mean_psure,
                            const std::vector<double>* known_mean_gsure) {
  config.validate();
  require(config.regularizer == Regularizer::Lasso, "run_lasso_study: config is not a LASSO study");
  require(problem.m == config.m && problem.n == config.n, "run_lasso_study: problem does not match config");
  const AlphaGrid grid = config.grid.finite_part();
  LassoContext ctx{config, problem, LassoRiskContext(problem.A), grid.values(), loss_scaling(dec)};
  const std::size_t na = ctx.alphas.size();
  require((known_mean_psure == nullptr) == (known_mean_gsure == nullptr),
          "run_lasso_study: supply both or neither mean curves");
  if (known_mean_psure) {
    require(known_mean_psure->size() == na && known_mean_gsure->size() == na,
            "run_lasso_study: mean curves do not match the grid");
  }

  StudyResult res;
  res.config = config;
  res.cond = dec.cond;
  res.gamma1 = dec.q() > 0 ? dec.gammas[0] : 0.0;
  res.rank = dec.rank;
  res.scaling = ctx.scaling;
  const int N = config.n_draws;
  res.records.resize(static_cast<std::size_t>(N));
  std::vector<char> converged(static_cast<std::size_t>(N), 1);

  const bool wants_means = std::any_of(config.rules.begin(), config.rules.end(), [](Rule r) {
    return r == Rule::MSPEOracle || r == Rule::MSEEOracle;
  }) || config.compute_sup_stats;
  const bool second_pass = wants_means && !known_mean_psure;
  const bool cache = second_pass && static_cast<std::size_t>(N) * na * 7 <= kCacheLimit;
  std::vector<LassoCurves> cached(cache ? static_cast<std::size_t>(N) : 0);

  // Pass 1: per-draw curves, block partial sums in a fixed order.
  const int nblocks = (N + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> block_psure(static_cast<std::size_t>(nblocks)),
      block_gsure(static_cast<std::size_t>(nblocks));
  parallel_for(nblocks, config.workers, [&](int b) {
    std::vector<double> sp(na, 0.0), sg(na, 0.0);
    for (int d = b * kBlock; d < std::min(N, (b + 1) * kBlock); ++d) {
      with_draw_context(d, [&] {
        StudyRecord& rec = res.records[static_cast<std::size_t>(d)];
        rec.draw_index = d;
        LassoCurves c = lasso_curves(ctx, d, &rec.seed);
        converged[static_cast<std::size_t>(d)] = c.converged;
        lasso_fill_record(ctx, c, rec, known_mean_psure, known_mean_gsure);
        for (std::size_t k = 0; k < na; ++k) {
          sp[k] += c.psure[k];
          sg[k] += c.gsure[k];
        }
        if (cache) cached[static_cast<std::size_t>(d)] = std::move(c);
        return 0;
      });
    }
    block_psure[static_cast<std::size_t>(b)] = std::move(sp);
    block_gsure[static_cast<std::size_t>(b)] = std::move(sg);
  });

  res.mean_psure.assign(na, 0.0);
  res.mean_gsure.assign(na, 0.0);
  for (int b = 0; b < nblocks; ++b) {
    for (std::size_t k = 0; k < na; ++k) {
      res.mean_psure[k] += block_psure[static_cast<std::size_t>(b)][k];
      res.mean_gsure[k] += block_gsure[static_cast<std::size_t>(b)][k];
    }
  }
  for (std::size_t k = 0; k < na; ++k) {
    res.mean_psure[k] /= N;
    res.mean_gsure[k] /= N;
  }

  // Pass 2: sup statistics and risk oracles against the first-pass means.
  if (second_pass) {
    parallel_for(N, config.workers, [&](int d) {
      with_draw_context(d, [&] {
        StudyRecord& rec = res.records[static_cast<std::size_t>(d)];
        if (cache) {
          lasso_fill_record(ctx, cached[static_cast<std::size_t>(d)], rec, &res.mean_psure, &res.mean_gsure);
        } else {
          const LassoCurves c = lasso_curves(ctx, d, nullptr);
          lasso_fill_record(ctx, c, rec, &res.mean_psure, &res.mean_gsure);
        }
        return 0;
      });
    });
  }
  res.admm_unconverged_draws = static_cast<int>(std::count(converged.begin(), converged.end(), 0));
  return res;
}

// ---------------------------------------------------------------- grid demos

namespace {

std::uint64_t hash_vector(const Eigen::VectorXd& v) {
  return fnv1a64(v.data(), static_cast<std::size_t>(v.size()) * sizeof(double));
}

GridScan quadratic_scan(const SpectralDecomposition& dec, const SpectralCoords& c, const AlphaGrid& grid,
                        double sigma) {
  const RiskCurves curves(dec, grid, sigma);
  GridScan s{grid, curves.gsure(c), curves.projected_error_sq(c), {}};
  s.argmin = select_by_minimization(s.sure, grid, Rule::SURE);
  return s;
}

GridScan lasso_scan(const ProblemInstance& problem, const LassoRiskContext& risk, const Eigen::VectorXd& y,
                    const AlphaGrid& grid, const AdmmParams& admm, std::vector<double>* residual) {
  const LassoPath path = admm_all_at_once(problem.A, y, grid.values(), admm);
  const Eigen::VectorXd x_ml = risk.pinv() * y;
  GridScan s{grid, {}, {}, {}};
  for (int k = 0; k < grid.size(); ++k) {
    const Eigen::VectorXd z = path.Z.col(k);
    s.sure.push_back(risk.gsure_from_ml(x_ml, z, problem.sigma));
    s.true_loss.push_back((risk.projector() * (z - problem.x_star)).squaredNorm());
    if (residual) residual->push_back((y - problem.A * z).squaredNorm());
  }
  s.argmin = select_by_minimization(s.sure, grid, Rule::SURE);
  return s;
}

}  // namespace

GridDemoResult grid_demo_quadratic(const ProblemInstance& problem, const SpectralDecomposition& dec,
                                   const AlphaGrid& log_grid, std::uint64_t master_seed, int draw) {
  GridDemoResult r;
  r.draw_index = draw;
  const NoiseDraw noise = study_noise(problem.sigma, problem.m, master_seed, draw);
  r.seed = noise.seed;
  const Eigen::VectorXd y = problem.clean_data() + noise.eps;
  r.data_hash = hash_vector(y);
  const SpectralCoords c = to_spectral(dec, y, problem.x_star);
  r.alpha_dp = dp_select(dec, c, log_grid, problem.sigma).alpha_hat;
  require(std::isfinite(r.alpha_dp), "grid_demo: discrepancy principle selected alpha = inf");
  r.delta = 2.0 * r.alpha_dp / 50.0;
  r.linear = quadratic_scan(dec, c, AlphaGrid::linear(r.delta, 50), problem.sigma);
  r.log = quadratic_scan(dec, c, log_grid, problem.sigma);
  return r;
}

GridDemoResult grid_demo_lasso(const ProblemInstance& problem, const SpectralDecomposition&,
                               const AlphaGrid& log_grid, std::uint64_t master_seed, int draw,
                               const AdmmParams& admm, std::vector<double>* short_run_sure) {
  GridDemoResult r;
  r.draw_index = draw;
  const NoiseDraw noise = study_noise(problem.sigma, problem.m, master_seed, draw);
  r.seed = noise.seed;
  const Eigen::VectorXd y = problem.clean_data() + noise.eps;
  r.data_hash = hash_vector(y);
  const LassoRiskContext risk(problem.A);

  std::vector<double> residual;
  const AlphaGrid fine = log_grid.finite_part();
  r.log = lasso_scan(problem, risk, y, fine, admm, &residual);
  // Discrepancy principle on the LASSO path: first grid alpha whose residual reaches m sigma^2.
  const double target = problem.m * problem.sigma * problem.sigma;
  std::size_t k = 0;
  while (k + 1 < residual.size() && residual[k] < target) ++k;
  r.alpha_dp = fine[static_cast<int>(k)];
  r.delta = r.alpha_dp / 10.0;
  const AlphaGrid lin = AlphaGrid::linear(r.delta, 20);
  r.linear = lasso_scan(problem, risk, y, lin, admm, nullptr);
  if (short_run_sure) *short_run_sure = lasso_scan(problem, risk, y, lin, AdmmParams::short_run(), nullptr).sure;
  return r;
}

}  // namespace riskest
