#include "riskest/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "riskest/numeric.hpp"

namespace riskest {

using nlohmann::json;

namespace {

constexpr const char* kProblemMagic = "riskest-problem 1";
constexpr const char* kDecompMagic = "riskest-decomposition 1";

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

void expect_line(std::istream& in, const std::string& want) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != want)
    throw std::invalid_argument("expected '" + want + "', got '" + line + "'");
}

std::string read_field(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("missing header field '" + key + "'");
  line = strip_cr(line);
  const auto sp = line.find(' ');
  if (sp == std::string::npos || line.substr(0, sp) != key)
    throw std::invalid_argument("expected header field '" + key + "', got '" + line + "'");
  return line.substr(sp + 1);
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& M) {
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) out << (j ? " " : "") << format_double(M(i, j));
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd M(rows, cols);
  std::string tok;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(in >> tok)) throw std::invalid_argument("matrix data truncated");
      M(i, j) = parse_double(tok);
    }
  in >> std::ws;
  return M;
}

int to_int(const std::string& s) {
  std::size_t pos = 0;
  const long v = std::stol(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("bad integer '" + s + "'");
  return static_cast<int>(v);
}

json json_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json json_array(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(json_number(x));
  return a;
}

json stats_json(const ErrorStats& s) {
  return json{{"count", s.count}, {"min", json_number(s.min)}, {"max", json_number(s.max)},
              {"mean", json_number(s.mean)}, {"median", json_number(s.median)}, {"std", json_number(s.std)}};
}

json histogram_json(const Histogram& h) {
  return json{{"log10_edges", json_array(h.edges)},
              {"counts", h.counts},
              {"total", h.total},
              {"infinite_count", h.infinite_count},
              {"display_probabilities", json_array(h.display_probabilities())}};
}

const std::vector<std::string> kRuleFields = {"alpha", "index", "err_l2", "err_l1", "boundary", "objective"};
const std::vector<std::string> kSupFields = {"sup_dev_psure", "sup_dev_gsure", "sup_loss_psure", "sup_loss_gsure"};

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad number '" + s + "'");
  }
  if (pos != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

// ---- problem files ----

void write_problem(std::ostream& out, const ProblemInstance& p) {
  out << kProblemMagic << '\n'
      << "m " << p.m << '\n'
      << "n " << p.n << '\n'
      << "l " << format_double(p.l) << '\n'
      << "sigma " << format_double(p.sigma) << '\n'
      << "cell_nodes " << p.quad.cell_nodes << '\n'
      << "norm_nodes " << p.quad.norm_nodes << '\n'
      << "A\n";
  write_matrix(out, p.A);
  out << "x_star\n";
  write_matrix(out, p.x_star.transpose());
}

ProblemInstance read_problem(std::istream& in) {
  expect_line(in, kProblemMagic);
  ProblemInstance p;
  p.m = to_int(read_field(in, "m"));
  p.n = to_int(read_field(in, "n"));
  p.l = parse_double(read_field(in, "l"));
  p.sigma = parse_double(read_field(in, "sigma"));
  p.quad.cell_nodes = to_int(read_field(in, "cell_nodes"));
  p.quad.norm_nodes = to_int(read_field(in, "norm_nodes"));
  require(p.m >= 1 && p.n >= 1, "read_problem: bad dimensions");
  expect_line(in, "A");
  p.A = read_matrix(in, p.m, p.n);
  expect_line(in, "x_star");
  p.x_star = read_matrix(in, 1, p.n).transpose();
  return p;
}

void write_problem_file(const std::string& path, const ProblemInstance& p) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  write_problem(f, p);
}

ProblemInstance read_problem_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return read_problem(f);
}

void write_decomposition(std::ostream& out, const SpectralDecomposition& dec) {
  out << kDecompMagic << '\n'
      << "m " << dec.m() << '\n'
      << "n " << dec.n() << '\n'
      << "rank " << dec.rank << '\n'
      << "rank_tol " << format_double(dec.rank_tol) << '\n'
      << "cond " << format_double(dec.cond) << '\n'
      << "gammas\n";
  write_matrix(out, dec.gammas.transpose());
  out << "U\n";
  write_matrix(out, dec.U);
  out << "V\n";
  write_matrix(out, dec.V);
}

SpectralDecomposition read_decomposition(std::istream& in) {
  expect_line(in, kDecompMagic);
  SpectralDecomposition dec;
  const int m = to_int(read_field(in, "m"));
  const int n = to_int(read_field(in, "n"));
  dec.rank = to_int(read_field(in, "rank"));
  dec.rank_tol = parse_double(read_field(in, "rank_tol"));
  dec.cond = parse_double(read_field(in, "cond"));
  expect_line(in, "gammas");
  dec.gammas = read_matrix(in, 1, std::min(m, n)).transpose();
  expect_line(in, "U");
  dec.U = read_matrix(in, m, m);
  expect_line(in, "V");
  dec.V = read_matrix(in, n, n);
  return dec;
}

void write_decomposition_file(const std::string& path, const SpectralDecomposition& dec) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  write_decomposition(f, dec);
}

SpectralDecomposition read_decomposition_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return read_decomposition(f);
}

std::uint64_t problem_key(int m, int n, double l, const QuadratureSettings& quad) {
  std::ostringstream s;
  s << m << ' ' << n << ' ' << format_double(l) << ' ' << quad.cell_nodes << ' ' << quad.norm_nodes;
  const std::string k = s.str();
  return fnv1a64(k.data(), k.size());
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::uint64_t file_hash(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (f.read(buf, sizeof buf) || f.gcount() > 0) {
    h = fnv1a64(buf, static_cast<std::size_t>(f.gcount()), h);
    if (!f) break;
  }
  return h;
}

// ---- CSV ----

void write_records_csv(std::ostream& out, const std::vector<Rule>& rules,
                       const std::vector<StudyRecord>& records) {
  out << "draw,seed";
  for (Rule r : rules)
    for (const auto& f : kRuleFields) out << ',' << rule_name(r) << '_' << f;
  for (const auto& f : kSupFields) out << ',' << f;
  out << '\n';
  for (const auto& rec : records) {
    require(rec.outcomes.size() == rules.size(), "write_records_csv: record has wrong rule count");
    out << rec.draw_index << ',' << rec.seed;
    for (const auto& o : rec.outcomes) {
      out << ',' << format_double(o.alpha) << ',' << o.index << ',' << format_double(o.error_l2) << ','
          << format_double(o.error_l1) << ',' << (o.at_boundary ? 1 : 0) << ',' << format_double(o.objective);
    }
    out << ',' << format_double(rec.sup_dev_psure) << ',' << format_double(rec.sup_dev_gsure) << ','
        << format_double(rec.sup_loss_psure) << ',' << format_double(rec.sup_loss_gsure) << '\n';
  }
}

CsvStudy read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("read_records_csv: empty input");
  const auto header = split(strip_cr(line), ',');
  const std::size_t nf = kRuleFields.size();
  require(header.size() >= 2 + kSupFields.size() && header[0] == "draw" && header[1] == "seed",
          "read_records_csv: bad header");
  const std::size_t rule_cols = header.size() - 2 - kSupFields.size();
  require(rule_cols % nf == 0, "read_records_csv: bad header");
  CsvStudy out;
  for (std::size_t k = 0; k < rule_cols / nf; ++k) {
    const std::string& col = header[2 + k * nf];
    const std::string suffix = "_" + kRuleFields[0];
    require(col.size() > suffix.size() && col.ends_with(suffix), "read_records_csv: bad rule column " + col);
    const Rule r = parse_rule(col.substr(0, col.size() - suffix.size()));
    for (std::size_t f = 0; f < nf; ++f)
      require(header[2 + k * nf + f] == std::string(rule_name(r)) + "_" + kRuleFields[f],
              "read_records_csv: bad column " + header[2 + k * nf + f]);
    out.rules.push_back(r);
  }
  for (std::size_t f = 0; f < kSupFields.size(); ++f)
    require(header[2 + rule_cols + f] == kSupFields[f], "read_records_csv: bad column " + header[2 + rule_cols + f]);

  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    require(cells.size() == header.size(), "read_records_csv: wrong number of fields");
    StudyRecord rec;
    rec.draw_index = to_int(cells[0]);
    rec.seed = std::stoull(cells[1]);
    for (std::size_t k = 0; k < out.rules.size(); ++k) {
      const std::size_t b = 2 + k * nf;
      RuleOutcome o;
      o.alpha = parse_double(cells[b]);
      o.index = to_int(cells[b + 1]);
      o.error_l2 = parse_double(cells[b + 2]);
      o.error_l1 = parse_double(cells[b + 3]);
      o.at_boundary = to_int(cells[b + 4]) != 0;
      o.objective = parse_double(cells[b + 5]);
      rec.outcomes.push_back(o);
    }
    const std::size_t s = 2 + rule_cols;
    rec.sup_dev_psure = parse_double(cells[s]);
    rec.sup_dev_gsure = parse_double(cells[s + 1]);
    rec.sup_loss_psure = parse_double(cells[s + 2]);
    rec.sup_loss_gsure = parse_double(cells[s + 3]);
    out.records.push_back(std::move(rec));
  }
  return out;
}

void write_curve_csv(std::ostream& out, const std::vector<std::string>& names,
                     const std::vector<std::vector<double>>& columns) {
  require(names.size() == columns.size() && !names.empty(), "write_curve_csv: names/columns mismatch");
  const std::size_t rows = columns[0].size();
  for (const auto& c : columns) require(c.size() == rows, "write_curve_csv: ragged columns");
  for (std::size_t k = 0; k < names.size(); ++k) out << (k ? "," : "") << names[k];
  out << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? "," : "") << format_double(columns[k][r]);
    out << '\n';
  }
}

std::map<std::string, std::vector<double>> read_curve_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("read_curve_csv: empty input");
  const auto names = split(strip_cr(line), ',');
  std::map<std::string, std::vector<double>> out;
  for (const auto& n : names) out[n];
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    require(cells.size() == names.size(), "read_curve_csv: wrong number of fields");
    for (std::size_t k = 0; k < names.size(); ++k) out[names[k]].push_back(parse_double(cells[k]));
  }
  return out;
}

// ---- JSON summary ----

std::string study_summary_json(const StudyResult& study, int histogram_bins) {
  const StudyConfig& c = study.config;
  json j;
  j["schema_version"] = kSchemaVersion;
  j["tool_version"] = kToolVersion;
  j["regularizer"] = std::string(regularizer_name(c.regularizer));
  j["m"] = c.m;
  j["n"] = c.n;
  j["l"] = c.l;
  j["sigma"] = c.sigma;
  j["n_draws"] = c.n_draws;
  j["master_seed"] = c.master_seed;
  j["oracle_metric"] = std::string(metric_name(c.oracle_metric));
  j["grid"] = {{"size", c.grid.size()},
               {"log10_min", c.grid.log10_min()},
               {"log10_max", c.grid.log10_max()},
               {"step", c.grid.step()},
               {"includes_infinity", c.grid.includes_infinity()}};
  j["cond"] = json_number(study.cond);
  j["gamma1"] = json_number(study.gamma1);
  j["rank"] = study.rank;
  j["c_m"] = json_number(study.scaling.c_m);
  j["d_m"] = json_number(study.scaling.d_m);

  const bool have_records = !study.records.empty();
  json rules = json::object();
  for (Rule r : c.rules) {
    const std::string name(rule_name(r));
    json e;
    const auto errs = rule_errors(study, r);
    bool finite = have_records;
    for (double v : errs) finite = finite && std::isfinite(v);
    if (!finite) {
      e["available"] = false;
      rules[name] = e;
      continue;
    }
    e["error_l2"] = stats_json(describe(errs));
    e["error_l1"] = stats_json(describe(rule_errors(study, r, ErrorMetric::L1)));
    const int col = study.rule_column(r);
    long boundary = 0;
    for (const auto& rec : study.records) boundary += rec.outcomes[static_cast<std::size_t>(col)].at_boundary;
    e["boundary_fraction"] = static_cast<double>(boundary) / study.records.size();
    e["alpha_histogram"] = histogram_json(alpha_histogram(rule_alphas(study, r), c.grid));
    bool positive = true;
    for (double v : errs) positive = positive && v > 0.0;
    if (positive) e["log10_error_histogram"] = histogram_json(log_histogram(errs, histogram_bins));
    rules[name] = e;
  }
  j["rules"] = rules;

  json wins = json::object();
  json joint = json::object();
  for (Rule a : c.rules) {
    for (Rule b : c.rules) {
      if (a == b || !rules[std::string(rule_name(a))].contains("error_l2") ||
          !rules[std::string(rule_name(b))].contains("error_l2"))
        continue;
      const std::string key = std::string(rule_name(a)) + "_vs_" + std::string(rule_name(b));
      wins[key] = win_fraction(study, a, b);
      if (b == Rule::DP && rules[std::string(rule_name(a))].contains("log10_error_histogram") &&
          rules["dp"].contains("log10_error_histogram")) {
        const JointHistogram h = joint_histogram(study, a, b, histogram_bins);
        joint[key] = {{"x_log10_edges", json_array(h.x_edges)},
                      {"y_log10_edges", json_array(h.y_edges)},
                      {"counts", h.counts},
                      {"display_log10_probabilities", json_array(h.display_log10_probabilities())}};
      }
    }
  }
  j["win_fractions"] = wins;
  j["joint_histograms"] = joint;

  if (have_records && !std::isnan(study.records.front().sup_dev_psure)) {
    json sup;
    for (auto norm : {RateNormalization::PSURE, RateNormalization::GSURECond, RateNormalization::GSUREPlain}) {
      const RateSample s = rate_sample(study, norm);
      sup[std::string(normalization_name(norm))] = {
          {"statistic", json_number(rate_statistic(s, norm))},
          {"second_moment", json_number(rate_statistic_second_moment(s, norm))}};
    }
    std::vector<double> dp, dg, lp, lg;
    for (const auto& r : study.records) {
      dp.push_back(r.sup_dev_psure);
      dg.push_back(r.sup_dev_gsure);
      lp.push_back(r.sup_loss_psure);
      lg.push_back(r.sup_loss_gsure);
    }
    sup["sup_dev_psure"] = stats_json(describe(dp));
    sup["sup_dev_gsure"] = stats_json(describe(dg));
    sup["sup_loss_psure"] = stats_json(describe(lp));
    sup["sup_loss_gsure"] = stats_json(describe(lg));
    j["sup_statistics"] = sup;
  }

  if (c.regularizer == Regularizer::Lasso) {
    j["lasso"] = {{"alphas", json_array(c.grid.finite_part().values())},
                  {"mean_psure", json_array(study.mean_psure)},
                  {"mean_gsure", json_array(study.mean_gsure)},
                  {"admm_unconverged_draws", study.admm_unconverged_draws}};
  }
  return j.dump(2);
}

// ---- manifest ----

std::string manifest_json(const Manifest& m) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["tool"] = "riskest";
  j["tool_version"] = kToolVersion;
  j["command"] = m.command;
  j["config"] = m.config;
  j["master_seed"] = m.master_seed;
  j["problem_hash"] = m.problem_hash;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["outputs"] = m.outputs;
  return j.dump(2);
}

Manifest parse_manifest_json(const std::string& text) {
  const json j = json::parse(text);
  Manifest m;
  m.command = j.value("command", "");
  if (j.contains("config")) {
    for (const auto& [k, v] : j["config"].items()) m.config[k] = v.is_string() ? v.get<std::string>() : v.dump();
  }
  m.master_seed = j.value("master_seed", std::uint64_t{0});
  m.problem_hash = j.value("problem_hash", "");
  m.started = j.value("started", "");
  m.finished = j.value("finished", "");
  if (j.contains("outputs")) m.outputs = j["outputs"].get<std::vector<std::string>>();
  return m;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace riskest
