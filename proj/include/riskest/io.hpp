#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "riskest/problem.hpp"
#include "riskest/spectral.hpp"
#include "riskest/statistics.hpp"
#include "riskest/study.hpp"

namespace riskest {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

/// %.17g, with "inf", "-inf" and "nan" for the special values.
std::string format_double(double v);
/// Inverse of format_double; throws std::invalid_argument on garbage.
double parse_double(const std::string& s);

// ---- problem and decomposition files ----

void write_problem(std::ostream& out, const ProblemInstance& p);
ProblemInstance read_problem(std::istream& in);
void write_problem_file(const std::string& path, const ProblemInstance& p);
ProblemInstance read_problem_file(const std::string& path);

void write_decomposition(std::ostream& out, const SpectralDecomposition& dec);
SpectralDecomposition read_decomposition(std::istream& in);
void write_decomposition_file(const std::string& path, const SpectralDecomposition& dec);
SpectralDecomposition read_decomposition_file(const std::string& path);

/// Cache key of a problem: depends only on (m, n, l, quadrature settings).
std::uint64_t problem_key(int m, int n, double l, const QuadratureSettings& quad);
std::string hex64(std::uint64_t v);
/// FNV-1a hash of a file's bytes.
std::uint64_t file_hash(const std::string& path);

// ---- study records ----

void write_records_csv(std::ostream& out, const std::vector<Rule>& rules,
                       const std::vector<StudyRecord>& records);
struct CsvStudy {
  std::vector<Rule> rules;
  std::vector<StudyRecord> records;
};
CsvStudy read_records_csv(std::istream& in);

void write_curve_csv(std::ostream& out, const std::vector<std::string>& names,
                     const std::vector<std::vector<double>>& columns);
std::map<std::string, std::vector<double>> read_curve_csv(std::istream& in);

/// JSON summary of a study (statistics, win fractions, histograms). The
/// returned text is pretty-printed JSON.
std::string study_summary_json(const StudyResult& study, int histogram_bins = 200);

struct Manifest {
  std::string command;
  std::map<std::string, std::string> config;  // flat key/value echo of the options
  std::uint64_t master_seed = 0;
  std::string problem_hash;
  std::string started;
  std::string finished;
  std::vector<std::string> outputs;
};

std::string manifest_json(const Manifest& m);
Manifest parse_manifest_json(const std::string& text);

/// Current UTC time, ISO 8601.
std::string utc_timestamp();

}  // namespace riskest
