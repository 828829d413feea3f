#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wreathmul/matrix.hpp"
#include "wreathmul/stpalg.hpp"

namespace wreathmul::harness {

enum class Algorithm { naive, strassen, stp };

struct AlgorithmSpec {
  Algorithm alg = Algorithm::naive;
  std::int64_t m = 0;         // stp only
  std::int64_t n_wreath = 0;  // stp only

  std::string name() const;
  /// "naive", "strassen", or "stp(m,N)".
  static AlgorithmSpec parse(const std::string& text);
};

struct TrialRecord {
  std::int64_t trial = 0;
  double measured = 0.0;
  double predicted = 0.0;
};

struct ErrorReport {
  std::string algorithm;
  std::int64_t n = 0;
  std::int64_t trials = 0;
  matcore::NormKind norm = matcore::NormKind::max_entry;
  double measured_max = 0.0;
  double measured_mean = 0.0;
  double predicted = 0.0;  // largest per-trial bound
  double eps = 0.0;
  std::uint64_t seed = 0;
  double elapsed_ms = 0.0;
  std::vector<TrialRecord> detail;
};

struct BoundViolation : std::runtime_error {
  explicit BoundViolation(const std::string& what) : std::runtime_error(what) {}
};

/// Random working-precision inputs on [-1,1], reference-precision naive
/// product as truth. Throws BoundViolation the moment a measured error
/// exceeds its per-trial predicted bound.
std::vector<ErrorReport> run_error_experiment(const AlgorithmSpec& spec,
                                              const std::vector<std::int64_t>& sizes,
                                              std::int64_t trials, std::uint64_t seed,
                                              bool complex_entries = false);

/// Max-norm error coefficient used for the naive algorithm's predicted
/// bound: n * (3 + ceil(log2 n)).
double naive_mu_max(std::int64_t n);

struct ExponentFit {
  std::vector<std::pair<double, double>> pairs;  // (n, value)
  double slope = 0.0;
  double intercept = 0.0;  // of log(value) vs log(n)
  double r_squared = 0.0;
};

/// Least squares on (log n, log value); needs >= 3 sizes spanning two
/// octaves.
ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& pairs);

std::string reports_to_json(const AlgorithmSpec& spec, const std::vector<ErrorReport>& reports,
                            std::uint64_t seed);
std::string reports_to_csv(const std::vector<ErrorReport>& reports);

}  // namespace wreathmul::harness
