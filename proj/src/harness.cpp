#include "wreathmul/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "wreathmul/bilinear.hpp"
#include "wreathmul/rng.hpp"

namespace wreathmul::harness {

namespace {

std::int64_t ceil_log2_i(std::int64_t n) {
  std::int64_t p = 0, v = 1;
  while (v < n) {
    v <<= 1;
    ++p;
  }
  return p;
}

std::uint64_t mix3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  CounterRng r(a, b);
  return r.bits(c);
}

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

matcore::Matrix diff_f64(const matcore::Matrix& comp, const matcore::Matrix& ref) {
  matcore::Matrix d(comp.rows(), comp.cols(), Precision::reference);
  for (std::int64_t r = 0; r < comp.rows(); ++r)
    for (std::int64_t c = 0; c < comp.cols(); ++c) d.set(r, c, comp.at(r, c) - ref.at(r, c));
  return d;
}

}  // namespace

std::string AlgorithmSpec::name() const {
  switch (alg) {
    case Algorithm::naive:
      return "naive";
    case Algorithm::strassen:
      return "strassen";
    case Algorithm::stp:
      return "stp(" + std::to_string(m) + "," + std::to_string(n_wreath) + ")";
  }
  return "?";
}

AlgorithmSpec AlgorithmSpec::parse(const std::string& text) {
  AlgorithmSpec s;
  if (text == "naive") return s;
  if (text == "strassen") {
    s.alg = Algorithm::strassen;
    return s;
  }
  std::int64_t m = 0, nw = 0;
  if (std::sscanf(text.c_str(), "stp(%ld,%ld)", &m, &nw) == 2) {
    s.alg = Algorithm::stp;
    s.m = m;
    s.n_wreath = nw;
    return s;
  }
  throw std::invalid_argument("unknown algorithm: " + text + " (naive, strassen, stp(m,N))");
}

double naive_mu_max(std::int64_t n) {
  return static_cast<double>(n) * (3.0 + static_cast<double>(ceil_log2_i(n)));
}

std::vector<ErrorReport> run_error_experiment(const AlgorithmSpec& spec,
                                              const std::vector<std::int64_t>& sizes,
                                              std::int64_t trials, std::uint64_t seed,
                                              bool complex_entries) {
  const double eps = unit_roundoff(Precision::working);
  const auto strassen = bilinear::strassen_scheme();
  std::optional<stpalg::STPConfig> cfg;
  double stp_mu = 0.0;
  if (spec.alg == Algorithm::stp) {
    cfg = stpalg::build_config(spec.m, spec.n_wreath);
    stp_mu = stpalg::inner_mu_frobenius(stpalg::InnerMultiplier{}, cfg->n_fact);
  }

  std::vector<ErrorReport> out;
  for (std::int64_t n : sizes) {
    if (n < 1) throw std::invalid_argument("size must be positive");
    if (spec.alg == Algorithm::stp && n > cfg->n)
      throw std::invalid_argument("size exceeds the order served by stp(" + std::to_string(spec.m) +
                                  "," + std::to_string(spec.n_wreath) + ")");
    ErrorReport rep;
    rep.algorithm = spec.name();
    rep.n = n;
    rep.trials = trials;
    rep.norm = spec.alg == Algorithm::stp ? matcore::NormKind::frobenius
                                          : matcore::NormKind::max_entry;
    rep.eps = eps;
    rep.seed = seed;
    const double t0 = now_ms();
    double sum = 0.0;
    for (std::int64_t trial = 0; trial < trials; ++trial) {
      const auto sa = mix3(seed, static_cast<std::uint64_t>(n), 2 * static_cast<std::uint64_t>(trial));
      const auto sb =
          mix3(seed, static_cast<std::uint64_t>(n), 2 * static_cast<std::uint64_t>(trial) + 1);
      matcore::Matrix a = matcore::random_matrix(n, n, Precision::working, sa, complex_entries);
      matcore::Matrix b = matcore::random_matrix(n, n, Precision::working, sb, complex_entries);

      matcore::Matrix comp = [&] {
        switch (spec.alg) {
          case Algorithm::naive:
            return matcore::naive_multiply(a, b);
          case Algorithm::strassen:
            return bilinear::multiply_stationary(a, b, strassen);
          case Algorithm::stp:
            return stpalg::stp_multiply(a, b, *cfg);
        }
        throw std::logic_error("unreachable");
      }();
      matcore::Matrix ref = matcore::naive_multiply(convert_precision(a, Precision::reference),
                                                    convert_precision(b, Precision::reference));
      const double measured = matcore::norm(diff_f64(comp, ref), rep.norm);

      double bound = 0.0;
      switch (spec.alg) {
        case Algorithm::naive:
          bound = naive_mu_max(n) * eps;
          break;
        case Algorithm::strassen:
          bound = bilinear::error_bound_stationary(strassen, n, eps);
          break;
        case Algorithm::stp:
          bound = stpalg::predicted_bound_final(*cfg, stp_mu, eps);
          break;
      }
      bound *= matcore::norm(a, rep.norm) * matcore::norm(b, rep.norm);

      if (measured > bound) {
        std::ostringstream msg;
        msg << rep.algorithm << " n=" << n << " trial=" << trial << ": measured " << measured
            << " exceeds predicted " << bound;
        throw BoundViolation(msg.str());
      }
      rep.detail.push_back({trial, measured, bound});
      rep.measured_max = std::max(rep.measured_max, measured);
      rep.predicted = std::max(rep.predicted, bound);
      sum += measured;
    }
    rep.measured_mean = trials > 0 ? sum / static_cast<double>(trials) : 0.0;
    rep.elapsed_ms = now_ms() - t0;
    out.push_back(std::move(rep));
  }
  return out;
}

ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) throw std::invalid_argument("fit_exponent: need at least 3 sizes");
  double lo = pairs.front().first, hi = pairs.front().first;
  for (const auto& [n, v] : pairs) {
    lo = std::min(lo, n);
    hi = std::max(hi, n);
    if (!(n > 0.0) || !(v > 0.0)) throw std::invalid_argument("fit_exponent: nonpositive data");
  }
  if (hi < 4.0 * lo) throw std::invalid_argument("fit_exponent: sizes span fewer than two octaves");

  ExponentFit fit;
  fit.pairs = pairs;
  const double count = static_cast<double>(pairs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& [n, v] : pairs) {
    const double x = std::log(n), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double den = count * sxx - sx * sx;
  fit.slope = (count * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / count;
  const double sst = syy - sy * sy / count;
  double sse = 0;
  for (const auto& [n, v] : pairs) {
    const double pred = fit.intercept + fit.slope * std::log(n);
    const double r = std::log(v) - pred;
    sse += r * r;
  }
  fit.r_squared = sst > 0 ? 1.0 - sse / sst : 1.0;
  return fit;
}

std::string reports_to_json(const AlgorithmSpec& spec, const std::vector<ErrorReport>& reports,
                            std::uint64_t seed) {
  nlohmann::json j;
  j["schema"] = 1;
  j["algorithm"] = spec.name();
  j["seed"] = seed;
  j["eps"] = unit_roundoff(Precision::working);
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json e;
    e["n"] = r.n;
    e["trials"] = r.trials;
    e["norm"] = r.norm == matcore::NormKind::frobenius ? "frobenius" : "max_entry";
    e["measured_max"] = r.measured_max;
    e["measured_mean"] = r.measured_mean;
    e["predicted"] = r.predicted;
    e["elapsed_ms"] = r.elapsed_ms;
    nlohmann::json det = nlohmann::json::array();
    for (const auto& t : r.detail)
      det.push_back({{"trial", t.trial}, {"measured", t.measured}, {"predicted", t.predicted}});
    e["trials_detail"] = det;
    arr.push_back(e);
  }
  j["reports"] = arr;
  return j.dump(2);
}

std::string reports_to_csv(const std::vector<ErrorReport>& reports) {
  std::ostringstream os;
  os << "n,trial,measured,predicted,ratio\n";
  char buf[128];
  for (const auto& r : reports)
    for (const auto& t : r.detail) {
      std::snprintf(buf, sizeof buf, "%lld,%lld,%.17g,%.17g,%.17g\n",
                    static_cast<long long>(r.n), static_cast<long long>(t.trial), t.measured,
                    t.predicted, t.predicted > 0 ? t.measured / t.predicted : 0.0);
      os << buf;
    }
  return os.str();
}

}  // namespace wreathmul::harness
