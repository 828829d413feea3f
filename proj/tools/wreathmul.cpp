#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wreathmul/bilinear.hpp"
#include "wreathmul/grouplib.hpp"
#include "wreathmul/harness.hpp"
#include "wreathmul/matrix.hpp"
#include "wreathmul/rng.hpp"
#include "wreathmul/stpalg.hpp"
#include "wreathmul/wreathfft.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace wreathmul;

int g_failures = 0;

void suite(const std::string& name, bool ok, const std::string& detail = "") {
  std::printf("[%s] %s%s%s\n", ok ? "ok" : "FAIL", name.c_str(), detail.empty() ? "" : ": ",
              detail.c_str());
  if (!ok) ++g_failures;
}

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

void verify_schemes() {
  suite("scheme trivial k=1", bilinear::verify_scheme(bilinear::naive_scheme(1)));
  suite("scheme strassen", bilinear::verify_scheme(bilinear::strassen_scheme()));
  suite("scheme naive k=2", bilinear::verify_scheme(bilinear::naive_scheme(2)));
  suite("scheme naive k=3", bilinear::verify_scheme(bilinear::naive_scheme(3)));
  auto broken = bilinear::strassen_scheme();
  broken.w.at(0, 0) = 0.0;
  suite("scheme corrupted rejected", !bilinear::verify_scheme(broken));
}

void verify_stpp(bool quick) {
  suite("stpp running example m=16", grouplib::check_stpp(grouplib::running_example_triples(16)));
  for (std::int64_t m : {2, 3, 4})
    for (std::int64_t n = 2; n <= (quick ? 3 : 4); ++n)
      suite("stpp family N=" + std::to_string(n) + " m=" + std::to_string(m),
            grouplib::check_stpp(grouplib::stpp_family(n, m)));
}

void verify_fft(bool quick) {
  for (std::int64_t m : {3, 4, 16}) {
    const std::int64_t dims = m <= 4 ? (quick ? 3 : 6) : 3;
    wreathfft::GroupArray<double> x(m, dims);
    CounterRng rng(7u * static_cast<unsigned>(m));
    for (auto& v : x.data) v = c64{rng.next_pm1(), rng.next_pm1()};
    auto back = wreathfft::dft_inverse(wreathfft::dft_forward(x));
    double err = 0, ref = 0;
    for (std::size_t i = 0; i < x.data.size(); ++i) {
      err += std::norm(back.data[i] - x.data[i]);
      ref += std::norm(x.data[i]);
    }
    suite("fft round trip m=" + std::to_string(m) + " D=" + std::to_string(dims),
          std::sqrt(err / ref) < 1e-12);
    const double parseval = wreathfft::l2_norm(wreathfft::dft_forward(x)) /
                            (std::pow(std::sqrt(double(m)), double(dims)) * wreathfft::l2_norm(x));
    suite("fft parseval m=" + std::to_string(m), std::abs(parseval - 1.0) < 1e-12);
  }
}

void verify_stp_oracle(bool quick) {
  const std::int64_t trials = quick ? 3 : 10;
  for (auto [m, nw] : std::vector<std::pair<std::int64_t, std::int64_t>>{{3, 2}, {4, 2}, {2, 3}}) {
    auto cfg = stpalg::build_config(m, nw);
    bool ok = true;
    for (std::int64_t t = 0; t < trials && ok; ++t) {
      auto a = matcore::random_matrix(cfg.n, cfg.n, Precision::reference, 1000 + t, true);
      auto b = matcore::random_matrix(cfg.n, cfg.n, Precision::reference, 2000 + t, true);
      auto got = stpalg::stp_multiply(a, b, cfg);
      auto want = matcore::naive_multiply(a, b);
      double err = 0, ref = 0;
      for (std::int64_t r = 0; r < cfg.n; ++r)
        for (std::int64_t c = 0; c < cfg.n; ++c) {
          err += std::norm(got.at(r, c) - want.at(r, c));
          ref += std::norm(want.at(r, c));
        }
      ok = std::sqrt(err / ref) < 1e-10;
    }
    suite("stp oracle (" + std::to_string(m) + "," + std::to_string(nw) + ") n=" +
              std::to_string(cfg.n),
          ok);
  }
}

std::vector<std::int64_t> parse_sizes(const std::string& spec) {
  std::vector<std::int64_t> sizes;
  if (spec.find(':') != std::string::npos) {
    std::int64_t lo = 0, hi = 0;
    if (std::sscanf(spec.c_str(), "%ld:%ld", &lo, &hi) != 2 || lo < 1 || hi < lo)
      throw CLI::ValidationError("--sizes", "expected lo:hi");
    for (std::int64_t n = lo; n <= hi; n *= 2) sizes.push_back(n);
    return sizes;
  }
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) sizes.push_back(std::stoll(tok));
  if (sizes.empty()) throw CLI::ValidationError("--sizes", "empty size list");
  return sizes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recursive bilinear and wreath-product matrix multiplication workbench"};
  app.require_subcommand(1);

  // verify
  auto* verify = app.add_subcommand("verify", "run the correctness suites");
  bool quick = false;
  std::string scheme_file, stpp_file;
  bool trust = false;
  verify->add_flag("--quick", quick, "smaller instances, finishes in well under a minute");
  verify->add_option("--scheme", scheme_file, "also verify a scheme file (json)");
  verify->add_option("--stpp", stpp_file, "also verify a triples file (json)");
  verify->add_flag("--trust", trust, "skip STPP re-verification when loading triples");

  // bound
  auto* bound = app.add_subcommand("bound", "print the predicted error coefficient");
  std::string bound_alg = "strassen";
  std::int64_t bound_n = 64, bound_m = 4, bound_nw = 2;
  double bound_eps = unit_roundoff(Precision::working);
  bound->add_option("--alg", bound_alg, "naive | strassen | stp");
  bound->add_option("--n", bound_n, "matrix order (naive, strassen)");
  bound->add_option("--m", bound_m, "modulus (stp)");
  bound->add_option("--N", bound_nw, "wreath degree (stp)");
  bound->add_option("--eps", bound_eps, "machine precision, defaults to binary32");

  // measure
  auto* measure = app.add_subcommand("measure", "run error experiments");
  std::string measure_alg = "strassen", sizes_spec, out_fmt = "json", out_file;
  std::int64_t trials = 20;
  std::uint64_t seed = 1;
  std::int64_t measure_m = 4, measure_nw = 2;
  bool complex_entries = false;
  measure->add_option("--alg", measure_alg, "naive | strassen | stp(m,N) | stp with --m/--N");
  measure->add_option("--sizes", sizes_spec, "lo:hi (powers of two) or comma list");
  measure->add_option("--trials", trials, "trials per size");
  measure->add_option("--seed", seed, "experiment seed");
  measure->add_option("--m", measure_m, "modulus for --alg stp");
  measure->add_option("--N", measure_nw, "wreath degree for --alg stp");
  measure->add_option("--out", out_fmt, "csv | json");
  measure->add_option("--output", out_file, "write to file instead of stdout");
  measure->add_flag("--complex", complex_entries, "complex entries instead of real");

  // exponents
  auto* exponents = app.add_subcommand("exponents", "closed-form family exponents");
  std::vector<std::int64_t> exp_ms;
  std::vector<double> alpha_beta;
  exponents->add_option("--m", exp_ms, "modulus, repeatable");
  exponents->add_option("--alpha-beta", alpha_beta, "explicit growth parameters (pairs)")
      ->expected(-2);

  // bench
  auto* bench = app.add_subcommand("bench", "flop counts and wall time");
  std::string bench_alg = "strassen";
  std::int64_t bench_n = 256, bench_m = 4, bench_nw = 2;
  bench->add_option("--alg", bench_alg, "naive | strassen | stp");
  bench->add_option("--n", bench_n, "matrix order");
  bench->add_option("--m", bench_m, "modulus (stp)");
  bench->add_option("--N", bench_nw, "wreath degree (stp)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) {
      if (!scheme_file.empty()) {
        bilinear::load_scheme_file(scheme_file);
        suite("scheme file " + scheme_file, true);
      }
      if (!stpp_file.empty()) {
        auto t = grouplib::load_triples_file(stpp_file, trust);
        suite("triples file " + stpp_file + " (N=" + std::to_string(t.n_triples()) + ")", true);
      }
      verify_schemes();
      verify_stpp(quick);
      verify_fft(quick);
      verify_stp_oracle(quick);
      if (g_failures) {
        std::fprintf(stderr, "%d suite(s) failed\n", g_failures);
        return 1;
      }
      return 0;
    }

    if (bound->parsed()) {
      if (bound_alg == "naive") {
        std::printf("mu(%lld) * eps = %.6g\n", static_cast<long long>(bound_n),
                    harness::naive_mu_max(bound_n) * bound_eps);
      } else if (bound_alg == "strassen") {
        std::printf("mu(%lld) * eps = %.6g\n", static_cast<long long>(bound_n),
                    bilinear::error_bound_stationary(bilinear::strassen_scheme(), bound_n,
                                                     bound_eps));
      } else if (bound_alg == "stp") {
        auto cfg = stpalg::build_config(bound_m, bound_nw);
        const double mu = stpalg::inner_mu_frobenius({}, cfg.n_fact);
        std::printf("n = %lld\n", static_cast<long long>(cfg.n));
        std::printf("bound * eps = %.6g\n", stpalg::predicted_bound_final(cfg, mu, bound_eps));
        std::printf("crude * eps = %.6g\n", stpalg::predicted_bound_crude(cfg, mu, bound_eps));
      } else {
        throw CLI::ValidationError("--alg", "unknown algorithm");
      }
      return 0;
    }

    if (measure->parsed()) {
      harness::AlgorithmSpec spec;
      if (measure_alg == "stp") {
        spec.alg = harness::Algorithm::stp;
        spec.m = measure_m;
        spec.n_wreath = measure_nw;
      } else {
        spec = harness::AlgorithmSpec::parse(measure_alg);
      }
      std::vector<std::int64_t> sizes;
      if (!sizes_spec.empty()) {
        sizes = parse_sizes(sizes_spec);
      } else if (spec.alg == harness::Algorithm::stp) {
        sizes.push_back(stpalg::build_config(spec.m, spec.n_wreath).n);
      } else {
        throw CLI::ValidationError("--sizes", "required for naive and strassen");
      }
      auto reports = harness::run_error_experiment(spec, sizes, trials, seed, complex_entries);
      const std::string text = out_fmt == "csv" ? harness::reports_to_csv(reports)
                                                : harness::reports_to_json(spec, reports, seed);
      if (out_file.empty()) {
        std::fputs(text.c_str(), stdout);
      } else {
        std::ofstream out(out_file);
        out << text;
      }
      return 0;
    }

    if (exponents->parsed()) {
      if (exp_ms.empty() && alpha_beta.empty()) exp_ms = {16};
      for (auto m : exp_ms) {
        auto r = stpalg::exponent_report(m);
        std::printf("m=%lld: %.4f / %.4f / %.4f\n", static_cast<long long>(m), r.runtime_exp,
                    r.frobenius_err_exp, r.maxnorm_err_exp);
      }
      for (std::size_t i = 0; i + 1 < alpha_beta.size(); i += 2) {
        auto r = stpalg::exponent_report_from(alpha_beta[i], alpha_beta[i + 1]);
        std::printf("alpha=%.6f beta=%.6f: %.4f / %.4f / %.4f\n", alpha_beta[i],
                    alpha_beta[i + 1], r.runtime_exp, r.frobenius_err_exp, r.maxnorm_err_exp);
      }
      return 0;
    }

    if (bench->parsed()) {
      nlohmann::json j;
      j["schema"] = 1;
      j["alg"] = bench_alg;
#ifdef _OPENMP
      const int max_threads = omp_get_max_threads();
#else
      const int max_threads = 1;
#endif
      j["threads"] = max_threads;
      if (bench_alg == "stp") {
        auto cfg = stpalg::build_config(bench_m, bench_nw);
        auto a = matcore::random_matrix(cfg.n, cfg.n, Precision::working, 11);
        auto b = matcore::random_matrix(cfg.n, cfg.n, Precision::working, 12);
        stpalg::StepStats stats;
        const double t0 = now_ms();
        stpalg::stp_multiply(a, b, cfg, {}, &stats);
        j["n"] = cfg.n;
        j["elapsed_ms"] = now_ms() - t0;
        nlohmann::json steps, ms;
        for (int s = 0; s < stpalg::kStepCount; ++s) {
          steps[stpalg::step_name(s)] = stats.fl[static_cast<std::size_t>(s)].total();
          ms[stpalg::step_name(s)] = stats.ms[static_cast<std::size_t>(s)];
        }
        j["steps"] = steps;
        j["step_ms"] = ms;
      } else {
        auto a = matcore::random_matrix(bench_n, bench_n, Precision::working, 11);
        auto b = matcore::random_matrix(bench_n, bench_n, Precision::working, 12);
        auto run = [&](bool parallel) {
#ifdef _OPENMP
          omp_set_num_threads(parallel ? max_threads : 1);
#else
          (void)parallel;
#endif
          const double t0 = now_ms();
          matcore::Matrix c = bench_alg == "naive"
                                  ? (parallel ? matcore::naive_multiply(a, b)
                                              : reference::naive_multiply_serial(a, b))
                                  : bilinear::multiply_stationary(a, b,
                                                                  bilinear::strassen_scheme());
          (void)c;
          return now_ms() - t0;
        };
        flops::reset();
        const double serial_ms = run(false);
        const flops::Count fc = flops::snapshot();
        const double parallel_ms = run(true);
#ifdef _OPENMP
        omp_set_num_threads(max_threads);
#endif
        j["n"] = bench_n;
        j["serial_ms"] = serial_ms;
        j["parallel_ms"] = parallel_ms;
        j["speedup"] = serial_ms / parallel_ms;
        j["flops"] = {{"adds", fc.adds}, {"muls", fc.muls}};
      }
      std::printf("%s\n", j.dump(2).c_str());
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const harness::BoundViolation& e) {
    std::fprintf(stderr, "bound violation: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
