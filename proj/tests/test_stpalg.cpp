#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wreathmul/grouplib.hpp"
#include "wreathmul/harness.hpp"
#include "wreathmul/rng.hpp"
#include "wreathmul/stpalg.hpp"

using namespace wreathmul;
using matcore::Matrix;
using stpalg::STPConfig;

namespace {

double rel_diff(const Matrix& got, const Matrix& want) {
  double num = 0, den = 0;
  for (std::int64_t r = 0; r < got.rows(); ++r)
    for (std::int64_t c = 0; c < got.cols(); ++c) {
      num += std::norm(got.at(r, c) - want.at(r, c));
      den += std::norm(want.at(r, c));
    }
  return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

std::int64_t find_vec(const std::vector<std::int32_t>& vecs, std::int64_t nd,
                      const std::vector<std::int32_t>& want) {
  const std::int64_t count = static_cast<std::int64_t>(vecs.size()) / nd;
  for (std::int64_t v = 0; v < count; ++v) {
    bool ok = true;
    for (std::int64_t i = 0; i < nd && ok; ++i)
      ok = vecs[static_cast<std::size_t>(v * nd + i)] == want[static_cast<std::size_t>(i)];
    if (ok) return v;
  }
  return -1;
}

double frob2(const Matrix& a) {
  const double f = matcore::norm(a, matcore::NormKind::frobenius);
  return f * f;
}

}  // namespace

TEST_CASE("build_config cardinalities") {
  auto c32_ = stpalg::build_config(3, 2);
  CHECK(c32_.k_n == 4);
  CHECK(c32_.n == 8);
  CHECK(c32_.h_order == 27);
  CHECK(c32_.xi_count == 378);  // binom(27 + 1, 2)

  auto c42 = stpalg::build_config(4, 2);
  CHECK(c42.k_n == 9);
  CHECK(c42.n == 18);
  CHECK(c42.xi_count == 2080);  // binom(64 + 1, 2)

  auto c23 = stpalg::build_config(2, 3);
  CHECK(c23.k_n == 1);
  CHECK(c23.n == 6);
  CHECK(c23.h_order == 64);
  CHECK(c23.xi_count == 45760);  // binom(66, 3)
  CHECK(c23.degenerate);

  CHECK_THROWS_AS(stpalg::build_config(1, 2), std::invalid_argument);
  CHECK_THROWS_AS(stpalg::build_config(4, 1), std::invalid_argument);
}

TEST_CASE("orbit sizes sum to the group order") {
  for (auto [m, nw] : std::vector<std::pair<std::int64_t, std::int64_t>>{{3, 2}, {4, 2}, {2, 3}}) {
    auto cfg = stpalg::build_config(m, nw);
    std::uint64_t total = 0;
    for (auto o : cfg.xi_orbit) total += o;
    CHECK(total == static_cast<std::uint64_t>(STPConfig::pow_i64(cfg.h_order, nw)));
    CHECK(static_cast<std::int64_t>(cfg.xi_orbit.size()) == cfg.xi_count);
  }
}

TEST_CASE("running-example slot of a specific matrix entry") {
  auto cfg = stpalg::build_config(16, 2);
  const std::int64_t nd = 6;
  const std::int64_t ux = find_vec(cfg.x_vecs, nd, {9, 0, 0, 0, 5, 0});
  const std::int64_t vy = find_vec(cfg.y_vecs, nd, {0, 11, 0, 0, 0, 4});
  REQUIRE(ux >= 0);
  REQUIRE(vy >= 0);
  const std::int64_t swap_rank = 1, id_rank = 0;
  const std::int64_t row_label = ux * cfg.n_fact + swap_rank;
  const std::int64_t col_label = vy * cfg.n_fact + id_rank;

  auto slot = stpalg::embed_slot(cfg, stpalg::SetPair::xy, row_label, col_label);
  // permutation part is the swap, so the entry lands in the second sheet
  // (the "negative" array of the two-coordinate case)
  CHECK(slot.sheet == swap_rank);

  // independent route through the group operations: the quotient
  // x^-1 y written with the permutation factored out to the left
  grouplib::GroupSpec spec(16, 3);
  grouplib::WreathElement xw = grouplib::WreathElement::identity(spec, 2);
  xw.h = {9, 0, 0, 0, 5, 0};
  xw.perm = grouplib::perm_unrank(2, swap_rank);
  grouplib::WreathElement yw = grouplib::WreathElement::identity(spec, 2);
  yw.h = {0, 11, 0, 0, 0, 4};
  auto q = grouplib::wreath_multiply(grouplib::wreath_inverse(xw), yw);
  CHECK(grouplib::perm_rank(q.perm) == slot.sheet);
  std::int64_t flat = 0;
  for (std::int64_t i = 0; i < 2; ++i) {
    const std::int64_t src = q.perm(i);  // pi^-1 . h has row i = h_{pi(i)}
    for (std::int64_t c = 0; c < 3; ++c) flat = flat * 16 + q.at(src, c);
  }
  CHECK(flat == slot.flat);

  // pinned value: h rows are (7,11,0) and (0,11,4) once the permutation
  // is factored out
  std::int64_t expect = 0;
  for (std::int32_t digit : {7, 11, 0, 0, 11, 4}) expect = expect * 16 + digit;
  CHECK(slot.flat == expect);
}

TEST_CASE("embedding is injective and mass preserving") {
  auto cfg = stpalg::build_config(4, 2);
  auto a = matcore::random_matrix(cfg.n, cfg.n, Precision::reference, 5, true);
  auto sheets = stpalg::embed(a.f64(), cfg, stpalg::SetPair::xy);
  CHECK(static_cast<std::int64_t>(sheets.by_perm.size()) == cfg.n_fact);
  double mass = 0;
  for (const auto& arr : sheets.by_perm)
    for (const auto& v : arr.data) mass += std::norm(v);
  CHECK(mass == doctest::Approx(frob2(a)).epsilon(1e-12));

  Matrix z(cfg.n, cfg.n, Precision::reference);
  auto zero_sheets = stpalg::embed(z.f64(), cfg, stpalg::SetPair::yz);
  for (const auto& arr : zero_sheets.by_perm)
    for (const auto& v : arr.data) CHECK(v == c64{0, 0});
}

TEST_CASE("duplicated product-set rows trip the collision check") {
  auto cfg = stpalg::build_config(3, 2);
  const std::int64_t nd = cfg.n_wreath * cfg.group.d;
  for (std::int64_t i = 0; i < nd; ++i)
    cfg.x_vecs[static_cast<std::size_t>(nd + i)] = cfg.x_vecs[static_cast<std::size_t>(i)];
  Matrix a(cfg.n, cfg.n, Precision::reference);
  CHECK_THROWS_AS(stpalg::embed(a.f64(), cfg, stpalg::SetPair::xy), std::logic_error);
}

TEST_CASE("disassemble inverts assemble slot for slot") {
  auto cfg = stpalg::build_config(3, 2);
  stpalg::Sheets<double> sheets;
  CounterRng rng(31);
  for (std::int64_t p = 0; p < cfg.n_fact; ++p) {
    wreathfft::GroupArray<double> arr(cfg.group.m, cfg.n_wreath * cfg.group.d);
    for (auto& v : arr.data) v = c64{rng.next_pm1(), rng.next_pm1()};
    sheets.by_perm.push_back(std::move(arr));
  }
  auto batch = stpalg::assemble(sheets, cfg);
  auto back = stpalg::disassemble(batch, cfg);
  for (std::int64_t p = 0; p < cfg.n_fact; ++p)
    CHECK(back.by_perm[static_cast<std::size_t>(p)].data ==
          sheets.by_perm[static_cast<std::size_t>(p)].data);
}

TEST_CASE("symmetric representatives produce the doubled-entry pattern") {
  auto cfg = stpalg::build_config(4, 2);
  auto a = matcore::random_matrix(cfg.n, cfg.n, Precision::reference, 8, true);
  auto sheets = stpalg::embed(a.f64(), cfg, stpalg::SetPair::xy);
  stpalg::dft_sheets_forward(sheets);
  auto batch = stpalg::assemble(sheets, cfg);
  bool checked_one = false;
  for (std::int64_t rep = 0; rep < batch.count; ++rep) {
    if (cfg.xi_orbit[static_cast<std::size_t>(rep)] != 1) continue;  // only fixed points
    const auto* m = batch.at(rep);
    CHECK(m[0] == m[3]);
    CHECK(m[1] == m[2]);
    checked_one = true;
  }
  CHECK(checked_one);
}

TEST_CASE("batch Frobenius mass bound") {
  auto cfg = stpalg::build_config(4, 2);
  auto a = matcore::random_matrix(cfg.n, cfg.n, Precision::reference, 9, true);
  auto sheets = stpalg::embed(a.f64(), cfg, stpalg::SetPair::xy);
  stpalg::dft_sheets_forward(sheets);
  auto batch = stpalg::assemble(sheets, cfg);
  double mass = 0;
  for (const auto& v : batch.data) mass += std::norm(v);
  const double hn = std::pow(static_cast<double>(cfg.h_order), 2.0);
  CHECK(mass <= 2.0 * hn * frob2(a) * (1 + 1e-12));
}

TEST_CASE("stabilizer witnesses agree on the product batch") {
  auto cfg = stpalg::build_config(4, 2);
  auto a = matcore::random_matrix(cfg.n, cfg.n, Precision::reference, 21, true);
  auto b = matcore::random_matrix(cfg.n, cfg.n, Precision::reference, 22, true);
  auto sa = stpalg::embed(a.f64(), cfg, stpalg::SetPair::xy);
  auto sb = stpalg::embed(b.f64(), cfg, stpalg::SetPair::yz);
  stpalg::dft_sheets_forward(sa);
  stpalg::dft_sheets_forward(sb);
  auto ba = stpalg::assemble(sa, cfg);
  auto bb = stpalg::assemble(sb, cfg);
  auto bc = stpalg::multiply_batch(bb, ba, {});
  double scale = 0;
  for (const auto& v : bc.data) scale = std::max(scale, std::abs(v));
  for (std::int64_t rep = 0; rep < bc.count; ++rep) {
    if (cfg.xi_orbit[static_cast<std::size_t>(rep)] != 1) continue;
    // both witnesses delta in {id, swap} must read the same coefficient:
    // entry (0, sigma) against entry (1, sigma o swap)
    const auto* m = bc.at(rep);
    CHECK(std::abs(m[0] - m[3]) <= 1e-12 * scale);
    CHECK(std::abs(m[1] - m[2]) <= 1e-12 * scale);
  }
}

TEST_CASE("multiply_batch zero annihilates and inner choices agree") {
  auto cfg = stpalg::build_config(4, 2);
  auto a = matcore::random_matrix(cfg.n, cfg.n, Precision::reference, 13, true);
  auto sheets = stpalg::embed(a.f64(), cfg, stpalg::SetPair::xy);
  stpalg::dft_sheets_forward(sheets);
  auto batch = stpalg::assemble(sheets, cfg);

  stpalg::ChiMatrixBatch<double> zero;
  zero.nf = batch.nf;
  zero.count = batch.count;
  zero.data.assign(batch.data.size(), {});
  auto prod = stpalg::multiply_batch(zero, batch, {});
  for (const auto& v : prod.data) CHECK(v == c64{0, 0});

  stpalg::InnerMultiplier strassen{stpalg::InnerKind::strassen, nullptr};
  auto via_naive = stpalg::multiply_batch(batch, batch, {});
  auto via_strassen = stpalg::multiply_batch(batch, batch, strassen);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < via_naive.data.size(); ++i) {
    num += std::norm(via_naive.data[i] - via_strassen.data[i]);
    den += std::norm(via_naive.data[i]);
  }
  CHECK(std::sqrt(num / den) <= 1e-12);
}

TEST_CASE("nested pipeline as the inner multiplier is consistent") {
  auto nested = std::make_shared<STPConfig>(stpalg::build_config(3, 2));
  stpalg::ChiMatrixBatch<double> lhs, rhs;
  lhs.nf = rhs.nf = 6;
  lhs.count = rhs.count = 3;
  CounterRng rng(55);
  lhs.data.resize(3 * 36);
  rhs.data.resize(3 * 36);
  for (auto& v : lhs.data) v = c64{rng.next_pm1(), rng.next_pm1()};
  for (auto& v : rhs.data) v = c64{rng.next_pm1(), rng.next_pm1()};
  auto direct = stpalg::multiply_batch(lhs, rhs, {});
  stpalg::InnerMultiplier inner{stpalg::InnerKind::stp, nested};
  auto recursive = stpalg::multiply_batch(lhs, rhs, inner);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < direct.data.size(); ++i) {
    num += std::norm(direct.data[i] - recursive.data[i]);
    den += std::norm(direct.data[i]);
  }
  CHECK(std::sqrt(num / den) <= 1e-10);
}

TEST_CASE("pipeline equals the naive oracle at reference precision") {
  for (auto [m, nw] :
       std::vector<std::pair<std::int64_t, std::int64_t>>{{3, 2}, {4, 2}, {5, 2}, {2, 3}}) {
    auto cfg = stpalg::build_config(m, nw);
    for (int trial = 0; trial < 3; ++trial) {
      auto a = matcore::random_matrix(cfg.n, cfg.n, Precision::reference,
                                      100 * static_cast<std::uint64_t>(m) + trial, true);
      auto b = matcore::random_matrix(cfg.n, cfg.n, Precision::reference,
                                      200 * static_cast<std::uint64_t>(m) + trial, true);
      auto got = stpalg::stp_multiply(a, b, cfg);
      auto want = matcore::naive_multiply(a, b);
      CHECK(rel_diff(got, want) <= 1e-10);
    }
  }
}

TEST_CASE("identity through the pipeline") {
  auto cfg = stpalg::build_config(3, 2);
  auto a = matcore::random_matrix(cfg.n, cfg.n, Precision::reference, 61, true);
  auto id = matcore::identity(cfg.n, Precision::reference);
  CHECK(rel_diff(stpalg::stp_multiply(id, a, cfg), a) <= 1e-10);
}

TEST_CASE("padding smaller inputs through the pipeline") {
  auto cfg = stpalg::build_config(4, 2);
  auto a = matcore::random_matrix(10, 10, Precision::reference, 71, true);
  auto b = matcore::random_matrix(10, 10, Precision::reference, 72, true);
  auto got = stpalg::stp_multiply(a, b, cfg);
  CHECK(got.rows() == 10);
  CHECK(rel_diff(got, matcore::naive_multiply(a, b)) <= 1e-10);
}

TEST_CASE("odd steps perform no arithmetic") {
  auto cfg = stpalg::build_config(3, 2);
  auto a = matcore::random_matrix(cfg.n, cfg.n, Precision::reference, 81, true);
  auto b = matcore::random_matrix(cfg.n, cfg.n, Precision::reference, 82, true);
  stpalg::StepStats stats;
  stpalg::stp_multiply(a, b, cfg, {}, &stats);
  CHECK(stats.fl[stpalg::kStepEmbed].total() == 0);
  CHECK(stats.fl[stpalg::kStepAssemble].total() == 0);
  CHECK(stats.fl[stpalg::kStepDisassemble].total() == 0);
  CHECK(stats.fl[stpalg::kStepOutput].total() == 0);
  CHECK(stats.fl[stpalg::kStepFourier].total() > 0);
  CHECK(stats.fl[stpalg::kStepMultiply].total() > 0);
  CHECK(stats.fl[stpalg::kStepInverseFourier].total() > 0);
}

TEST_CASE("flop count tracks the per-level work formula") {
  std::vector<std::pair<double, double>> pts;
  for (std::int64_t m : {3, 4, 5}) {
    auto cfg = stpalg::build_config(m, 2);
    auto a = matcore::random_matrix(cfg.n, cfg.n, Precision::reference, 91, true);
    auto b = matcore::random_matrix(cfg.n, cfg.n, Precision::reference, 92, true);
    stpalg::StepStats stats;
    stpalg::stp_multiply(a, b, cfg, {}, &stats);
    std::uint64_t total = 0;
    for (const auto& f : stats.fl) total += f.total();
    const double hn = std::pow(static_cast<double>(cfg.h_order), 2.0);
    const double formula = static_cast<double>(cfg.xi_count) * 8.0 +
                           2.0 * hn * std::log2(hn);
    CHECK(static_cast<double>(total) <= 40.0 * formula);
    pts.push_back({formula, static_cast<double>(total)});
  }
  auto fit = harness::fit_exponent(pts);
  CHECK(std::abs(fit.slope - 1.0) <= 0.1);
}

TEST_CASE("level bound evaluators") {
  auto cfg = stpalg::build_config(4, 2);
  CHECK(stpalg::predicted_bound_final(cfg, 0.0, 0.0) == 0.0);
  CHECK(stpalg::predicted_bound_crude(cfg, 0.0, 0.0) == 0.0);
  // with f frozen at its certified value, substitute |H| = 64, N! = 2
  const double f = wreathfft::fft_error_constant().f(4096);
  const double mu = 5.0;
  const double want_final = f + 2.0 * 2.0 * 64.0 * f + 2.0 * 64.0 * mu;
  CHECK(stpalg::predicted_bound_final(cfg, mu, 1.0) == doctest::Approx(want_final));
  const double want_crude = 64.0 * 64.0 * 64.0 * mu + 2.0 * 4096.0 * f / std::sqrt(2.0) +
                            2.0 * 64.0 * f;
  CHECK(stpalg::predicted_bound_crude(cfg, mu, 1.0) == doctest::Approx(want_crude));
  CHECK(stpalg::predicted_bound_crude(cfg, mu, 1.0) > stpalg::predicted_bound_final(cfg, mu, 1.0));
}

TEST_CASE("crude bound is weaker for every bundled config") {
  for (auto [m, nw] : std::vector<std::pair<std::int64_t, std::int64_t>>{{3, 2}, {4, 2}, {5, 2}}) {
    auto cfg = stpalg::build_config(m, nw);
    const double mu = stpalg::inner_mu_frobenius({}, cfg.n_fact);
    CHECK(stpalg::predicted_bound_crude(cfg, mu, 1.0) >
          stpalg::predicted_bound_final(cfg, mu, 1.0));
  }
}

TEST_CASE("working-precision pipeline stays under the level bound") {
  const double eps = unit_roundoff(Precision::working);
  for (auto [m, nw] : std::vector<std::pair<std::int64_t, std::int64_t>>{{3, 2}, {4, 2}}) {
    auto cfg = stpalg::build_config(m, nw);
    const double mu = stpalg::inner_mu_frobenius({}, cfg.n_fact);
    const double coeff = stpalg::predicted_bound_final(cfg, mu, eps);
    for (int trial = 0; trial < 20; ++trial) {
      auto a = matcore::random_matrix(cfg.n, cfg.n, Precision::working,
                                      300 + static_cast<std::uint64_t>(trial));
      auto b = matcore::random_matrix(cfg.n, cfg.n, Precision::working,
                                      400 + static_cast<std::uint64_t>(trial));
      auto got = stpalg::stp_multiply(a, b, cfg);
      auto ref = matcore::naive_multiply(convert_precision(a, Precision::reference),
                                         convert_precision(b, Precision::reference));
      matcore::Matrix diff(cfg.n, cfg.n, Precision::reference);
      for (std::int64_t r = 0; r < cfg.n; ++r)
        for (std::int64_t c = 0; c < cfg.n; ++c) diff.set(r, c, got.at(r, c) - ref.at(r, c));
      const double measured = matcore::norm(diff, matcore::NormKind::frobenius);
      const double bound = coeff * matcore::norm(a, matcore::NormKind::frobenius) *
                           matcore::norm(b, matcore::NormKind::frobenius);
      CHECK(measured <= bound);
    }
  }
}

TEST_CASE("exponent reports") {
  auto r16 = stpalg::exponent_report(16);
  CHECK(r16.runtime_exp == doctest::Approx(11.0 / std::log2(15.0)).epsilon(1e-12));
  CHECK(r16.runtime_exp == doctest::Approx(2.8155).epsilon(2e-4));
  CHECK(r16.frobenius_err_exp == doctest::Approx(1.7917).epsilon(2e-4));
  CHECK(r16.maxnorm_err_exp == doctest::Approx(2.7917).epsilon(2e-4));
  CHECK(r16.runtime_exp + r16.frobenius_err_exp > 3.0);

  CHECK_THROWS_AS(stpalg::exponent_report(2), std::invalid_argument);

  // the two published parameter pairs; exponents round up to the cited
  // two-decimal bounds
  auto a1 = stpalg::exponent_report_from(3.0 * std::log2(6.0) / 2.0, std::log2(5.0) / 2.0);
  CHECK(std::ceil(a1.frobenius_err_exp * 100.0) / 100.0 == doctest::Approx(2.54));
  CHECK(std::ceil(a1.runtime_exp * 100.0) / 100.0 == doctest::Approx(2.48));
  auto a2 = stpalg::exponent_report_from(3.0 * std::log(10.0) / std::log(6.75),
                                         std::log(8.0) / std::log(6.75));
  CHECK(std::ceil(a2.frobenius_err_exp * 100.0) / 100.0 == doctest::Approx(2.58));
  CHECK(std::ceil(a2.runtime_exp * 100.0) / 100.0 == doctest::Approx(2.41));
}

TEST_CASE("config serialization round trip") {
  auto cfg = stpalg::build_config(3, 2);
  auto text = stpalg::config_to_json(cfg);
  auto [back, inner] = stpalg::config_from_json(text);
  CHECK(back.n == cfg.n);
  CHECK(back.xi_count == cfg.xi_count);
  CHECK(back.group == cfg.group);
  CHECK(inner.kind == stpalg::InnerKind::naive);
}

TEST_CASE("memory budget guards") {
  CHECK_THROWS_AS(stpalg::build_config(16, 2, 1u << 20), std::length_error);
  auto cfg = stpalg::build_config(3, 2);
  cfg.budget_bytes = 1;
  auto a = matcore::random_matrix(cfg.n, cfg.n, Precision::reference, 1);
  CHECK_THROWS_AS(stpalg::stp_multiply(a, a, cfg), std::length_error);
}

TEST_CASE("budget default honors the environment override") {
  CHECK(stpalg::default_budget_bytes() == (4ull << 30));
  setenv("WREATHMUL_BUDGET_BYTES", "123456789", 1);
  CHECK(stpalg::default_budget_bytes() == 123456789ull);
  setenv("WREATHMUL_BUDGET_BYTES", "not-a-number", 1);
  CHECK(stpalg::default_budget_bytes() == (4ull << 30));
  unsetenv("WREATHMUL_BUDGET_BYTES");
}

TEST_CASE("pipeline determinism") {
  auto cfg = stpalg::build_config(4, 2);
  auto a = matcore::random_matrix(cfg.n, cfg.n, Precision::working, 511);
  auto b = matcore::random_matrix(cfg.n, cfg.n, Precision::working, 512);
  CHECK(stpalg::stp_multiply(a, b, cfg) == stpalg::stp_multiply(a, b, cfg));
}
