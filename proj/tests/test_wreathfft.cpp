#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wreathmul/rng.hpp"
#include "wreathmul/wreathfft.hpp"

using namespace wreathmul;
using wreathfft::FourierSign;
using wreathfft::GroupArray;

namespace {

template <typename T>
GroupArray<T> random_array(std::int64_t m, std::int64_t dims, std::uint64_t seed) {
  GroupArray<T> a(m, dims);
  CounterRng rng(seed);
  for (auto& v : a.data)
    v = std::complex<T>(static_cast<T>(rng.next_pm1()), static_cast<T>(rng.next_pm1()));
  return a;
}

template <typename T>
double rel_l2_diff(const GroupArray<T>& a, const GroupArray<T>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    num += std::norm(c64(a.data[i]) - c64(b.data[i]));
    den += std::norm(c64(b.data[i]));
  }
  return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

// brute-force cyclic convolution over (Z/m)^D
GroupArray<double> convolve(const GroupArray<double>& x, const GroupArray<double>& y) {
  GroupArray<double> out(x.m, x.dims);
  const std::int64_t total = x.size();
  auto add_mod = [&](std::int64_t a, std::int64_t b) {
    std::int64_t r = 0, mul = 1;
    for (std::int64_t ax = 0; ax < x.dims; ++ax) {
      r += ((a % x.m) + (b % x.m)) % x.m * mul;
      a /= x.m;
      b /= x.m;
      mul *= x.m;
    }
    return r;
  };
  for (std::int64_t g = 0; g < total; ++g)
    for (std::int64_t h = 0; h < total; ++h)
      out.data[static_cast<std::size_t>(add_mod(g, h))] +=
          x.data[static_cast<std::size_t>(g)] * y.data[static_cast<std::size_t>(h)];
  return out;
}

}  // namespace

TEST_CASE("delta transforms to the constant function") {
  GroupArray<double> d(4, 2);
  d.data[0] = {1.0, 0.0};
  auto hat = wreathfft::dft_forward(d);
  for (const auto& v : hat.data) CHECK(v == c64{1.0, 0.0});
}

TEST_CASE("constant function transforms to a scaled delta") {
  GroupArray<double> ones(4, 1);
  for (auto& v : ones.data) v = {1.0, 0.0};
  auto hat = wreathfft::dft_forward(ones);
  CHECK(hat.data[0] == c64{4.0, 0.0});
  for (std::size_t i = 1; i < 4; ++i) CHECK(std::abs(hat.data[i]) == 0.0);

  auto back = wreathfft::dft_inverse(hat);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(std::abs(back.data[i] - ones.data[i]) <= 1e-15);
}

TEST_CASE("axis-decomposed transform matches the direct summation oracle") {
  struct Shape {
    std::int64_t m, dims;
  };
  for (auto [m, dims] : {Shape{3, 3}, Shape{4, 3}, Shape{16, 3}, Shape{5, 2}, Shape{2, 6}}) {
    auto x = random_array<double>(m, dims, 50 + static_cast<std::uint64_t>(m));
    auto fast = wreathfft::dft_forward(x);
    auto direct = reference::dft_direct(x, FourierSign::positive);
    CHECK(rel_l2_diff(fast, direct) <= 1e-12);
  }
}

TEST_CASE("composite axis length above the direct cutoff") {
  auto x = random_array<double>(20, 1, 99);
  auto fast = wreathfft::dft_forward(x);
  auto direct = reference::dft_direct(x, FourierSign::positive);
  CHECK(rel_l2_diff(fast, direct) <= 1e-12);
}

TEST_CASE("round trip and parseval") {
  struct Shape {
    std::int64_t m, dims;
  };
  for (auto [m, dims] : {Shape{3, 1}, Shape{3, 3}, Shape{4, 6}, Shape{16, 3}, Shape{2, 6}}) {
    auto x = random_array<double>(m, dims, 70 + static_cast<std::uint64_t>(m + dims));
    auto hat = wreathfft::dft_forward(x);
    CHECK(rel_l2_diff(wreathfft::dft_inverse(hat), x) <= 1e-12);

    const double factor = std::pow(static_cast<double>(m), static_cast<double>(dims) / 2.0);
    CHECK(wreathfft::l2_norm(hat) ==
          doctest::Approx(factor * wreathfft::l2_norm(x)).epsilon(1e-12));
  }
}

TEST_CASE("forward followed by the negated kernel is |H| times the identity") {
  auto x = random_array<double>(4, 3, 123);
  auto composed = wreathfft::dft_unnormalized(wreathfft::dft_unnormalized(x, FourierSign::positive),
                                              FourierSign::negative);
  const double hsize = 64.0;
  double worst = 0;
  for (std::size_t i = 0; i < x.data.size(); ++i)
    worst = std::max(worst, std::abs(composed.data[i] - hsize * x.data[i]));
  CHECK(worst <= 1e-12 * hsize);
}

TEST_CASE("linearity") {
  auto x = random_array<double>(3, 3, 1);
  auto y = random_array<double>(3, 3, 2);
  const c64 alpha{0.7, -0.3}, beta{-1.1, 0.2};
  GroupArray<double> combo(3, 3);
  for (std::size_t i = 0; i < combo.data.size(); ++i)
    combo.data[i] = alpha * x.data[i] + beta * y.data[i];
  auto lhs = wreathfft::dft_forward(combo);
  auto fx = wreathfft::dft_forward(x);
  auto fy = wreathfft::dft_forward(y);
  double worst = 0;
  for (std::size_t i = 0; i < lhs.data.size(); ++i)
    worst = std::max(worst, std::abs(lhs.data[i] - (alpha * fx.data[i] + beta * fy.data[i])));
  CHECK(worst <= 1e-12 * wreathfft::l2_norm(lhs));
}

TEST_CASE("convolution theorem") {
  struct Shape {
    std::int64_t m, dims;
  };
  for (auto [m, dims] : {Shape{4, 2}, Shape{3, 3}}) {
    auto x = random_array<double>(m, dims, 300 + static_cast<std::uint64_t>(m));
    auto y = random_array<double>(m, dims, 400 + static_cast<std::uint64_t>(m));
    auto conv_hat = wreathfft::dft_forward(convolve(x, y));
    auto fx = wreathfft::dft_forward(x);
    auto fy = wreathfft::dft_forward(y);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < conv_hat.data.size(); ++i) {
      num += std::norm(conv_hat.data[i] - fx.data[i] * fy.data[i]);
      den += std::norm(conv_hat.data[i]);
    }
    CHECK(std::sqrt(num / den) <= 1e-10);
  }
}

TEST_CASE("error statistic shape") {
  auto stats = wreathfft::fft_error_constant();
  CHECK(stats.f(1) == 0.0);
  double prev = 0.0;
  for (std::uint64_t n : {2ull, 3ull, 64ull, 4096ull, 1ull << 24}) {
    CHECK(stats.f(n) >= prev);
    prev = stats.f(n);
  }
}

TEST_CASE("measured working-precision error sits under the certified f") {
  const auto stats = wreathfft::fft_error_constant();
  const double eps = unit_roundoff(Precision::working);
  const std::int64_t m = 16, dims = 3;
  const double unitary = std::pow(static_cast<double>(m), static_cast<double>(dims) / 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto x32 = random_array<float>(m, dims, 1000 + static_cast<std::uint64_t>(trial));
    auto x64 = wreathfft::convert_array<double>(x32);
    auto f32 = wreathfft::dft_forward(x32);
    auto f64 = reference::dft_direct(x64, FourierSign::positive);
    double err2 = 0;
    for (std::size_t i = 0; i < f32.data.size(); ++i)
      err2 += std::norm(c64(f32.data[i]) - f64.data[i]);
    const double unitary_err = std::sqrt(err2) / unitary;
    const double bound = stats.f(static_cast<std::uint64_t>(f32.data.size())) * eps *
                         wreathfft::l2_norm(x64);
    CHECK(unitary_err <= bound);
  }
}

TEST_CASE("transform is deterministic") {
  auto x = random_array<double>(4, 4, 777);
  auto a = wreathfft::dft_forward(x);
  auto b = wreathfft::dft_forward(x);
  CHECK(a.data == b.data);
}
