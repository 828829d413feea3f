#include "wreathmul/matrix.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "wreathmul/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wreathmul::matcore {

namespace {

template <typename T>
void check_product_shapes(const Dense<T>& a, const Dense<T>& b) {
  if (a.cols != b.rows)
    throw DimensionMismatch("naive_multiply: inner dimensions disagree (" +
                            std::to_string(a.cols) + " vs " + std::to_string(b.rows) + ")");
}

template <typename T>
Dense<T> transpose(const Dense<T>& b) {
  Dense<T> t(b.cols, b.rows);
  for (std::int64_t r = 0; r < b.rows; ++r)
    for (std::int64_t c = 0; c < b.cols; ++c) t.at(c, r) = b.at(r, c);
  return t;
}

}  // namespace

template <typename T>
Dense<T> naive_multiply(const Dense<T>& a, const Dense<T>& b) {
  check_product_shapes(a, b);
  const std::int64_t m = a.rows, k = a.cols, n = b.cols;
  Dense<T> bt = transpose(b);  // contiguous inner loops; data movement only
  Dense<T> c(m, n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < m; ++i) {
    std::vector<std::complex<T>> prod(static_cast<std::size_t>(k));
    const auto* arow = &a.a[static_cast<std::size_t>(i * k)];
    flops::mul(static_cast<std::uint64_t>(k * n));
    flops::add(static_cast<std::uint64_t>((k - 1) * n));
    for (std::int64_t j = 0; j < n; ++j) {
      const auto* bcol = &bt.a[static_cast<std::size_t>(j * k)];
      for (std::int64_t l = 0; l < k; ++l) prod[static_cast<std::size_t>(l)] = arow[l] * bcol[l];
      c.at(i, j) = detail::pairwise_tree_consume(prod.data(), k);
    }
  }
  return c;
}

template Dense<float> naive_multiply(const Dense<float>&, const Dense<float>&);
template Dense<double> naive_multiply(const Dense<double>&, const Dense<double>&);

template <typename T>
double norm(const Dense<T>& m, NormKind kind) {
  if (kind == NormKind::max_entry) {
    double best = 0.0;
    for (const auto& v : m.a) best = std::max(best, std::abs(c64{v.real(), v.imag()}));
    return best;
  }
  // Frobenius accumulates squared moduli in binary64 regardless of tier.
  double s = 0.0;
  for (const auto& v : m.a) {
    const double re = v.real(), im = v.imag();
    s += re * re + im * im;
  }
  return std::sqrt(s);
}

template double norm(const Dense<float>&, NormKind);
template double norm(const Dense<double>&, NormKind);

template <typename T>
Dense<T> pad_to(const Dense<T>& m, std::int64_t rows, std::int64_t cols) {
  if (rows < m.rows || cols < m.cols)
    throw std::invalid_argument("pad_to: target smaller than source");
  Dense<T> out(rows, cols);
  for (std::int64_t r = 0; r < m.rows; ++r)
    for (std::int64_t c = 0; c < m.cols; ++c) out.at(r, c) = m.at(r, c);
  return out;
}

template Dense<float> pad_to(const Dense<float>&, std::int64_t, std::int64_t);
template Dense<double> pad_to(const Dense<double>&, std::int64_t, std::int64_t);

Matrix naive_multiply(const Matrix& a, const Matrix& b) {
  if (a.precision() != b.precision()) throw PrecisionMismatch{};
  if (a.precision() == Precision::working) return Matrix(naive_multiply(a.f32(), b.f32()));
  return Matrix(naive_multiply(a.f64(), b.f64()));
}

Scalar pairwise_sum(std::span<const Scalar> xs) {
  if (xs.empty()) throw std::invalid_argument("pairwise_sum: empty sequence");
  const Precision p = xs.front().precision();
  for (const auto& x : xs)
    if (x.precision() != p) throw PrecisionMismatch{};
  if (p == Precision::working) {
    std::vector<c32> v;
    v.reserve(xs.size());
    for (const auto& x : xs)
      v.push_back(c32{static_cast<float>(x.value().real()), static_cast<float>(x.value().imag())});
    return Scalar(pairwise_sum(std::span<const c32>(v)));
  }
  std::vector<c64> v;
  v.reserve(xs.size());
  for (const auto& x : xs) v.push_back(x.value());
  return Scalar(pairwise_sum(std::span<const c64>(v)));
}

double norm(const Matrix& m, NormKind kind) {
  return m.visit([kind](const auto& d) { return norm(d, kind); });
}

Matrix pad_to(const Matrix& m, std::int64_t rows, std::int64_t cols) {
  if (m.precision() == Precision::working) return Matrix(pad_to(m.f32(), rows, cols));
  return Matrix(pad_to(m.f64(), rows, cols));
}

Matrix convert_precision(const Matrix& m, Precision to) {
  if (m.precision() == to) return m;
  Matrix out(m.rows(), m.cols(), to);
  for (std::int64_t r = 0; r < m.rows(); ++r)
    for (std::int64_t c = 0; c < m.cols(); ++c) out.set(r, c, m.at(r, c));
  return out;
}

Matrix identity(std::int64_t n, Precision p) {
  Matrix m(n, n, p);
  for (std::int64_t i = 0; i < n; ++i) m.set(i, i, c64{1.0, 0.0});
  return m;
}

Matrix random_matrix(std::int64_t rows, std::int64_t cols, Precision p, std::uint64_t seed,
                     bool complex_entries) {
  CounterRng rng(seed);
  Matrix m(rows, cols, p);
  std::uint64_t ctr = 0;
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t c = 0; c < cols; ++c) {
      const double re = rng.uniform_pm1(ctr++);
      const double im = complex_entries ? rng.uniform_pm1(ctr++) : 0.0;
      m.set(r, c, c64{re, im});
    }
  return m;
}

std::string format_entry(c64 v) {
  char buf[64];
  // 17 significant digits round-trip binary64 through decimal.
  std::snprintf(buf, sizeof buf, "%.17g%+.17gi", v.real(), v.imag());
  return buf;
}

namespace {

double parse_double(std::string_view text, const std::string& token) {
  double sign = 1.0;
  if (!text.empty() && (text.front() == '+' || text.front() == '-')) {
    if (text.front() == '-') sign = -1.0;
    text.remove_prefix(1);
  }
  double v = 0.0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size())
    throw std::invalid_argument("bad matrix entry: " + token);
  return sign * v;
}

}  // namespace

c64 parse_entry(const std::string& token) {
  // forms: "1.5+2i", "-3-4.25i", bare "2.5" (zero imaginary part)
  if (token.empty()) throw std::invalid_argument("empty matrix entry");
  std::size_t split = std::string::npos;
  for (std::size_t i = 1; i < token.size(); ++i) {
    const char ch = token[i];
    if ((ch == '+' || ch == '-') && token[i - 1] != 'e' && token[i - 1] != 'E') split = i;
  }
  if (token.back() != 'i') return c64{parse_double(token, token), 0.0};
  if (split == std::string::npos) throw std::invalid_argument("bad matrix entry: " + token);
  const std::string res = token.substr(0, split);
  const std::string ims = token.substr(split, token.size() - split - 1);
  const double re = parse_double(res, token);
  double im = 0.0;
  if (ims == "+")
    im = 1.0;
  else if (ims == "-")
    im = -1.0;
  else
    im = parse_double(ims, token);
  return c64{re, im};
}

void write_text(std::ostream& os, const Matrix& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  for (std::int64_t r = 0; r < m.rows(); ++r) {
    for (std::int64_t c = 0; c < m.cols(); ++c) {
      if (c) os << ' ';
      os << format_entry(m.at(r, c));
    }
    os << '\n';
  }
}

Matrix read_text(std::istream& is, Precision p) {
  std::int64_t rows = 0, cols = 0;
  if (!(is >> rows >> cols) || rows <= 0 || cols <= 0)
    throw std::invalid_argument("matrix text: bad header");
  Matrix m(rows, cols, p);
  std::string tok;
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t c = 0; c < cols; ++c) {
      if (!(is >> tok)) throw std::invalid_argument("matrix text: truncated");
      m.set(r, c, parse_entry(tok));
    }
  return m;
}

}  // namespace wreathmul::matcore

namespace wreathmul::reference {

namespace {

template <typename T>
matcore::Dense<T> serial_product(const matcore::Dense<T>& a, const matcore::Dense<T>& b) {
  if (a.cols != b.rows) throw matcore::DimensionMismatch("naive_multiply: inner dimensions disagree");
  matcore::Dense<T> c(a.rows, b.cols);
  std::vector<std::complex<T>> prod(static_cast<std::size_t>(a.cols));
  flops::mul(static_cast<std::uint64_t>(a.rows * b.cols * a.cols));
  flops::add(static_cast<std::uint64_t>(a.rows * b.cols * (a.cols - 1)));
  for (std::int64_t i = 0; i < a.rows; ++i)
    for (std::int64_t j = 0; j < b.cols; ++j) {
      for (std::int64_t l = 0; l < a.cols; ++l)
        prod[static_cast<std::size_t>(l)] = a.at(i, l) * b.at(l, j);
      c.at(i, j) = matcore::detail::pairwise_tree_consume(prod.data(), a.cols);
    }
  return c;
}

}  // namespace

matcore::Matrix naive_multiply_serial(const matcore::Matrix& a, const matcore::Matrix& b) {
  if (a.precision() != b.precision()) throw PrecisionMismatch{};
  if (a.precision() == Precision::working) return matcore::Matrix(serial_product(a.f32(), b.f32()));
  return matcore::Matrix(serial_product(a.f64(), b.f64()));
}

}  // namespace wreathmul::reference
