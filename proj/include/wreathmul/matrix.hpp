#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wreathmul/flops.hpp"
#include "wreathmul/precision.hpp"

namespace wreathmul::matcore {

enum class NormKind { max_entry, frobenius };

struct DimensionMismatch : std::invalid_argument {
  explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

/// Row-major dense complex matrix at a fixed component type.
template <typename T>
struct Dense {
  using value_type = std::complex<T>;

  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<value_type> a;

  Dense() = default;
  Dense(std::int64_t r, std::int64_t c) : rows(r), cols(c), a(static_cast<std::size_t>(r * c)) {}

  value_type& at(std::int64_t r, std::int64_t c) { return a[static_cast<std::size_t>(r * cols + c)]; }
  const value_type& at(std::int64_t r, std::int64_t c) const {
    return a[static_cast<std::size_t>(r * cols + c)];
  }

  bool operator==(const Dense&) const = default;
};

namespace detail {

// Tree evaluation without flop accounting; callers tally in bulk. The
// cases through 8 spell out the ceil-split association explicitly.
template <typename C>
C pairwise_tree(std::span<const C> xs) {
  const C* x = xs.data();
  switch (xs.size()) {
    case 1:
      return x[0];
    case 2:
      return x[0] + x[1];
    case 3:
      return (x[0] + x[1]) + x[2];
    case 4:
      return (x[0] + x[1]) + (x[2] + x[3]);
    case 5:
      return ((x[0] + x[1]) + x[2]) + (x[3] + x[4]);
    case 6:
      return ((x[0] + x[1]) + x[2]) + ((x[3] + x[4]) + x[5]);
    case 7:
      return ((x[0] + x[1]) + (x[2] + x[3])) + ((x[4] + x[5]) + x[6]);
    case 8:
      return ((x[0] + x[1]) + (x[2] + x[3])) + ((x[4] + x[5]) + (x[6] + x[7]));
    default: {
      const std::size_t half = (xs.size() + 1) / 2;
      C left = pairwise_tree(xs.subspan(0, half));
      C right = pairwise_tree(xs.subspan(half));
      return left + right;
    }
  }
}

// Same association order, but reduces a mutable buffer level by level
// when the length is a power of two (the ceil-split tree is the perfect
// binary tree there). Destroys the buffer.
template <typename C>
C pairwise_tree_consume(C* s, std::int64_t n) {
  if (n > 8 && (n & (n - 1)) == 0) {
    while (n > 8) {
      const std::int64_t half = n / 2;
      for (std::int64_t j = 0; j < half; ++j) s[j] = s[2 * j] + s[2 * j + 1];
      n = half;
    }
  }
  return pairwise_tree(std::span<const C>(s, static_cast<std::size_t>(n)));
}

}  // namespace detail

/// Balanced-binary-tree sum: sum(first ceil(n/2)) + sum(rest), recursively.
/// The tree shape depends only on n, never on data or thread count.
template <typename C>
C pairwise_sum(std::span<const C> xs) {
  if (xs.empty()) throw std::invalid_argument("pairwise_sum: empty sequence");
  flops::add(xs.size() - 1);
  return detail::pairwise_tree(xs);
}

/// Exact-order naive product: C[i][j] = pairwise_sum_k(a[i][k] * b[k][j]).
/// Deterministic for fixed inputs; rows computed independently.
template <typename T>
Dense<T> naive_multiply(const Dense<T>& a, const Dense<T>& b);

template <typename T>
double norm(const Dense<T>& m, NormKind kind);

template <typename T>
Dense<T> pad_to(const Dense<T>& m, std::int64_t rows, std::int64_t cols);

/// Runtime-tagged matrix: binary32 or binary64 components. Mixing tiers in
/// one operation is an error.
class Matrix {
 public:
  Matrix() : m_(Dense<double>{}) {}
  Matrix(std::int64_t rows, std::int64_t cols, Precision p) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("matrix dimensions must be positive");
    if (p == Precision::working)
      m_ = Dense<float>(rows, cols);
    else
      m_ = Dense<double>(rows, cols);
  }
  explicit Matrix(Dense<float> d) : m_(std::move(d)) {}
  explicit Matrix(Dense<double> d) : m_(std::move(d)) {}

  Precision precision() const {
    return std::holds_alternative<Dense<float>>(m_) ? Precision::working : Precision::reference;
  }
  std::int64_t rows() const {
    return std::visit([](const auto& d) { return d.rows; }, m_);
  }
  std::int64_t cols() const {
    return std::visit([](const auto& d) { return d.cols; }, m_);
  }

  /// Widening read (exact).
  c64 at(std::int64_t r, std::int64_t c) const {
    if (auto* f = std::get_if<Dense<float>>(&m_)) {
      auto v = f->at(r, c);
      return c64{v.real(), v.imag()};
    }
    return std::get<Dense<double>>(m_).at(r, c);
  }
  /// Rounds to the element tier when working precision.
  void set(std::int64_t r, std::int64_t c, c64 v) {
    if (auto* f = std::get_if<Dense<float>>(&m_))
      f->at(r, c) = c32{static_cast<float>(v.real()), static_cast<float>(v.imag())};
    else
      std::get<Dense<double>>(m_).at(r, c) = v;
  }

  Scalar scalar_at(std::int64_t r, std::int64_t c) const {
    if (auto* f = std::get_if<Dense<float>>(&m_)) return Scalar(f->at(r, c));
    return Scalar(std::get<Dense<double>>(m_).at(r, c));
  }

  const Dense<float>& f32() const { return std::get<Dense<float>>(m_); }
  const Dense<double>& f64() const { return std::get<Dense<double>>(m_); }
  Dense<float>& f32() { return std::get<Dense<float>>(m_); }
  Dense<double>& f64() { return std::get<Dense<double>>(m_); }

  template <typename Fn>
  auto visit(Fn&& fn) const {
    return std::visit(std::forward<Fn>(fn), m_);
  }

  bool operator==(const Matrix& o) const { return m_ == o.m_; }

 private:
  std::variant<Dense<float>, Dense<double>> m_;
};

Matrix naive_multiply(const Matrix& a, const Matrix& b);
Scalar pairwise_sum(std::span<const Scalar> xs);
double norm(const Matrix& m, NormKind kind);
Matrix pad_to(const Matrix& m, std::int64_t rows, std::int64_t cols);
Matrix convert_precision(const Matrix& m, Precision to);

/// Identity / zero / seeded-random constructors used all over the tests.
Matrix identity(std::int64_t n, Precision p);
Matrix random_matrix(std::int64_t rows, std::int64_t cols, Precision p, std::uint64_t seed,
                     bool complex_entries = false);

/// Text fixture format: first line "rows cols", then one line per row of
/// "re+imi" tokens. Decimal round-trips at reference precision.
void write_text(std::ostream& os, const Matrix& m);
Matrix read_text(std::istream& is, Precision p = Precision::reference);
std::string format_entry(c64 v);
c64 parse_entry(const std::string& token);

}  // namespace wreathmul::matcore

namespace wreathmul::reference {

/// Serial reference for the parallel kernel; identical summation tree, no
/// threading. Kept for bitwise-equality tests and the bench comparison.
matcore::Matrix naive_multiply_serial(const matcore::Matrix& a, const matcore::Matrix& b);

}  // namespace wreathmul::reference
