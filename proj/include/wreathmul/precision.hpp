#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <variant>

namespace wreathmul {

using c32 = std::complex<float>;
using c64 = std::complex<double>;

/// Two floating-point tiers. `working` is what experiments run in,
/// `reference` is the measurement instrument (2^29 times finer), so the
/// reference result can stand in for the exact one when measuring
/// working-precision errors.
enum class Precision : std::uint8_t { working, reference };

inline const char* to_string(Precision p) {
  return p == Precision::working ? "working" : "reference";
}

/// Unit roundoff of the tier: 2^-24 for binary32, 2^-53 for binary64.
inline double unit_roundoff(Precision p) {
  return p == Precision::working ? 0x1p-24 : 0x1p-53;
}

struct PrecisionMismatch : std::invalid_argument {
  PrecisionMismatch() : std::invalid_argument("operands have different precisions") {}
};

/// A complex number tagged with its precision. Arithmetic between equal
/// precisions stays in that precision; mixing throws PrecisionMismatch.
class Scalar {
 public:
  Scalar() : v_(c64{0.0, 0.0}) {}
  explicit Scalar(c32 v) : v_(v) {}
  explicit Scalar(c64 v) : v_(v) {}
  Scalar(double re, Precision p) {
    if (p == Precision::working)
      v_ = c32{static_cast<float>(re), 0.0f};
    else
      v_ = c64{re, 0.0};
  }
  static Scalar from(c64 v, Precision p) {
    if (p == Precision::working)
      return Scalar(c32{static_cast<float>(v.real()), static_cast<float>(v.imag())});
    return Scalar(v);
  }

  Precision precision() const {
    return std::holds_alternative<c32>(v_) ? Precision::working : Precision::reference;
  }
  /// Widening read; exact for both tiers.
  c64 value() const {
    if (auto* w = std::get_if<c32>(&v_)) return c64{w->real(), w->imag()};
    return std::get<c64>(v_);
  }

  friend Scalar operator+(const Scalar& a, const Scalar& b) { return a.bin(b, Op::add); }
  friend Scalar operator-(const Scalar& a, const Scalar& b) { return a.bin(b, Op::sub); }
  friend Scalar operator*(const Scalar& a, const Scalar& b) { return a.bin(b, Op::mul); }
  bool operator==(const Scalar& o) const { return v_ == o.v_; }

 private:
  enum class Op { add, sub, mul };
  Scalar bin(const Scalar& o, Op op) const {
    if (precision() != o.precision()) throw PrecisionMismatch{};
    if (auto* w = std::get_if<c32>(&v_)) {
      c32 r = *w, s = std::get<c32>(o.v_);
      return Scalar(op == Op::add ? r + s : op == Op::sub ? r - s : r * s);
    }
    c64 r = std::get<c64>(v_), s = std::get<c64>(o.v_);
    return Scalar(op == Op::add ? r + s : op == Op::sub ? r - s : r * s);
  }

  std::variant<c32, c64> v_;
};

}  // namespace wreathmul
