#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "wreathmul/precision.hpp"

namespace wreathmul::wreathfft {

/// Values indexed by (Z/m)^D, flattened row-major with axis 0 most
/// significant. Holds m^D complex scalars of the chosen tier.
template <typename T>
struct GroupArray {
  std::int64_t m = 2;
  std::int64_t dims = 1;
  std::vector<std::complex<T>> data;

  GroupArray() = default;
  GroupArray(std::int64_t m_, std::int64_t dims_) : m(m_), dims(dims_) {
    if (m < 2 || dims < 1) throw std::invalid_argument("GroupArray needs m >= 2, D >= 1");
    std::int64_t total = 1;
    for (std::int64_t i = 0; i < dims; ++i) total *= m;
    data.assign(static_cast<std::size_t>(total), std::complex<T>{});
  }
  std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
};

enum class FourierSign { positive, negative };

/// Transform with kernel exp(sign * 2*pi*i*<i,j>/m) and no normalization,
/// computed axis by axis (axis 0 first); each length-m axis pass is a
/// direct DFT for m <= 16 and a radix split by the smallest prime factor
/// for larger composite m.
template <typename T>
GroupArray<T> dft_unnormalized(const GroupArray<T>& a, FourierSign sign);

/// Forward: a_hat(i) = sum_j exp(+2*pi*i*<i,j>/m) a(j).
template <typename T>
GroupArray<T> dft_forward(const GroupArray<T>& a) {
  return dft_unnormalized(a, FourierSign::positive);
}

/// Inverse: c(j) = m^-D sum_i exp(-2*pi*i*<i,j>/m) a_hat(i).
template <typename T>
GroupArray<T> dft_inverse(const GroupArray<T>& a);

/// L2 norm, binary64 accumulation.
template <typename T>
double l2_norm(const GroupArray<T>& a);

template <typename T>
GroupArray<T> convert_array(const GroupArray<float>& a);

/// Certified error coefficient of the unitary-normalized transform:
/// f(n) = c_f * ceil(log2 n). Derivation of c_f = 8: one axis pass of
/// length L <= 16 costs one rounded product per term plus a
/// ceil(log2 L)-deep summation tree per output, so its unitary-relative
/// L2 error is at most sqrt(L) * (3 + ceil(log2 L)) * eps (the 3 covers
/// complex-product rounding); dividing the per-axis cost by the log2 L
/// axes-per-log2(n) factor gives sqrt(L)(3 + log2 L)/log2 L <= 8 over
/// 2 <= L <= 16, and prime L > 16 stays under the same cap.
struct FFTStats {
  double c_f = 8.0;
  double f(std::uint64_t n) const {
    if (n <= 1) return 0.0;
    std::uint64_t p = 0, v = 1;
    while (v < n) {
      v <<= 1;
      ++p;
    }
    return c_f * static_cast<double>(p);
  }
};

FFTStats fft_error_constant();

}  // namespace wreathmul::wreathfft

namespace wreathmul::reference {

/// Direct O(|H|^2) transform, the oracle for the axis-decomposed kernel.
template <typename T>
wreathfft::GroupArray<T> dft_direct(const wreathfft::GroupArray<T>& a,
                                    wreathfft::FourierSign sign);

}  // namespace wreathmul::reference
