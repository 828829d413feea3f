#include "wreathmul/wreathfft.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <span>

#include "wreathmul/flops.hpp"
#include "wreathmul/matrix.hpp"

namespace wreathmul::wreathfft {

namespace {

// exp(2*pi*i*k/L) for k in [0, L); quarter-circle values are made exact.
std::vector<c64> unit_roots(std::int64_t L) {
  std::vector<c64> tw(static_cast<std::size_t>(L));
  for (std::int64_t k = 0; k < L; ++k) {
    if (4 * k % L == 0) {
      const std::int64_t quarter = 4 * k / L;
      constexpr c64 exact[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
      tw[static_cast<std::size_t>(k)] = exact[quarter];
    } else {
      const double ang = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(L);
      tw[static_cast<std::size_t>(k)] = c64{std::cos(ang), std::sin(ang)};
    }
  }
  return tw;
}

std::int64_t smallest_factor(std::int64_t n) {
  for (std::int64_t p = 2; p * p <= n; ++p)
    if (n % p == 0) return p;
  return n;
}

// One-dimensional length-L plan: direct for L <= 16 or prime L, otherwise
// split by the smallest prime factor.
template <typename T>
struct LinePlan {
  std::int64_t length;
  std::int64_t split = 0;  // 0 for the direct base case
  std::vector<std::complex<T>> tw;
  std::unique_ptr<LinePlan<T>> sub;

  LinePlan(std::int64_t L, bool negative) : length(L) {
    auto roots = unit_roots(L);
    tw.resize(static_cast<std::size_t>(L));
    for (std::int64_t k = 0; k < L; ++k) {
      c64 w = negative ? std::conj(roots[static_cast<std::size_t>(k)])
                       : roots[static_cast<std::size_t>(k)];
      tw[static_cast<std::size_t>(k)] =
          std::complex<T>(static_cast<T>(w.real()), static_cast<T>(w.imag()));
    }
    if (L > 16) {
      const std::int64_t p = smallest_factor(L);
      if (p != L) {
        split = p;
        sub = std::make_unique<LinePlan<T>>(L / p, negative);
      }
    }
  }

  // out must not alias x.
  void run(const std::complex<T>* x, std::complex<T>* out) const {
    if (split == 0) {
      if (length == 2) {
        // twiddles here are exactly +1/-1, so the generic gather-multiply
        // path reduces to a butterfly bit for bit
        out[0] = x[0] + x[1];
        out[1] = x[0] - x[1];
        flops::add(2);
        return;
      }
      std::complex<T> stack[64];
      std::vector<std::complex<T>> heap;
      std::complex<T>* prod = stack;
      if (length > 64) {
        heap.resize(static_cast<std::size_t>(length));
        prod = heap.data();
      }
      flops::mul(static_cast<std::uint64_t>(length * length));
      flops::add(static_cast<std::uint64_t>(length * (length - 1)));
      for (std::int64_t i = 0; i < length; ++i) {
        for (std::int64_t t = 0; t < length; ++t)
          prod[t] = tw[static_cast<std::size_t>((i * t) % length)] * x[t];
        out[i] = matcore::detail::pairwise_tree_consume(prod, length);
      }
      return;
    }
    // x[t], t = j + split*u: sub-transform each residue class, then
    // X[k] = sum_j w_L^{k j} Y_j[k mod (L/split)].
    const std::int64_t q = length / split;
    std::vector<std::complex<T>> gathered(static_cast<std::size_t>(q));
    std::vector<std::complex<T>> ys(static_cast<std::size_t>(length));
    for (std::int64_t j = 0; j < split; ++j) {
      for (std::int64_t u = 0; u < q; ++u) gathered[static_cast<std::size_t>(u)] = x[j + split * u];
      sub->run(gathered.data(), ys.data() + j * q);
    }
    std::vector<std::complex<T>> prod(static_cast<std::size_t>(split));
    flops::mul(static_cast<std::uint64_t>(length * split));
    flops::add(static_cast<std::uint64_t>(length * (split - 1)));
    for (std::int64_t k = 0; k < length; ++k) {
      for (std::int64_t j = 0; j < split; ++j)
        prod[static_cast<std::size_t>(j)] =
            tw[static_cast<std::size_t>((k * j) % length)] * ys[static_cast<std::size_t>(j * q + k % q)];
      out[k] = matcore::detail::pairwise_tree(std::span<const std::complex<T>>(prod));
    }
  }
};

}  // namespace

template <typename T>
GroupArray<T> dft_unnormalized(const GroupArray<T>& a, FourierSign sign) {
  GroupArray<T> cur = a;
  const std::int64_t total = cur.size();
  const LinePlan<T> plan(a.m, sign == FourierSign::negative);
  // Axis passes in fixed order, axis 0 first; every line within a pass is
  // independent, so line order cannot affect the result.
  std::int64_t stride = total / a.m;
  for (std::int64_t axis = 0; axis < a.dims; ++axis) {
    const std::int64_t block = stride * a.m;
    const std::int64_t lines = total / a.m;
#pragma omp parallel
    {
      std::vector<std::complex<T>> in(static_cast<std::size_t>(a.m));
      std::vector<std::complex<T>> out(static_cast<std::size_t>(a.m));
#pragma omp for schedule(static)
      for (std::int64_t line = 0; line < lines; ++line) {
        const std::int64_t base = (line / stride) * block + (line % stride);
        for (std::int64_t t = 0; t < a.m; ++t)
          in[static_cast<std::size_t>(t)] = cur.data[static_cast<std::size_t>(base + t * stride)];
        plan.run(in.data(), out.data());
        for (std::int64_t t = 0; t < a.m; ++t)
          cur.data[static_cast<std::size_t>(base + t * stride)] = out[static_cast<std::size_t>(t)];
      }
    }
    stride /= a.m;
  }
  return cur;
}

template <typename T>
GroupArray<T> dft_inverse(const GroupArray<T>& a) {
  GroupArray<T> out = dft_unnormalized(a, FourierSign::negative);
  const T scale = static_cast<T>(1.0 / static_cast<double>(out.size()));
  for (auto& v : out.data) v *= scale;
  flops::mul(static_cast<std::uint64_t>(out.size()));
  return out;
}

template <typename T>
double l2_norm(const GroupArray<T>& a) {
  double s = 0.0;
  for (const auto& v : a.data) {
    const double re = v.real(), im = v.imag();
    s += re * re + im * im;
  }
  return std::sqrt(s);
}

template <typename T>
GroupArray<T> convert_array(const GroupArray<float>& a) {
  GroupArray<T> out(a.m, a.dims);
  for (std::size_t i = 0; i < a.data.size(); ++i)
    out.data[i] = std::complex<T>(static_cast<T>(a.data[i].real()), static_cast<T>(a.data[i].imag()));
  return out;
}

FFTStats fft_error_constant() { return FFTStats{}; }

template GroupArray<float> dft_unnormalized(const GroupArray<float>&, FourierSign);
template GroupArray<double> dft_unnormalized(const GroupArray<double>&, FourierSign);
template GroupArray<float> dft_inverse(const GroupArray<float>&);
template GroupArray<double> dft_inverse(const GroupArray<double>&);
template double l2_norm(const GroupArray<float>&);
template double l2_norm(const GroupArray<double>&);
template GroupArray<double> convert_array<double>(const GroupArray<float>&);

}  // namespace wreathmul::wreathfft

namespace wreathmul::reference {

template <typename T>
wreathfft::GroupArray<T> dft_direct(const wreathfft::GroupArray<T>& a, wreathfft::FourierSign sign) {
  using namespace wreathfft;
  GroupArray<T> out(a.m, a.dims);
  const std::int64_t total = a.size();
  // <i, j> mod m via digit expansion of the flat indices
  std::vector<std::int32_t> di(static_cast<std::size_t>(a.dims)), dj(static_cast<std::size_t>(a.dims));
  auto digits = [&](std::int64_t flat, std::vector<std::int32_t>& d) {
    for (std::int64_t ax = a.dims - 1; ax >= 0; --ax) {
      d[static_cast<std::size_t>(ax)] = static_cast<std::int32_t>(flat % a.m);
      flat /= a.m;
    }
  };
  std::vector<c64> roots(static_cast<std::size_t>(a.m));
  for (std::int64_t k = 0; k < a.m; ++k) {
    const double ang = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(a.m);
    roots[static_cast<std::size_t>(k)] =
        sign == FourierSign::positive ? c64{std::cos(ang), std::sin(ang)}
                                      : c64{std::cos(ang), -std::sin(ang)};
  }
  for (std::int64_t i = 0; i < total; ++i) {
    digits(i, di);
    c64 acc{0.0, 0.0};
    for (std::int64_t j = 0; j < total; ++j) {
      digits(j, dj);
      std::int64_t dot = 0;
      for (std::int64_t ax = 0; ax < a.dims; ++ax)
        dot += static_cast<std::int64_t>(di[static_cast<std::size_t>(ax)]) *
               dj[static_cast<std::size_t>(ax)];
      const c64 w = roots[static_cast<std::size_t>(dot % a.m)];
      const auto& v = a.data[static_cast<std::size_t>(j)];
      acc += w * c64{static_cast<double>(v.real()), static_cast<double>(v.imag())};
    }
    out.data[static_cast<std::size_t>(i)] =
        std::complex<T>(static_cast<T>(acc.real()), static_cast<T>(acc.imag()));
  }
  return out;
}

template wreathfft::GroupArray<float> dft_direct(const wreathfft::GroupArray<float>&,
                                                 wreathfft::FourierSign);
template wreathfft::GroupArray<double> dft_direct(const wreathfft::GroupArray<double>&,
                                                  wreathfft::FourierSign);

}  // namespace wreathmul::reference
