#include "wreathmul/stpalg.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "wreathmul/bilinear.hpp"

namespace wreathmul::stpalg {

namespace {

using grouplib::Permutation;

std::int64_t ceil_log2_i(std::int64_t n) {
  std::int64_t p = 0, v = 1;
  while (v < n) {
    v <<= 1;
    ++p;
  }
  return p;
}

std::int64_t binom(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  __int128 r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > (__int128)1 << 62) throw std::length_error("binomial overflows the representative count");
  }
  return static_cast<std::int64_t>(r);
}

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

// Pipeline peak: two per-representative batches plus three group-algebra
// vectors, in the element type's width.
std::uint64_t estimate_bytes(std::int64_t slots, std::int64_t xi_count, std::int64_t nf,
                             std::size_t scalar_bytes) {
  const double elems = 2.0 * static_cast<double>(xi_count) * static_cast<double>(nf) *
                           static_cast<double>(nf) +
                       3.0 * static_cast<double>(slots);
  return static_cast<std::uint64_t>(elems * static_cast<double>(scalar_bytes));
}

struct LabelRef {
  const std::int32_t* vec;  // N*d residues of the product-set choice
  std::int64_t perm_idx;
};

LabelRef label_ref(const STPConfig& cfg, const std::vector<std::int32_t>& vecs,
                   std::int64_t label) {
  const std::int64_t nd = cfg.n_wreath * cfg.group.d;
  const std::int64_t vr = label / cfg.n_fact;
  const std::int64_t pr = label % cfg.n_fact;
  return LabelRef{vecs.data() + vr * nd, pr};
}

const std::vector<std::int32_t>& row_set(const STPConfig& cfg, SetPair pair) {
  return pair == SetPair::yz ? cfg.y_vecs : cfg.x_vecs;
}
const std::vector<std::int32_t>& col_set(const STPConfig& cfg, SetPair pair) {
  return pair == SetPair::xy ? cfg.y_vecs : cfg.z_vecs;
}

}  // namespace

std::uint64_t default_budget_bytes() {
  if (const char* env = std::getenv("WREATHMUL_BUDGET_BYTES")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
  }
  return 4ull << 30;
}

const char* step_name(int id) {
  static const char* names[kStepCount] = {"embed",       "fourier",         "assemble",
                                          "multiply",    "disassemble",     "inverse_fourier",
                                          "output"};
  return (id >= 0 && id < kStepCount) ? names[id] : "?";
}

STPConfig build_config(std::int64_t m, std::int64_t n_wreath, std::uint64_t budget_bytes) {
  if (m < 2) throw std::invalid_argument("build_config: m must be at least 2");
  if (n_wreath < 2) throw std::invalid_argument("build_config: N must be at least 2");

  STPConfig cfg;
  cfg.n_wreath = n_wreath;
  cfg.budget_bytes = budget_bytes;
  cfg.degenerate = (m == 2);
  cfg.triples = grouplib::stpp_family(n_wreath, m);
  cfg.group = cfg.triples.group;
  if (auto v = grouplib::check_stpp_witness(cfg.triples)) {
    std::ostringstream msg;
    msg << "build_config: family triples fail the simultaneous triple product property at ("
        << v->i << "," << v->j << "," << v->k << ")";
    throw std::logic_error(msg.str());
  }

  cfg.n_fact = grouplib::factorial(n_wreath);
  if (cfg.n_fact > 24)
    throw std::length_error("build_config: wreath degrees above 4 exceed desk scale");
  cfg.h_order = cfg.group.order();

  auto set_size_product = [&](const std::vector<std::vector<grouplib::GroupElement>>& sets) {
    std::int64_t p = 1;
    for (const auto& s : sets) p *= static_cast<std::int64_t>(s.size());
    return p;
  };
  cfg.k_n = set_size_product(cfg.triples.x);
  if (cfg.k_n != set_size_product(cfg.triples.y) || cfg.k_n != set_size_product(cfg.triples.z))
    throw std::logic_error("build_config: product-set sizes disagree across X, Y, Z");
  cfg.n = cfg.k_n * cfg.n_fact;

  // Overflow-guarded size arithmetic before anything large is touched.
  const double slots_d = std::pow(static_cast<double>(cfg.h_order),
                                  static_cast<double>(n_wreath)) *
                         static_cast<double>(cfg.n_fact);
  if (slots_d > 9e18) throw std::length_error("build_config: group algebra does not fit an index");
  const std::int64_t hn = STPConfig::pow_i64(cfg.h_order, n_wreath);
  cfg.xi_count = binom(cfg.h_order + n_wreath - 1, n_wreath);
  if (estimate_bytes(hn * cfg.n_fact, cfg.xi_count, cfg.n_fact, sizeof(c64)) > cfg.budget_bytes)
    throw std::length_error("build_config: memory budget exceeded (see WREATHMUL_BUDGET_BYTES)");

  cfg.perms = grouplib::all_permutations(n_wreath);
  cfg.rank_compose.assign(static_cast<std::size_t>(cfg.n_fact * cfg.n_fact), 0);
  cfg.rank_inverse.assign(static_cast<std::size_t>(cfg.n_fact), 0);
  cfg.inv_images.assign(static_cast<std::size_t>(cfg.n_fact * n_wreath), 0);
  for (std::int64_t a = 0; a < cfg.n_fact; ++a) {
    const Permutation inv = grouplib::invert(cfg.perms[static_cast<std::size_t>(a)]);
    cfg.rank_inverse[static_cast<std::size_t>(a)] = static_cast<std::int32_t>(grouplib::perm_rank(inv));
    for (std::int64_t i = 0; i < n_wreath; ++i)
      cfg.inv_images[static_cast<std::size_t>(a * n_wreath + i)] = inv(i);
    for (std::int64_t b = 0; b < cfg.n_fact; ++b)
      cfg.rank_compose[static_cast<std::size_t>(a * cfg.n_fact + b)] = static_cast<std::int32_t>(
          grouplib::perm_rank(grouplib::compose(cfg.perms[static_cast<std::size_t>(a)],
                                                cfg.perms[static_cast<std::size_t>(b)])));
  }

  // Product-set element tables, coordinate 0 most significant.
  auto build_vecs = [&](const std::vector<std::vector<grouplib::GroupElement>>& sets) {
    const std::int64_t nd = n_wreath * cfg.group.d;
    std::vector<std::int32_t> out(static_cast<std::size_t>(cfg.k_n * nd));
    std::vector<std::size_t> pick(static_cast<std::size_t>(n_wreath), 0);
    for (std::int64_t v = 0; v < cfg.k_n; ++v) {
      for (std::int64_t i = 0; i < n_wreath; ++i) {
        const auto& g = sets[static_cast<std::size_t>(i)][pick[static_cast<std::size_t>(i)]];
        for (std::int64_t c = 0; c < cfg.group.d; ++c)
          out[static_cast<std::size_t>(v * nd + i * cfg.group.d + c)] =
              g.residues[static_cast<std::size_t>(c)];
      }
      std::int64_t pos = n_wreath - 1;
      while (pos >= 0) {
        if (++pick[static_cast<std::size_t>(pos)] < sets[static_cast<std::size_t>(pos)].size())
          break;
        pick[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
    }
    return out;
  };
  cfg.x_vecs = build_vecs(cfg.triples.x);
  cfg.y_vecs = build_vecs(cfg.triples.y);
  cfg.z_vecs = build_vecs(cfg.triples.z);

  // Orbit representatives: nondecreasing row tuples; orbit size is the
  // permutation count divided by the row-multiplicity factorials.
  cfg.xi_rows.reserve(static_cast<std::size_t>(cfg.xi_count * n_wreath));
  cfg.xi_orbit.reserve(static_cast<std::size_t>(cfg.xi_count));
  std::vector<std::int64_t> rows(static_cast<std::size_t>(n_wreath), 0);
  std::uint64_t orbit_total = 0;
  while (true) {
    std::int64_t orbit = cfg.n_fact;
    std::int64_t run = 1;
    for (std::int64_t i = 1; i <= n_wreath; ++i) {
      if (i < n_wreath && rows[static_cast<std::size_t>(i)] == rows[static_cast<std::size_t>(i - 1)]) {
        ++run;
      } else {
        orbit /= grouplib::factorial(run);
        run = 1;
      }
    }
    for (auto r : rows) cfg.xi_rows.push_back(static_cast<std::uint32_t>(r));
    cfg.xi_orbit.push_back(static_cast<std::uint8_t>(orbit));
    orbit_total += static_cast<std::uint64_t>(orbit);
    std::int64_t pos = n_wreath - 1;
    while (pos >= 0 && rows[static_cast<std::size_t>(pos)] == cfg.h_order - 1) --pos;
    if (pos < 0) break;
    const std::int64_t next = rows[static_cast<std::size_t>(pos)] + 1;
    for (std::int64_t i = pos; i < n_wreath; ++i) rows[static_cast<std::size_t>(i)] = next;
  }
  if (static_cast<std::int64_t>(cfg.xi_orbit.size()) != cfg.xi_count)
    throw std::logic_error("build_config: representative enumeration disagrees with the count");
  if (orbit_total != static_cast<std::uint64_t>(hn))
    throw std::logic_error("build_config: orbit sizes do not sum to |H|^N");

  // For small instances, confirm slot injectivity of all three label pairs.
  if (cfg.n <= 64) {
    for (SetPair pair : {SetPair::xy, SetPair::yz, SetPair::xz}) {
      std::vector<char> seen(static_cast<std::size_t>(cfg.slots()), 0);
      for (std::int64_t r = 0; r < cfg.n; ++r)
        for (std::int64_t c = 0; c < cfg.n; ++c) {
          const Slot s = embed_slot(cfg, pair, r, c);
          auto& flag = seen[static_cast<std::size_t>(s.sheet * hn + s.flat)];
          if (flag) throw std::logic_error("build_config: embedding is not injective");
          flag = 1;
        }
    }
  }
  return cfg;
}

Slot embed_slot(const STPConfig& cfg, SetPair pair, std::int64_t row_label,
                std::int64_t col_label) {
  const auto row = label_ref(cfg, row_set(cfg, pair), row_label);
  const auto col = label_ref(cfg, col_set(cfg, pair), col_label);
  const std::int64_t n = cfg.n_wreath, d = cfg.group.d, m = cfg.group.m;
  // quotient of labels (u, sigma), (v, tau): permutation part sigma^-1 tau,
  // H^N part has row i equal to v_{tau(i)} - u_{tau(i)}
  const std::int64_t sheet = cfg.rank_compose[static_cast<std::size_t>(
      cfg.rank_inverse[static_cast<std::size_t>(row.perm_idx)] * cfg.n_fact + col.perm_idx)];
  const Permutation& tau = cfg.perms[static_cast<std::size_t>(col.perm_idx)];
  std::int64_t flat = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t src = tau(i);
    const std::int32_t* u = row.vec + src * d;
    const std::int32_t* v = col.vec + src * d;
    for (std::int64_t c = 0; c < d; ++c) {
      const std::int64_t diff = ((v[c] - u[c]) % m + m) % m;
      flat = flat * m + diff;
    }
  }
  return Slot{sheet, flat};
}

template <typename T>
Sheets<T> embed(const Dense<T>& mat, const STPConfig& cfg, SetPair pair) {
  if (mat.rows != cfg.n || mat.cols != cfg.n)
    throw matcore::DimensionMismatch("embed: matrix order must equal the served order");
  Sheets<T> sheets;
  sheets.by_perm.reserve(static_cast<std::size_t>(cfg.n_fact));
  for (std::int64_t p = 0; p < cfg.n_fact; ++p)
    sheets.by_perm.emplace_back(cfg.group.m, cfg.n_wreath * cfg.group.d);
  const std::int64_t hn = sheets.by_perm[0].size();
  std::vector<char> seen(static_cast<std::size_t>(cfg.slots()), 0);
  for (std::int64_t r = 0; r < cfg.n; ++r)
    for (std::int64_t c = 0; c < cfg.n; ++c) {
      const Slot s = embed_slot(cfg, pair, r, c);
      auto& flag = seen[static_cast<std::size_t>(s.sheet * hn + s.flat)];
      if (flag)
        throw std::logic_error("embed: slot collision, the triples are not simultaneous");
      flag = 1;
      sheets.by_perm[static_cast<std::size_t>(s.sheet)].data[static_cast<std::size_t>(s.flat)] =
          mat.at(r, c);
    }
  return sheets;
}

template <typename T>
void dft_sheets_forward(Sheets<T>& s) {
  for (auto& arr : s.by_perm) arr = wreathfft::dft_forward(arr);
}

template <typename T>
void dft_sheets_inverse(Sheets<T>& s) {
  for (auto& arr : s.by_perm) arr = wreathfft::dft_inverse(arr);
}

template <typename T>
ChiMatrixBatch<T> assemble(const Sheets<T>& hat, const STPConfig& cfg) {
  ChiMatrixBatch<T> batch;
  batch.nf = cfg.n_fact;
  batch.count = cfg.xi_count;
  batch.data.assign(static_cast<std::size_t>(batch.count * batch.nf * batch.nf), {});
  const std::int64_t n = cfg.n_wreath, nf = cfg.n_fact;
#pragma omp parallel for schedule(static)
  for (std::int64_t rep = 0; rep < batch.count; ++rep) {
    const std::uint32_t* rows = cfg.xi_rows.data() + rep * n;
    std::complex<T>* out = batch.at(rep);
    for (std::int64_t pr = 0; pr < nf; ++pr) {
      // character rho . chi0 has row i equal to chi0 row rho^-1(i)
      const std::int32_t* inv = cfg.inv_images.data() + pr * n;
      std::int64_t flat = 0;
      for (std::int64_t i = 0; i < n; ++i)
        flat = flat * cfg.h_order + rows[inv[i]];
      const std::int32_t rinv = cfg.rank_inverse[static_cast<std::size_t>(pr)];
      for (std::int64_t ps = 0; ps < nf; ++ps) {
        const std::int32_t sheet =
            cfg.rank_compose[static_cast<std::size_t>(ps * nf + rinv)];
        out[pr * nf + ps] =
            hat.by_perm[static_cast<std::size_t>(sheet)].data[static_cast<std::size_t>(flat)];
      }
    }
  }
  return batch;
}

namespace {

template <typename T>
void small_product(const std::complex<T>* a, const std::complex<T>* b, std::complex<T>* c,
                   std::int64_t nf) {
  std::complex<T> prod[24];
  for (std::int64_t r = 0; r < nf; ++r)
    for (std::int64_t col = 0; col < nf; ++col) {
      for (std::int64_t l = 0; l < nf; ++l) prod[l] = a[r * nf + l] * b[l * nf + col];
      c[r * nf + col] = matcore::detail::pairwise_tree(
          std::span<const std::complex<T>>(prod, static_cast<std::size_t>(nf)));
    }
}

template <typename T>
Dense<T> batch_entry_to_dense(const std::complex<T>* p, std::int64_t nf) {
  Dense<T> d(nf, nf);
  std::copy(p, p + nf * nf, d.a.begin());
  return d;
}

}  // namespace

template <typename T>
ChiMatrixBatch<T> multiply_batch(const ChiMatrixBatch<T>& lhs, const ChiMatrixBatch<T>& rhs,
                                 const InnerMultiplier& inner) {
  if (lhs.nf != rhs.nf || lhs.count != rhs.count)
    throw matcore::DimensionMismatch("multiply_batch: batches disagree");
  const std::int64_t nf = lhs.nf;
  ChiMatrixBatch<T> out;
  out.nf = nf;
  out.count = lhs.count;
  out.data.assign(lhs.data.size(), {});
  if (inner.kind == InnerKind::naive) {
    if (nf > 24) throw std::length_error("multiply_batch: naive fast path supports N! <= 24");
    flops::mul(static_cast<std::uint64_t>(out.count * nf * nf * nf));
    flops::add(static_cast<std::uint64_t>(out.count * nf * nf * (nf - 1)));
#pragma omp parallel for schedule(static)
    for (std::int64_t rep = 0; rep < out.count; ++rep)
      small_product(lhs.at(rep), rhs.at(rep), out.at(rep), nf);
    return out;
  }
  if (inner.kind == InnerKind::stp && !inner.nested)
    throw std::invalid_argument("multiply_batch: nested configuration missing");
  const auto strassen = bilinear::strassen_scheme();
  for (std::int64_t rep = 0; rep < out.count; ++rep) {
    Matrix a{batch_entry_to_dense(lhs.at(rep), nf)};
    Matrix b{batch_entry_to_dense(rhs.at(rep), nf)};
    Matrix c = inner.kind == InnerKind::strassen
                   ? bilinear::multiply_stationary(a, b, strassen, 1)
                   : stp_multiply(a, b, *inner.nested, InnerMultiplier{});
    for (std::int64_t r = 0; r < nf; ++r)
      for (std::int64_t col = 0; col < nf; ++col) {
        const c64 v = c.at(r, col);
        out.at(rep)[r * nf + col] = std::complex<T>(static_cast<T>(v.real()), static_cast<T>(v.imag()));
      }
  }
  return out;
}

template <typename T>
Sheets<T> disassemble(const ChiMatrixBatch<T>& c, const STPConfig& cfg) {
  Sheets<T> sheets;
  sheets.by_perm.reserve(static_cast<std::size_t>(cfg.n_fact));
  for (std::int64_t p = 0; p < cfg.n_fact; ++p)
    sheets.by_perm.emplace_back(cfg.group.m, cfg.n_wreath * cfg.group.d);
  const std::int64_t n = cfg.n_wreath, nf = cfg.n_fact;
#pragma omp parallel for schedule(static)
  for (std::int64_t rep = 0; rep < c.count; ++rep) {
    const std::uint32_t* rows = cfg.xi_rows.data() + rep * n;
    const std::complex<T>* mat = c.at(rep);
    std::int64_t seen[24];
    std::int64_t seen_count = 0;
    for (std::int64_t pd = 0; pd < nf; ++pd) {
      const std::int32_t* inv = cfg.inv_images.data() + pd * n;
      std::int64_t flat = 0;
      for (std::int64_t i = 0; i < n; ++i) flat = flat * cfg.h_order + rows[inv[i]];
      // witness is the least delta producing this character
      bool dup = false;
      for (std::int64_t q = 0; q < seen_count; ++q)
        if (seen[q] == flat) {
          dup = true;
          break;
        }
      if (dup) continue;
      seen[seen_count++] = flat;
      for (std::int64_t psig = 0; psig < nf; ++psig) {
        const std::int32_t col = cfg.rank_compose[static_cast<std::size_t>(psig * nf + pd)];
        sheets.by_perm[static_cast<std::size_t>(psig)].data[static_cast<std::size_t>(flat)] =
            mat[pd * nf + col];
      }
    }
  }
  return sheets;
}

template <typename T>
Dense<T> extract_output(const Sheets<T>& c, const STPConfig& cfg, std::int64_t order) {
  if (order > cfg.n) throw matcore::DimensionMismatch("extract_output: order exceeds the config");
  Dense<T> out(order, order);
  for (std::int64_t r = 0; r < order; ++r)
    for (std::int64_t col = 0; col < order; ++col) {
      const Slot s = embed_slot(cfg, SetPair::xz, r, col);
      out.at(r, col) =
          c.by_perm[static_cast<std::size_t>(s.sheet)].data[static_cast<std::size_t>(s.flat)];
    }
  return out;
}

namespace {

template <typename T>
Dense<T> run_pipeline(const Dense<T>& a, const Dense<T>& b, const STPConfig& cfg,
                      const InnerMultiplier& inner, StepStats* profile) {
  const std::int64_t order = a.rows;
  Dense<T> ap = (order == cfg.n) ? a : matcore::pad_to(a, cfg.n, cfg.n);
  Dense<T> bp = (order == cfg.n) ? b : matcore::pad_to(b, cfg.n, cfg.n);

  auto mark = [&](int step, double t0, flops::Count f0) {
    if (!profile) return;
    profile->ms[static_cast<std::size_t>(step)] += now_ms() - t0;
    profile->fl[static_cast<std::size_t>(step)] =
        profile->fl[static_cast<std::size_t>(step)] + (flops::snapshot() - f0);
  };

  double t0 = now_ms();
  flops::Count f0 = flops::snapshot();
  Sheets<T> sa = embed(ap, cfg, SetPair::xy);
  Sheets<T> sb = embed(bp, cfg, SetPair::yz);
  mark(kStepEmbed, t0, f0);

  t0 = now_ms();
  f0 = flops::snapshot();
  dft_sheets_forward(sa);
  dft_sheets_forward(sb);
  mark(kStepFourier, t0, f0);

  t0 = now_ms();
  f0 = flops::snapshot();
  ChiMatrixBatch<T> ba = assemble(sa, cfg);
  sa.by_perm.clear();
  ChiMatrixBatch<T> bb = assemble(sb, cfg);
  sb.by_perm.clear();
  mark(kStepAssemble, t0, f0);

  t0 = now_ms();
  f0 = flops::snapshot();
  // The assembly indexing realizes the group-algebra convolution when the
  // per-character products are taken B-side first.
  ChiMatrixBatch<T> bc = multiply_batch(bb, ba, inner);
  ba.data.clear();
  ba.data.shrink_to_fit();
  bb.data.clear();
  bb.data.shrink_to_fit();
  mark(kStepMultiply, t0, f0);

  t0 = now_ms();
  f0 = flops::snapshot();
  Sheets<T> sc = disassemble(bc, cfg);
  bc.data.clear();
  bc.data.shrink_to_fit();
  mark(kStepDisassemble, t0, f0);

  t0 = now_ms();
  f0 = flops::snapshot();
  dft_sheets_inverse(sc);
  mark(kStepInverseFourier, t0, f0);

  t0 = now_ms();
  f0 = flops::snapshot();
  Dense<T> out = extract_output(sc, cfg, order);
  mark(kStepOutput, t0, f0);
  return out;
}

}  // namespace

Matrix stp_multiply(const Matrix& a, const Matrix& b, const STPConfig& cfg,
                    const InnerMultiplier& inner, StepStats* profile) {
  if (a.precision() != b.precision()) throw PrecisionMismatch{};
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw matcore::DimensionMismatch("stp_multiply: inputs must be square, equal order");
  if (a.rows() > cfg.n)
    throw matcore::DimensionMismatch("stp_multiply: order exceeds the config's served order");
  const std::size_t scalar_bytes =
      a.precision() == Precision::working ? sizeof(c32) : sizeof(c64);
  if (estimate_bytes(cfg.slots(), cfg.xi_count, cfg.n_fact, scalar_bytes) > cfg.budget_bytes)
    throw std::length_error("stp_multiply: memory budget exceeded (see WREATHMUL_BUDGET_BYTES)");
  if (a.precision() == Precision::working)
    return Matrix(run_pipeline(a.f32(), b.f32(), cfg, inner, profile));
  return Matrix(run_pipeline(a.f64(), b.f64(), cfg, inner, profile));
}

double predicted_bound_final(const STPConfig& cfg, double mu_inner, double eps) {
  const double hn = std::pow(static_cast<double>(cfg.h_order), static_cast<double>(cfg.n_wreath));
  const double hn_half = std::sqrt(hn);
  const double nf = static_cast<double>(cfg.n_fact);
  const double f = wreathfft::fft_error_constant().f(static_cast<std::uint64_t>(hn));
  return (f + 2.0 * nf * hn_half * f + nf * hn_half * mu_inner) * eps;
}

double predicted_bound_crude(const STPConfig& cfg, double mu_inner, double eps) {
  const double hn = std::pow(static_cast<double>(cfg.h_order), static_cast<double>(cfg.n_wreath));
  const double hn_half = std::sqrt(hn);
  const double nf = static_cast<double>(cfg.n_fact);
  const double f = wreathfft::fft_error_constant().f(static_cast<std::uint64_t>(hn));
  return (hn * hn_half * mu_inner + 2.0 * hn * f / std::sqrt(nf) + nf * hn_half * f) * eps;
}

double inner_mu_frobenius(const InnerMultiplier& inner, std::int64_t nf) {
  switch (inner.kind) {
    case InnerKind::naive:
      // per entry: nf complex products (relative error within 3 eps each)
      // plus a ceil(log2 nf)-deep tree; Cauchy-Schwarz turns the row/column
      // bound into the Frobenius-norm coefficient
      return 3.0 + static_cast<double>(ceil_log2_i(nf));
    case InnerKind::strassen: {
      std::int64_t n2 = 1;
      while (n2 < nf) n2 *= 2;
      const double mu_max = bilinear::error_bound_stationary(bilinear::strassen_scheme(), n2, 1.0);
      return static_cast<double>(nf) * mu_max;  // |E|_F <= n |E|_max
    }
    case InnerKind::stp: {
      if (!inner.nested) throw std::invalid_argument("inner_mu_frobenius: nested config missing");
      const double mu_base = inner_mu_frobenius(InnerMultiplier{}, inner.nested->n_fact);
      return predicted_bound_final(*inner.nested, mu_base, 1.0);
    }
  }
  throw std::logic_error("inner_mu_frobenius: unknown inner kind");
}

ExponentReport exponent_report_from(double alpha, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("exponent_report: degenerate family (beta <= 0)");
  ExponentReport r;
  r.runtime_exp = (alpha - 1.0) / beta;
  r.frobenius_err_exp = (alpha + 2.0) / (2.0 * beta);
  r.maxnorm_err_exp = r.frobenius_err_exp + 1.0;
  const double total = 3.0 * alpha / (2.0 * beta);
  if (std::abs(r.runtime_exp + r.frobenius_err_exp - total) > 1e-9 * total || total <= 3.0)
    throw std::logic_error("exponent_report: exponent identity violated");
  return r;
}

ExponentReport exponent_report(std::int64_t m) {
  if (m < 3) throw std::invalid_argument("exponent_report: degenerate family (m < 3)");
  const double alpha = 3.0 * std::log2(static_cast<double>(m));
  const double beta = std::log2(static_cast<double>(m - 1));
  return exponent_report_from(alpha, beta);
}

std::string config_to_json(const STPConfig& cfg, const InnerMultiplier& inner) {
  nlohmann::json j = nlohmann::json::parse(grouplib::triples_to_json(cfg.triples));
  j["N"] = cfg.n_wreath;
  j["inner"] = inner.kind == InnerKind::naive     ? "naive"
               : inner.kind == InnerKind::strassen ? "strassen"
                                                    : "stp";
  j["budget_bytes"] = cfg.budget_bytes;
  return j.dump(2);
}

std::pair<STPConfig, InnerMultiplier> config_from_json(const std::string& text, bool trust) {
  nlohmann::json j = nlohmann::json::parse(text);
  grouplib::STPPTriples t = grouplib::triples_from_json(text, trust);
  const std::uint64_t budget =
      j.contains("budget_bytes") ? j["budget_bytes"].get<std::uint64_t>() : default_budget_bytes();
  STPConfig cfg = build_config(t.group.m, j.at("N").get<std::int64_t>(), budget);
  InnerMultiplier inner;
  const std::string kind = j.value("inner", "naive");
  if (kind == "strassen")
    inner.kind = InnerKind::strassen;
  else if (kind == "stp")
    throw std::invalid_argument("config json: nested stp inner needs a programmatic config");
  else if (kind != "naive")
    throw std::invalid_argument("config json: unknown inner multiplier " + kind);
  return {std::move(cfg), inner};
}

template Sheets<float> embed(const Dense<float>&, const STPConfig&, SetPair);
template Sheets<double> embed(const Dense<double>&, const STPConfig&, SetPair);
template void dft_sheets_forward(Sheets<float>&);
template void dft_sheets_forward(Sheets<double>&);
template void dft_sheets_inverse(Sheets<float>&);
template void dft_sheets_inverse(Sheets<double>&);
template ChiMatrixBatch<float> assemble(const Sheets<float>&, const STPConfig&);
template ChiMatrixBatch<double> assemble(const Sheets<double>&, const STPConfig&);
template ChiMatrixBatch<float> multiply_batch(const ChiMatrixBatch<float>&,
                                              const ChiMatrixBatch<float>&,
                                              const InnerMultiplier&);
template ChiMatrixBatch<double> multiply_batch(const ChiMatrixBatch<double>&,
                                               const ChiMatrixBatch<double>&,
                                               const InnerMultiplier&);
template Sheets<float> disassemble(const ChiMatrixBatch<float>&, const STPConfig&);
template Sheets<double> disassemble(const ChiMatrixBatch<double>&, const STPConfig&);
template Dense<float> extract_output(const Sheets<float>&, const STPConfig&, std::int64_t);
template Dense<double> extract_output(const Sheets<double>&, const STPConfig&, std::int64_t);

}  // namespace wreathmul::stpalg
