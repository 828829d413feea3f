#include "wreathmul/bilinear.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace wreathmul::bilinear {

namespace {

// Block positions: A and B blocks are indexed column-wise, C blocks
// row-wise, matching the u/v/w row layout.
inline std::int64_t colwise(std::int64_t r, std::int64_t c, std::int64_t k) { return c * k + r; }
inline std::int64_t rowwise(std::int64_t r, std::int64_t c, std::int64_t k) { return r * k + c; }

std::int64_t ceil_log2(std::int64_t n) {
  std::int64_t p = 0;
  std::int64_t v = 1;
  while (v < n) {
    v <<= 1;
    ++p;
  }
  return p;
}

struct NonzeroTerm {
  std::int64_t block;
  double coeff;
};

// Per product s, the nonzero (block, coefficient) pairs of one of U/V/W's
// columns; for W, per output row r.
std::vector<std::vector<NonzeroTerm>> column_terms(const Dense<double>& m) {
  std::vector<std::vector<NonzeroTerm>> out(static_cast<std::size_t>(m.cols));
  for (std::int64_t s = 0; s < m.cols; ++s)
    for (std::int64_t i = 0; i < m.rows; ++i) {
      const double w = m.at(i, s).real();
      if (w != 0.0) out[static_cast<std::size_t>(s)].push_back({i, w});
    }
  return out;
}

std::vector<std::vector<NonzeroTerm>> row_terms(const Dense<double>& m) {
  std::vector<std::vector<NonzeroTerm>> out(static_cast<std::size_t>(m.rows));
  for (std::int64_t r = 0; r < m.rows; ++r)
    for (std::int64_t s = 0; s < m.cols; ++s) {
      const double w = m.at(r, s).real();
      if (w != 0.0) out[static_cast<std::size_t>(r)].push_back({s, w});
    }
  return out;
}

template <typename T>
struct SchemePlan {
  std::int64_t k, t;
  std::vector<std::vector<NonzeroTerm>> ucols, vcols, wrows;
  std::vector<std::complex<T>> ucoef, vcoef, wcoef;  // rounded once to tier T

  explicit SchemePlan(const BilinearScheme& s)
      : k(s.k), t(s.t), ucols(column_terms(s.u)), vcols(column_terms(s.v)), wrows(row_terms(s.w)) {
    auto round_all = [](const std::vector<std::vector<NonzeroTerm>>& groups,
                        std::vector<std::complex<T>>& out) {
      for (const auto& g : groups)
        for (const auto& term : g) out.push_back(std::complex<T>(static_cast<T>(term.coeff), T(0)));
    };
    round_all(ucols, ucoef);
    round_all(vcols, vcoef);
    round_all(wrows, wcoef);
  }

  // flattened coefficient offsets per group
  std::size_t u_offset(std::size_t s) const { return offset(ucols, s); }
  std::size_t v_offset(std::size_t s) const { return offset(vcols, s); }
  std::size_t w_offset(std::size_t r) const { return offset(wrows, r); }

 private:
  static std::size_t offset(const std::vector<std::vector<NonzeroTerm>>& groups, std::size_t idx) {
    std::size_t o = 0;
    for (std::size_t i = 0; i < idx; ++i) o += groups[i].size();
    return o;
  }
};

// Linear combination of blocks of `src`, one output entry at a time:
// coefficient products first, then the fixed pairwise tree.
template <typename T>
Dense<T> combine_blocks(const Dense<T>& src, std::int64_t k, std::int64_t bs,
                        const std::vector<NonzeroTerm>& terms, const std::complex<T>* coef,
                        bool colwise_blocks) {
  Dense<T> out(bs, bs);
  if (terms.empty()) return out;
  std::vector<std::complex<T>> prod(terms.size());
  std::vector<const std::complex<T>*> bases(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::int64_t blk = terms[i].block;
    const std::int64_t br = colwise_blocks ? blk % k : blk / k;
    const std::int64_t bc = colwise_blocks ? blk / k : blk % k;
    bases[i] = &src.a[static_cast<std::size_t>((br * bs) * src.cols + bc * bs)];
  }
  flops::mul(terms.size() * static_cast<std::uint64_t>(bs * bs));
  flops::add((terms.size() - 1) * static_cast<std::uint64_t>(bs * bs));
  for (std::int64_t r = 0; r < bs; ++r)
    for (std::int64_t c = 0; c < bs; ++c) {
      for (std::size_t i = 0; i < terms.size(); ++i)
        prod[i] = coef[i] * bases[i][r * src.cols + c];
      out.at(r, c) = matcore::detail::pairwise_tree(std::span<const std::complex<T>>(prod));
    }
  return out;
}

template <typename T>
Dense<T> multiply_levels(const Dense<T>& a, const Dense<T>& b,
                         const std::vector<SchemePlan<T>>& plans, std::size_t level,
                         std::int64_t threshold) {
  const std::int64_t n = a.rows;
  if (n <= threshold || level == plans.size()) {
    for (std::size_t j = level; j < plans.size(); ++j)
      if (plans[j].k != 1)
        throw std::invalid_argument("schedule does not divide the padded order");
    return matcore::naive_multiply(a, b);
  }
  const auto& plan = plans[level];
  if (plan.k == 1)  // trivial level, nothing to split
    return multiply_levels(a, b, plans, level + 1, threshold);
  if (n % plan.k != 0) throw std::invalid_argument("block order does not divide matrix order");
  const std::int64_t bs = n / plan.k;

  std::vector<Dense<T>> products(static_cast<std::size_t>(plan.t));
  const bool top = (level == 0);
#pragma omp parallel for schedule(dynamic) if (top)
  for (std::int64_t s = 0; s < plan.t; ++s) {
    const auto su = static_cast<std::size_t>(s);
    Dense<T> as = combine_blocks(a, plan.k, bs, plan.ucols[su], plan.ucoef.data() + plan.u_offset(su),
                                 /*colwise_blocks=*/true);
    Dense<T> bsm = combine_blocks(b, plan.k, bs, plan.vcols[su],
                                  plan.vcoef.data() + plan.v_offset(su), /*colwise_blocks=*/true);
    products[su] = multiply_levels(as, bsm, plans, level + 1, threshold);
  }

  Dense<T> c(n, n);
  std::vector<std::complex<T>> terms;
  for (std::int64_t r = 0; r < plan.k * plan.k; ++r) {
    const auto ru = static_cast<std::size_t>(r);
    const auto& wrow = plan.wrows[ru];
    if (wrow.empty()) continue;
    const std::complex<T>* coef = plan.wcoef.data() + plan.w_offset(ru);
    const std::int64_t br = r / plan.k, bc = r % plan.k;
    terms.resize(wrow.size());
    flops::mul(wrow.size() * static_cast<std::uint64_t>(bs * bs));
    flops::add((wrow.size() - 1) * static_cast<std::uint64_t>(bs * bs));
    for (std::int64_t i = 0; i < bs; ++i)
      for (std::int64_t j = 0; j < bs; ++j) {
        for (std::size_t q = 0; q < wrow.size(); ++q)
          terms[q] = coef[q] * products[static_cast<std::size_t>(wrow[q].block)].at(i, j);
        c.at(br * bs + i, bc * bs + j) =
            matcore::detail::pairwise_tree(std::span<const std::complex<T>>(terms));
      }
  }
  return c;
}

std::int64_t schedule_order(const Schedule& sched) {
  std::int64_t n = sched.base_threshold;
  for (const auto& s : sched.levels) n *= s.k;
  return n;
}

template <typename T>
Dense<T> run_schedule(const Dense<T>& a, const Dense<T>& b, const Schedule& sched) {
  if (a.rows != a.cols || b.rows != b.cols || a.rows != b.rows)
    throw matcore::DimensionMismatch("multiply: inputs must be square and of equal order");
  const std::int64_t n = a.rows;
  const std::int64_t target = schedule_order(sched);
  if (n > target) throw std::invalid_argument("schedule too small for input order");
  std::vector<SchemePlan<T>> plans;
  plans.reserve(sched.levels.size());
  for (const auto& s : sched.levels) plans.emplace_back(s);
  if (n == target) {
    return multiply_levels(a, b, plans, 0, sched.base_threshold);
  }
  Dense<T> ap = matcore::pad_to(a, target, target);
  Dense<T> bp = matcore::pad_to(b, target, target);
  Dense<T> cp = multiply_levels(ap, bp, plans, 0, sched.base_threshold);
  Dense<T> c(n, n);
  for (std::int64_t r = 0; r < n; ++r)
    for (std::int64_t col = 0; col < n; ++col) c.at(r, col) = cp.at(r, col);
  return c;
}

Schedule stationary_schedule(const BilinearScheme& s, std::int64_t n, std::int64_t threshold) {
  if (threshold < 1) throw std::invalid_argument("base_threshold must be positive");
  Schedule sched;
  sched.base_threshold = threshold;
  if (s.k == 1) {
    if (n > threshold)
      throw std::invalid_argument("k=1 scheme cannot serve orders above the base threshold");
    return sched;
  }
  std::int64_t cap = threshold;
  while (cap < n) {
    cap *= s.k;
    sched.levels.push_back(s);
  }
  return sched;
}

}  // namespace

bool verify_scheme(const BilinearScheme& s, double tol) {
  return !verify_scheme_diag(s, tol).has_value();
}

std::optional<VerifyFailure> verify_scheme_diag(const BilinearScheme& s, double tol) {
  const std::int64_t k = s.k, t = s.t;
  const std::int64_t kk = k * k;
  if (k <= 0 || t <= 0 || s.u.rows != kk || s.v.rows != kk || s.w.rows != kk || s.u.cols != t ||
      s.v.cols != t || s.w.cols != t)
    throw std::invalid_argument("malformed scheme dimensions");
  // Evaluate on every pair of elementary matrices E(pq), E(rs). The true
  // product has a single 1 at (p, s) when q == r, else is zero.
  std::vector<double> lin_u(static_cast<std::size_t>(t)), lin_v(static_cast<std::size_t>(t));
  for (std::int64_t p = 0; p < k; ++p)
    for (std::int64_t q = 0; q < k; ++q) {
      const std::int64_t xi = colwise(p, q, k);
      for (std::int64_t sidx = 0; sidx < t; ++sidx)
        lin_u[static_cast<std::size_t>(sidx)] = s.u.at(xi, sidx).real();
      for (std::int64_t r = 0; r < k; ++r)
        for (std::int64_t sc = 0; sc < k; ++sc) {
          const std::int64_t yj = colwise(r, sc, k);
          for (std::int64_t sidx = 0; sidx < t; ++sidx)
            lin_v[static_cast<std::size_t>(sidx)] = s.v.at(yj, sidx).real();
          for (std::int64_t h = 0; h < k; ++h)
            for (std::int64_t l = 0; l < k; ++l) {
              double got = 0.0;
              const std::int64_t wr = rowwise(h, l, k);
              for (std::int64_t sidx = 0; sidx < t; ++sidx)
                got += s.w.at(wr, sidx).real() * lin_u[static_cast<std::size_t>(sidx)] *
                       lin_v[static_cast<std::size_t>(sidx)];
              const double want = (q == r && h == p && l == sc) ? 1.0 : 0.0;
              if (std::abs(got - want) > tol)
                return VerifyFailure{h, l, p, q, r, sc, got, want};
            }
        }
    }
  return std::nullopt;
}

BilinearScheme strassen_scheme() {
  BilinearScheme s;
  s.k = 2;
  s.t = 7;
  s.name = "strassen";
  s.u = Dense<double>(4, 7);
  s.v = Dense<double>(4, 7);
  s.w = Dense<double>(4, 7);
  // A blocks column-wise: x0=A11, x1=A21, x2=A12, x3=A22; same for B.
  // C rows row-wise: r0=C11, r1=C12, r2=C21, r3=C22.
  const double U[4][7] = {{1, 0, 1, 0, 1, -1, 0},
                          {0, 1, 0, 0, 0, 1, 0},
                          {0, 0, 0, 0, 1, 0, 1},
                          {1, 1, 0, 1, 0, 0, -1}};
  const double V[4][7] = {{1, 1, 0, -1, 0, 1, 0},
                          {0, 0, 0, 1, 0, 0, 1},
                          {0, 0, 1, 0, 0, 1, 0},
                          {1, 0, -1, 0, 1, 0, 1}};
  const double W[4][7] = {{1, 0, 0, 1, -1, 0, 1},
                          {0, 0, 1, 0, 1, 0, 0},
                          {0, 1, 0, 1, 0, 0, 0},
                          {1, -1, 1, 0, 0, 1, 0}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 7; ++j) {
      s.u.at(i, j) = U[i][j];
      s.v.at(i, j) = V[i][j];
      s.w.at(i, j) = W[i][j];
    }
  return s;
}

BilinearScheme naive_scheme(std::int64_t k) {
  if (k < 1) throw std::invalid_argument("naive_scheme: k must be positive");
  BilinearScheme s;
  s.k = k;
  s.t = k * k * k;
  s.name = "naive" + std::to_string(k);
  s.u = Dense<double>(k * k, s.t);
  s.v = Dense<double>(k * k, s.t);
  s.w = Dense<double>(k * k, s.t);
  std::int64_t col = 0;
  for (std::int64_t i = 0; i < k; ++i)
    for (std::int64_t j = 0; j < k; ++j)
      for (std::int64_t l = 0; l < k; ++l, ++col) {
        s.u.at(colwise(i, j, k), col) = 1.0;
        s.v.at(colwise(j, l, k), col) = 1.0;
        s.w.at(rowwise(i, l, k), col) = 1.0;
      }
  return s;
}

SchemeStats scheme_stats(const BilinearScheme& s) {
  SchemeStats st;
  const std::int64_t kk = s.k * s.k;
  st.a.resize(static_cast<std::size_t>(s.t));
  st.b.resize(static_cast<std::size_t>(s.t));
  st.c.assign(static_cast<std::size_t>(kk), 0);
  for (std::int64_t col = 0; col < s.t; ++col) {
    std::int64_t na = 0, nb = 0;
    for (std::int64_t i = 0; i < kk; ++i) {
      if (s.u.at(i, col).real() != 0.0) ++na;
      if (s.v.at(i, col).real() != 0.0) ++nb;
    }
    st.a[static_cast<std::size_t>(col)] = na;
    st.b[static_cast<std::size_t>(col)] = nb;
  }
  for (std::int64_t r = 0; r < kk; ++r) {
    std::int64_t nc = 0;
    for (std::int64_t col = 0; col < s.t; ++col)
      if (s.w.at(r, col).real() != 0.0) ++nc;
    st.c[static_cast<std::size_t>(r)] = nc;
  }
  for (std::int64_t col = 0; col < s.t; ++col) {
    st.alpha.push_back(ceil_log2(std::max<std::int64_t>(1, st.a[static_cast<std::size_t>(col)])));
    st.beta.push_back(ceil_log2(std::max<std::int64_t>(1, st.b[static_cast<std::size_t>(col)])));
  }
  for (std::int64_t r = 0; r < kk; ++r) {
    st.gamma.push_back(ceil_log2(std::max<std::int64_t>(1, st.c[static_cast<std::size_t>(r)])));
    std::int64_t er = 0;
    for (std::int64_t col = 0; col < s.t; ++col)
      if (s.w.at(r, col).real() != 0.0)
        er += st.a[static_cast<std::size_t>(col)] * st.b[static_cast<std::size_t>(col)];
    st.e.push_back(er);
    st.e_max = std::max(st.e_max, er);
  }
  st.u_norm = matcore::norm(s.u, matcore::NormKind::max_entry);
  st.v_norm = matcore::norm(s.v, matcore::NormKind::max_entry);
  st.w_norm = matcore::norm(s.w, matcore::NormKind::max_entry);
  return st;
}

Matrix multiply_stationary(const Matrix& a, const Matrix& b, const BilinearScheme& s,
                           std::int64_t base_threshold) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw matcore::DimensionMismatch("multiply_stationary: inputs must be square, equal order");
  Schedule sched = stationary_schedule(s, a.rows(), base_threshold);
  return multiply_nonstationary(a, b, sched);
}

Matrix multiply_nonstationary(const Matrix& a, const Matrix& b, const Schedule& sched) {
  if (a.precision() != b.precision()) throw PrecisionMismatch{};
  if (a.precision() == Precision::working) return Matrix(run_schedule(a.f32(), b.f32(), sched));
  return Matrix(run_schedule(a.f64(), b.f64(), sched));
}

double error_bound_stationary(const BilinearScheme& s, std::int64_t n, double eps) {
  if (s.k <= 1) throw std::invalid_argument("error_bound_stationary: needs block order k >= 2");
  std::int64_t p = 0, v = 1;
  while (v < n) {
    v *= s.k;
    ++p;
  }
  if (v != n) throw std::invalid_argument("error_bound_stationary: n is not a power of k");
  return error_bound_stationary_depth(s, p, eps);
}

double error_bound_stationary_depth(const BilinearScheme& s, std::int64_t levels, double eps) {
  if (s.k <= 1) throw std::invalid_argument("error_bound_stationary: needs block order k >= 2");
  if (levels < 0) throw std::invalid_argument("error_bound_stationary: negative depth");
  SchemeStats st = scheme_stats(s);
  std::int64_t mab = 0, mg = 0;
  for (std::size_t i = 0; i < st.alpha.size(); ++i) mab = std::max(mab, st.alpha[i] + st.beta[i]);
  for (auto g : st.gamma) mg = std::max(mg, g);
  const double depth = static_cast<double>(levels);
  const double prefactor = 1.0 + static_cast<double>(mab + mg + 3) * depth;
  const double growth = std::pow(static_cast<double>(st.e_max) * st.u_norm * st.v_norm * st.w_norm,
                                 depth);
  return prefactor * growth * eps;
}

double error_bound_nonstationary(const Schedule& sched, double eps) {
  double sum = 0.0;
  double prod = 1.0;
  for (const auto& s : sched.levels) {
    SchemeStats st = scheme_stats(s);
    std::int64_t mab = 0, mg = 0;
    for (std::size_t i = 0; i < st.alpha.size(); ++i) mab = std::max(mab, st.alpha[i] + st.beta[i]);
    for (auto g : st.gamma) mg = std::max(mg, g);
    sum += static_cast<double>(mab + mg + 3);
    prod *= static_cast<double>(st.e_max) * st.u_norm * st.v_norm * st.w_norm;
  }
  return (1.0 + sum) * prod * eps;
}

double error_bound_prepost(const std::vector<PrePostLevel>& levels, double mu_base) {
  double mu = mu_base;
  for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
    if (it->t < 0 || it->pre_norm < 0 || it->post_norm < 0 || it->f_pre < 0 || it->f_post < 0)
      throw std::invalid_argument("error_bound_prepost: negative level quantity");
    mu = mu * it->t * it->post_norm * it->pre_norm * it->pre_norm +
         2.0 * it->f_pre * it->t * it->post_norm + it->f_post * it->pre_norm * it->pre_norm;
  }
  return mu;
}

namespace {

std::string coeff_string(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json matrix_to_strings(const Dense<double>& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::int64_t r = 0; r < m.rows; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::int64_t c = 0; c < m.cols; ++c) row.push_back(coeff_string(m.at(r, c).real()));
    rows.push_back(row);
  }
  return rows;
}

Dense<double> strings_to_matrix(const nlohmann::json& rows, std::int64_t r, std::int64_t c,
                                const char* which) {
  if (!rows.is_array() || static_cast<std::int64_t>(rows.size()) != r)
    throw std::invalid_argument(std::string("scheme json: bad row count in ") + which);
  Dense<double> m(r, c);
  for (std::int64_t i = 0; i < r; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<std::int64_t>(row.size()) != c)
      throw std::invalid_argument(std::string("scheme json: bad column count in ") + which);
    for (std::int64_t j = 0; j < c; ++j)
      m.at(i, j) = std::stod(row[static_cast<std::size_t>(j)].get<std::string>());
  }
  return m;
}

}  // namespace

std::string scheme_to_json(const BilinearScheme& s) {
  nlohmann::json j;
  j["k"] = s.k;
  j["t"] = s.t;
  j["U"] = matrix_to_strings(s.u);
  j["V"] = matrix_to_strings(s.v);
  j["W"] = matrix_to_strings(s.w);
  return j.dump(2);
}

BilinearScheme scheme_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  BilinearScheme s;
  s.k = j.at("k").get<std::int64_t>();
  s.t = j.at("t").get<std::int64_t>();
  const std::int64_t kk = s.k * s.k;
  s.u = strings_to_matrix(j.at("U"), kk, s.t, "U");
  s.v = strings_to_matrix(j.at("V"), kk, s.t, "V");
  s.w = strings_to_matrix(j.at("W"), kk, s.t, "W");
  if (auto fail = verify_scheme_diag(s)) {
    std::ostringstream msg;
    msg << "scheme rejected: output entry (" << fail->out_row + 1 << "," << fail->out_col + 1
        << ") is wrong on probe A=E(" << fail->a_row + 1 << "," << fail->a_col + 1 << "), B=E("
        << fail->b_row + 1 << "," << fail->b_col + 1 << "): got " << fail->got << ", want "
        << fail->want;
    throw std::invalid_argument(msg.str());
  }
  return s;
}

BilinearScheme load_scheme_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open scheme file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return scheme_from_json(ss.str());
}

void save_scheme_file(const BilinearScheme& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write scheme file: " + path);
  out << scheme_to_json(s) << '\n';
}

}  // namespace wreathmul::bilinear
