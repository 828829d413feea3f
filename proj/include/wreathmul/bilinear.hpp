#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wreathmul/matrix.hpp"

namespace wreathmul::bilinear {

using matcore::Dense;
using matcore::Matrix;

/// A k-by-k block multiplication rule using t non-scalar products.
/// U, V are indexed by column-wise block position (A and B side), W by
/// row-wise output position; columns index the t products.
struct BilinearScheme {
  std::int64_t k = 0;
  std::int64_t t = 0;
  Dense<double> u;  // k^2 x t
  Dense<double> v;  // k^2 x t
  Dense<double> w;  // k^2 x t
  std::string name;
};

struct SchemeStats {
  std::vector<std::int64_t> a;      // nonzeros per U column
  std::vector<std::int64_t> b;      // nonzeros per V column
  std::vector<std::int64_t> c;      // nonzeros per W row
  std::vector<std::int64_t> alpha;  // ceil(log2 a_s)
  std::vector<std::int64_t> beta;   // ceil(log2 b_s)
  std::vector<std::int64_t> gamma;  // ceil(log2 c_r)
  std::vector<std::int64_t> e;      // e_r = sum_s a_s b_s [w_rs != 0]
  std::int64_t e_max = 0;
  double u_norm = 0.0;
  double v_norm = 0.0;
  double w_norm = 0.0;
};

/// Per-level scheme choice plus the order at which the recursion bottoms
/// out into the naive product.
struct Schedule {
  std::vector<BilinearScheme> levels;
  std::int64_t base_threshold = 8;
};

inline constexpr std::int64_t kDefaultBaseThreshold = 8;

struct VerifyFailure {
  std::int64_t out_row = 0, out_col = 0;  // failing C entry (h, l)
  std::int64_t a_row = 0, a_col = 0;      // elementary-matrix probe for A
  std::int64_t b_row = 0, b_col = 0;      // elementary-matrix probe for B
  double got = 0.0, want = 0.0;
};

/// Exact check that the scheme multiplies k-by-k matrices: evaluates the
/// rule on every pair of elementary matrices. Coefficients in
/// {-1,0,1,+-1/2} evaluate exactly; the tolerance covers irrational ones.
bool verify_scheme(const BilinearScheme& s, double tol = 0x1p-40);
std::optional<VerifyFailure> verify_scheme_diag(const BilinearScheme& s, double tol = 0x1p-40);

/// Strassen's rule, k=2, t=7, coefficients in {-1,0,1}. Product order is
/// fixed: (A11+A22)(B11+B22), (A21+A22)B11, A11(B12-B22), A22(B21-B11),
/// (A11+A12)B22, (A21-A11)(B11+B12), (A12-A22)(B21+B22).
BilinearScheme strassen_scheme();

/// The k^3-product textbook rule expressed as a scheme (t = k^3). k=1 is
/// the trivial scalar scheme.
BilinearScheme naive_scheme(std::int64_t k);

SchemeStats scheme_stats(const BilinearScheme& s);

/// Recursive product with the same scheme at every level. Inputs of any
/// square order are zero-padded up to base_threshold * k^p for the least
/// sufficient p and the result is truncated back.
Matrix multiply_stationary(const Matrix& a, const Matrix& b, const BilinearScheme& s,
                           std::int64_t base_threshold = kDefaultBaseThreshold);

/// Level j uses sched.levels[j]; the padded order is
/// base_threshold * prod_j k(j), and inputs must not exceed it.
Matrix multiply_nonstationary(const Matrix& a, const Matrix& b, const Schedule& sched);

/// Error-bound coefficient for the stationary recursion, evaluated as
/// (1 + max_{r,s}(alpha_s + beta_s + gamma_r + 3) * log_k n)
///   * (e_max * |U| * |V| * |W|)^(log_k n) * eps.
/// n must be a power of k; k must exceed 1.
double error_bound_stationary(const BilinearScheme& s, std::int64_t n, double eps);

/// Same bound with the recursion depth log_k n given directly; lets the
/// asymptotics be evaluated at orders beyond any addressable matrix.
double error_bound_stationary_depth(const BilinearScheme& s, std::int64_t levels, double eps);

/// Non-stationary form: (1 + sum_j max(...)) * prod_j(e_max * norms) * eps.
/// An empty schedule gives coefficient 1 (pure naive base).
double error_bound_nonstationary(const Schedule& sched, double eps);

struct PrePostLevel {
  double t = 1.0;
  double pre_norm = 1.0;
  double post_norm = 1.0;
  double f_pre = 0.0;
  double f_post = 0.0;
};

/// Unrolls mu(n_j) = mu(n_{j+1}) t_j |Post| |Pre|^2 + 2 f_pre t_j |Post|
///                   + f_post |Pre|^2
/// from the innermost level upward; levels are listed outermost first.
double error_bound_prepost(const std::vector<PrePostLevel>& levels, double mu_base);

/// JSON scheme file {k, t, U, V, W} with entries as decimal strings.
/// Loading verifies the scheme and reports the first failing output entry.
std::string scheme_to_json(const BilinearScheme& s);
BilinearScheme scheme_from_json(const std::string& text);
BilinearScheme load_scheme_file(const std::string& path);
void save_scheme_file(const BilinearScheme& s, const std::string& path);

}  // namespace wreathmul::bilinear
