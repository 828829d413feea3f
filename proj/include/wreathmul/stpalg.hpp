#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "wreathmul/flops.hpp"
#include "wreathmul/grouplib.hpp"
#include "wreathmul/matrix.hpp"
#include "wreathmul/wreathfft.hpp"

namespace wreathmul::stpalg {

using matcore::Dense;
using matcore::Matrix;

struct STPConfig;

enum class InnerKind { naive, strassen, stp };

/// What multiplies the per-character N! x N! matrices. The nested stp
/// choice exists for structural testing of the recursion; at desk scale a
/// second level never pays off.
struct InnerMultiplier {
  InnerKind kind = InnerKind::naive;
  std::shared_ptr<const STPConfig> nested;
};

std::uint64_t default_budget_bytes();  // WREATHMUL_BUDGET_BYTES or 4 GiB

/// Everything derived from (m, N): the group H = (Z/m)^(3*ceil(log2 N)),
/// the verified triples, the label enumerations of X, Y, Z, and the
/// character-orbit representatives.
struct STPConfig {
  grouplib::GroupSpec group;
  std::int64_t n_wreath = 2;  // N
  grouplib::STPPTriples triples;
  std::int64_t k_n = 0;      // prod_i |X_i|
  std::int64_t n = 0;        // k_n * N!, the matrix order served
  std::int64_t n_fact = 0;   // N!
  std::int64_t h_order = 0;  // |H|
  std::uint64_t budget_bytes = 0;
  bool degenerate = false;  // m == 2: growth exponents are unbounded

  std::vector<grouplib::Permutation> perms;  // rank order

  // Orbit representatives of the row-permutation action on character
  // tuples: packed nondecreasing row indices, N per representative,
  // plus each orbit's size.
  std::int64_t xi_count = 0;
  std::vector<std::uint32_t> xi_rows;
  std::vector<std::uint8_t> xi_orbit;

  // Label tables: label = vec_rank * N! + perm_rank; per set the rows of
  // each vec choice, flattened [vec][coord][component].
  std::vector<std::int32_t> x_vecs, y_vecs, z_vecs;

  // rank(perms[a] o perms[b]) lookup, rank of each inverse, and inverse
  // one-line images per permutation
  std::vector<std::int32_t> rank_compose;  // n_fact * n_fact
  std::vector<std::int32_t> rank_inverse;  // n_fact
  std::vector<std::int32_t> inv_images;    // n_fact * N

  std::int64_t slots() const { return pow_i64(h_order, n_wreath) * n_fact; }
  static std::int64_t pow_i64(std::int64_t b, std::int64_t e) {
    std::int64_t r = 1;
    for (std::int64_t i = 0; i < e; ++i) r *= b;
    return r;
  }
};

STPConfig build_config(std::int64_t m, std::int64_t n_wreath,
                       std::uint64_t budget_bytes = default_budget_bytes());

/// Which (rows, cols) sets label a matrix in the pipeline.
enum class SetPair { xy, yz, xz };

struct Slot {
  std::int64_t sheet;  // permutation coordinate, by rank
  std::int64_t flat;   // H^N part, flattened
};

/// Destination of entry (row, col): the group quotient of the two labels
/// split into permutation and H^N parts. Injective on each label pair.
Slot embed_slot(const STPConfig& cfg, SetPair pair, std::int64_t row_label,
                std::int64_t col_label);

/// One C-valued function on the wreath group, stored as N! arrays over H^N.
template <typename T>
struct Sheets {
  std::vector<wreathfft::GroupArray<T>> by_perm;
};

/// Per orbit representative, one N! x N! complex matrix, rep-major.
template <typename T>
struct ChiMatrixBatch {
  std::int64_t nf = 0;
  std::int64_t count = 0;
  std::vector<std::complex<T>> data;

  std::complex<T>* at(std::int64_t rep) { return data.data() + rep * nf * nf; }
  const std::complex<T>* at(std::int64_t rep) const { return data.data() + rep * nf * nf; }
};

/// Step 1: pure placement of matrix entries into the sheets; collisions
/// mean the triples do not satisfy the simultaneous triple product
/// property and raise.
template <typename T>
Sheets<T> embed(const Dense<T>& mat, const STPConfig& cfg, SetPair pair);

/// Steps 2 and 6 operate sheet by sheet.
template <typename T>
void dft_sheets_forward(Sheets<T>& s);
template <typename T>
void dft_sheets_inverse(Sheets<T>& s);

/// Step 3: gather transformed values into the per-representative
/// matrices; entry (p, q) of the rep's matrix reads sheet rank(q o p^-1)
/// at the character p . chi0. Pure data movement.
template <typename T>
ChiMatrixBatch<T> assemble(const Sheets<T>& hat, const STPConfig& cfg);

/// Step 4: per-representative product lhs * rhs with the chosen inner
/// multiplier.
template <typename T>
ChiMatrixBatch<T> multiply_batch(const ChiMatrixBatch<T>& lhs, const ChiMatrixBatch<T>& rhs,
                                 const InnerMultiplier& inner = {});

/// Step 5: scatter back to sheets; the value for character delta . chi0 at
/// permutation coordinate sigma is entry (delta, sigma o delta), taking
/// the least witness delta when the representative has symmetry.
template <typename T>
Sheets<T> disassemble(const ChiMatrixBatch<T>& c, const STPConfig& cfg);

/// Step 7: read C(x, z) back out of the inverse-transformed sheets.
template <typename T>
Dense<T> extract_output(const Sheets<T>& c, const STPConfig& cfg, std::int64_t order);

enum StepId {
  kStepEmbed = 0,
  kStepFourier,
  kStepAssemble,
  kStepMultiply,
  kStepDisassemble,
  kStepInverseFourier,
  kStepOutput,
  kStepCount
};
const char* step_name(int id);

struct StepStats {
  std::array<flops::Count, kStepCount> fl{};
  std::array<double, kStepCount> ms{};
};

/// The full pipeline; pads inputs up to cfg.n and truncates the result.
Matrix stp_multiply(const Matrix& a, const Matrix& b, const STPConfig& cfg,
                    const InnerMultiplier& inner = {}, StepStats* profile = nullptr);

/// Frobenius-norm error coefficient of one pipeline level, times eps:
/// f(|H|^N) + 2 N! |H|^(N/2) f(|H|^N) + N! |H|^(N/2) mu_inner.
double predicted_bound_final(const STPConfig& cfg, double mu_inner, double eps);

/// The coarser operator-norm route:
/// |H|^(3N/2) mu_inner + 2 |H|^N (N!)^(-1/2) f(|H|^N) + N! |H|^(N/2) f(|H|^N).
double predicted_bound_crude(const STPConfig& cfg, double mu_inner, double eps);

/// Frobenius-norm mu for the inner multiplier at order nf, used when
/// evaluating the level bound.
double inner_mu_frobenius(const InnerMultiplier& inner, std::int64_t nf);

struct ExponentReport {
  double runtime_exp = 0.0;        // (alpha - 1) / beta
  double frobenius_err_exp = 0.0;  // (alpha + 2) / (2 beta)
  double maxnorm_err_exp = 0.0;    // frobenius + 1
};

/// Closed-form exponents for the bundled family at modulus m (m >= 3).
ExponentReport exponent_report(std::int64_t m);
/// Same arithmetic for explicitly given growth parameters.
ExponentReport exponent_report_from(double alpha, double beta);

/// Config round trip: the triples block plus {m, N, inner, budget_bytes}.
std::string config_to_json(const STPConfig& cfg, const InnerMultiplier& inner = {});
std::pair<STPConfig, InnerMultiplier> config_from_json(const std::string& text, bool trust = false);

}  // namespace wreathmul::stpalg
