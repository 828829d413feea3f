#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wreathmul::grouplib {

/// The abelian group (Z/m)^d.
struct GroupSpec {
  std::int64_t m = 2;  // modulus
  std::int64_t d = 1;  // rank

  GroupSpec() = default;
  GroupSpec(std::int64_t m_, std::int64_t d_) : m(m_), d(d_) {
    if (m < 2 || d < 1) throw std::invalid_argument("GroupSpec needs m >= 2, d >= 1");
  }
  std::int64_t order() const {
    std::int64_t o = 1;
    for (std::int64_t i = 0; i < d; ++i) o *= m;
    return o;
  }
  bool operator==(const GroupSpec&) const = default;
};

/// Element of (Z/m)^d, residues kept reduced.
struct GroupElement {
  std::vector<std::int32_t> residues;

  static GroupElement reduced(std::vector<std::int32_t> r, std::int64_t m) {
    for (auto& v : r) v = static_cast<std::int32_t>(((v % m) + m) % m);
    return GroupElement{std::move(r)};
  }
  bool operator==(const GroupElement&) const = default;
  auto operator<=>(const GroupElement&) const = default;
};

GroupElement ge_add(const GroupElement& a, const GroupElement& b, std::int64_t m);
GroupElement ge_sub(const GroupElement& a, const GroupElement& b, std::int64_t m);
GroupElement ge_neg(const GroupElement& a, std::int64_t m);
bool ge_is_zero(const GroupElement& a);
/// Mixed-radix encoding, first residue most significant.
std::uint64_t ge_encode(const GroupElement& a, std::int64_t m);
GroupElement ge_decode(std::uint64_t code, std::int64_t m, std::int64_t d);

/// Permutation of {0..N-1} in one-line notation.
struct Permutation {
  std::vector<std::int32_t> images;

  static Permutation identity(std::int64_t n);
  bool is_valid() const;
  std::int64_t size() const { return static_cast<std::int64_t>(images.size()); }
  std::int32_t operator()(std::int64_t i) const { return images[static_cast<std::size_t>(i)]; }
  bool operator==(const Permutation&) const = default;
};

Permutation compose(const Permutation& p, const Permutation& q);  // (pq)(i) = p(q(i))
Permutation invert(const Permutation& p);
/// Lexicographic rank of the one-line notation among all N! permutations.
std::int64_t perm_rank(const Permutation& p);
Permutation perm_unrank(std::int64_t n, std::int64_t rank);
std::vector<Permutation> all_permutations(std::int64_t n);
std::int64_t factorial(std::int64_t n);

/// Element (h, pi) of H wr Sym_N with H = (Z/m)^d; h is an N x d residue
/// array stored row-major.
struct WreathElement {
  GroupSpec spec;
  std::int64_t n = 1;               // wreath degree N
  std::vector<std::int32_t> h;      // N*d residues
  Permutation perm;

  static WreathElement identity(const GroupSpec& spec, std::int64_t n);
  std::int32_t& at(std::int64_t row, std::int64_t col) {
    return h[static_cast<std::size_t>(row * spec.d + col)];
  }
  std::int32_t at(std::int64_t row, std::int64_t col) const {
    return h[static_cast<std::size_t>(row * spec.d + col)];
  }
  bool operator==(const WreathElement&) const = default;
};

/// (h, pi)(h', pi') = (h + pi.h', pi pi') with (pi.h')_i = h'_{pi^-1(i)}.
WreathElement wreath_multiply(const WreathElement& a, const WreathElement& b);
/// (h, pi)^-1 = (-(pi^-1 . h), pi^-1).
WreathElement wreath_inverse(const WreathElement& a);

/// N ordered triples (X_i, Y_i, Z_i) of subsets of the group.
struct STPPTriples {
  GroupSpec group;
  std::vector<std::vector<GroupElement>> x, y, z;  // each of length N

  std::int64_t n_triples() const { return static_cast<std::int64_t>(x.size()); }
};

/// Q(S,T) = {s - t : s in S, t in T}, deduplicated.
std::vector<GroupElement> quotient_set(const std::vector<GroupElement>& s,
                                       const std::vector<GroupElement>& t, std::int64_t m);

struct TripleProductViolation {
  std::int64_t i = 0, j = 0, k = 0;
  GroupElement qx, qy, qz;
};

inline constexpr std::uint64_t kDefaultStppBudget = 100'000'000ull;

/// Triple product property for a single triple: q_x + q_y + q_z = 0 with
/// quotients forces q_x = q_y = q_z = 0. Full enumeration.
bool check_triple_product(const std::vector<GroupElement>& x, const std::vector<GroupElement>& y,
                          const std::vector<GroupElement>& z, std::int64_t m,
                          std::uint64_t budget = kDefaultStppBudget);

/// Simultaneous version across all index combinations (i, j, k); on failure
/// the witness names the combination and the offending quotients.
bool check_stpp(const STPPTriples& t, std::uint64_t budget = kDefaultStppBudget);
std::optional<TripleProductViolation> check_stpp_witness(const STPPTriples& t,
                                                         std::uint64_t budget = kDefaultStppBudget);

/// N = 2 triples over (Z/m)^3 with the nonzero range {1..m-1} cycled
/// through the three axes (X: axes 0,1; Y: axes 1,2; Z: axes 2,0).
STPPTriples running_example_triples(std::int64_t m);

/// N triples over (Z/m)^(3*ceil(log2 N)) built from the binary digits of
/// i-1; each X_i has (m-1)^ceil(log2 N) elements.
STPPTriples stpp_family(std::int64_t n_triples, std::int64_t m);

struct GrowthParameters {
  double alpha = 0.0;
  double beta = 0.0;
  bool degenerate = false;  // beta == 0 (m == 2): exponents are unbounded
};

/// Closed-form limits alpha = 3 log2 m, beta = log2(m-1) for the bundled
/// family; refuses triples that are not structurally the bundled family.
GrowthParameters growth_parameters(const STPPTriples& t, std::int64_t n_triples);

/// Brute-force injectivity of (x, sigma, y, tau) -> (x sigma)^-1 (y tau)
/// over the product sets; guarded by instance size.
bool check_unique_quotient(const STPPTriples& t, std::int64_t n_triples,
                           std::uint64_t guard = 10'000'000ull);

/// JSON {m, d, N, triples: [[X_i],[Y_i],[Z_i]]}; loading re-verifies the
/// STPP unless trusted.
std::string triples_to_json(const STPPTriples& t);
STPPTriples triples_from_json(const std::string& text, bool trust = false);
STPPTriples load_triples_file(const std::string& path, bool trust = false);
void save_triples_file(const STPPTriples& t, const std::string& path);

}  // namespace wreathmul::grouplib
