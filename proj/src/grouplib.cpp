#include "wreathmul/grouplib.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace wreathmul::grouplib {

GroupElement ge_add(const GroupElement& a, const GroupElement& b, std::int64_t m) {
  GroupElement r = a;
  for (std::size_t i = 0; i < r.residues.size(); ++i) {
    r.residues[i] = static_cast<std::int32_t>((r.residues[i] + b.residues[i]) % m);
  }
  return r;
}

GroupElement ge_sub(const GroupElement& a, const GroupElement& b, std::int64_t m) {
  GroupElement r = a;
  for (std::size_t i = 0; i < r.residues.size(); ++i) {
    r.residues[i] = static_cast<std::int32_t>(((r.residues[i] - b.residues[i]) % m + m) % m);
  }
  return r;
}

GroupElement ge_neg(const GroupElement& a, std::int64_t m) {
  GroupElement r = a;
  for (auto& v : r.residues) v = static_cast<std::int32_t>(((m - v) % m));
  return r;
}

bool ge_is_zero(const GroupElement& a) {
  return std::all_of(a.residues.begin(), a.residues.end(), [](auto v) { return v == 0; });
}

std::uint64_t ge_encode(const GroupElement& a, std::int64_t m) {
  std::uint64_t code = 0;
  for (auto v : a.residues) code = code * static_cast<std::uint64_t>(m) + static_cast<std::uint64_t>(v);
  return code;
}

GroupElement ge_decode(std::uint64_t code, std::int64_t m, std::int64_t d) {
  GroupElement g;
  g.residues.assign(static_cast<std::size_t>(d), 0);
  for (std::int64_t i = d - 1; i >= 0; --i) {
    g.residues[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(code % static_cast<std::uint64_t>(m));
    code /= static_cast<std::uint64_t>(m);
  }
  return g;
}

Permutation Permutation::identity(std::int64_t n) {
  Permutation p;
  p.images.resize(static_cast<std::size_t>(n));
  std::iota(p.images.begin(), p.images.end(), 0);
  return p;
}

bool Permutation::is_valid() const {
  std::vector<bool> seen(images.size(), false);
  for (auto v : images) {
    if (v < 0 || v >= static_cast<std::int32_t>(images.size()) || seen[static_cast<std::size_t>(v)])
      return false;
    seen[static_cast<std::size_t>(v)] = true;
  }
  return true;
}

Permutation compose(const Permutation& p, const Permutation& q) {
  if (p.size() != q.size()) throw std::invalid_argument("compose: size mismatch");
  Permutation r;
  r.images.resize(p.images.size());
  for (std::int64_t i = 0; i < p.size(); ++i) r.images[static_cast<std::size_t>(i)] = p(q(i));
  return r;
}

Permutation invert(const Permutation& p) {
  Permutation r;
  r.images.resize(p.images.size());
  for (std::int64_t i = 0; i < p.size(); ++i) r.images[static_cast<std::size_t>(p(i))] = static_cast<std::int32_t>(i);
  return r;
}

std::int64_t factorial(std::int64_t n) {
  std::int64_t f = 1;
  for (std::int64_t i = 2; i <= n; ++i) f *= i;
  return f;
}

std::int64_t perm_rank(const Permutation& p) {
  const std::int64_t n = p.size();
  std::int64_t rank = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    std::int64_t smaller = 0;
    for (std::int64_t j = i + 1; j < n; ++j)
      if (p(j) < p(i)) ++smaller;
    rank += smaller * factorial(n - 1 - i);
  }
  return rank;
}

Permutation perm_unrank(std::int64_t n, std::int64_t rank) {
  std::vector<std::int32_t> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  Permutation p;
  p.images.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t f = factorial(n - 1 - i);
    const std::int64_t idx = rank / f;
    rank %= f;
    p.images.push_back(pool[static_cast<std::size_t>(idx)]);
    pool.erase(pool.begin() + idx);
  }
  return p;
}

std::vector<Permutation> all_permutations(std::int64_t n) {
  const std::int64_t nf = factorial(n);
  std::vector<Permutation> out;
  out.reserve(static_cast<std::size_t>(nf));
  for (std::int64_t r = 0; r < nf; ++r) out.push_back(perm_unrank(n, r));
  return out;
}

WreathElement WreathElement::identity(const GroupSpec& spec, std::int64_t n) {
  WreathElement e;
  e.spec = spec;
  e.n = n;
  e.h.assign(static_cast<std::size_t>(n * spec.d), 0);
  e.perm = Permutation::identity(n);
  return e;
}

WreathElement wreath_multiply(const WreathElement& a, const WreathElement& b) {
  if (a.spec != b.spec || a.n != b.n) throw std::invalid_argument("wreath_multiply: shape mismatch");
  WreathElement r = a;
  const Permutation pinv = invert(a.perm);
  for (std::int64_t i = 0; i < a.n; ++i) {
    const std::int64_t src = pinv(i);  // (pi . h')_i = h'_{pi^-1(i)}
    for (std::int64_t c = 0; c < a.spec.d; ++c)
      r.at(i, c) = static_cast<std::int32_t>((a.at(i, c) + b.at(src, c)) % a.spec.m);
  }
  r.perm = compose(a.perm, b.perm);
  return r;
}

WreathElement wreath_inverse(const WreathElement& a) {
  WreathElement r = a;
  r.perm = invert(a.perm);
  // -(pi^-1 . h): row i of the result is -h_{pi(i)}
  for (std::int64_t i = 0; i < a.n; ++i) {
    const std::int64_t src = a.perm(i);
    for (std::int64_t c = 0; c < a.spec.d; ++c)
      r.at(i, c) = static_cast<std::int32_t>((a.spec.m - a.at(src, c)) % a.spec.m);
  }
  return r;
}

std::vector<GroupElement> quotient_set(const std::vector<GroupElement>& s,
                                       const std::vector<GroupElement>& t, std::int64_t m) {
  std::vector<GroupElement> out;
  out.reserve(s.size() * t.size());
  for (const auto& a : s)
    for (const auto& b : t) out.push_back(ge_sub(a, b, m));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

std::optional<TripleProductViolation> scan_triple(const std::vector<GroupElement>& qx,
                                                  const std::vector<GroupElement>& qy,
                                                  const std::vector<GroupElement>& qz,
                                                  std::int64_t m, std::int64_t i, std::int64_t j,
                                                  std::int64_t k, bool require_same_index) {
  for (const auto& a : qx)
    for (const auto& b : qy) {
      const GroupElement ab = ge_add(a, b, m);
      for (const auto& c : qz) {
        if (!ge_is_zero(ge_add(ab, c, m))) continue;
        const bool trivial = ge_is_zero(a) && ge_is_zero(b) && ge_is_zero(c);
        if (trivial && (!require_same_index || (i == j && j == k))) continue;
        return TripleProductViolation{i, j, k, a, b, c};
      }
    }
  return std::nullopt;
}

}  // namespace

bool check_triple_product(const std::vector<GroupElement>& x, const std::vector<GroupElement>& y,
                          const std::vector<GroupElement>& z, std::int64_t m,
                          std::uint64_t budget) {
  const auto qx = quotient_set(x, x, m), qy = quotient_set(y, y, m), qz = quotient_set(z, z, m);
  const std::uint64_t work = static_cast<std::uint64_t>(qx.size()) * qy.size() * qz.size();
  if (work > budget) throw std::length_error("check_triple_product: enumeration budget exceeded");
  return !scan_triple(qx, qy, qz, m, 0, 0, 0, /*require_same_index=*/false).has_value();
}

std::optional<TripleProductViolation> check_stpp_witness(const STPPTriples& t,
                                                         std::uint64_t budget) {
  const std::int64_t n = t.n_triples();
  const std::int64_t m = t.group.m;
  // Quotient sets are cached per (i, j) pair; enumeration itself is the
  // full product as in the definition.
  std::vector<std::vector<std::vector<GroupElement>>> qx, qy, qz;
  auto cache = [&](const std::vector<std::vector<GroupElement>>& sets) {
    std::vector<std::vector<std::vector<GroupElement>>> q(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      q[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(n));
      for (std::int64_t j = 0; j < n; ++j)
        q[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            quotient_set(sets[static_cast<std::size_t>(i)], sets[static_cast<std::size_t>(j)], m);
    }
    return q;
  };
  qx = cache(t.x);
  qy = cache(t.y);
  qz = cache(t.z);

  std::uint64_t work = 0;
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j)
      for (std::int64_t k = 0; k < n; ++k)
        work += static_cast<std::uint64_t>(qx[i][j].size()) * qy[j][k].size() * qz[k][i].size();
  if (work > budget) throw std::length_error("check_stpp: enumeration budget exceeded");

  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j)
      for (std::int64_t k = 0; k < n; ++k) {
        auto v = scan_triple(qx[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                             qy[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)],
                             qz[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)], m, i, j,
                             k, /*require_same_index=*/true);
        if (v) return v;
      }
  return std::nullopt;
}

bool check_stpp(const STPPTriples& t, std::uint64_t budget) {
  return !check_stpp_witness(t, budget).has_value();
}

namespace {

std::vector<GroupElement> axis_subset(std::int64_t axis, std::int64_t m) {
  std::vector<GroupElement> out;
  out.reserve(static_cast<std::size_t>(m - 1));
  for (std::int32_t v = 1; v < m; ++v) {
    GroupElement g;
    g.residues.assign(3, 0);
    g.residues[static_cast<std::size_t>(axis)] = v;
    out.push_back(g);
  }
  return out;
}

std::int64_t ceil_log2_i(std::int64_t n) {
  std::int64_t p = 0, v = 1;
  while (v < n) {
    v <<= 1;
    ++p;
  }
  return p;
}

// Product of base subsets across the ell blocks selected by the binary
// digits of i-1 (most significant digit first).
std::vector<GroupElement> digit_product(const std::vector<std::vector<GroupElement>>& base,
                                        std::int64_t index_minus_1, std::int64_t ell,
                                        std::int64_t d_total) {
  std::vector<std::vector<GroupElement> const*> blocks;
  for (std::int64_t b = 0; b < ell; ++b) {
    const std::int64_t digit = (index_minus_1 >> (ell - 1 - b)) & 1;
    blocks.push_back(&base[static_cast<std::size_t>(digit)]);
  }
  std::vector<GroupElement> out;
  std::vector<std::size_t> pick(static_cast<std::size_t>(ell), 0);
  while (true) {
    GroupElement g;
    g.residues.reserve(static_cast<std::size_t>(d_total));
    for (std::int64_t b = 0; b < ell; ++b) {
      const auto& e = (*blocks[static_cast<std::size_t>(b)])[pick[static_cast<std::size_t>(b)]];
      g.residues.insert(g.residues.end(), e.residues.begin(), e.residues.end());
    }
    out.push_back(std::move(g));
    std::int64_t pos = ell - 1;
    while (pos >= 0) {
      if (++pick[static_cast<std::size_t>(pos)] < blocks[static_cast<std::size_t>(pos)]->size()) break;
      pick[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

}  // namespace

STPPTriples running_example_triples(std::int64_t m) {
  if (m < 2) throw std::invalid_argument("running_example_triples: m must be at least 2");
  STPPTriples t;
  t.group = GroupSpec(m, 3);
  for (std::int64_t i = 0; i < 2; ++i) {
    t.x.push_back(axis_subset((0 + i) % 3, m));
    t.y.push_back(axis_subset((1 + i) % 3, m));
    t.z.push_back(axis_subset((2 + i) % 3, m));
  }
  return t;
}

STPPTriples stpp_family(std::int64_t n_triples, std::int64_t m) {
  if (n_triples < 1) throw std::invalid_argument("stpp_family: N must be positive");
  if (m < 2) throw std::invalid_argument("stpp_family: m must be at least 2");
  const std::int64_t ell = std::max<std::int64_t>(1, ceil_log2_i(n_triples));
  const std::int64_t d = 3 * ell;
  std::vector<std::vector<GroupElement>> bx{axis_subset(0, m), axis_subset(1, m)};
  std::vector<std::vector<GroupElement>> by{axis_subset(1, m), axis_subset(2, m)};
  std::vector<std::vector<GroupElement>> bz{axis_subset(2, m), axis_subset(0, m)};
  STPPTriples t;
  t.group = GroupSpec(m, d);
  for (std::int64_t i = 0; i < n_triples; ++i) {
    t.x.push_back(digit_product(bx, i, ell, d));
    t.y.push_back(digit_product(by, i, ell, d));
    t.z.push_back(digit_product(bz, i, ell, d));
  }
  return t;
}

GrowthParameters growth_parameters(const STPPTriples& t, std::int64_t n_triples) {
  if (n_triples < 2) throw std::invalid_argument("growth_parameters: N must be at least 2");
  STPPTriples bundled = stpp_family(n_triples, t.group.m);
  auto sorted = [](std::vector<std::vector<GroupElement>> sets) {
    for (auto& s : sets) std::sort(s.begin(), s.end());
    return sets;
  };
  if (bundled.group != t.group || sorted(bundled.x) != sorted(t.x) ||
      sorted(bundled.y) != sorted(t.y) || sorted(bundled.z) != sorted(t.z))
    throw std::invalid_argument(
        "growth_parameters: closed forms are only known for the bundled family");
  GrowthParameters g;
  g.alpha = 3.0 * std::log2(static_cast<double>(t.group.m));
  g.beta = std::log2(static_cast<double>(t.group.m - 1));
  g.degenerate = (t.group.m == 2);
  return g;
}

bool check_unique_quotient(const STPPTriples& t, std::int64_t n_triples, std::uint64_t guard) {
  const std::int64_t n = n_triples;
  const std::int64_t nf = factorial(n);
  std::uint64_t xcount = 1, ycount = 1;
  for (std::int64_t i = 0; i < n; ++i) {
    xcount *= t.x[static_cast<std::size_t>(i)].size();
    ycount *= t.y[static_cast<std::size_t>(i)].size();
  }
  const std::uint64_t total = xcount * static_cast<std::uint64_t>(nf) * ycount * static_cast<std::uint64_t>(nf);
  if (total > guard) throw std::length_error("check_unique_quotient: instance too large");

  const auto perms = all_permutations(n);
  // Enumerate tuples of the product set via mixed-radix counters.
  auto nth_tuple = [&](const std::vector<std::vector<GroupElement>>& sets, std::uint64_t idx) {
    WreathElement w = WreathElement::identity(t.group, n);
    for (std::int64_t i = n - 1; i >= 0; --i) {
      const auto& s = sets[static_cast<std::size_t>(i)];
      const auto pick = idx % s.size();
      idx /= s.size();
      for (std::int64_t c = 0; c < t.group.d; ++c)
        w.at(i, c) = s[pick].residues[static_cast<std::size_t>(c)];
    }
    return w;
  };

  std::unordered_set<std::string> seen;
  seen.reserve(static_cast<std::size_t>(total));
  for (std::uint64_t xi = 0; xi < xcount; ++xi)
    for (const auto& sigma : perms) {
      WreathElement x = nth_tuple(t.x, xi);
      x.perm = sigma;
      const WreathElement xinv = wreath_inverse(x);
      for (std::uint64_t yi = 0; yi < ycount; ++yi)
        for (const auto& tau : perms) {
          WreathElement y = nth_tuple(t.y, yi);
          y.perm = tau;
          const WreathElement q = wreath_multiply(xinv, y);
          std::string key(reinterpret_cast<const char*>(q.h.data()), q.h.size() * sizeof(q.h[0]));
          key.append(reinterpret_cast<const char*>(q.perm.images.data()),
                     q.perm.images.size() * sizeof(q.perm.images[0]));
          if (!seen.insert(std::move(key)).second) return false;
        }
    }
  return true;
}

std::string triples_to_json(const STPPTriples& t) {
  nlohmann::json j;
  j["m"] = t.group.m;
  j["d"] = t.group.d;
  j["N"] = t.n_triples();
  auto dump_sets = [](const std::vector<std::vector<GroupElement>>& sets) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : sets) {
      nlohmann::json set = nlohmann::json::array();
      for (const auto& g : s) set.push_back(g.residues);
      arr.push_back(set);
    }
    return arr;
  };
  j["triples"] = nlohmann::json::array({dump_sets(t.x), dump_sets(t.y), dump_sets(t.z)});
  return j.dump(2);
}

STPPTriples triples_from_json(const std::string& text, bool trust) {
  nlohmann::json j = nlohmann::json::parse(text);
  STPPTriples t;
  t.group = GroupSpec(j.at("m").get<std::int64_t>(), j.at("d").get<std::int64_t>());
  const auto n = j.at("N").get<std::int64_t>();
  const auto& trip = j.at("triples");
  if (!trip.is_array() || trip.size() != 3) throw std::invalid_argument("triples json: need [X, Y, Z]");
  auto load_sets = [&](const nlohmann::json& arr) {
    if (static_cast<std::int64_t>(arr.size()) != n)
      throw std::invalid_argument("triples json: wrong number of triples");
    std::vector<std::vector<GroupElement>> sets;
    for (const auto& sj : arr) {
      std::vector<GroupElement> s;
      for (const auto& gj : sj) {
        GroupElement g;
        g.residues = gj.get<std::vector<std::int32_t>>();
        if (static_cast<std::int64_t>(g.residues.size()) != t.group.d)
          throw std::invalid_argument("triples json: element rank mismatch");
        g = GroupElement::reduced(std::move(g.residues), t.group.m);
        s.push_back(std::move(g));
      }
      sets.push_back(std::move(s));
    }
    return sets;
  };
  t.x = load_sets(trip[0]);
  t.y = load_sets(trip[1]);
  t.z = load_sets(trip[2]);
  if (!trust) {
    if (auto v = check_stpp_witness(t)) {
      std::ostringstream msg;
      msg << "triples rejected: simultaneous triple product property fails at (i,j,k) = (" << v->i
          << "," << v->j << "," << v->k << ")";
      throw std::invalid_argument(msg.str());
    }
  }
  return t;
}

STPPTriples load_triples_file(const std::string& path, bool trust) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open triples file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return triples_from_json(ss.str(), trust);
}

void save_triples_file(const STPPTriples& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write triples file: " + path);
  out << triples_to_json(t) << '\n';
}

}  // namespace wreathmul::grouplib
