#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "wreathmul/grouplib.hpp"
#include "wreathmul/rng.hpp"

using namespace wreathmul;
using namespace wreathmul::grouplib;

namespace {

WreathElement random_element(const GroupSpec& spec, std::int64_t n, CounterRng& rng) {
  WreathElement w = WreathElement::identity(spec, n);
  for (auto& v : w.h) v = static_cast<std::int32_t>(rng.next_below(static_cast<std::uint64_t>(spec.m)));
  w.perm = perm_unrank(n, static_cast<std::int64_t>(rng.next_below(
                              static_cast<std::uint64_t>(factorial(n)))));
  return w;
}

WreathElement make_element(const GroupSpec& spec, std::vector<std::int32_t> h,
                           std::vector<std::int32_t> perm) {
  WreathElement w = WreathElement::identity(spec, static_cast<std::int64_t>(perm.size()));
  w.h = std::move(h);
  w.perm.images = std::move(perm);
  return w;
}

// the coordinatewise form of the product law: (h pi)(h' pi') has
// i-th coordinate h_i + h'_{pi^-1(i)}
WreathElement multiply_coordinatewise(const WreathElement& a, const WreathElement& b) {
  WreathElement r = a;
  const Permutation pinv = invert(a.perm);
  for (std::int64_t i = 0; i < a.n; ++i)
    for (std::int64_t c = 0; c < a.spec.d; ++c)
      r.at(i, c) = static_cast<std::int32_t>((a.at(i, c) + b.at(pinv(i), c)) % a.spec.m);
  r.perm = compose(a.perm, b.perm);
  return r;
}

std::vector<GroupElement> sorted(std::vector<GroupElement> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("permutation rank round trip and composition") {
  for (std::int64_t n : {2, 3, 4}) {
    const std::int64_t nf = factorial(n);
    for (std::int64_t r = 0; r < nf; ++r) {
      auto p = perm_unrank(n, r);
      CHECK(p.is_valid());
      CHECK(perm_rank(p) == r);
      CHECK(perm_rank(compose(p, invert(p))) == 0);
    }
  }
  // ranks enumerate one-line notation lexicographically
  CHECK(perm_unrank(3, 0).images == std::vector<std::int32_t>{0, 1, 2});
  CHECK(perm_unrank(3, 5).images == std::vector<std::int32_t>{2, 1, 0});
}

TEST_CASE("wreath multiplication swaps the second factor's rows") {
  // (X, -1)(Y, -1): rows of Y are permuted before adding, permutation
  // parts compose to the identity
  GroupSpec spec(16, 3);
  auto x = make_element(spec, {1, 2, 3, 4, 5, 6}, {1, 0});
  auto y = make_element(spec, {7, 8, 9, 10, 11, 12}, {1, 0});
  auto p = wreath_multiply(x, y);
  CHECK(p.perm.images == std::vector<std::int32_t>{0, 1});
  CHECK(p.h == std::vector<std::int32_t>{1 + 10, 2 + 11, 3 + 12, 4 + 7, 5 + 8, 6 + 9});
}

TEST_CASE("identity, inverses, involution") {
  GroupSpec spec(16, 3);
  CounterRng rng(404);
  const auto e = WreathElement::identity(spec, 2);
  for (int i = 0; i < 200; ++i) {
    auto g = random_element(spec, 2, rng);
    CHECK(wreath_multiply(e, g) == g);
    CHECK(wreath_multiply(g, e) == g);
    CHECK(wreath_multiply(g, wreath_inverse(g)) == e);
    CHECK(wreath_multiply(wreath_inverse(g), g) == e);
    CHECK(wreath_inverse(wreath_inverse(g)) == g);
  }
}

TEST_CASE("group axioms on random triples") {
  struct Shape {
    std::int64_t m, n, d;
  };
  for (auto [m, n, d] : {Shape{16, 2, 3}, Shape{4, 2, 3}, Shape{2, 3, 6}}) {
    GroupSpec spec(m, d);
    CounterRng rng(static_cast<std::uint64_t>(m * 100 + n));
    for (int i = 0; i < 1000; ++i) {
      auto a = random_element(spec, n, rng);
      auto b = random_element(spec, n, rng);
      auto c = random_element(spec, n, rng);
      CHECK(wreath_multiply(wreath_multiply(a, b), c) ==
            wreath_multiply(a, wreath_multiply(b, c)));
      CHECK(wreath_multiply(a, b) == multiply_coordinatewise(a, b));
    }
  }
}

TEST_CASE("quotient sets") {
  // the full axis subgroup is closed under differences
  std::vector<GroupElement> subgroup;
  for (std::int32_t v = 0; v < 16; ++v)
    subgroup.push_back(GroupElement{{v, 0, 0}});
  CHECK(sorted(quotient_set(subgroup, subgroup, 16)) == sorted(subgroup));

  std::vector<GroupElement> zero{GroupElement{{0, 0, 0}}};
  CHECK(quotient_set(zero, zero, 16) == zero);

  // zero-excluding axis set: the 29 integer differences of {1..15} reduce
  // mod 16 onto every residue of that axis
  auto t = running_example_triples(16);
  auto q = quotient_set(t.x[0], t.x[0], 16);
  CHECK(q.size() == 16);
  for (const auto& g : q) {
    CHECK(g.residues[1] == 0);
    CHECK(g.residues[2] == 0);
  }
}

TEST_CASE("triple product property of the axis subgroups") {
  std::vector<GroupElement> x, y, z;
  for (std::int32_t v = 0; v < 16; ++v) {
    x.push_back(GroupElement{{v, 0, 0}});
    y.push_back(GroupElement{{0, v, 0}});
    z.push_back(GroupElement{{0, 0, v}});
  }
  CHECK(check_triple_product(x, y, z, 16));

  // the full group fails: 1 + 1 + 2 = 0 mod 4
  std::vector<GroupElement> full;
  for (std::int32_t v = 0; v < 4; ++v) full.push_back(GroupElement{{v}});
  CHECK(!check_triple_product(full, full, full, 4));

  // singletons always pass
  CHECK(check_triple_product({GroupElement{{3, 1, 0}}}, {GroupElement{{0, 2, 2}}},
                             {GroupElement{{1, 1, 1}}}, 4));
}

TEST_CASE("running example triples") {
  auto t = running_example_triples(16);
  CHECK(t.n_triples() == 2);
  for (const auto& s : t.x) CHECK(s.size() == 15);
  CHECK(check_stpp(t));

  auto t2 = running_example_triples(2);
  for (const auto& s : t2.x) CHECK(s.size() == 1);
  CHECK(check_stpp(t2));

  auto t4 = running_example_triples(4);
  for (const auto& s : t4.x) CHECK(s.size() == 3);
  CHECK(check_stpp(t4));

  CHECK_THROWS_AS(running_example_triples(1), std::invalid_argument);
}

TEST_CASE("breaking the second triple produces a witness") {
  auto t = running_example_triples(16);
  t.x[1] = t.x[0];
  auto v = check_stpp_witness(t);
  REQUIRE(v.has_value());
  CHECK(!(v->i == v->j && v->j == v->k));
}

TEST_CASE("single triple reduces to the plain triple product property") {
  auto t = running_example_triples(8);
  STPPTriples single;
  single.group = t.group;
  single.x = {t.x[0]};
  single.y = {t.y[0]};
  single.z = {t.z[0]};
  CHECK(check_stpp(single) == check_triple_product(single.x[0], single.y[0], single.z[0], 8));
}

TEST_CASE("stpp_family construction") {
  // N = 2 recovers the running example
  auto fam = stpp_family(2, 16);
  auto run = running_example_triples(16);
  CHECK(fam.group == run.group);
  for (std::int64_t i = 0; i < 2; ++i) {
    CHECK(sorted(fam.x[static_cast<std::size_t>(i)]) == sorted(run.x[static_cast<std::size_t>(i)]));
    CHECK(sorted(fam.y[static_cast<std::size_t>(i)]) == sorted(run.y[static_cast<std::size_t>(i)]));
    CHECK(sorted(fam.z[static_cast<std::size_t>(i)]) == sorted(run.z[static_cast<std::size_t>(i)]));
  }

  auto f32 = stpp_family(3, 2);
  CHECK(f32.group.d == 6);
  for (const auto& s : f32.x) CHECK(s.size() == 1);
  CHECK(check_stpp(f32));

  auto f44 = stpp_family(4, 4);
  CHECK(f44.group.d == 6);
  for (const auto& s : f44.x) CHECK(s.size() == 9);
  CHECK(check_stpp(f44));
}

TEST_CASE("stpp_family holds for all bundled sizes") {
  for (std::int64_t m : {2, 3, 4})
    for (std::int64_t n = 1; n <= 4; ++n) CHECK(check_stpp(stpp_family(n, m)));
}

TEST_CASE("growth parameters") {
  auto g = growth_parameters(stpp_family(2, 16), 2);
  CHECK(!g.degenerate);
  CHECK(g.alpha == doctest::Approx(12.0));
  CHECK(g.beta == doctest::Approx(std::log2(15.0)));
  CHECK((g.alpha - 1.0) / g.beta >= 2.0);
  CHECK((g.alpha - 1.0) / g.beta == doctest::Approx(2.81553).epsilon(1e-4));

  auto d = growth_parameters(stpp_family(2, 2), 2);
  CHECK(d.degenerate);
  CHECK(d.beta == 0.0);

  // only the bundled family has known closed forms
  auto t = stpp_family(2, 4);
  t.x[0].pop_back();
  CHECK_THROWS_AS(growth_parameters(t, 2), std::invalid_argument);
  CHECK_THROWS_AS(growth_parameters(stpp_family(2, 4), 1), std::invalid_argument);
}

TEST_CASE("remark inequality holds for non-degenerate bundled families") {
  for (std::int64_t m : {3, 4, 5, 16}) {
    auto g = growth_parameters(stpp_family(2, m), 2);
    CHECK((g.alpha - 1.0) / g.beta >= 2.0);
  }
}

TEST_CASE("unique quotient decomposition") {
  CHECK(check_unique_quotient(stpp_family(2, 2), 2));   // 4 quadruples
  CHECK(check_unique_quotient(stpp_family(2, 4), 2));   // 324 quadruples
  CHECK(check_unique_quotient(stpp_family(2, 3), 2));
  CHECK(check_unique_quotient(stpp_family(3, 2), 3));
  CHECK(check_unique_quotient(stpp_family(2, 5), 2));

  // duplicated triples break the property and the scan finds a collision
  auto broken = stpp_family(2, 4);
  broken.x[1] = broken.x[0];
  broken.y[1] = broken.y[0];
  broken.z[1] = broken.z[0];
  CHECK(!check_stpp(broken));
  CHECK(!check_unique_quotient(broken, 2));

  CHECK_THROWS_AS(check_unique_quotient(stpp_family(2, 16), 2, /*guard=*/100),
                  std::length_error);
}

TEST_CASE("stpp implies unique quotients on every feasible bundled instance") {
  struct Inst {
    std::int64_t n, m;
  };
  for (auto [n, m] : {Inst{2, 2}, Inst{2, 3}, Inst{2, 4}, Inst{2, 5}, Inst{3, 2}}) {
    auto t = stpp_family(n, m);
    REQUIRE(check_stpp(t));
    CHECK(check_unique_quotient(t, n));
  }
}

TEST_CASE("budget guard on the quotient scan") {
  auto t = running_example_triples(16);
  CHECK_THROWS_AS(check_stpp(t, /*budget=*/1000), std::length_error);
}

TEST_CASE("triples serialization") {
  auto t = stpp_family(3, 3);
  auto text = triples_to_json(t);
  auto back = triples_from_json(text);
  CHECK(back.group == t.group);
  CHECK(back.x == t.x);
  CHECK(back.y == t.y);
  CHECK(back.z == t.z);

  // corrupted file: loader rejects unless trusted
  auto broken = running_example_triples(4);
  broken.x[1] = broken.x[0];
  auto bad_text = triples_to_json(broken);
  CHECK_THROWS_AS(triples_from_json(bad_text), std::invalid_argument);
  auto trusted = triples_from_json(bad_text, /*trust=*/true);
  CHECK(trusted.x[1] == trusted.x[0]);

  const auto path = std::filesystem::temp_directory_path() / "triples_roundtrip.json";
  save_triples_file(t, path.string());
  auto loaded = load_triples_file(path.string());
  CHECK(loaded.x == t.x);
  std::filesystem::remove(path);
}
