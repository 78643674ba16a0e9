#include <catch2/catch_amalgamated.hpp>

#include "fibred/error.hpp"
#include "fibred/fincat.hpp"
#include "support.hpp"

using namespace fibred;
using fibred::testing::arrows;

namespace {

/// Z/n as a one-object category.
FinCat cyclic(std::size_t n) {
  std::vector<std::vector<std::size_t>> t(n, std::vector<std::size_t>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) t[i][j] = (i + j) % n;
  return FinCat::from_monoid(t);
}

FinCatPresentation walking_arrow() { return arrows({"A", "B"}, {{"f", "A", "B"}}); }

}  // namespace

TEST_CASE("well-formed presentations validate cleanly") {
  CHECK(validate_category(walking_arrow()).ok());
  CHECK(validate_category(fibred::testing::z6_base()).ok());
  CHECK(validate_category(FinCat::terminal().presentation()).ok());
}

TEST_CASE("a missing composite is reported with the pair") {
  auto p = walking_arrow();
  p.composites.erase({"id_B", "f"});
  const auto r = validate_category(p);
  REQUIRE_FALSE(r.ok());
  CHECK(r.mentions("id_B"));
  CHECK(r.mentions("f"));
}

TEST_CASE("a composite of the wrong type is a violation") {
  auto p = arrows({"A", "B"}, {{"f", "A", "B"}, {"g", "B", "A"}});
  p.composites[{"g", "f"}] = "f";
  const auto r = validate_category(p);
  CHECK_FALSE(r.ok());
}

TEST_CASE("non-associative tables are rejected") {
  // right-zero band: g∘f = f
  FinCatPresentation p = arrows({"X"}, {{"e", "X", "X"}, {"k", "X", "X"}});
  p.composites[{"e", "e"}] = "e";
  p.composites[{"k", "k"}] = "k";
  p.composites[{"e", "k"}] = "k";
  p.composites[{"k", "e"}] = "e";
  CHECK(validate_category(p).ok());
  p.composites[{"k", "k"}] = "e";
  const auto r = validate_category(p);
  CHECK_FALSE(r.ok());
  CHECK(r.first("category.associativity") != nullptr);
}

TEST_CASE("dangling identifiers are structural") {
  auto p = walking_arrow();
  p.morphisms.push_back({"g", "A", "C"});
  const auto r = validate_category(p);
  REQUIRE(r.count(Severity::structural) > 0);
  CHECK_THROWS_AS(FinCat::from(p), StructuralError);
}

TEST_CASE("functors: identity passes, a broken composite map fails") {
  const auto a = walking_arrow();
  FunctorPresentation id{{{"A", "A"}, {"B", "B"}}, {{"id_A", "id_A"}, {"id_B", "id_B"}, {"f", "f"}}};
  CHECK(validate_functor(a, a, id).ok());
  FunctorPresentation bad = id;
  bad.morphisms["f"] = "id_A";
  CHECK_FALSE(validate_functor(a, a, bad).ok());
  FunctorPresentation partial = id;
  partial.objects.erase("B");
  CHECK(validate_functor(a, a, partial).count(Severity::structural) > 0);
}

TEST_CASE("pullback of a functor along itself") {
  const FinCat a = FinCat::from(walking_arrow());
  const FinCat t = FinCat::terminal();
  LambdaFunctor bang(a, t, [](Obj) { return Obj{0}; }, [&](const Mor&) { return t.identity(0); });
  PullbackCategory pb(bang, bang);
  CHECK(pb.objects().size() == 4);
  std::size_t morphisms = 0;
  for (Obj x : pb.objects())
    for (Obj y : pb.objects()) morphisms += pb.hom_size(x, y);
  CHECK(morphisms == 9);
  CHECK(validate_category(pb, Limits{}).ok());
}

TEST_CASE("find_isomorphisms on groups returns every element once") {
  for (std::size_t n : {1, 2, 3, 5, 6}) {
    const FinCat g = cyclic(n);
    const auto isos = find_isomorphisms(g, 0, 0);
    CHECK(isos.size() == n);
    for (const auto& [f, inv] : isos) CHECK(g.is_identity(g.compose(inv, f)));
  }
  const FinCat a = FinCat::from(walking_arrow());
  CHECK(find_isomorphisms(a, 0, 1).empty());
  CHECK(find_isomorphisms(a, 0, 0).size() == 1);
}

TEST_CASE("fibre categories of a projection") {
  const FinCat a = FinCat::from(arrows({"A", "A2", "B"}, {{"f", "A", "B"}}));
  const FinCat base = FinCat::from(arrows({"X", "Y"}, {{"p", "X", "Y"}}));
  auto on_objects = [&](Obj x) { return *base.object_index(a.object_name(x) == "B" ? "Y" : "X"); };
  LambdaFunctor proj(a, base, on_objects, [&](const Mor& m) {
    return a.morphism_name(m) == "f" ? base.mor(*base.morphism_index("p")) : base.identity(on_objects(m.src));
  });
  CHECK(validate_functor(proj, Limits{}).ok());
  FibreCategory fx(proj, *base.object_index("X"));
  CHECK(fx.objects().size() == 2);
  FibreCategory fy(proj, *base.object_index("Y"));
  CHECK(fy.objects().size() == 1);
  CHECK_THROWS_AS(FibreCategory(proj, 7), StructuralError);
}

TEST_CASE("property: monoid categories from random tables are categories iff associative", "[property]") {
  Rng rng(7);
  std::size_t associative = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 3;
    std::vector<std::vector<std::size_t>> t(n, std::vector<std::size_t>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) t[i][j] = i == 0 ? j : j == 0 ? i : rng() % n;
    bool assoc = true;
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t z = 0; z < n; ++z) assoc = assoc && t[t[x][y]][z] == t[x][t[y][z]];
    associative += assoc;
    // from_monoid stores g∘f = t[g][f]
    const FinCat c = FinCat::from_monoid(t);
    CHECK(validate_category(c.presentation()).ok() == assoc);
  }
  CHECK(associative > 0);
}

TEST_CASE("property: isomorphism counts are invariant under relabelling", "[property]") {
  for (std::size_t n : {2, 3, 4, 6}) {
    const FinCat g = cyclic(n);
    auto p = g.presentation();
    FinCatPresentation q;
    for (const auto& o : p.objects) q.objects.push_back("o" + o);
    for (const auto& m : p.morphisms) q.morphisms.push_back({"m" + m.id, "o" + m.source, "o" + m.target});
    for (const auto& [o, i] : p.identities) q.identities["o" + o] = "m" + i;
    for (const auto& [gf, h] : p.composites) q.composites[{"m" + gf.first, "m" + gf.second}] = "m" + h;
    const FinCat h = FinCat::from(q);
    CHECK(find_isomorphisms(h, 0, 0).size() == find_isomorphisms(g, 0, 0).size());
    CHECK(find_category_isomorphism(g, h).has_value());
  }
}
