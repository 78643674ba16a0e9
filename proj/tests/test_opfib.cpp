#include <catch2/catch_amalgamated.hpp>

#include "fibred/backends.hpp"
#include "fibred/error.hpp"
#include "fibred/explicit.hpp"
#include "fibred/opfib.hpp"
#include "support.hpp"

using namespace fibred;
using fibred::testing::arrows;

namespace {

FinCatPresentation chain() {
  auto p = arrows({"A", "B", "C"}, {{"f", "A", "B"}, {"g", "B", "C"}, {"gf", "A", "C"}});
  p.composites[{"g", "f"}] = "gf";
  return p;
}

Mor base_mor(const FinCat& b, const std::string& id) { return b.mor(*b.morphism_index(id)); }

/// Z/2 over A sent to the trivial group over B, as a discrete monoidal category.
IndexedMonoidalPresentation z2_to_trivial() {
  using Fibre = IndexedMonoidalPresentation::Fibre;
  auto fibre = [](std::vector<std::string> elems, auto mul) {
    Fibre f;
    f.category = arrows(elems, {});
    for (auto& a : elems) {
      f.left_unitor[a] = f.right_unitor[a] = "id_" + a;
      for (auto& b : elems) {
        f.tensor_objects[{a, b}] = mul(a, b);
        f.tensor_morphisms[{"id_" + a, "id_" + b}] = "id_" + mul(a, b);
        f.braiding[{a, b}] = "id_" + mul(a, b);
        for (auto& c : elems) f.associator[{a, b, c}] = "id_" + mul(mul(a, b), c);
      }
    }
    f.unit = "e";
    return f;
  };
  IndexedMonoidalPresentation p;
  p.base = arrows({"A", "B"}, {{"f", "A", "B"}});
  p.fibres["A"] = fibre({"e", "g"}, [](const std::string& a, const std::string& b) { return std::string(a == b ? "e" : "g"); });
  p.fibres["B"] = fibre({"e"}, [](const std::string&, const std::string&) { return std::string("e"); });
  p.transitions["f"].functor = {{{"e", "e"}, {"g", "e"}}, {{"id_e", "id_e"}, {"id_g", "id_e"}}};
  return p;
}

}  // namespace

TEST_CASE("finite sets over a chain form a symmetric monoidal opfibration") {
  const FinCat base = FinCat::from(chain());
  FinsetOptions o;
  o.bound = 3;
  o.monoid_bound = 2;
  const auto m = make_finset_opfibration(base, o);
  const Limits l;
  const auto op = verify_opfibration(*m, l);
  INFO(op.summary());
  CHECK(op.ok());
  const auto mon = verify_monoidal_opfibration(*m, l);
  INFO(mon.summary());
  CHECK(mon.ok());
  CHECK(verify_symmetry(*m, l).ok());
  const auto ps = certify_pseudofunctoriality(*m, base_mor(base, "f"), base_mor(base, "g"), l);
  INFO(ps.summary());
  CHECK(ps.ok());
  CHECK(certify_direct_image(*m, base_mor(base, "gf"), l).ok());
}

TEST_CASE("opcartesian over an identity means invertible") {
  const FinCat base = FinCat::terminal();
  const auto m = make_finset_opfibration(base, {});
  const Category& E = m->total();
  const Obj two = *E.find_object("*:2"), one = *E.find_object("*:1");
  const Limits l;
  CHECK(is_opcartesian(m->projection(), E.identity(two), l).opcartesian);
  CHECK(is_opcartesian(m->projection(), *E.find_morphism(two, two, "id_*[1,0]"), l).opcartesian);
  const auto c = is_opcartesian(m->projection(), *E.find_morphism(two, one, "id_*[0,0]"), l);
  CHECK_FALSE(c.opcartesian);
  CHECK(c.fillers != 1);
}

TEST_CASE("property: a function over a base arrow is opcartesian iff bijective", "[property]") {
  const FinCat base = FinCat::from(arrows({"A", "B"}, {{"f", "A", "B"}}));
  FinsetOptions o;
  o.bound = 3;
  const auto m = make_finset_opfibration(base, o);
  const Category& E = m->total();
  const Limits l;
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng() % 3, k = 1 + rng() % 3;
    std::vector<std::size_t> f(n);
    std::string name = "f[";
    for (std::size_t i = 0; i < n; ++i) {
      f[i] = rng() % k;
      name += (i ? "," : "") + std::to_string(f[i]);
    }
    name += "]";
    std::vector<std::size_t> sorted = f;
    std::sort(sorted.begin(), sorted.end());
    const bool bijective = n == k && std::unique(sorted.begin(), sorted.end()) == sorted.end();
    const auto mor = E.find_morphism(*E.find_object("A:" + std::to_string(n)), *E.find_object("B:" + std::to_string(k)), name);
    REQUIRE(mor);
    CHECK(is_opcartesian(m->projection(), *mor, l).opcartesian == bijective);
  }
}

TEST_CASE("lifts of the same arrow are related by exactly one morphism") {
  const FinCat base = FinCat::from(arrows({"A", "B"}, {{"f", "A", "B"}}));
  const auto m = make_finset_opfibration(base, {});
  const Category& E = m->total();
  const Mor f = base_mor(base, "f");
  const Obj e = *E.find_object("A:3");
  const Mor lift = m->lift(f, e);
  const Limits l;
  CHECK(connecting_morphisms(*m, f, e, lift, l) == 1);
  const Mor twisted = *E.find_morphism(e, lift.tgt, "f[2,0,1]");
  CHECK(connecting_morphisms(*m, f, e, twisted, l) == 1);
}

TEST_CASE("the Grothendieck construction of a monoidal indexed category") {
  const auto g = grothendieck_construction(z2_to_trivial());
  INFO(g.report.summary());
  REQUIRE(g.report.ok());
  const Limits l;
  const auto m = make_explicit_opfibration(g.data, l);
  CHECK(validate_category(g.data.total).ok());
  CHECK(verify_opfibration(*m, l).ok());
  CHECK(verify_monoidal_opfibration(*m, l).ok());
  CHECK(verify_symmetry(*m, l).ok());
}

TEST_CASE("the Grothendieck construction rejects a non-functorial transition") {
  auto p = z2_to_trivial();
  p.transitions["f"].functor.objects.erase("g");
  const auto g = grothendieck_construction(p);
  CHECK_FALSE(g.report.ok());
}

TEST_CASE("verify_symmetry needs a braiding") {
  auto p = z2_to_trivial();
  for (auto& [b, f] : p.fibres) f.braiding.clear();
  const auto g = grothendieck_construction(p);
  const auto m = make_explicit_opfibration(g.data, Limits{});
  CHECK_FALSE(m->has_braiding());
  CHECK_THROWS_AS(verify_symmetry(*m, Limits{}), UnsupportedError);
}

TEST_CASE("overridden structure is caught with the overridden datum named") {
  const auto w = fibred::testing::z6_world();
  const auto& m = *w->fibration;
  const Category& E = m.total();
  const Obj x = *E.find_object("Z6:1,0");
  const Mor q2 = base_mor(w->base, "q2");
  const Limits l;

  StructureOverrides lift;
  lift.cleavage[{"q2", x}] = *E.find_morphism(x, m.transport(q2, x), "q2[2:0]");
  const auto r1 = verify_opfibration(OverriddenOpfibration(m, lift), l);
  REQUIRE_FALSE(r1.ok());
  CHECK(r1.findings().front().witnesses.front() == "lift(q2; Z6:1,0)");

  StructureOverrides unit;
  unit.unit["q2"] = *E.find_morphism(m.unit(q2.src), m.unit(q2.tgt), "q2[2:0]");
  const auto r2 = verify_monoidal_opfibration(OverriddenOpfibration(m, unit), l);
  REQUIRE_FALSE(r2.ok());
  CHECK(r2.mentions("unit(q2)"));

  StructureOverrides assoc;
  const Obj a = *E.find_object("Z6:2,0");
  const Obj src = m.tensor(m.tensor(a, a), x), tgt = m.tensor(a, m.tensor(a, x));
  assoc.associator[{a, a, x}] = *E.find_morphism(src, tgt, "id_Z6[2:0100/0000/0000/0000;3:]");
  const auto r3 = verify_monoidal_opfibration(OverriddenOpfibration(m, assoc), l);
  REQUIRE_FALSE(r3.ok());
  CHECK(r3.findings().front().witnesses.front() == "associator(Z6:2,0; Z6:2,0; Z6:1,0)");
}

TEST_CASE("modules over Z/6 and its quotients pass every verifier") {
  const auto w = fibred::testing::z6_world();
  const Limits l;
  CHECK(verify_opfibration(*w->fibration, l).ok());
  const auto r = verify_monoidal_opfibration(*w->fibration, l);
  INFO(r.summary());
  CHECK(r.ok());
  CHECK(verify_symmetry(*w->fibration, l).ok());
  for (const char* h : {"q2", "q3"}) CHECK(certify_direct_image(*w->fibration, base_mor(w->base, h), l).ok());
}

TEST_CASE("non-squarefree rings are unsupported") {
  const FinCat t = FinCat::terminal();
  ModuleOptions o;
  o.rings = {4};
  CHECK_THROWS_AS(make_module_opfibration(t, o), UnsupportedError);
  CHECK(squarefree_primes(30) == std::vector<std::uint32_t>{2, 3, 5});
}
