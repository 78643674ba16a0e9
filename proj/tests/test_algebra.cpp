#include <catch2/catch_amalgamated.hpp>

#include "fibred/algebra.hpp"
#include "fibred/error.hpp"
#include "support.hpp"

using namespace fibred;
using fibred::testing::extension_matches_orbits;

namespace {

std::vector<Mor> monoid_homs_from(const MonoidCategory& mon, Obj r) {
  std::vector<Mor> out;
  for (Obj s : mon.objects())
    mon.for_each_hom(r, s, [&](const Mor& phi) {
      out.push_back(phi);
      return true;
    });
  return out;
}

bool over_identity(const MonoidCategory& mon, const Mor& phi) {
  const auto& m = mon.fibration();
  return m.base().is_identity(m.base_of(mon.underlying(phi)));
}

using MakeWorld = std::unique_ptr<fibred::testing::World> (*)(bool);
const MakeWorld kWorlds[] = {+[](bool c) { return fibred::testing::finset_world(c); },
                             +[](bool c) { return fibred::testing::z6_world(c); }};

}  // namespace

TEST_CASE("finite-set monoids and modules validate") {
  const auto w = fibred::testing::finset_world();
  REQUIRE(!w->mon->objects().empty());
  for (Obj r : w->mon->objects()) CHECK(validate_monoid(*w->fibration, w->mon->monoid(r), false).ok());
  std::size_t modules = 0;
  for (Obj x : w->mod->objects()) {
    const ModuleObject& a = w->mod->module(x);
    CHECK(validate_module(*w->fibration, w->mon->monoid(a.monoid), a.carrier, a.kappa).ok());
    ++modules;
  }
  CHECK(modules > 0);
}

TEST_CASE("a broken unit law is a monoid violation") {
  const auto w = fibred::testing::finset_world();
  const Category& E = w->fibration->total();
  for (Obj r : w->mon->objects()) {
    MonoidObject bad = w->mon->monoid(r);
    if (E.object_name(bad.carrier) != "*:2") continue;
    // constant multiplication: not unital
    bad.mu = *E.find_morphism(w->fibration->tensor(bad.carrier, bad.carrier), bad.carrier, "id_*[0,0,0,0]");
    CHECK_FALSE(validate_monoid(*w->fibration, bad, false).ok());
    return;
  }
  FAIL("no monoid on a two-element set");
}

TEST_CASE("finite-set extension of scalars matches a union-find oracle on every pair", "[oracle]") {
  const auto w = fibred::testing::finset_world();
  std::size_t pairs = 0;
  for (Obj x : w->mod->objects()) {
    const Obj r = w->mod->module(x).monoid;
    for (const Mor& phi : monoid_homs_from(*w->mon, r)) {
      std::string why;
      INFO(w->mod->object_name(x) << " along " << w->mon->morphism_name(phi));
      const bool ok = extension_matches_orbits(*w->mod, x, phi, &why);
      INFO(why);
      CHECK(ok);
      ++pairs;
    }
  }
  CHECK(pairs > 100);
}

TEST_CASE("the extension unit is a module morphism and the quotient coequalizes") {
  const auto w = fibred::testing::z6_world();
  const auto& mon = *w->mon;
  const auto& m = *w->fibration;
  std::size_t checked = 0;
  for (Obj x : w->mod->objects()) {
    for (const Mor& phi : monoid_homs_from(mon, w->mod->module(x).monoid)) {
      const Extension e = extension_of_scalars(*w->mod, x, phi);
      CHECK(w->mod->phi(e.unit) == phi);
      const Category& E = m.total();
      CHECK(E.compose(e.quotient, e.f) == E.compose(e.quotient, e.g));
      CHECK(E.is_identity(E.compose(e.f, e.section)));
      CHECK(E.is_identity(E.compose(e.g, e.section)));
      if (++checked == 40) return;
    }
  }
}

TEST_CASE("reflexive coequalizers are certified") {
  const auto w = fibred::testing::finset_world();
  const auto& m = *w->fibration;
  const Category& E = m.total();
  const Obj four = *E.find_object("*:4"), three = *E.find_object("*:3"), two = *E.find_object("*:2");
  // f, g: 4 -> 3 with common section s: 3 -> 4; they differ only at 3, sending it to 0 and 1
  const Mor f = *E.find_morphism(four, three, "id_*[0,1,2,0]");
  const Mor g = *E.find_morphism(four, three, "id_*[0,1,2,1]");
  const Mor s = *E.find_morphism(three, four, "id_*[0,1,2]");
  const Coequalizer q = reflexive_coequalizer(m, f, g, s);
  CHECK(q.reflexive);
  CHECK(q.quotient.tgt == two);
  const auto cert = certify_coequalizer(m, f, g, q.quotient, E.objects(), Limits{});
  INFO(cert.detail);
  CHECK(cert.ok);
  CHECK(cert.tested > 0);
  const auto wrong = certify_coequalizer(m, f, g, E.identity(three), E.objects(), Limits{});
  CHECK_FALSE(wrong.ok);
}

TEST_CASE("restriction of scalars gives modules") {
  for (auto make : kWorlds) {
    const auto w = make(false);
    std::size_t checked = 0;
    for (Obj s : w->mon->objects())
      for (Obj r : w->mon->objects())
        w->mon->for_each_hom(r, s, [&](const Mor& phi) {
          if (!over_identity(*w->mon, phi)) return true;
          for (Obj n : w->mod->modules_over(s)) {
            const Obj res = restriction_of_scalars(*w->mod, phi, n);
            const ModuleObject& a = w->mod->module(res);
            CHECK(a.monoid == r);
            CHECK(a.carrier == w->mod->module(n).carrier);
            CHECK(validate_module(*w->fibration, w->mon->monoid(r), a.carrier, a.kappa).ok());
            ++checked;
          }
          return true;
        });
    CHECK(checked > 0);
  }
}

TEST_CASE("Mod over Mon over the base is an opfibration tower on both examples") {
  for (auto make : kWorlds) {
    const auto w = make(false);
    const auto r = verify_modovermon(*w->mod, w->limits);
    INFO(r.summary());
    CHECK(r.ok());
  }
}

TEST_CASE("fibre restriction agrees with the standalone fibre at every base object") {
  for (auto make : kWorlds) {
    const auto w = make(false);
    for (Obj b : w->base.objects()) {
      const auto r = fibre_restriction_check(*w->mod, b, w->limits);
      INFO(w->base.object_name(b) << ": " << r.summary());
      CHECK(r.ok());
    }
  }
}

TEST_CASE("adjunction counts agree on z6 triples over identities") {
  const auto w = fibred::testing::z6_world();
  std::size_t triples = 0;
  for (Obj r : w->mon->objects())
    for (const Mor& phi : monoid_homs_from(*w->mon, r)) {
      if (!over_identity(*w->mon, phi)) continue;
      for (Obj x : w->mod->modules_over(r))
        for (Obj y : w->mod->modules_over(phi.tgt)) {
          if ((triples++ % 7) != 0) continue;
          const auto c = adjunction_count(*w->mod, x, phi, y, w->limits);
          INFO(w->mod->object_name(x) << " | " << w->mon->morphism_name(phi) << " | " << w->mod->object_name(y));
          CHECK(c.extension_side == c.restriction_side);
          CHECK(c.bijection);
        }
    }
  CHECK(triples >= 50);
}

TEST_CASE("adjunction counts agree on finite-set triples", "[property]") {
  const auto w = fibred::testing::finset_world();
  Rng rng(3);
  std::vector<Obj> modules = w->mod->objects();
  std::size_t checked = 0;
  while (checked < 150) {
    const Obj x = modules[rng() % modules.size()];
    const auto homs = monoid_homs_from(*w->mon, w->mod->module(x).monoid);
    const Mor phi = homs[rng() % homs.size()];
    const auto targets = w->mod->modules_over(phi.tgt);
    if (targets.empty()) continue;
    const Obj y = targets[rng() % targets.size()];
    const auto c = adjunction_count(*w->mod, x, phi, y, w->limits);
    CHECK(c.extension_side == c.restriction_side);
    CHECK(c.bijection);
    ++checked;
  }
}

TEST_CASE("extension is pseudofunctorial with a unique connecting isomorphism") {
  for (auto make : kWorlds) {
    const auto w = make(false);
    Rng rng(5);
    std::size_t checked = 0;
    for (Obj r : w->mon->objects())
      for (const Mor& phi : monoid_homs_from(*w->mon, r))
        for (const Mor& psi : monoid_homs_from(*w->mon, phi.tgt)) {
          if (rng() % 4 != 0 || checked >= 60) continue;
          const auto over = w->mod->modules_over(r);
          if (over.empty()) continue;
          const Obj x = over[rng() % over.size()];
          const auto c = extension_pseudofunctoriality(*w->mod, x, phi, psi, w->limits);
          INFO(w->mod->object_name(x) << " | " << w->mon->morphism_name(phi) << " | " << w->mon->morphism_name(psi));
          CHECK(c.morphisms == 1);
          CHECK(c.isomorphisms == 1);
          ++checked;
        }
    CHECK(checked > 10);
  }
}

TEST_CASE("free modules and direct sums over Z/6") {
  const auto w = fibred::testing::z6_world();
  const Category& E = w->fibration->total();
  std::optional<Obj> r;
  for (Obj s : w->mon->objects())
    if (E.object_name(w->mon->monoid(s).carrier) == "Z6:1,1") r = s;
  REQUIRE(r);
  const auto f0 = free_module(*w->mod, *r, 0), f1 = free_module(*w->mod, *r, 1), f2 = free_module(*w->mod, *r, 2);
  REQUIRE(f0);
  REQUIRE(f1);
  REQUIRE(f2);
  CHECK(E.object_name(w->mod->module(*f0).carrier) == "Z6:0,0");
  CHECK(E.object_name(w->mod->module(*f2).carrier) == "Z6:2,2");
  const auto s = module_direct_sum(*w->mod, *f1, *f1);
  REQUIRE(s);
  CHECK(module_isomorphism(*w->mod, *s, *f2).has_value());
  CHECK_FALSE(module_isomorphism(*w->mod, *f1, *f2).has_value());
  CHECK_FALSE(free_module(*w->mod, *r, 3).has_value());
}
