#include <catch2/catch_amalgamated.hpp>

#include "fibred/error.hpp"
#include "fibred/site.hpp"
#include "support.hpp"

using namespace fibred;
using fibred::testing::free_rank_over_z6;
using fibred::testing::z6_dimensions;

namespace {

MonoidDiagram z6_diagram() {
  return {{{"Z6", "Z6:1,1"}, {"Z2", "Z2:1"}, {"Z3", "Z3:1"}},
          {{"q2", "q2[2:1]"}, {"q3", "q3[3:1]"}}};
}

PreCotopology z6_cover() {
  PreCotopology j;
  j.families["Z6"] = {{"q2", "q3"}, {"id_Z6"}};
  j.families["Z2"] = {{"id_Z2"}};
  j.families["Z3"] = {{"id_Z3"}};
  return j;
}

TrivialDesignation free_on_quotients(bool constant_rank) {
  TrivialDesignation t;
  t.objects = {"Z2", "Z3"};
  t.modules["Z2"].generator = "free";
  t.modules["Z3"].generator = "free";
  t.constant_rank = constant_rank;
  return t;
}

struct SiteWorld {
  std::unique_ptr<fibred::testing::World> w = fibred::testing::z6_world(true);
  std::unique_ptr<Site> site;
  explicit SiteWorld(const TrivialDesignation& t, const PreCotopology& j = z6_cover()) {
    site = std::make_unique<Site>(w->base, *w->mod, z6_diagram(), j, t, w->limits);
  }
  Obj at(const std::string& name) const { return *w->base.object_index(name); }
};

}  // namespace

TEST_CASE("the Z/6 site is well formed") {
  SiteWorld s(free_on_quotients(false));
  const auto r = s.site->validate();
  INFO(r.summary());
  CHECK(r.ok());
  CHECK(validate_precotopology(s.w->base, z6_cover(), true).ok());
  CHECK(s.site->fibre(s.at("Z6")).size() == 14);
  CHECK(s.site->trivial_modules(s.at("Z2")).size() == 6);
  CHECK(s.site->trivial_modules(s.at("Z3")).size() == 4);
}

TEST_CASE("pre-cotopology errors") {
  const FinCat base = FinCat::from(fibred::testing::z6_base());
  PreCotopology j = z6_cover();
  j.families["Z2"] = {{"q3"}};
  CHECK_FALSE(validate_precotopology(base, j).ok());
  j = z6_cover();
  j.families["Z6"] = {{"q2", "q3"}};
  CHECK(validate_precotopology(base, j).ok());
  CHECK_FALSE(validate_precotopology(base, j, true).ok());
  j.families["Z9"] = {{"id_Z6"}};
  CHECK_FALSE(validate_precotopology(base, j).ok());
}

TEST_CASE("unknown identifiers in the site are structural") {
  const auto w = fibred::testing::z6_world(true);
  auto d = z6_diagram();
  d.objects["Z6"] = "Z6:9,9";
  CHECK_THROWS_AS(Site(w->base, *w->mod, d, z6_cover(), free_on_quotients(false), w->limits), StructuralError);
}

TEST_CASE("a non-functorial diagram fails validation") {
  const auto w = fibred::testing::z6_world(true);
  auto d = z6_diagram();
  d.objects["Z2"] = "Z2:0";
  bool failed = false;
  try {
    failed = !Site(w->base, *w->mod, d, z6_cover(), free_on_quotients(false), w->limits).validate().ok();
  } catch (const StructuralError&) {
    failed = true;
  }
  CHECK(failed);
}

TEST_CASE("pulled back modules form an opfibration over the site base") {
  SiteWorld s(free_on_quotients(false));
  PulledBackModules pb(*s.site);
  const auto r = pb.verify(s.w->limits);
  INFO(r.summary());
  CHECK(r.ok());
  CHECK(pb.fibre(s.at("Z6")).size() == 14);
}

TEST_CASE("object triviality follows the cotopology") {
  SiteWorld s(free_on_quotients(false));
  for (const char* x : {"Z6", "Z2", "Z3"}) CHECK(is_locally_trivial_object(*s.site, s.at(x)).locally_trivial);
  const auto t = is_locally_trivial_object(*s.site, s.at("Z6"));
  REQUIRE(t.family);
  CHECK(*t.family == 0);
}

TEST_CASE("with free trivial modules every Z/6 module is locally trivial", "[oracle]") {
  SiteWorld s(free_on_quotients(false));
  const Loc loc = build_loc(*s.site, s.at("Z6"));
  CHECK(loc.object_locally_trivial);
  CHECK(loc.modules == s.site->fibre(s.at("Z6")));
  CHECK(loc.modules.size() == 14);
  for (Obj m : s.site->fibre(s.at("Z6"))) {
    const auto t = is_locally_trivial_module(*s.site, s.at("Z6"), m);
    CHECK(t.locally_trivial);
    CHECK(t.matches.size() == 2);
  }
}

TEST_CASE("with constant rank exactly the free Z/6 modules are locally trivial", "[oracle]") {
  SiteWorld s(free_on_quotients(true));
  const Loc loc = build_loc(*s.site, s.at("Z6"));
  const auto& mod = *s.w->mod;
  const Category& E = s.w->fibration->total();
  std::size_t free = 0;
  for (Obj m : s.site->fibre(s.at("Z6"))) {
    const auto [a, b] = z6_dimensions(E.object_name(mod.module(m).carrier));
    const bool expected = free_rank_over_z6(a, b).has_value();
    const bool in_loc = std::find(loc.modules.begin(), loc.modules.end(), m) != loc.modules.end();
    INFO(mod.object_name(m) << " a=" << a << " b=" << b);
    CHECK(in_loc == expected);
    CHECK(is_locally_trivial_module(*s.site, s.at("Z6"), m).locally_trivial == expected);
    free += expected;
  }
  CHECK(free == 3);
  CHECK(loc.modules.size() == 3);
}

TEST_CASE("the invariant-factor oracle") {
  CHECK(free_rank_over_z6(0, 0) == 0);
  CHECK(free_rank_over_z6(2, 2) == 2);
  CHECK_FALSE(free_rank_over_z6(2, 1).has_value());
  CHECK_FALSE(free_rank_over_z6(0, 1).has_value());
}

TEST_CASE("Loc is closed under extension along the cover") {
  for (bool constant : {false, true}) {
    SiteWorld s(free_on_quotients(constant));
    for (const char* u : {"q2", "q3"}) {
      const auto f = induced_functor_on_loc(*s.site, s.w->base.mor(*s.w->base.morphism_index(u)), s.w->limits);
      INFO(u << ": " << f.report.summary());
      CHECK(f.report.ok());
      CHECK(f.offenders.empty());
    }
  }
}

TEST_CASE("an object without a trivial family gets a warning, not a failure") {
  PreCotopology j = z6_cover();
  j.families["Z6"] = {{"id_Z6"}};
  SiteWorld s(free_on_quotients(false), j);
  const Loc loc = build_loc(*s.site, s.at("Z6"));
  CHECK_FALSE(loc.object_locally_trivial);
  CHECK(loc.report.count(Severity::warning) == 1);
  CHECK(loc.modules.empty());
}
