#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>

#include "fibred/kzero.hpp"
#include "fibred/site.hpp"
#include "support.hpp"

using namespace fibred;

namespace {

IntMatrix random_matrix(Rng& rng, std::size_t r, std::size_t c, long spread) {
  IntMatrix m(r, c);
  for (auto& x : m.a) x = static_cast<long>(rng() % (2 * spread + 1)) - spread;
  return m;
}

/// gcd of all k×k minors; 0 when they all vanish.
Integer determinantal_divisor(const IntMatrix& m, std::size_t k) {
  Integer g = 0;
  std::vector<std::size_t> rows(k), cols(k);
  std::function<void(std::size_t, std::size_t)> pick_cols;
  std::function<void(std::size_t, std::size_t)> pick_rows = [&](std::size_t i, std::size_t from) {
    if (i == k) return pick_cols(0, 0);
    for (std::size_t r = from; r < m.rows; ++r) {
      rows[i] = r;
      pick_rows(i + 1, r + 1);
    }
  };
  pick_cols = [&](std::size_t j, std::size_t from) {
    if (j == k) {
      IntMatrix sub(k, k);
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) sub(a, b) = m(rows[a], cols[b]);
      g = boost::multiprecision::gcd(g, abs(determinant(sub)));
      return;
    }
    for (std::size_t c = from; c < m.cols; ++c) {
      cols[j] = c;
      pick_cols(j + 1, c + 1);
    }
  };
  pick_rows(0, 0);
  return g;
}

/// Loc K0 of the Z/6 site, the way the pipeline builds it.
struct LocK0 {
  IsoClasses classes;
  AbelianGroupPresentation group;
  ValidationReport report;
  std::vector<std::pair<long, long>> dims;
};

LocK0 z6_loc_k0(bool constant_rank) {
  const auto w = fibred::testing::z6_world(true);
  TrivialDesignation t;
  t.objects = {"Z2", "Z3"};
  t.modules["Z2"].generator = t.modules["Z3"].generator = "free";
  t.constant_rank = constant_rank;
  PreCotopology j;
  j.families = {{"Z6", {{"q2", "q3"}, {"id_Z6"}}}, {"Z2", {{"id_Z2"}}}, {"Z3", {{"id_Z3"}}}};
  const MonoidDiagram d{{{"Z6", "Z6:1,1"}, {"Z2", "Z2:1"}, {"Z3", "Z3:1"}}, {{"q2", "q2[2:1]"}, {"q3", "q3[3:1]"}}};
  const Site site(w->base, *w->mod, d, j, t, w->limits);
  const Obj x = *w->base.object_index("Z6");
  const Loc loc = build_loc(site, x);
  const ModuleCategory& mod = *w->mod;
  const Category& E = w->fibration->total();
  LocK0 out;
  out.classes = iso_classes(*loc.category, [&](Obj a, Obj b) { return module_isomorphism(mod, a, b).has_value(); });
  SumDesignation sum;
  sum.zero = *free_module(mod, site.monoid_at(x), 0);
  sum.sum = [&](Obj a, Obj b) -> std::optional<Obj> {
    auto s = module_direct_sum(mod, a, b);
    if (!s || !E.in_universe(mod.module(*s).carrier)) return std::nullopt;
    return s;
  };
  out.report.merge(validate_sum(out.classes, sum));
  out.group = group_completion(out.classes, sum, &out.report);
  for (Obj r : out.classes.representatives)
    out.dims.push_back(fibred::testing::z6_dimensions(E.object_name(mod.module(r).carrier)));
  return out;
}

}  // namespace

TEST_CASE("Smith normal form of known matrices") {
  const IntMatrix a = IntMatrix::from({{2, 4, 4}, {-6, 6, 12}, {10, -4, -16}});
  const SmithForm s = smith_normal_form(a);
  std::string why;
  CHECK(verify_smith(a, s, &why));
  CHECK(s.diagonal == std::vector<Integer>{2, 6, 12});
  CHECK(determinant(IntMatrix::from({{1, 2}, {3, 4}})) == -2);
  const IntMatrix z(2, 3);
  CHECK(smith_normal_form(z).diagonal == std::vector<Integer>{0, 0});
}

TEST_CASE("property: Smith certificates multiply out and match determinantal divisors", "[property][oracle]") {
  Rng rng(17);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t r = 1 + rng() % 4, c = 1 + rng() % 4;
    const IntMatrix a = random_matrix(rng, r, c, trial % 3 == 0 ? 2 : 9);
    const SmithForm s = smith_normal_form(a);
    std::string why;
    const bool ok = verify_smith(a, s, &why);
    INFO(why);
    REQUIRE(ok);
    CHECK(s.u * a * s.v == s.d);
    Integer product = 1;
    for (std::size_t k = 1; k <= std::min(r, c); ++k) {
      product *= s.diagonal[k - 1];
      CHECK(determinantal_divisor(a, k) == product);
    }
  }
}

TEST_CASE("small Smith examples") {
  CHECK(smith_normal_form(IntMatrix::identity(2)).diagonal == std::vector<Integer>{1, 1});
  const IntMatrix a = IntMatrix::from({{2, 4}, {6, 8}});
  const SmithForm s = smith_normal_form(a);
  CHECK(s.diagonal == std::vector<Integer>{2, 4});
  CHECK(verify_smith(a, s));
  // d1 = gcd of entries, d1·d2 = |det|
  CHECK(determinantal_divisor(a, 1) == 2);
  CHECK(abs(determinant(a)) == 8);
}

TEST_CASE("property: group completion ignores generator order and the choice of representatives", "[property]") {
  // values (t, n) in Z/m × {0..cap}; each value has one or two isomorphic objects
  Rng rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const long m = 1 + rng() % 3, cap = 1 + rng() % 3;
    std::vector<std::string> names;
    std::vector<std::pair<long, long>> value_of;
    std::map<std::pair<long, long>, std::vector<Obj>> objects_of;
    for (long t = 0; t < m; ++t)
      for (long n = 0; n <= cap; ++n)
        for (int copy = 0; copy < 1 + static_cast<int>(rng() % 2); ++copy) {
          objects_of[{t, n}].push_back(names.size());
          value_of.emplace_back(t, n);
          names.push_back("v" + std::to_string(t) + "_" + std::to_string(n) + (copy ? "b" : "a"));
        }
    const FinCat c = FinCat::from(fibred::testing::arrows(names, {}));
    auto make_classes = [&](bool shuffle, bool swap_reps) {
      IsoClasses k;
      k.category = &c;
      k.isomorphic = [&](Obj x, Obj y) { return value_of[x] == value_of[y]; };
      std::vector<std::pair<long, long>> values;
      for (const auto& [v, objs] : objects_of) values.push_back(v);
      if (shuffle) std::shuffle(values.begin(), values.end(), rng);
      for (const auto& v : values) {
        k.classes.push_back(objects_of[v]);
        k.representatives.push_back(swap_reps ? objects_of[v].back() : objects_of[v].front());
      }
      return k;
    };
    SumDesignation sum;
    sum.zero = objects_of[{0, 0}].front();
    sum.sum = [&](Obj x, Obj y) -> std::optional<Obj> {
      const auto [t1, n1] = value_of[x];
      const auto [t2, n2] = value_of[y];
      if (n1 + n2 > cap) return std::nullopt;
      const auto& objs = objects_of[{(t1 + t2) % m, n1 + n2}];
      return objs[rng() % objs.size()];
    };
    const auto base = group_completion(make_classes(false, false), sum);
    CHECK(validate_sum(make_classes(false, false), sum).ok());
    for (int k = 0; k < 3; ++k) {
      CHECK(group_completion(make_classes(true, false), sum).invariants == base.invariants);
      CHECK(group_completion(make_classes(true, true), sum).invariants == base.invariants);
    }
  }
}

TEST_CASE("one object with no sums beyond the unit gives Z") {
  const FinCat c = FinCat::from(fibred::testing::arrows({"0", "x"}, {}));
  const IsoClasses classes = iso_classes(c);
  SumDesignation s{[](Obj a, Obj b) -> std::optional<Obj> {
                     if (a == 0) return b;
                     if (b == 0) return a;
                     return std::nullopt;
                   },
                   0};
  const auto g = group_completion(classes, s);
  CHECK(g.invariants == std::vector<Integer>{0});
  CHECK(g.omitted.size() == 1);
}

TEST_CASE("a forged certificate is rejected") {
  const IntMatrix a = IntMatrix::from({{2, 0}, {0, 3}});
  SmithForm s = smith_normal_form(a);
  CHECK(s.diagonal == std::vector<Integer>{1, 6});
  s.d(1, 1) = 12;
  s.diagonal[1] = 12;
  CHECK_FALSE(verify_smith(a, s));
}

TEST_CASE("group completion of toy monoids") {
  // {0, 1, 2} with n + m capped at 2: [1]+[2] = [2] kills everything
  const FinCat points = FinCat::from(fibred::testing::arrows({"a0", "a1", "a2"}, {}));
  IsoClasses classes = iso_classes(points);
  REQUIRE(classes.classes.size() == 3);
  SumDesignation capped{[](Obj x, Obj y) -> std::optional<Obj> { return std::min<Obj>(x + y, 2); }, 0};
  ValidationReport rep;
  const auto g = group_completion(classes, capped, &rep);
  CHECK(format_invariants(g.invariants) == "()");
  CHECK(g.invariants.empty());
  CHECK(g.omitted.empty());

  // sums beyond 2 unknown: N truncated, still Z with omitted pairs
  SumDesignation partial{[](Obj x, Obj y) -> std::optional<Obj> {
                           if (x + y > 2) return std::nullopt;
                           return x + y;
                         },
                         0};
  ValidationReport rep2;
  const auto n = group_completion(classes, partial, &rep2);
  CHECK(n.invariants == std::vector<Integer>{0});
  CHECK(n.omitted.size() == 2);
  CHECK(rep2.count(Severity::truncation) > 0);
  CHECK(verify_group_isomorphism(n, IntMatrix::from({{0}, {1}, {2}})).ok());
  CHECK_FALSE(verify_group_isomorphism(n, IntMatrix::from({{0}, {2}, {4}})).ok());
}

TEST_CASE("F2 vector spaces: K0 is Z via dimension") {
  const FinCat t = FinCat::terminal();
  ModuleOptions o;
  o.rings = {2};
  o.bound = 8;
  const auto m = make_module_opfibration(t, o);
  const FibreColimits* col = m->colimits();
  REQUIRE(col);
  FibreCategory fibre(m->projection(), 0);
  const IsoClasses classes = iso_classes(fibre);
  REQUIRE(classes.classes.size() == 4);
  const Category& E = m->total();
  SumDesignation sum;
  sum.zero = *col->zero_object(0);
  sum.sum = [&](Obj x, Obj y) -> std::optional<Obj> {
    auto d = col->direct_sum(x, y);
    if (!d || !E.in_universe(d->object)) return std::nullopt;
    return d->object;
  };
  CHECK(validate_sum(classes, sum).ok());
  ValidationReport rep;
  const auto g = group_completion(classes, sum, &rep);
  CHECK(g.invariants == std::vector<Integer>{0});
  std::string why;
  CHECK(verify_smith(g.relations, g.smith, &why));
  IntMatrix dims(classes.representatives.size(), 1);
  for (std::size_t i = 0; i < classes.representatives.size(); ++i) {
    const auto name = E.object_name(classes.representatives[i]);
    dims(i, 0) = std::stol(name.substr(name.find(':') + 1));
  }
  const auto iso = verify_group_isomorphism(g, dims);
  INFO(iso.summary());
  CHECK(iso.ok());
}

TEST_CASE("Z/6 Loc: K0 is Z^2 with the (a, b) coordinates", "[oracle]") {
  const LocK0 k = z6_loc_k0(false);
  CHECK(k.classes.classes.size() == 14);
  CHECK(k.report.count(Severity::violation) == 0);
  CHECK(format_invariants(k.group.invariants) == "(0,0)");
  std::string why;
  CHECK(verify_smith(k.group.relations, k.group.smith, &why));
  IntMatrix coords(k.dims.size(), 2);
  for (std::size_t i = 0; i < k.dims.size(); ++i) {
    coords(i, 0) = k.dims[i].first;
    coords(i, 1) = k.dims[i].second;
  }
  const auto iso = verify_group_isomorphism(k.group, coords);
  INFO(iso.summary());
  CHECK(iso.ok());
}

TEST_CASE("Z/6 Loc with constant rank: K0 is Z") {
  const LocK0 k = z6_loc_k0(true);
  CHECK(k.classes.classes.size() == 3);
  CHECK(k.group.invariants == std::vector<Integer>{0});
  IntMatrix rank(k.dims.size(), 1);
  for (std::size_t i = 0; i < k.dims.size(); ++i) rank(i, 0) = k.dims[i].first;
  CHECK(verify_group_isomorphism(k.group, rank).ok());
}
