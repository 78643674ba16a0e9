#include "fibred/error.hpp"
#include "fibred/opfib.hpp"

namespace fibred {

namespace {

std::string nm(const Category& c, const Mor& m) {
  try {
    return c.morphism_name(m);
  } catch (const std::exception&) {
    return "<unnamed>";
  }
}

Mor filler_or_throw(const MonoidalOpfibration& m, const Mor& through, const Mor& g, Obj b, const char* what) {
  auto h = find_filler(m.projection(), through, g, m.base().identity(b));
  if (!h) throw StructuralError(std::string("no filler for ") + what);
  return *h;
}

template <class F>
void guarded(ValidationReport& r, const std::string& clause, const std::vector<std::string>& who, F&& body) {
  try {
    body();
  } catch (const StructuralError& e) {
    r.add(Severity::structural, clause, e.what(), who);
  } catch (const TruncationError& e) {
    r.add(Severity::truncation, clause, e.what(), who);
  } catch (const UnsupportedError& e) {
    r.add(Severity::structural, clause, e.what(), who);
  }
}

}  // namespace

DirectImage::DirectImage(const MonoidalOpfibration& m, const Mor& f)
    : m_(m),
      f_(f),
      src_(std::make_unique<FibreCategory>(m.projection(), f.src)),
      tgt_(std::make_unique<FibreCategory>(m.projection(), f.tgt)) {}

Mor DirectImage::map_morphism(const Mor& u) const {
  const Category& e = m_.total();
  return filler_or_throw(m_, m_.lift(f_, u.src), e.compose(m_.lift(f_, u.tgt), u), f_.tgt, "f_*(u)");
}

Mor DirectImage::tensor_comparison(Obj x, Obj y) const {
  return filler_or_throw(m_, m_.tensor(m_.lift(f_, x), m_.lift(f_, y)), m_.lift(f_, m_.tensor(x, y)), f_.tgt,
                         "the tensor comparison");
}

Mor DirectImage::unit_comparison() const {
  return filler_or_throw(m_, m_.unit(f_), m_.lift(f_, m_.unit(f_.src)), f_.tgt, "the unit comparison");
}

ValidationReport certify_direct_image(const MonoidalOpfibration& m, const Mor& f, const Limits& limits) {
  ValidationReport r;
  const Category& E = m.total();
  const Category& B = m.base();
  DirectImage d(m, f);
  Rng rng = make_rng(limits.seed, "direct-image:" + B.morphism_name(f));
  const std::string fname = B.morphism_name(f);
  const auto objs = m.fibre_objects(f.src);
  auto in = [&](Obj x) { return E.in_universe(x); };
  auto gens = [&](Obj x, Obj y) {
    return hom_generators(E, x, y, m.projection().tag_of(x, y, B.identity(f.src)), limits, rng).morphisms;
  };

  std::size_t n = 0;
  for (Obj x : objs) {
    guarded(r, "direct-image.functor", {fname, E.object_name(x)}, [&] {
      if (!E.is_identity(d.map_morphism(E.identity(x))))
        r.add(Severity::violation, "direct-image.functor", "f_* does not preserve the identity",
              {fname, E.object_name(x)});
    });
    for (Obj y : objs)
      for (const Mor& u : gens(x, y))
        for (Obj z : objs)
          for (const Mor& v : gens(y, z)) {
            if (++n > limits.enumeration_budget) break;
            guarded(r, "direct-image.functor", {fname, nm(E, v), nm(E, u)}, [&] {
              if (d.map_morphism(E.compose(v, u)) != E.compose(d.map_morphism(v), d.map_morphism(u)))
                r.add(Severity::violation, "direct-image.functor", "f_* does not preserve composition",
                      {fname, nm(E, v), nm(E, u)});
            });
          }
  }
  r.note("direct-image.functor", E.linear() ? CheckMode::basis : CheckMode::exhaustive, n);

  Mor eps;
  bool have_eps = false;
  guarded(r, "direct-image.comparison", {"unit(" + fname + ")"}, [&] {
    eps = d.unit_comparison();
    have_eps = true;
    if (!E.is_iso(eps))
      r.add(Severity::violation, "direct-image.comparison", "unit comparison is not invertible", {fname});
  });

  std::size_t k = 0;
  for (Obj x : objs)
    for (Obj y : objs) {
      if (!in(m.tensor(x, y))) continue;
      ++k;
      const std::string datum = "comparison(" + fname + "; " + E.object_name(x) + "; " + E.object_name(y) + ")";
      guarded(r, "direct-image.comparison", {datum}, [&] {
        const Mor mu = d.tensor_comparison(x, y);
        if (!E.is_iso(mu))
          r.add(Severity::violation, "direct-image.comparison", "tensor comparison is not invertible", {datum});
        for (Obj x2 : objs) {
          if (!in(m.tensor(x2, y))) continue;
          for (const Mor& u : gens(x, x2)) {
            const Mor lhs = E.compose(d.tensor_comparison(x2, y), m.tensor(d.map_morphism(u), E.identity(d.map_object(y))));
            const Mor rhs = E.compose(d.map_morphism(m.tensor(u, E.identity(y))), mu);
            if (lhs != rhs)
              r.add(Severity::violation, "direct-image.naturality", "tensor comparison is not natural", {datum, nm(E, u)});
          }
        }
        for (Obj y2 : objs) {
          if (!in(m.tensor(x, y2))) continue;
          for (const Mor& v : gens(y, y2)) {
            const Mor lhs = E.compose(d.tensor_comparison(x, y2), m.tensor(E.identity(d.map_object(x)), d.map_morphism(v)));
            const Mor rhs = E.compose(d.map_morphism(m.tensor(E.identity(x), v)), mu);
            if (lhs != rhs)
              r.add(Severity::violation, "direct-image.naturality", "tensor comparison is not natural", {datum, nm(E, v)});
          }
        }
      });
    }
  r.note("direct-image.comparison", CheckMode::exhaustive, k);

  std::size_t a = 0;
  for (Obj x : objs)
    for (Obj y : objs)
      for (Obj z : objs) {
        const Obj xy = m.tensor(x, y), yz = m.tensor(y, z);
        if (!in(xy) || !in(yz) || !in(m.tensor(xy, z)) || !in(m.tensor(x, yz))) continue;
        const Obj fx = d.map_object(x), fy = d.map_object(y), fz = d.map_object(z);
        if (!in(m.tensor(fx, fy)) || !in(m.tensor(fy, fz)) || !in(m.tensor(m.tensor(fx, fy), fz)) ||
            !in(m.tensor(fx, m.tensor(fy, fz))))
          continue;
        ++a;
        const std::string datum = "associativity(" + fname + "; " + E.object_name(x) + "; " + E.object_name(y) +
                                  "; " + E.object_name(z) + ")";
        guarded(r, "direct-image.associativity", {datum}, [&] {
          const Mor lhs = E.compose(E.compose(d.map_morphism(m.associator(x, y, z)), d.tensor_comparison(xy, z)),
                                    m.tensor(d.tensor_comparison(x, y), E.identity(fz)));
          const Mor rhs = E.compose(E.compose(d.tensor_comparison(x, yz), m.tensor(E.identity(fx), d.tensor_comparison(y, z))),
                                    m.associator(fx, fy, fz));
          if (lhs != rhs)
            r.add(Severity::violation, "direct-image.associativity", "associativity square fails", {datum});
        });
      }
  r.note("direct-image.associativity", CheckMode::exhaustive, a);

  if (have_eps) {
    const Obj ia = m.unit(f.src);
    for (Obj x : objs) {
      const Obj fx = d.map_object(x);
      const std::string datum = "unitality(" + fname + "; " + E.object_name(x) + ")";
      guarded(r, "direct-image.unitality", {datum}, [&] {
        if (in(m.tensor(ia, x))) {
          const Mor lhs = E.compose(E.compose(d.map_morphism(m.left_unitor(x)), d.tensor_comparison(ia, x)),
                                    m.tensor(eps, E.identity(fx)));
          if (lhs != m.left_unitor(fx))
            r.add(Severity::violation, "direct-image.unitality", "left unit square fails", {datum});
        }
        if (in(m.tensor(x, ia))) {
          const Mor lhs = E.compose(E.compose(d.map_morphism(m.right_unitor(x)), d.tensor_comparison(x, ia)),
                                    m.tensor(E.identity(fx), eps));
          if (lhs != m.right_unitor(fx))
            r.add(Severity::violation, "direct-image.unitality", "right unit square fails", {datum});
        }
      });
    }
    r.note("direct-image.unitality", CheckMode::exhaustive, objs.size());
  }
  return r;
}

ValidationReport certify_pseudofunctoriality(const MonoidalOpfibration& m, const Mor& f, const Mor& g,
                                             const Limits& limits) {
  ValidationReport r;
  const Category& E = m.total();
  const Category& B = m.base();
  const Projection& P = m.projection();
  if (f.tgt != g.src) throw StructuralError("base morphisms are not composable");
  const Mor gf = B.compose(g, f);
  DirectImage df(m, f), dg(m, g), dgf(m, gf);
  Rng rng = make_rng(limits.seed, "pseudofunctor");
  const auto objs = m.fibre_objects(f.src);
  std::map<Obj, Mor> comp;
  for (Obj x : objs) {
    const std::string datum =
        "connecting(" + B.morphism_name(g) + "; " + B.morphism_name(f) + "; " + E.object_name(x) + ")";
    guarded(r, "pseudofunctor.exists", {datum}, [&] {
      const Mor through = m.lift(gf, x);
      const Mor target = E.compose(m.lift(g, df.map_object(x)), m.lift(f, x));
      auto c = find_filler(P, through, target, B.identity(g.tgt));
      if (!c) {
        r.add(Severity::violation, "pseudofunctor.exists", "no connecting morphism", {datum});
        return;
      }
      const std::uint64_t n = count_fillers(P, through, target, B.identity(g.tgt), limits);
      if (n != 1)
        r.add(Severity::violation, "pseudofunctor.unique", "connecting morphism is not unique",
              {datum, std::to_string(n) + " candidates"});
      if (!E.is_iso(*c)) r.add(Severity::violation, "pseudofunctor.iso", "connecting morphism is not invertible", {datum});
      comp.emplace(x, *c);
    });
  }
  r.note("pseudofunctor.unique", E.linear() ? CheckMode::basis : CheckMode::exhaustive, objs.size());

  std::size_t n = 0;
  for (const auto& [x, cx] : comp)
    for (const auto& [y, cy] : comp)
      for (const Mor& u : hom_generators(E, x, y, P.tag_of(x, y, B.identity(f.src)), limits, rng).morphisms) {
        ++n;
        guarded(r, "pseudofunctor.naturality", {nm(E, u)}, [&] {
          if (E.compose(cy, dgf.map_morphism(u)) != E.compose(dg.map_morphism(df.map_morphism(u)), cx))
            r.add(Severity::violation, "pseudofunctor.naturality", "connecting isomorphism is not natural",
                  {B.morphism_name(g), B.morphism_name(f), nm(E, u)});
        });
      }
  r.note("pseudofunctor.naturality", E.linear() ? CheckMode::basis : CheckMode::exhaustive, n);
  return r;
}

std::uint64_t connecting_morphisms(const MonoidalOpfibration& m, const Mor& f, Obj e, const Mor& other,
                                   const Limits& limits) {
  return count_fillers(m.projection(), m.lift(f, e), other, m.base().identity(f.tgt), limits);
}

}  // namespace fibred
