#include <map>
#include <set>

#include "fibred/error.hpp"
#include "fibred/opfib.hpp"

namespace fibred {

namespace {

std::string label(const std::string& kind, const std::vector<std::string>& parts) {
  std::string s = kind + "(";
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "; " : "") + parts[i];
  return s + ")";
}

class Checker {
 public:
  Checker(const MonoidalOpfibration& m, const Limits& limits, const char* seed)
      : m(m), E(m.total()), B(m.base()), P(m.projection()), limits(limits), rng(make_rng(limits.seed, seed)) {
    for (Obj a : B.objects()) {
      fibres[a] = m.fibre_objects(a);
      for (Obj b : B.objects()) B.for_each_hom(a, b, [&](const Mor& f) {
          base_mors.push_back(f);
          return true;
        });
    }
  }

  const MonoidalOpfibration& m;
  const Category& E;
  const Category& B;
  const Projection& P;
  const Limits& limits;
  Rng rng;
  ValidationReport r;
  std::vector<Mor> base_mors;
  std::map<Obj, std::vector<Obj>> fibres;
  std::map<std::tuple<Obj, Obj, std::uint32_t>, HomGenerators> gens_;
  bool strict = true;
  bool sampled = false;

  std::string on(Obj x) const { return E.object_name(x); }
  std::string mn(const Mor& f) const {
    try {
      return E.morphism_name(f);
    } catch (const std::exception&) {
      return "<unnamed>";
    }
  }
  std::string bn(const Mor& f) const { return B.morphism_name(f); }
  std::string fibre(Obj b) const { return "fibre " + B.object_name(b); }

  template <class F>
  void guard(const std::string& clause, const std::vector<std::string>& who, F&& body) {
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

  bool in(Obj x) const { return E.in_universe(x); }
  Obj T(Obj a, Obj b) const { return m.tensor(a, b); }
  Mor T(const Mor& a, const Mor& b) const { return m.tensor(a, b); }
  Mor id(Obj x) const { return E.identity(x); }
  Mor C(const Mor& g, const Mor& f) const { return E.compose(g, f); }

  const std::vector<Mor>& gens(Obj x, Obj y, const Mor& over) {
    const std::uint32_t t = P.tag_of(x, y, over);
    auto key = std::make_tuple(x, y, t);
    auto it = gens_.find(key);
    if (it == gens_.end()) {
      it = gens_.emplace(key, hom_generators(E, x, y, t, limits, rng)).first;
      if (it->second.mode == CheckMode::sampled) sampled = true;
    }
    return it->second.morphisms;
  }
  const std::vector<Mor>& fibre_gens(Obj x, Obj y) { return gens(x, y, B.identity(m.base_of(x))); }

  /// Runs body over every cell when the total weight fits the budget, otherwise
  /// over `samples` random cells with random generator choices.
  template <class Cell, class Weight, class Body>
  void quantify(const std::string& clause, const std::vector<Cell>& cells, Weight&& weight, Body&& body) {
    std::uint64_t total = 0;
    for (const auto& c : cells) total = sat_add(total, weight(c));
    if (total <= limits.enumeration_budget) {
      for (const auto& c : cells) body(c, nullptr);
      r.note(clause, sampled ? CheckMode::sampled : (E.linear() ? CheckMode::basis : CheckMode::exhaustive), total);
      return;
    }
    std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
    for (std::size_t k = 0; k < limits.samples; ++k) body(cells[pick(rng)], &rng);
    r.note(clause, CheckMode::sampled, limits.samples, "of " + std::to_string(total));
  }

  template <class V>
  const typename V::value_type* choose(const V& v, Rng* pick) {
    if (v.empty()) return nullptr;
    std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
    return &v[d(*pick)];
  }

  /// Visit every generator (or one random generator when sampling).
  template <class F>
  void each(const std::vector<Mor>& v, Rng* pick, F&& f) {
    if (pick) {
      if (auto* g = choose(v, pick)) f(*g);
      return;
    }
    for (const auto& g : v) f(g);
  }

  void opcartesian(const std::string& clause, const std::string& datum, const Mor& mor) {
    guard(clause, {datum}, [&] {
      const auto cert = is_opcartesian(P, mor, limits);
      if (cert.mode == CheckMode::skipped)
        r.add(Severity::warning, clause, "opcartesian test skipped: " + cert.detail, {datum});
      if (!cert.opcartesian)
        r.add(Severity::violation, clause, "not opcartesian: " + cert.detail,
              {datum, mn(mor), "through " + on(*cert.target), "over " + bn(*cert.factor), "g = " + mn(*cert.witness),
               std::to_string(cert.fillers) + " fillers"});
    });
  }
};

struct Pair {
  Obj b, x, y;
};
struct Triple {
  Obj b, x, y, z;
};

std::vector<Pair> pairs_in(const Checker& c) {
  std::vector<Pair> out;
  for (const auto& [b, objs] : c.fibres)
    for (Obj x : objs)
      for (Obj y : objs)
        if (c.in(c.T(x, y))) out.push_back({b, x, y});
  return out;
}

std::vector<Triple> triples_in(const Checker& c) {
  std::vector<Triple> out;
  for (const auto& [b, objs] : c.fibres)
    for (Obj x : objs)
      for (Obj y : objs) {
        const Obj xy = c.T(x, y);
        if (!c.in(xy)) continue;
        for (Obj z : objs) {
          const Obj yz = c.T(y, z);
          if (c.in(yz) && c.in(c.T(xy, z)) && c.in(c.T(x, yz))) out.push_back({b, x, y, z});
        }
      }
  return out;
}

void check_tensor(Checker& c) {
  const auto pairs = pairs_in(c);
  std::map<Obj, std::vector<const Pair*>> by_base;
  for (const auto& p : pairs) by_base[p.b].push_back(&p);

  // identities
  for (const auto& p : pairs)
    c.guard("tensor.functor", {label("tensor", {c.on(p.x), c.on(p.y)})}, [&] {
      if (c.T(c.id(p.x), c.id(p.y)) != c.id(c.T(p.x, p.y)))
        c.r.add(Severity::violation, "tensor.functor", "id ⊗ id is not the identity",
                {label("tensor", {c.on(p.x), c.on(p.y)}), c.fibre(p.b)});
    });
  c.r.note("tensor.functor", CheckMode::exhaustive, pairs.size(), "identities");

  // typing and projection over every base morphism
  struct Cell {
    Mor f;
    const Pair* s;
    const Pair* t;
  };
  std::vector<Cell> cells;
  for (const auto& f : c.base_mors)
    for (const Pair* s : by_base[f.src])
      for (const Pair* t : by_base[f.tgt]) cells.push_back({f, s, t});
  c.quantify(
      "tensor.over-base", cells,
      [&](const Cell& k) { return sat_mul(c.gens(k.s->x, k.t->x, k.f).size(), c.gens(k.s->y, k.t->y, k.f).size()); },
      [&](const Cell& k, Rng* pick) {
        const auto& g1 = c.gens(k.s->x, k.t->x, k.f);
        const auto& g2 = c.gens(k.s->y, k.t->y, k.f);
        c.each(g1, pick, [&](const Mor& u) {
          c.each(g2, pick, [&](const Mor& v) {
            c.guard("tensor.over-base", {c.mn(u), c.mn(v)}, [&] {
              const Mor t = c.T(u, v);
              if (t.src != c.T(k.s->x, k.s->y) || t.tgt != c.T(k.t->x, k.t->y))
                c.r.add(Severity::violation, "tensor.functor", "u ⊗ v has the wrong endpoints", {c.mn(u), c.mn(v)});
              else if (c.m.base_of(t) != k.f)
                c.r.add(Severity::violation, "tensor.over-base", "u ⊗ v does not lie over the common base morphism",
                        {c.mn(u), c.mn(v), c.bn(k.f)});
            });
          });
        });
      });

  // composition, sampled across composable base pairs
  struct Comp {
    Mor f, g;
    const Pair *a, *b2, *c2;
  };
  std::vector<Comp> comps;
  std::uint64_t budget_cells = 0;
  for (const auto& f : c.base_mors)
    for (const auto& g : c.base_mors) {
      if (f.tgt != g.src) continue;
      for (const Pair* a : by_base[f.src])
        for (const Pair* b2 : by_base[f.tgt])
          for (const Pair* c2 : by_base[g.tgt]) {
            if (++budget_cells > c.limits.enumeration_budget) break;
            comps.push_back({f, g, a, b2, c2});
          }
    }
  c.quantify(
      "tensor.composition", comps,
      [&](const Comp& k) {
        return sat_mul(sat_mul(c.gens(k.a->x, k.b2->x, k.f).size(), c.gens(k.a->y, k.b2->y, k.f).size()),
                       sat_mul(c.gens(k.b2->x, k.c2->x, k.g).size(), c.gens(k.b2->y, k.c2->y, k.g).size()));
      },
      [&](const Comp& k, Rng* pick) {
        const auto& u1 = c.gens(k.a->x, k.b2->x, k.f);
        const auto& v1 = c.gens(k.a->y, k.b2->y, k.f);
        const auto& u2 = c.gens(k.b2->x, k.c2->x, k.g);
        const auto& v2 = c.gens(k.b2->y, k.c2->y, k.g);
        c.each(u1, pick, [&](const Mor& a1) {
          c.each(v1, pick, [&](const Mor& b1) {
            c.each(u2, pick, [&](const Mor& a2) {
              c.each(v2, pick, [&](const Mor& b2) {
                c.guard("tensor.functor", {c.mn(a2), c.mn(a1), c.mn(b2), c.mn(b1)}, [&] {
                  if (c.C(c.T(a2, b2), c.T(a1, b1)) != c.T(c.C(a2, a1), c.C(b2, b1)))
                    c.r.add(Severity::violation, "tensor.functor", "⊗ does not preserve composition",
                            {c.mn(a2), c.mn(a1), c.mn(b2), c.mn(b1)});
                });
              });
            });
          });
        });
      });

  // opcartesian on pairs of chosen lifts
  std::size_t n = 0;
  for (const auto& f : c.base_mors)
    for (const Pair* p : by_base[f.src]) {
      const std::string datum = label("tensor-of-lifts", {c.bn(f), c.on(p->x), c.on(p->y)});
      c.guard("tensor.opcartesian", {datum}, [&] {
        c.opcartesian("tensor.opcartesian", datum, c.T(c.m.lift(f, p->x), c.m.lift(f, p->y)));
      });
      ++n;
    }
  c.r.note("tensor.opcartesian", c.E.linear() ? CheckMode::basis : CheckMode::exhaustive, n);
}

void check_unit(Checker& c) {
  for (Obj b : c.B.objects())
    c.guard("unit.section", {label("unit", {c.B.object_name(b)})}, [&] {
      if (c.m.base_of(c.m.unit(b)) != b)
        c.r.add(Severity::violation, "unit.section", "P(I(b)) != b", {label("unit", {c.B.object_name(b)})});
    });
  for (const auto& h : c.base_mors) {
    const std::string datum = label("unit", {c.bn(h)});
    c.guard("unit.functor", {datum}, [&] {
      const Mor u = c.m.unit(h);
      if (u.src != c.m.unit(h.src) || u.tgt != c.m.unit(h.tgt))
        c.r.add(Severity::violation, "unit.functor", "I(h) has the wrong endpoints", {datum});
      else if (c.m.base_of(u) != h)
        c.r.add(Severity::violation, "unit.section", "P(I(h)) != h", {datum});
      if (c.B.is_identity(h) && u != c.id(c.m.unit(h.src)))
        c.r.add(Severity::violation, "unit.functor", "I(id) is not an identity", {datum});
    });
    for (const auto& g : c.base_mors) {
      if (h.tgt != g.src) continue;
      c.guard("unit.functor", {label("unit", {c.bn(g), c.bn(h)})}, [&] {
        if (c.m.unit(c.B.compose(g, h)) != c.C(c.m.unit(g), c.m.unit(h)))
          c.r.add(Severity::violation, "unit.functor", "I(g∘h) != I(g)∘I(h)",
                  {label("unit", {c.bn(g)}), label("unit", {c.bn(h)})});
      });
    }
    c.guard("unit.opcartesian", {datum}, [&] { c.opcartesian("unit.opcartesian", datum, c.m.unit(h)); });
  }
  c.r.note("unit.opcartesian", c.E.linear() ? CheckMode::basis : CheckMode::exhaustive, c.base_mors.size());
}

/// Component checks shared by α, λ, ρ and β: typing, over an identity, invertible.
void component(Checker& c, const std::string& kind, const std::string& datum, Obj b, const Mor& comp, Obj src, Obj tgt) {
  if (comp.src != src || comp.tgt != tgt) {
    c.r.add(Severity::violation, kind + ".typing", "component has the wrong endpoints", {datum, c.fibre(b)});
    return;
  }
  if (c.m.base_of(comp) != c.B.identity(b))
    c.r.add(Severity::violation, kind + ".over-base", "component does not lie over an identity", {datum, c.fibre(b)});
  if (!c.E.is_iso(comp)) c.r.add(Severity::violation, kind + ".iso", "component is not invertible", {datum, c.fibre(b)});
  if (!c.E.is_identity(comp)) c.strict = false;
}

void check_associator(Checker& c, const std::vector<Triple>& triples) {
  for (const auto& t : triples) {
    const std::string datum = label("associator", {c.on(t.x), c.on(t.y), c.on(t.z)});
    c.guard("associator.typing", {datum}, [&] {
      const Obj l = c.T(c.T(t.x, t.y), t.z), rr = c.T(t.x, c.T(t.y, t.z));
      if (l != rr) c.strict = false;
      component(c, "associator", datum, t.b, c.m.associator(t.x, t.y, t.z), l, rr);
    });
  }
  c.r.note("associator.iso", CheckMode::exhaustive, triples.size());

  // naturality in each variable inside the fibre
  struct Cell {
    const Triple* t;
    int pos;
    Obj other;
  };
  std::vector<Cell> cells;
  std::set<std::tuple<Obj, Obj, Obj>> have;
  for (const auto& t : triples) have.insert({t.x, t.y, t.z});
  for (const auto& t : triples)
    for (int pos = 0; pos < 3; ++pos)
      for (Obj o : c.fibres[t.b]) {
        auto s = std::make_tuple(pos == 0 ? o : t.x, pos == 1 ? o : t.y, pos == 2 ? o : t.z);
        if (have.count(s)) cells.push_back({&t, pos, o});
      }
  auto arg = [](const Triple& t, int pos) { return pos == 0 ? t.x : pos == 1 ? t.y : t.z; };
  c.quantify(
      "associator.naturality", cells, [&](const Cell& k) { return c.fibre_gens(arg(*k.t, k.pos), k.other).size(); },
      [&](const Cell& k, Rng* pick) {
        const Triple& t = *k.t;
        Triple t2 = t;
        (k.pos == 0 ? t2.x : k.pos == 1 ? t2.y : t2.z) = k.other;
        const std::string datum = label("associator", {c.on(t.x), c.on(t.y), c.on(t.z)});
        c.each(c.fibre_gens(arg(t, k.pos), k.other), pick, [&](const Mor& u) {
          c.guard("associator.naturality", {datum, c.mn(u)}, [&] {
            const Mor fx = k.pos == 0 ? u : c.id(t.x), fy = k.pos == 1 ? u : c.id(t.y), fz = k.pos == 2 ? u : c.id(t.z);
            const Mor lhs = c.C(c.m.associator(t2.x, t2.y, t2.z), c.T(c.T(fx, fy), fz));
            const Mor rhs = c.C(c.T(fx, c.T(fy, fz)), c.m.associator(t.x, t.y, t.z));
            if (lhs != rhs)
              c.r.add(Severity::violation, "associator.naturality", "naturality square fails",
                      {datum, label("associator", {c.on(t2.x), c.on(t2.y), c.on(t2.z)}), c.mn(u)});
          });
        });
      });

  // naturality along chosen lifts
  std::size_t n = 0;
  for (const auto& f : c.base_mors)
    for (const auto& t : triples) {
      if (t.b != f.src) continue;
      const std::string datum = label("associator", {c.on(t.x), c.on(t.y), c.on(t.z)});
      c.guard("associator.naturality", {datum, c.bn(f)}, [&] {
        const Mor lx = c.m.lift(f, t.x), ly = c.m.lift(f, t.y), lz = c.m.lift(f, t.z);
        if (!c.in(c.T(c.T(lx.tgt, ly.tgt), lz.tgt)) || !c.in(c.T(lx.tgt, c.T(ly.tgt, lz.tgt)))) return;
        ++n;
        const Mor lhs = c.C(c.m.associator(lx.tgt, ly.tgt, lz.tgt), c.T(c.T(lx, ly), lz));
        const Mor rhs = c.C(c.T(lx, c.T(ly, lz)), c.m.associator(t.x, t.y, t.z));
        if (lhs != rhs)
          c.r.add(Severity::violation, "associator.naturality", "naturality fails along lifts",
                  {datum, label("associator", {c.on(lx.tgt), c.on(ly.tgt), c.on(lz.tgt)}), c.bn(f)});
      });
    }
  c.r.note("associator.naturality", CheckMode::exhaustive, n, "along lifts");
}

void check_unitors(Checker& c) {
  for (const auto& [b, objs] : c.fibres) {
    const Obj i = c.m.unit(b);
    for (Obj x : objs) {
      const std::string ld = label("left-unitor", {c.on(x)}), rd = label("right-unitor", {c.on(x)});
      c.guard("left-unitor.typing", {ld}, [&] {
        if (c.T(i, x) != x) c.strict = false;
        component(c, "left-unitor", ld, b, c.m.left_unitor(x), c.T(i, x), x);
      });
      c.guard("right-unitor.typing", {rd}, [&] {
        if (c.T(x, i) != x) c.strict = false;
        component(c, "right-unitor", rd, b, c.m.right_unitor(x), c.T(x, i), x);
      });
    }
  }

  struct Cell {
    Obj b, x, y;
  };
  std::vector<Cell> cells;
  for (const auto& [b, objs] : c.fibres)
    for (Obj x : objs)
      for (Obj y : objs) cells.push_back({b, x, y});
  c.quantify(
      "unitor.naturality", cells, [&](const Cell& k) { return c.fibre_gens(k.x, k.y).size(); },
      [&](const Cell& k, Rng* pick) {
        const Obj i = c.m.unit(k.b);
        c.each(c.fibre_gens(k.x, k.y), pick, [&](const Mor& u) {
          c.guard("left-unitor.naturality", {label("left-unitor", {c.on(k.x)}), c.mn(u)}, [&] {
            if (c.C(c.m.left_unitor(k.y), c.T(c.id(i), u)) != c.C(u, c.m.left_unitor(k.x)))
              c.r.add(Severity::violation, "left-unitor.naturality", "naturality square fails",
                      {label("left-unitor", {c.on(k.x)}), label("left-unitor", {c.on(k.y)}), c.mn(u)});
          });
          c.guard("right-unitor.naturality", {label("right-unitor", {c.on(k.x)}), c.mn(u)}, [&] {
            if (c.C(c.m.right_unitor(k.y), c.T(u, c.id(i))) != c.C(u, c.m.right_unitor(k.x)))
              c.r.add(Severity::violation, "right-unitor.naturality", "naturality square fails",
                      {label("right-unitor", {c.on(k.x)}), label("right-unitor", {c.on(k.y)}), c.mn(u)});
          });
        });
      });

  for (const auto& f : c.base_mors)
    for (Obj x : c.fibres[f.src]) {
      c.guard("left-unitor.naturality", {label("left-unitor", {c.on(x)}), c.bn(f)}, [&] {
        const Mor l = c.m.lift(f, x);
        if (c.C(c.m.left_unitor(l.tgt), c.T(c.m.unit(f), l)) != c.C(l, c.m.left_unitor(x)))
          c.r.add(Severity::violation, "left-unitor.naturality", "naturality fails along lifts",
                  {label("left-unitor", {c.on(x)}), label("left-unitor", {c.on(l.tgt)}), c.bn(f)});
      });
      c.guard("right-unitor.naturality", {label("right-unitor", {c.on(x)}), c.bn(f)}, [&] {
        const Mor l = c.m.lift(f, x);
        if (c.C(c.m.right_unitor(l.tgt), c.T(l, c.m.unit(f))) != c.C(l, c.m.right_unitor(x)))
          c.r.add(Severity::violation, "right-unitor.naturality", "naturality fails along lifts",
                  {label("right-unitor", {c.on(x)}), label("right-unitor", {c.on(l.tgt)}), c.bn(f)});
      });
    }
}

void check_coherence(Checker& c, const std::vector<Triple>& triples) {
  std::size_t n = 0;
  for (const auto& [b, objs] : c.fibres) {
    for (const auto& t : triples) {
      if (t.b != b) continue;
      for (Obj z : objs) {
        const Obj w = t.x, x = t.y, y = t.z;
        const Obj wx = c.T(w, x), yz = c.T(y, z), xy = c.T(x, y);
        if (!c.in(yz) || !c.in(c.T(wx, y)) || !c.in(c.T(c.T(wx, y), z)) || !c.in(c.T(x, yz)) ||
            !c.in(c.T(xy, z)) || !c.in(c.T(w, c.T(x, yz))) || !c.in(c.T(wx, yz)) || !c.in(c.T(w, xy)) ||
            !c.in(c.T(w, c.T(xy, z))) || !c.in(c.T(c.T(w, xy), z)))
          continue;
        ++n;
        const std::string datum = label("pentagon", {c.on(w), c.on(x), c.on(y), c.on(z)});
        c.guard("pentagon", {datum}, [&] {
          const Mor lhs = c.C(c.m.associator(w, x, yz), c.m.associator(wx, y, z));
          const Mor rhs = c.C(c.C(c.T(c.id(w), c.m.associator(x, y, z)), c.m.associator(w, xy, z)),
                              c.T(c.m.associator(w, x, y), c.id(z)));
          if (lhs != rhs) c.r.add(Severity::violation, "pentagon", "pentagon does not commute", {datum, c.fibre(b)});
        });
      }
    }
  }
  c.r.note("pentagon", CheckMode::exhaustive, n);

  std::size_t k = 0;
  for (const auto& [b, objs] : c.fibres) {
    const Obj i = c.m.unit(b);
    for (Obj x : objs)
      for (Obj y : objs) {
        if (!c.in(c.T(x, y))) continue;
        ++k;
        const std::string datum = label("triangle", {c.on(x), c.on(y)});
        c.guard("triangle", {datum}, [&] {
          const Mor lhs = c.C(c.T(c.id(x), c.m.left_unitor(y)), c.m.associator(x, i, y));
          const Mor rhs = c.T(c.m.right_unitor(x), c.id(y));
          if (lhs != rhs) c.r.add(Severity::violation, "triangle", "triangle does not commute", {datum, c.fibre(b)});
        });
      }
  }
  c.r.note("triangle", CheckMode::exhaustive, k);
}

}  // namespace

ValidationReport verify_opfibration(const Projection& p, const Cleavage& cleavage, const Limits& limits) {
  ValidationReport r;
  const Category& E = p.source();
  const Category& B = p.target();
  std::size_t n = 0;
  bool skipped = false;
  for (Obj a : B.objects())
    for (Obj b : B.objects())
      B.for_each_hom(a, b, [&](const Mor& f) {
        for (Obj e : E.objects()) {
          if (p.map_object(e) != a) continue;
          const std::string datum = label("lift", {B.morphism_name(f), E.object_name(e)});
          ++n;
          try {
            auto l = cleavage(f, e);
            if (!l) {
              r.add(Severity::structural, "opfibration.cleavage", "cleavage has no entry", {datum});
              continue;
            }
            if (l->src != e || !(p.map_morphism(*l) == f)) {
              r.add(Severity::violation, "opfibration.cleavage", "chosen lift does not lie over f at e",
                    {datum, E.morphism_name(*l)});
              continue;
            }
            const auto cert = is_opcartesian(p, *l, limits);
            if (cert.mode == CheckMode::skipped) {
              skipped = true;
              r.add(Severity::warning, "opfibration.opcartesian", "opcartesian test skipped: " + cert.detail, {datum});
            }
            if (!cert.opcartesian)
              r.add(Severity::violation, "opfibration.opcartesian", "chosen lift is not opcartesian: " + cert.detail,
                    {datum, E.morphism_name(*l), "through " + E.object_name(*cert.target),
                     "over " + B.morphism_name(*cert.factor), "g = " + E.morphism_name(*cert.witness),
                     std::to_string(cert.fillers) + " fillers"});
          } catch (const StructuralError& e2) {
            r.add(Severity::structural, "opfibration.cleavage", e2.what(), {datum});
          } catch (const TruncationError& e2) {
            r.add(Severity::truncation, "opfibration.cleavage", e2.what(), {datum});
          }
        }
        return true;
      });
  r.note("opfibration.opcartesian",
         skipped ? CheckMode::skipped : (E.linear() ? CheckMode::basis : CheckMode::exhaustive), n);
  return r;
}

ValidationReport verify_opfibration(const MonoidalOpfibration& m, const Limits& limits) {
  return verify_opfibration(
      m.projection(), [&](const Mor& f, Obj e) -> std::optional<Mor> { return m.lift(f, e); }, limits);
}

ValidationReport verify_monoidal_opfibration(const MonoidalOpfibration& m, const Limits& limits) {
  Checker c(m, limits, "monoidal");
  check_tensor(c);
  check_unit(c);
  const auto triples = triples_in(c);
  check_associator(c, triples);
  check_unitors(c);
  check_coherence(c, triples);
  c.r.note("strictness", CheckMode::exhaustive, triples.size(), c.strict ? "strict" : "not strict");
  return std::move(c.r);
}

ValidationReport verify_symmetry(const MonoidalOpfibration& m, const Limits& limits) {
  if (!m.has_braiding()) throw UnsupportedError("not claimed symmetric");
  Checker c(m, limits, "symmetry");
  const auto pairs = pairs_in(c);
  for (const auto& p : pairs) {
    const std::string datum = label("braiding", {c.on(p.x), c.on(p.y)});
    c.guard("braiding.typing", {datum}, [&] {
      component(c, "braiding", datum, p.b, c.m.braiding(p.x, p.y), c.T(p.x, p.y), c.T(p.y, p.x));
      if (c.C(c.m.braiding(p.y, p.x), c.m.braiding(p.x, p.y)) != c.id(c.T(p.x, p.y)))
        c.r.add(Severity::violation, "braiding.symmetry", "braiding twice is not the identity",
                {datum, label("braiding", {c.on(p.y), c.on(p.x)}), c.fibre(p.b)});
    });
  }
  c.r.note("braiding.symmetry", CheckMode::exhaustive, pairs.size());

  struct Cell {
    const Pair* p;
    int pos;
    Obj other;
  };
  std::set<std::pair<Obj, Obj>> have;
  for (const auto& p : pairs) have.insert({p.x, p.y});
  std::vector<Cell> cells;
  for (const auto& p : pairs)
    for (int pos = 0; pos < 2; ++pos)
      for (Obj o : c.fibres[p.b])
        if (have.count(pos == 0 ? std::make_pair(o, p.y) : std::make_pair(p.x, o))) cells.push_back({&p, pos, o});
  c.quantify(
      "braiding.naturality", cells,
      [&](const Cell& k) { return c.fibre_gens(k.pos == 0 ? k.p->x : k.p->y, k.other).size(); },
      [&](const Cell& k, Rng* pick) {
        const Pair& p = *k.p;
        const Obj x2 = k.pos == 0 ? k.other : p.x, y2 = k.pos == 1 ? k.other : p.y;
        const std::string datum = label("braiding", {c.on(p.x), c.on(p.y)});
        c.each(c.fibre_gens(k.pos == 0 ? p.x : p.y, k.other), pick, [&](const Mor& u) {
          c.guard("braiding.naturality", {datum, c.mn(u)}, [&] {
            const Mor fx = k.pos == 0 ? u : c.id(p.x), fy = k.pos == 1 ? u : c.id(p.y);
            if (c.C(c.m.braiding(x2, y2), c.T(fx, fy)) != c.C(c.T(fy, fx), c.m.braiding(p.x, p.y)))
              c.r.add(Severity::violation, "braiding.naturality", "naturality square fails",
                      {datum, label("braiding", {c.on(x2), c.on(y2)}), c.mn(u)});
          });
        });
      });
  for (const auto& f : c.base_mors)
    for (const auto& p : pairs) {
      if (p.b != f.src) continue;
      const std::string datum = label("braiding", {c.on(p.x), c.on(p.y)});
      c.guard("braiding.naturality", {datum, c.bn(f)}, [&] {
        const Mor lx = c.m.lift(f, p.x), ly = c.m.lift(f, p.y);
        if (!c.in(c.T(lx.tgt, ly.tgt))) return;
        if (c.C(c.m.braiding(lx.tgt, ly.tgt), c.T(lx, ly)) != c.C(c.T(ly, lx), c.m.braiding(p.x, p.y)))
          c.r.add(Severity::violation, "braiding.naturality", "naturality fails along lifts",
                  {datum, label("braiding", {c.on(lx.tgt), c.on(ly.tgt)}), c.bn(f)});
      });
    }

  const auto triples = triples_in(c);
  std::size_t n = 0;
  for (const auto& t : triples) {
    const Obj x = t.x, y = t.y, z = t.z;
    if (!c.in(c.T(y, x)) || !c.in(c.T(x, z)) || !c.in(c.T(z, x)) || !c.in(c.T(c.T(y, z), x)) ||
        !c.in(c.T(c.T(y, x), z)) || !c.in(c.T(y, c.T(z, x))) || !c.in(c.T(y, c.T(x, z))) ||
        !c.in(c.T(c.T(z, x), y)) || !c.in(c.T(z, c.T(x, y))) || !c.in(c.T(c.T(x, z), y)) || !c.in(c.T(x, c.T(z, y))))
      continue;
    ++n;
    const std::string datum = label("hexagon", {c.on(x), c.on(y), c.on(z)});
    c.guard("braiding.hexagon", {datum}, [&] {
      const Mor a = c.m.associator(x, y, z), bxyz = c.m.braiding(x, c.T(y, z)), a2 = c.m.associator(y, z, x);
      const Mor lhs = c.C(a2, c.C(bxyz, a));
      const Mor rhs = c.C(c.T(c.id(y), c.m.braiding(x, z)), c.C(c.m.associator(y, x, z), c.T(c.m.braiding(x, y), c.id(z))));
      if (lhs != rhs) c.r.add(Severity::violation, "braiding.hexagon", "first hexagon does not commute", {datum, c.fibre(t.b)});

      auto inv = [&](const Mor& m2) {
        auto i = c.E.inverse(m2);
        if (!i) throw StructuralError("associator component is not invertible");
        return *i;
      };
      const Mor lhs2 = c.C(inv(c.m.associator(z, x, y)), c.C(c.m.braiding(c.T(x, y), z), inv(c.m.associator(x, y, z))));
      const Mor rhs2 = c.C(c.T(c.m.braiding(x, z), c.id(y)),
                           c.C(inv(c.m.associator(x, z, y)), c.T(c.id(x), c.m.braiding(y, z))));
      if (lhs2 != rhs2)
        c.r.add(Severity::violation, "braiding.hexagon", "second hexagon does not commute", {datum, c.fibre(t.b)});
    });
  }
  c.r.note("braiding.hexagon", CheckMode::exhaustive, n);
  return std::move(c.r);
}

}  // namespace fibred
