#include <algorithm>
#include <map>
#include <set>

#include "fibred/error.hpp"
#include "fibred/fincat.hpp"

namespace fibred {

namespace {

constexpr const char* kStructure = "category.structure";

}  // namespace

ValidationReport validate_category(const FinCatPresentation& p) {
  ValidationReport r;
  std::map<std::string, std::size_t> obj;
  for (const auto& o : p.objects)
    if (!obj.emplace(o, obj.size()).second) r.add(Severity::structural, kStructure, "duplicate object identifier", {o});

  struct M {
    std::string src, tgt;
    bool ok;
  };
  std::map<std::string, M> mor;
  for (const auto& m : p.morphisms) {
    const bool ok = obj.count(m.source) && obj.count(m.target);
    if (!ok) r.add(Severity::structural, kStructure, "morphism has a dangling endpoint", {m.id});
    if (!mor.emplace(m.id, M{m.source, m.target, ok}).second)
      r.add(Severity::structural, kStructure, "duplicate morphism identifier", {m.id});
  }
  auto valid = [&](const std::string& id) {
    auto it = mor.find(id);
    return it != mor.end() && it->second.ok;
  };

  std::map<std::string, std::string> ident;
  for (const auto& o : p.objects) {
    auto it = p.identities.find(o);
    if (it == p.identities.end()) {
      r.add(Severity::structural, kStructure, "object has no identity", {o});
      continue;
    }
    if (!valid(it->second)) {
      r.add(Severity::structural, kStructure, "identity is dangling", {o, it->second});
      continue;
    }
    const auto& m = mor.at(it->second);
    if (m.src != o || m.tgt != o) {
      r.add(Severity::structural, kStructure, "identity is not an endomorphism", {o, it->second});
      continue;
    }
    ident[o] = it->second;
  }
  for (const auto& [o, id] : p.identities)
    if (!obj.count(o)) r.add(Severity::structural, kStructure, "identity declared for unknown object", {o});

  for (const auto& [gf, h] : p.composites) {
    const auto& [g, f] = gf;
    if (!valid(g) || !valid(f) || !valid(h)) {
      r.add(Severity::structural, kStructure, "composite entry is dangling", {g, f});
      continue;
    }
    if (mor.at(f).tgt != mor.at(g).src)
      r.add(Severity::structural, kStructure, "composite defined for a non-composable pair", {g, f});
  }

  auto comp = [&](const std::string& g, const std::string& f) -> const std::string* {
    auto it = p.composites.find({g, f});
    if (it == p.composites.end() || !valid(it->second)) return nullptr;
    return &it->second;
  };

  // typing and completeness over every composable pair
  for (const auto& [g, mg] : mor) {
    if (!mg.ok) continue;
    for (const auto& [f, mf] : mor) {
      if (!mf.ok || mf.tgt != mg.src) continue;
      const std::string* h = comp(g, f);
      if (!h) {
        r.add(Severity::structural, kStructure, "missing composite for a composable pair", {g, f});
        continue;
      }
      const auto& mh = mor.at(*h);
      if (mh.src != mf.src || mh.tgt != mg.tgt)
        r.add(Severity::violation, "category.composite-typing",
              "compose(" + g + "," + f + ") = " + *h + " has endpoints " + mh.src + " -> " + mh.tgt + ", expected " +
                  mf.src + " -> " + mg.tgt,
              {g, f});
    }
  }

  for (const auto& [f, mf] : mor) {
    if (!mf.ok) continue;
    auto is = ident.find(mf.src), it = ident.find(mf.tgt);
    if (it != ident.end()) {
      const std::string* h = comp(it->second, f);
      if (h && *h != f)
        r.add(Severity::violation, "category.identity", "compose(id, f) != f", {it->second, f});
    }
    if (is != ident.end()) {
      const std::string* h = comp(f, is->second);
      if (h && *h != f)
        r.add(Severity::violation, "category.identity", "compose(f, id) != f", {f, is->second});
    }
  }

  for (const auto& [h, mh] : mor) {
    if (!mh.ok) continue;
    for (const auto& [g, mg] : mor) {
      if (!mg.ok || mg.tgt != mh.src) continue;
      const std::string* hg = comp(h, g);
      for (const auto& [f, mf] : mor) {
        if (!mf.ok || mf.tgt != mg.src) continue;
        const std::string* gf = comp(g, f);
        if (!hg || !gf) continue;
        const std::string* left = comp(h, *gf);
        const std::string* right = comp(*hg, f);
        if (!left || !right) continue;
        if (*left != *right)
          r.add(Severity::violation, "category.associativity",
                "compose(h, compose(g,f)) = " + *left + " but compose(compose(h,g), f) = " + *right, {h, g, f});
      }
    }
  }
  return r;
}

ValidationReport validate_category(const Category& c, const Limits& limits) {
  ValidationReport r;
  const auto& objs = c.objects();
  const std::size_t n = objs.size();
  std::vector<std::uint64_t> hs(n * n);
  std::uint64_t total_mor = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      hs[i * n + j] = c.hom_size(objs[i], objs[j]);
      total_mor = sat_add(total_mor, hs[i * n + j]);
    }

  auto guard = [&](auto&& body, const std::vector<std::string>& who) {
    try {
      body();
    } catch (const StructuralError& e) {
      r.add(Severity::structural, kStructure, e.what(), who);
    }
  };

  for (Obj x : objs) {
    guard(
        [&] {
          Mor id = c.identity(x);
          if (id.src != x || id.tgt != x)
            r.add(Severity::violation, "category.identity", "identity is not an endomorphism", {c.object_name(x)});
        },
        {c.object_name(x)});
  }

  auto check_identity = [&](const Mor& f) {
    guard(
        [&] {
          if (c.compose(c.identity(f.tgt), f) != f)
            r.add(Severity::violation, "category.identity", "compose(id, f) != f", {c.morphism_name(f)});
          if (c.compose(f, c.identity(f.src)) != f)
            r.add(Severity::violation, "category.identity", "compose(f, id) != f", {c.morphism_name(f)});
        },
        {c.morphism_name(f)});
  };
  auto check_triple = [&](const Mor& f, const Mor& g, const Mor& h) {
    guard(
        [&] {
          Mor gf = c.compose(g, f), hg = c.compose(h, g);
          if (gf.src != f.src || gf.tgt != g.tgt) {
            r.add(Severity::violation, "category.composite-typing", "composite has wrong endpoints",
                  {c.morphism_name(g), c.morphism_name(f)});
            return;
          }
          if (hg.src != g.src || hg.tgt != h.tgt) {
            r.add(Severity::violation, "category.composite-typing", "composite has wrong endpoints",
                  {c.morphism_name(h), c.morphism_name(g)});
            return;
          }
          if (c.compose(h, gf) != c.compose(hg, f))
            r.add(Severity::violation, "category.associativity", "associativity fails",
                  {c.morphism_name(h), c.morphism_name(g), c.morphism_name(f)});
        },
        {c.morphism_name(h), c.morphism_name(g), c.morphism_name(f)});
  };

  if (total_mor <= limits.enumeration_budget) {
    for (Obj x : objs)
      for (Obj y : objs) c.for_each_hom(x, y, [&](const Mor& f) {
          check_identity(f);
          return true;
        });
    r.note("category.identity", CheckMode::exhaustive, total_mor);
  } else {
    auto rng = make_rng(limits.seed, "category.identity");
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::size_t done = 0;
    for (std::size_t t = 0; t < limits.samples * 8 && done < limits.samples; ++t) {
      auto f = c.sample_hom(objs[pick(rng)], objs[pick(rng)], rng);
      if (!f) continue;
      check_identity(*f);
      ++done;
    }
    r.note("category.identity", CheckMode::sampled, done);
  }

  std::uint64_t triples = 0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t d = 0; d < n; ++d)
        for (std::size_t e = 0; e < n; ++e)
          triples = sat_add(triples, sat_mul(sat_mul(hs[a * n + b], hs[b * n + d]), hs[d * n + e]));

  if (triples <= limits.enumeration_budget) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        if (!hs[a * n + b]) continue;
        std::vector<Mor> fs;
        c.for_each_hom(objs[a], objs[b], [&](const Mor& m) {
          fs.push_back(m);
          return true;
        });
        for (std::size_t d = 0; d < n; ++d) {
          if (!hs[b * n + d]) continue;
          std::vector<Mor> gs;
          c.for_each_hom(objs[b], objs[d], [&](const Mor& m) {
            gs.push_back(m);
            return true;
          });
          for (std::size_t e = 0; e < n; ++e) {
            if (!hs[d * n + e]) continue;
            c.for_each_hom(objs[d], objs[e], [&](const Mor& h) {
              for (const auto& f : fs)
                for (const auto& g : gs) check_triple(f, g, h);
              return true;
            });
          }
        }
      }
    r.note("category.associativity", CheckMode::exhaustive, triples);
  } else {
    auto rng = make_rng(limits.seed, "category.associativity");
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::size_t done = 0;
    for (std::size_t t = 0; t < limits.samples * 16 && done < limits.samples; ++t) {
      const Obj a = objs[pick(rng)], b = objs[pick(rng)], d = objs[pick(rng)], e = objs[pick(rng)];
      auto f = c.sample_hom(a, b, rng);
      if (!f) continue;
      auto g = c.sample_hom(b, d, rng);
      if (!g) continue;
      auto h = c.sample_hom(d, e, rng);
      if (!h) continue;
      check_triple(*f, *g, *h);
      ++done;
    }
    r.note("category.associativity", CheckMode::sampled, done);
  }
  return r;
}

ValidationReport validate_functor(const FinCatPresentation& source, const FinCatPresentation& target,
                                  const FunctorPresentation& fp) {
  ValidationReport r;
  FinCat s, t;
  try {
    s = FinCat::from(source);
    t = FinCat::from(target);
  } catch (const StructuralError& e) {
    r.add(Severity::structural, "functor.structure", std::string("source or target is malformed: ") + e.what());
    return r;
  }
  std::vector<std::optional<std::size_t>> om(s.num_objects()), mm(s.num_morphisms());
  for (std::size_t x = 0; x < s.num_objects(); ++x) {
    auto it = fp.objects.find(s.object_id(x));
    if (it == fp.objects.end()) {
      r.add(Severity::structural, "functor.structure", "object map is not total", {s.object_id(x)});
      continue;
    }
    om[x] = t.object_index(it->second);
    if (!om[x]) r.add(Severity::structural, "functor.structure", "object mapped to unknown object", {it->first, it->second});
  }
  for (std::size_t m = 0; m < s.num_morphisms(); ++m) {
    auto it = fp.morphisms.find(s.morphism_id(m));
    if (it == fp.morphisms.end()) {
      r.add(Severity::structural, "functor.structure", "morphism map is not total", {s.morphism_id(m)});
      continue;
    }
    mm[m] = t.morphism_index(it->second);
    if (!mm[m])
      r.add(Severity::structural, "functor.structure", "morphism mapped to unknown morphism", {it->first, it->second});
  }
  for (const auto& [k, v] : fp.objects)
    if (!s.object_index(k)) r.add(Severity::structural, "functor.structure", "object map names unknown source object", {k});
  for (const auto& [k, v] : fp.morphisms)
    if (!s.morphism_index(k))
      r.add(Severity::structural, "functor.structure", "morphism map names unknown source morphism", {k});

  for (std::size_t m = 0; m < s.num_morphisms(); ++m) {
    if (!mm[m] || !om[s.source_of(m)] || !om[s.target_of(m)]) continue;
    if (t.source_of(*mm[m]) != *om[s.source_of(m)] || t.target_of(*mm[m]) != *om[s.target_of(m)])
      r.add(Severity::violation, "functor.typing", "image has the wrong endpoints", {s.morphism_id(m)});
  }
  for (std::size_t x = 0; x < s.num_objects(); ++x) {
    auto idm = mm[s.identity_of(x)];
    if (idm && om[x] && *idm != t.identity_of(*om[x]))
      r.add(Severity::violation, "functor.identity", "identity not preserved", {s.object_id(x)});
  }
  for (std::size_t g = 0; g < s.num_morphisms(); ++g)
    for (std::size_t f = 0; f < s.num_morphisms(); ++f) {
      if (s.target_of(f) != s.source_of(g)) continue;
      auto gf = s.composite(g, f);
      if (!gf || !mm[g] || !mm[f] || !mm[*gf]) continue;
      if (t.target_of(*mm[f]) != t.source_of(*mm[g])) continue;
      auto img = t.composite(*mm[g], *mm[f]);
      if (!img || *img != *mm[*gf])
        r.add(Severity::violation, "functor.composition", "F(g∘f) != F(g)∘F(f)", {s.morphism_id(g), s.morphism_id(f)});
    }
  return r;
}

ValidationReport validate_functor(const Functor& fn, const Limits& limits) {
  ValidationReport r;
  const Category& s = fn.source();
  const Category& t = fn.target();
  const auto& objs = s.objects();
  auto guard = [&](auto&& body, std::vector<std::string> who) {
    try {
      body();
    } catch (const StructuralError& e) {
      r.add(Severity::structural, "functor.structure", e.what(), std::move(who));
    } catch (const TruncationError& e) {
      r.add(Severity::truncation, "functor.structure", e.what(), std::move(who));
    }
  };
  for (Obj x : objs) {
    guard(
        [&] {
          Obj y = fn.map_object(x);
          if (!t.in_universe(y))
            r.add(Severity::truncation, "functor.structure", "image object lies outside the target universe",
                  {s.object_name(x), t.object_name(y)});
          if (fn.map_morphism(s.identity(x)) != t.identity(y))
            r.add(Severity::violation, "functor.identity", "identity not preserved", {s.object_name(x)});
        },
        {s.object_name(x)});
  }
  const std::size_t n = objs.size();
  std::uint64_t pairs = 0;
  std::vector<std::uint64_t> hs(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) hs[i * n + j] = s.hom_size(objs[i], objs[j]);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t d = 0; d < n; ++d) pairs = sat_add(pairs, sat_mul(hs[a * n + b], hs[b * n + d]));

  auto check_pair = [&](const Mor& f, const Mor& g) {
    guard(
        [&] {
          Mor ff = fn.map_morphism(f), fg = fn.map_morphism(g);
          if (ff.src != fn.map_object(f.src) || ff.tgt != fn.map_object(f.tgt)) {
            r.add(Severity::violation, "functor.typing", "image has the wrong endpoints", {s.morphism_name(f)});
            return;
          }
          if (fg.src != fn.map_object(g.src) || fg.tgt != fn.map_object(g.tgt)) {
            r.add(Severity::violation, "functor.typing", "image has the wrong endpoints", {s.morphism_name(g)});
            return;
          }
          if (fn.map_morphism(s.compose(g, f)) != t.compose(fg, ff))
            r.add(Severity::violation, "functor.composition", "F(g∘f) != F(g)∘F(f)",
                  {s.morphism_name(g), s.morphism_name(f)});
        },
        {s.morphism_name(g), s.morphism_name(f)});
  };

  if (pairs <= limits.enumeration_budget) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        if (!hs[a * n + b]) continue;
        std::vector<Mor> fs;
        s.for_each_hom(objs[a], objs[b], [&](const Mor& m) {
          fs.push_back(m);
          return true;
        });
        for (std::size_t d = 0; d < n; ++d)
          s.for_each_hom(objs[b], objs[d], [&](const Mor& g) {
            for (const auto& f : fs) check_pair(f, g);
            return true;
          });
      }
    r.note("functor.composition", CheckMode::exhaustive, pairs);
  } else {
    auto rng = make_rng(limits.seed, "functor.composition");
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::size_t done = 0;
    for (std::size_t t2 = 0; t2 < limits.samples * 16 && done < limits.samples; ++t2) {
      const Obj a = objs[pick(rng)], b = objs[pick(rng)], d = objs[pick(rng)];
      auto f = s.sample_hom(a, b, rng);
      if (!f) continue;
      auto g = s.sample_hom(b, d, rng);
      if (!g) continue;
      check_pair(*f, *g);
      ++done;
    }
    r.note("functor.composition", CheckMode::sampled, done);
  }
  return r;
}

ValidationReport validate_nat_trans(const Functor& f, const Functor& g, const Components& component,
                                    const Functor* over, bool iso, const std::string& name, const Limits& limits) {
  ValidationReport r;
  const Category& s = f.source();
  const Category& t = f.target();
  const auto& objs = s.objects();
  std::vector<std::optional<Mor>> eta(objs.size());
  for (std::size_t i = 0; i < objs.size(); ++i) {
    const Obj x = objs[i];
    try {
      eta[i] = component(x);
      if (!eta[i]) {
        r.add(Severity::structural, name + ".structure", "missing component", {s.object_name(x)});
        continue;
      }
      if (eta[i]->src != f.map_object(x) || eta[i]->tgt != g.map_object(x)) {
        r.add(Severity::violation, name + ".typing", "component has the wrong endpoints",
              {s.object_name(x), t.morphism_name(*eta[i])});
        eta[i].reset();
        continue;
      }
      if (over) {
        Mor b = over->map_morphism(*eta[i]);
        if (!over->target().is_identity(b))
          r.add(Severity::violation, name + ".over-base", "component does not lie over an identity",
                {s.object_name(x), t.morphism_name(*eta[i])});
      }
      if (iso && !t.is_iso(*eta[i]))
        r.add(Severity::violation, name + ".iso", "component is not invertible",
              {s.object_name(x), t.morphism_name(*eta[i])});
    } catch (const StructuralError& e) {
      r.add(Severity::structural, name + ".structure", e.what(), {s.object_name(x)});
      eta[i].reset();
    } catch (const TruncationError& e) {
      r.add(Severity::truncation, name + ".structure", e.what(), {s.object_name(x)});
      eta[i].reset();
    }
  }
  std::map<Obj, std::size_t> pos;
  for (std::size_t i = 0; i < objs.size(); ++i) pos[objs[i]] = i;

  auto check = [&](const Mor& m) {
    const auto& ex = eta[pos.at(m.src)];
    const auto& ey = eta[pos.at(m.tgt)];
    if (!ex || !ey) return;
    try {
      if (t.compose(g.map_morphism(m), *ex) != t.compose(*ey, f.map_morphism(m)))
        r.add(Severity::violation, name + ".naturality", "naturality square fails",
              {s.morphism_name(m), s.object_name(m.src), s.object_name(m.tgt)});
    } catch (const StructuralError& e) {
      r.add(Severity::structural, name + ".structure", e.what(), {s.morphism_name(m)});
    }
  };
  std::uint64_t total = 0;
  for (Obj x : objs)
    for (Obj y : objs) total = sat_add(total, s.hom_size(x, y));
  if (total <= limits.enumeration_budget) {
    for (Obj x : objs)
      for (Obj y : objs) s.for_each_hom(x, y, [&](const Mor& m) {
          check(m);
          return true;
        });
    r.note(name + ".naturality", CheckMode::exhaustive, total);
  } else {
    auto rng = make_rng(limits.seed, name);
    std::uniform_int_distribution<std::size_t> pick(0, objs.size() - 1);
    std::size_t done = 0;
    for (std::size_t k = 0; k < limits.samples * 8 && done < limits.samples; ++k) {
      auto m = s.sample_hom(objs[pick(rng)], objs[pick(rng)], rng);
      if (!m) continue;
      check(*m);
      ++done;
    }
    r.note(name + ".naturality", CheckMode::sampled, done);
  }
  return r;
}

}  // namespace fibred
