#include "fibred/site.hpp"

#include <algorithm>

#include "fibred/error.hpp"

namespace fibred {

namespace {

constexpr std::size_t kMaxFreeRank = 64;

std::string obj_id(const FinCat& c, Obj x) { return c.object_id(x); }

std::optional<Obj> resolve_monoid(const MonoidCategory& mon, const std::string& name) {
  if (auto x = mon.find_object(name)) return x;
  const Category& E = mon.fibration().total();
  auto c = E.find_object(name);
  if (!c) return std::nullopt;
  std::optional<Obj> found;
  for (Obj r : mon.objects()) {
    if (mon.monoid(r).carrier != *c) continue;
    if (found) throw StructuralError("carrier " + name + " carries more than one monoid structure");
    found = r;
  }
  return found;
}

std::string rank_label(const std::optional<long>& r) { return r ? std::to_string(*r) : std::string("-"); }

}  // namespace

ValidationReport validate_precotopology(const FinCat& base, const PreCotopology& j, bool require_identities) {
  ValidationReport rep;
  for (const auto& [x, families] : j.families) {
    auto xi = base.object_index(x);
    if (!xi) {
      rep.add(Severity::structural, "precotopology.object", "unknown object " + x, {x});
      continue;
    }
    bool has_identity = false;
    for (std::size_t k = 0; k < families.size(); ++k) {
      const auto& fam = families[k];
      if (fam.size() == 1) {
        auto m = base.morphism_index(fam[0]);
        if (m && *m == base.identity_of(*xi)) has_identity = true;
      }
      for (const auto& id : fam) {
        auto m = base.morphism_index(id);
        if (!m) {
          rep.add(Severity::structural, "precotopology.morphism", "unknown morphism " + id, {x, id});
        } else if (base.source_of(*m) != *xi) {
          rep.add(Severity::structural, "precotopology.source",
                  id + " does not start at " + x, {x, std::to_string(k), id});
        }
      }
    }
    if (require_identities && !has_identity)
      rep.add(Severity::violation, "precotopology.identity", "{id} is not a family of " + x, {x});
  }
  if (require_identities)
    for (std::size_t x = 0; x < base.num_objects(); ++x)
      if (!j.families.count(base.object_id(x)))
        rep.add(Severity::violation, "precotopology.identity", base.object_id(x) + " has no families",
                {base.object_id(x)});
  return rep;
}

Site::Site(const FinCat& base, const ModuleCategory& modules, const MonoidDiagram& f, const PreCotopology& j,
           const TrivialDesignation& t, const Limits& limits)
    : base_(base), mod_(modules), j_(j), t_(t), limits_(limits) {
  const MonoidCategory& mon = mod_.monoids();
  objects_.resize(base_.num_objects());
  for (std::size_t x = 0; x < base_.num_objects(); ++x) {
    auto it = f.objects.find(base_.object_id(x));
    if (it == f.objects.end()) throw StructuralError("no monoid assigned to " + base_.object_id(x));
    auto r = resolve_monoid(mon, it->second);
    if (!r) throw StructuralError("unknown monoid " + it->second + " at " + base_.object_id(x));
    objects_[x] = *r;
  }
  for (const auto& [id, _] : f.objects)
    if (!base_.object_index(id)) throw StructuralError("monoid assigned to unknown object " + id);
  for (const auto& [id, _] : f.morphisms)
    if (!base_.morphism_index(id)) throw StructuralError("monoid morphism assigned to unknown morphism " + id);
  morphisms_.resize(base_.num_morphisms());
  for (std::size_t m = 0; m < base_.num_morphisms(); ++m) {
    const Obj s = objects_[base_.source_of(m)], d = objects_[base_.target_of(m)];
    auto it = f.morphisms.find(base_.morphism_id(m));
    if (it == f.morphisms.end()) {
      if (base_.identity_of(base_.source_of(m)) != m)
        throw StructuralError("no monoid morphism assigned to " + base_.morphism_id(m));
      morphisms_[m] = mon.identity(s);
      continue;
    }
    auto phi = mon.find_morphism(s, d, it->second);
    if (!phi)
      throw StructuralError(it->second + " is not a monoid morphism " + mon.object_name(s) + " -> " +
                            mon.object_name(d));
    morphisms_[m] = *phi;
  }
  functor_ = std::make_unique<LambdaFunctor>(
      base_, mon, [this](Obj x) { return objects_.at(x); },
      [this](const Mor& m) { return morphisms_.at(FinCat::index(m)); });

  for (const auto& id : t_.objects)
    if (!base_.object_index(id)) throw StructuralError("trivial designation names unknown object " + id);
  for (const auto& [id, fam] : t_.modules) {
    auto xi = base_.object_index(id);
    if (!xi) throw StructuralError("trivial modules at unknown object " + id);
    const Obj r = objects_[*xi];
    auto& out = trivial_[*xi];
    if (fam.generator == "free") {
      std::vector<Obj> seen;
      for (std::size_t k = 0; k <= kMaxFreeRank; ++k) {
        auto fk = free_module(mod_, r, k);
        if (!fk) break;
        const Obj c = mod_.module(*fk).carrier;
        if (std::find(seen.begin(), seen.end(), c) != seen.end()) break;
        seen.push_back(c);
        out.emplace_back(*fk, static_cast<long>(k));
      }
    } else if (!fam.generator.empty()) {
      throw UnsupportedError("unknown trivial-module generator " + fam.generator);
    }
    for (const auto& e : fam.modules) {
      auto m = mod_.find_object(e.module);
      if (!m) throw StructuralError("unknown trivial module " + e.module + " at " + id);
      if (mod_.module(*m).monoid != r) throw StructuralError(e.module + " is not a module over F(" + id + ")");
      out.emplace_back(*m, e.rank);
    }
  }
}

std::vector<Obj> Site::fibre(Obj x) const { return mod_.modules_over(monoid_at(x)); }

std::unique_ptr<Category> Site::fibre_category(Obj x) const {
  return std::make_unique<FibreCategory>(mod_.projection(), monoid_at(x));
}

const std::vector<std::pair<Obj, std::optional<long>>>& Site::trivial_modules(Obj x) const {
  static const std::vector<std::pair<Obj, std::optional<long>>> none;
  auto it = trivial_.find(x);
  return it == trivial_.end() ? none : it->second;
}

ValidationReport Site::validate() const {
  ValidationReport rep = validate_precotopology(base_, j_);
  const MonoidCategory& mon = mod_.monoids();
  for (std::size_t x = 0; x < base_.num_objects(); ++x) {
    const Obj r = objects_[x];
    auto c = validate_monoid(mon.fibration(), mon.monoid(r), true);
    if (!c.ok())
      rep.add(Severity::violation, "site.commutative", mon.object_name(r) + " is not commutative",
              {obj_id(base_, x), mon.object_name(r)});
    if (!mon.in_universe(r))
      rep.add(Severity::warning, "site.universe", mon.object_name(r) + " is outside the enumerated universe",
              {obj_id(base_, x)});
  }
  for (std::size_t g = 0; g < base_.num_morphisms(); ++g) {
    for (std::size_t f = 0; f < base_.num_morphisms(); ++f) {
      if (base_.target_of(f) != base_.source_of(g)) continue;
      auto gf = base_.composite(g, f);
      if (!gf) continue;
      const Mor lhs = morphisms_[*gf];
      const Mor rhs = mon.compose(morphisms_[g], morphisms_[f]);
      if (!(lhs == rhs))
        rep.add(Severity::violation, "site.functor.composition", "F(g∘f) differs from F(g)∘F(f)",
                {base_.morphism_id(g), base_.morphism_id(f)});
    }
  }
  for (std::size_t x = 0; x < base_.num_objects(); ++x)
    if (!(morphisms_[base_.identity_of(x)] == mon.identity(objects_[x])))
      rep.add(Severity::violation, "site.functor.identity", "F does not preserve the identity",
              {base_.object_id(x)});
  for (const auto& [x, mods] : trivial_)
    for (const auto& [m, rank] : mods)
      if (!mod_.in_universe(m))
        rep.add(Severity::warning, "site.trivial.universe",
                mod_.object_name(m) + " lies outside the enumerated universe", {obj_id(base_, x), rank_label(rank)});
  return rep;
}

PulledBackModules::PulledBackModules(const Site& s)
    : s_(s), total_(std::make_unique<PullbackCategory>(s.functor(), s.modules().projection())) {}

std::vector<Obj> PulledBackModules::fibre(Obj x) const {
  std::vector<Obj> out;
  for (Obj e : total_->objects())
    if (total_->components(e).first == x) out.push_back(e);
  return out;
}

std::optional<Mor> PulledBackModules::lift(const Mor& u, Obj e) const {
  const auto [x, m] = total_->components(e);
  if (x != u.src) throw StructuralError("lift: object does not lie over the source of the base morphism");
  const Extension ext = extension_of_scalars(s_.modules(), m, s_.functor().map_morphism(u));
  if (!total_->pair_object(u.tgt, ext.module)) {
    // the extension may be interned beside an equal universe module
    for (Obj n : s_.fibre(u.tgt))
      if (auto iso = module_isomorphism(s_.modules(), ext.module, n)) {
        return total_->pair(u, s_.modules().compose(*iso, ext.unit));
      }
    return std::nullopt;
  }
  return total_->pair(u, ext.unit);
}

ValidationReport PulledBackModules::verify(const Limits& limits) const {
  ValidationReport rep;
  const FinCat& B = s_.base();
  const ModuleCategory& mod = s_.modules();
  for (Obj x : B.objects()) {
    std::vector<Obj> got;
    for (Obj e : fibre(x)) got.push_back(total_->components(e).second);
    if (got != s_.fibre(x))
      rep.add(Severity::violation, "pullback.fibre", "fibre differs from the modules over F(x)", {B.object_id(x)});
  }
  rep.note("pullback.fibre", CheckMode::exhaustive, B.num_objects());
  std::size_t cases = 0;
  for (std::size_t i = 0; i < B.num_morphisms(); ++i) {
    const Mor u = B.mor(i);
    for (Obj e : fibre(u.src)) {
      const std::string w = B.morphism_id(i) + " at " + total_->object_name(e);
      try {
        auto l = lift(u, e);
        if (!l) {
          rep.add(Severity::truncation, "pullback.lift", "lift leaves the universe", {w});
          continue;
        }
        ++cases;
        const Mor b = total_->components(*l).second;
        auto cert = is_opcartesian(mod.projection(), b, limits);
        if (!cert.opcartesian)
          rep.add(Severity::violation, "pullback.lift", "module component is not opcartesian", {w, cert.detail});
      } catch (const TruncationError& ex) {
        rep.add(Severity::truncation, "pullback.lift", ex.what(), {w});
      }
    }
  }
  rep.note("pullback.lift", CheckMode::exhaustive, cases);
  return rep;
}

ObjectTriviality is_locally_trivial_object(const Site& s, Obj x) {
  ObjectTriviality out;
  const FinCat& B = s.base();
  auto it = s.cotopology().families.find(B.object_id(x));
  if (it == s.cotopology().families.end()) return out;
  for (std::size_t k = 0; k < it->second.size(); ++k) {
    bool all = true;
    for (const auto& id : it->second[k]) {
      auto m = B.morphism_index(id);
      if (!m || !s.designation().objects.count(B.object_id(B.target_of(*m)))) {
        all = false;
        break;
      }
    }
    if (all) {
      out.locally_trivial = true;
      out.family = k;
      return out;
    }
  }
  return out;
}

ModuleTriviality is_locally_trivial_module(const Site& s, Obj x, Obj module) {
  ModuleTriviality out;
  const FinCat& B = s.base();
  const ModuleCategory& mod = s.modules();
  if (mod.module(module).monoid != s.monoid_at(x))
    throw StructuralError(mod.object_name(module) + " is not a module over F(" + B.object_id(x) + ")");
  auto it = s.cotopology().families.find(B.object_id(x));
  if (it == s.cotopology().families.end() || it->second.empty()) {
    out.reason = "no co-covering families at " + B.object_id(x);
    return out;
  }
  std::vector<std::string> reasons;
  for (std::size_t k = 0; k < it->second.size(); ++k) {
    std::vector<std::string> matches;
    std::optional<std::optional<long>> rank;
    std::string why;
    for (const auto& id : it->second[k]) {
      auto mi = B.morphism_index(id);
      if (!mi) throw StructuralError("unknown morphism " + id + " in a co-covering");
      const Obj y = B.target_of(*mi);
      const Mor phi = s.functor().map_morphism(B.mor(*mi));
      const Extension e = extension_of_scalars(mod, module, phi);
      std::optional<std::pair<Obj, std::optional<long>>> hit;
      for (const auto& cand : s.trivial_modules(y))
        if (module_isomorphism(mod, e.module, cand.first)) {
          hit = cand;
          break;
        }
      if (!hit) {
        why = "extension along " + id + " is not trivial";
        break;
      }
      if (s.designation().constant_rank) {
        if (!hit->second) {
          why = "trivial module matched along " + id + " has no rank";
          break;
        }
        if (rank && *rank != hit->second) {
          why = "ranks differ along family " + std::to_string(k);
          break;
        }
        rank = hit->second;
      }
      matches.push_back(id + " -> " + mod.object_name(hit->first) + " rank " + rank_label(hit->second));
    }
    if (why.empty()) {
      out.locally_trivial = true;
      out.family = k;
      out.matches = std::move(matches);
      return out;
    }
    reasons.push_back("family " + std::to_string(k) + ": " + why);
  }
  for (std::size_t i = 0; i < reasons.size(); ++i) out.reason += (i ? "; " : "") + reasons[i];
  return out;
}

Loc build_loc(const Site& s, Obj x) {
  Loc out;
  out.object = x;
  out.fibre = s.fibre_category(x);
  out.object_locally_trivial = is_locally_trivial_object(s, x).locally_trivial;
  if (!out.object_locally_trivial)
    out.report.add(Severity::warning, "loc.object", s.base().object_id(x) + " is not locally trivial",
                   {s.base().object_id(x)});
  for (Obj m : s.fibre(x)) {
    try {
      if (is_locally_trivial_module(s, x, m).locally_trivial) out.modules.push_back(m);
    } catch (const TruncationError& e) {
      out.report.add(Severity::truncation, "loc.membership", e.what(), {s.modules().object_name(m)});
    }
  }
  out.report.note("loc.membership", CheckMode::exhaustive, s.fibre(x).size());
  out.category = std::make_unique<FullSubcategory>(*out.fibre, out.modules);
  return out;
}

InducedFunctor induced_functor_on_loc(const Site& s, const Mor& u, const Limits& limits) {
  InducedFunctor out;
  const FinCat& B = s.base();
  const ModuleCategory& mod = s.modules();
  const MonoidCategory& mon = mod.monoids();
  const Obj x = u.src, y = u.tgt;
  const std::string uid = B.morphism_name(u);
  const Mor phi = s.functor().map_morphism(u);
  const Loc from = build_loc(s, x), to = build_loc(s, y);
  out.report.merge(from.report);
  out.report.merge(to.report);

  std::map<Obj, Extension> ext;
  for (Obj m : from.modules) {
    const Extension e = extension_of_scalars(mod, m, phi);
    ext.emplace(m, e);
    std::optional<Obj> rep;
    for (Obj n : to.modules)
      if (module_isomorphism(mod, e.module, n)) {
        rep = n;
        break;
      }
    if (!rep) {
      out.offenders.push_back(m);
      out.report.add(Severity::violation, "induced.lands", "extension along " + uid + " leaves Loc",
                     {mod.object_name(m), mod.object_name(e.module)});
      continue;
    }
    out.objects.emplace(m, *rep);
  }
  out.report.note("induced.lands", CheckMode::exhaustive, from.modules.size());
  if (!out.offenders.empty()) {
    out.objects.clear();
    return out;
  }

  // functoriality of extension on morphisms of Loc_x over the identity
  const Obj r = s.monoid_at(x);
  const std::uint32_t t = mod.tag_of_phi(r, r, mon.identity(r));
  auto rng = make_rng(limits.seed, "induced|" + uid);
  std::size_t cases = 0;
  const std::size_t n = from.modules.size();
  const std::size_t budget = std::max<std::size_t>(limits.samples, 1);
  CheckMode mode = CheckMode::exhaustive;
  std::uint64_t triples = 0;
  for (Obj a : from.modules)
    for (Obj b : from.modules) triples = sat_add(triples, sat_mul(mod.hom_size_over(a, b, t), n));
  if (triples > budget) mode = CheckMode::sampled;
  auto check = [&](const Mor& f, const Mor& g) {
    ++cases;
    try {
      const Mor lhs = extend_morphism(mod, mod.compose(g, f), phi);
      const Mor rhs = mod.compose(extend_morphism(mod, g, phi), extend_morphism(mod, f, phi));
      if (!(lhs == rhs))
        out.report.add(Severity::violation, "induced.functoriality", "extension does not preserve composition",
                       {mod.morphism_name(g), mod.morphism_name(f)});
    } catch (const StructuralError& e) {
      out.report.add(Severity::structural, "induced.functoriality", e.what(),
                     {mod.morphism_name(g), mod.morphism_name(f)});
    }
  };
  for (Obj a : from.modules) {
    const Mor id = mod.identity(a);
    const Mor img = extend_morphism(mod, id, phi);
    if (!mod.is_identity(img))
      out.report.add(Severity::violation, "induced.identity", "extension does not preserve the identity",
                     {mod.object_name(a)});
  }
  if (mode == CheckMode::exhaustive) {
    for (Obj a : from.modules)
      for (Obj b : from.modules)
        for (Obj c : from.modules)
          mod.for_each_hom_over(a, b, t, [&](const Mor& f) {
            mod.for_each_hom_over(b, c, t, [&](const Mor& g) {
              check(f, g);
              return true;
            });
            return true;
          });
  } else if (n > 0) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t k = 0; k < budget; ++k) {
      const Obj a = from.modules[pick(rng)], b = from.modules[pick(rng)], c = from.modules[pick(rng)];
      auto f = mod.sample_hom_over(a, b, t, rng);
      auto g = mod.sample_hom_over(b, c, t, rng);
      if (f && g) check(*f, *g);
    }
  }
  out.report.note("induced.functoriality", mode, cases);
  return out;
}

}  // namespace fibred
