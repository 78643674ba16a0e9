#include <algorithm>
#include <set>

#include "fibred/error.hpp"
#include "fibred/explicit.hpp"

namespace fibred {

namespace {

class ExplicitProjection final : public Projection {
 public:
  ExplicitProjection(const FinCat& e, const FinCat& b, std::vector<std::size_t> obj, std::vector<std::size_t> mor)
      : e_(e), b_(b), obj_(std::move(obj)), mor_(std::move(mor)) {}
  const Category& source() const override { return e_; }
  const Category& target() const override { return b_; }
  Obj map_object(Obj x) const override { return obj_.at(x); }
  Mor map_morphism(const Mor& m) const override { return b_.mor(mor_.at(FinCat::index(m))); }
  std::uint32_t tag_of(Obj, Obj, const Mor& h) const override { return static_cast<std::uint32_t>(FinCat::index(h)); }

 private:
  const FinCat& e_;
  const FinCat& b_;
  std::vector<std::size_t> obj_, mor_;
};

class ExplicitOpfibration final : public MonoidalOpfibration {
 public:
  ExplicitOpfibration(const ExplicitOpfibData& d, const Limits& limits)
      : total_(std::make_unique<FinCat>(FinCat::from(d.total))), base_(std::make_unique<FinCat>(FinCat::from(d.base))) {
    const ExplicitFunctor f(*total_, *base_, d.projection);
    std::vector<std::size_t> obj, mor;
    std::vector<std::uint32_t> tags;
    for (Obj x : total_->objects()) obj.push_back(f.map_object(x));
    for (std::size_t i = 0; i < total_->num_morphisms(); ++i) {
      mor.push_back(FinCat::index(f.map_morphism(total_->mor(i))));
      tags.push_back(static_cast<std::uint32_t>(mor.back()));
    }
    total_->set_tags(tags);
    p_ = std::make_unique<ExplicitProjection>(*total_, *base_, obj, mor);

    auto o = [&](const std::string& id) {
      auto i = total_->object_index(id);
      if (!i) throw StructuralError("unknown total object " + id);
      return static_cast<Obj>(*i);
    };
    auto m = [&](const std::string& id) {
      auto i = total_->morphism_index(id);
      if (!i) throw StructuralError("unknown total morphism " + id);
      return *i;
    };
    auto bo = [&](const std::string& id) {
      auto i = base_->object_index(id);
      if (!i) throw StructuralError("unknown base object " + id);
      return static_cast<Obj>(*i);
    };
    auto bm = [&](const std::string& id) {
      auto i = base_->morphism_index(id);
      if (!i) throw StructuralError("unknown base morphism " + id);
      return *i;
    };
    for (const auto& [k, v] : d.tensor_objects) tensor_obj_[{o(k.first), o(k.second)}] = o(v);
    for (const auto& [k, v] : d.tensor_morphisms) tensor_mor_[{m(k.first), m(k.second)}] = m(v);
    for (const auto& [k, v] : d.unit_objects) unit_obj_[bo(k)] = o(v);
    for (const auto& [k, v] : d.unit_morphisms) unit_mor_[bm(k)] = m(v);
    for (const auto& [k, v] : d.associator)
      assoc_[{o(std::get<0>(k)), o(std::get<1>(k)), o(std::get<2>(k))}] = m(v);
    for (const auto& [k, v] : d.left_unitor) lunit_[o(k)] = m(v);
    for (const auto& [k, v] : d.right_unitor) runit_[o(k)] = m(v);
    for (const auto& [k, v] : d.braiding) braid_[{o(k.first), o(k.second)}] = m(v);
    for (const auto& [k, v] : d.cleavage) lifts_[{bm(k.first), o(k.second)}] = m(v);
    for (std::size_t h = 0; h < base_->num_morphisms(); ++h)
      for (Obj e : total_->objects())
        if (p_->map_object(e) == base_->source_of(h) && !lifts_.count({h, e}))
          if (auto l = least_opcartesian_lift(*p_, base_->mor(h), e, limits)) lifts_[{h, e}] = FinCat::index(*l);
    has_braiding_ = !d.braiding.empty();
  }

  const Category& total() const override { return *total_; }
  const Category& base() const override { return *base_; }
  const Projection& projection() const override { return *p_; }

  Mor lift(const Mor& f, Obj e) const override {
    return total_->mor(at(lifts_, {FinCat::index(f), e}, "cleavage", base_->morphism_name(f) + ", " + total_->object_name(e)));
  }
  Obj tensor(Obj a, Obj b) const override {
    return at(tensor_obj_, {a, b}, "tensor", total_->object_name(a) + ", " + total_->object_name(b));
  }
  Mor tensor(const Mor& f, const Mor& g) const override {
    return total_->mor(at(tensor_mor_, {FinCat::index(f), FinCat::index(g)}, "tensor",
                          total_->morphism_name(f) + ", " + total_->morphism_name(g)));
  }
  Obj unit(Obj b) const override { return at(unit_obj_, b, "unit", base_->object_name(b)); }
  Mor unit(const Mor& h) const override {
    return total_->mor(at(unit_mor_, FinCat::index(h), "unit", base_->morphism_name(h)));
  }
  Mor associator(Obj a, Obj b, Obj c) const override {
    return total_->mor(at(assoc_, {a, b, c}, "associator",
                          total_->object_name(a) + ", " + total_->object_name(b) + ", " + total_->object_name(c)));
  }
  Mor left_unitor(Obj a) const override { return total_->mor(at(lunit_, a, "left unitor", total_->object_name(a))); }
  Mor right_unitor(Obj a) const override { return total_->mor(at(runit_, a, "right unitor", total_->object_name(a))); }
  bool has_braiding() const override { return has_braiding_; }
  Mor braiding(Obj a, Obj b) const override {
    if (!has_braiding_) throw UnsupportedError("not claimed symmetric");
    return total_->mor(at(braid_, {a, b}, "braiding", total_->object_name(a) + ", " + total_->object_name(b)));
  }

 private:
  template <class M>
  static typename M::mapped_type at(const M& map, const typename M::key_type& key, const char* what,
                                    const std::string& who) {
    auto it = map.find(key);
    if (it == map.end()) throw StructuralError(std::string("missing ") + what + " entry for (" + who + ")");
    return it->second;
  }

  std::unique_ptr<FinCat> total_, base_;
  std::unique_ptr<ExplicitProjection> p_;
  std::map<std::pair<Obj, Obj>, Obj> tensor_obj_;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> tensor_mor_;
  std::map<Obj, Obj> unit_obj_;
  std::map<std::size_t, std::size_t> unit_mor_;
  std::map<std::tuple<Obj, Obj, Obj>, std::size_t> assoc_;
  std::map<Obj, std::size_t> lunit_, runit_;
  std::map<std::pair<Obj, Obj>, std::size_t> braid_;
  std::map<std::pair<std::size_t, Obj>, std::size_t> lifts_;
  bool has_braiding_ = false;
};

}  // namespace

std::unique_ptr<MonoidalOpfibration> make_explicit_opfibration(const ExplicitOpfibData& data, const Limits& limits) {
  return std::make_unique<ExplicitOpfibration>(data, limits);
}

std::optional<Mor> least_opcartesian_lift(const Projection& p, const Mor& f, Obj e, const Limits& limits) {
  const Category& total = p.source();
  std::vector<std::pair<std::string, Mor>> cands;
  for (Obj y : total.objects()) {
    if (p.map_object(y) != f.tgt) continue;
    total.for_each_hom_over(e, y, p.tag_of(e, y, f), [&](const Mor& m) {
      cands.emplace_back(total.morphism_name(m), m);
      return true;
    });
  }
  std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [name, m] : cands)
    if (is_opcartesian(p, m, limits).opcartesian) return m;
  return std::nullopt;
}

namespace {

/// One fibre of an indexed presentation with id-level helpers.
struct FibreView {
  const IndexedMonoidalPresentation::Fibre* p = nullptr;
  FinCat cat;

  std::string compose(const std::string& g, const std::string& f) const {
    auto gi = cat.morphism_index(g), fi = cat.morphism_index(f);
    if (!gi || !fi) throw StructuralError("unknown fibre morphism " + (gi ? f : g));
    auto c = cat.composite(*gi, *fi);
    if (!c) throw StructuralError("missing fibre composite (" + g + ", " + f + ")");
    return cat.morphism_id(*c);
  }
  std::string identity(const std::string& x) const {
    auto i = cat.object_index(x);
    if (!i) throw StructuralError("unknown fibre object " + x);
    return cat.morphism_id(cat.identity_of(*i));
  }
  std::string source(const std::string& m) const { return cat.object_id(cat.source_of(*cat.morphism_index(m))); }
  std::string target(const std::string& m) const { return cat.object_id(cat.target_of(*cat.morphism_index(m))); }
  std::string tensor(const std::string& x, const std::string& y) const {
    auto it = p->tensor_objects.find({x, y});
    if (it == p->tensor_objects.end()) throw StructuralError("missing fibre tensor (" + x + ", " + y + ")");
    return it->second;
  }
  std::string tensor_mor(const std::string& u, const std::string& v) const {
    auto it = p->tensor_morphisms.find({u, v});
    if (it == p->tensor_morphisms.end()) throw StructuralError("missing fibre tensor (" + u + ", " + v + ")");
    return it->second;
  }
};

}  // namespace

GrothendieckResult grothendieck_construction(const IndexedMonoidalPresentation& p) {
  GrothendieckResult out;
  ValidationReport& r = out.report;
  const FinCat base = FinCat::from(p.base);
  std::map<std::string, FibreView> fib;
  for (std::size_t b = 0; b < base.num_objects(); ++b) {
    const std::string& bid = base.object_id(b);
    auto it = p.fibres.find(bid);
    if (it == p.fibres.end()) throw StructuralError("no fibre over base object " + bid);
    auto rep = validate_category(it->second.category);
    if (!rep.ok()) r.add(Severity::structural, "grothendieck.fibre", "fibre over " + bid + " is not a category", {bid});
    fib[bid] = FibreView{&it->second, FinCat::from(it->second.category)};
  }
  for (const auto& [fid, t] : p.transitions) {
    auto fi = base.morphism_index(fid);
    if (!fi) throw StructuralError("transition for unknown base morphism " + fid);
    auto rep = validate_functor(fib[base.object_id(base.source_of(*fi))].p->category,
                                fib[base.object_id(base.target_of(*fi))].p->category, t.functor);
    if (!rep.ok()) r.add(Severity::structural, "grothendieck.transition", "transition is not a functor", {fid});
  }

  auto is_id = [&](std::size_t f) { return base.identity_of(base.source_of(f)) == f; };
  auto transition = [&](std::size_t f) -> const IndexedMonoidalPresentation::Transition& {
    auto it = p.transitions.find(base.morphism_id(f));
    if (it == p.transitions.end()) throw StructuralError("no transition functor for " + base.morphism_id(f));
    return it->second;
  };
  auto push_obj = [&](std::size_t f, const std::string& x) -> std::string {
    if (is_id(f)) return x;
    const auto& m = transition(f).functor.objects;
    auto it = m.find(x);
    if (it == m.end()) throw StructuralError("transition " + base.morphism_id(f) + " misses object " + x);
    return it->second;
  };
  auto push_mor = [&](std::size_t f, const std::string& u) -> std::string {
    if (is_id(f)) return u;
    const auto& m = transition(f).functor.morphisms;
    auto it = m.find(u);
    if (it == m.end()) throw StructuralError("transition " + base.morphism_id(f) + " misses morphism " + u);
    return it->second;
  };
  // (g∘f)_*X -> g_*f_*X
  auto comp_iso = [&](std::size_t g, std::size_t f, const std::string& x) -> std::string {
    const FibreView& tv = fib[base.object_id(base.target_of(g))];
    auto it = p.composition.find({base.morphism_id(g), base.morphism_id(f), x});
    if (it != p.composition.end()) return it->second;
    const auto gf = *base.composite(g, f);
    const std::string a = push_obj(gf, x), b = push_obj(g, push_obj(f, x));
    if (a != b)
      throw StructuralError("composition iso for (" + base.morphism_id(g) + ", " + base.morphism_id(f) + ", " + x +
                            ") is required");
    return tv.identity(a);
  };

  auto obj_id = [&](std::size_t b, const std::string& x) { return base.object_id(b) + ":" + x; };
  auto mor_id = [&](std::size_t f, const std::string& x, const std::string& m) {
    return base.morphism_id(f) + "[" + x + ";" + m + "]";
  };

  struct TM {
    std::size_t f;
    std::string x, m;
  };
  std::map<std::string, TM> tms;
  auto& tp = out.data.total;
  for (std::size_t b = 0; b < base.num_objects(); ++b)
    for (const auto& x : fib[base.object_id(b)].p->category.objects) tp.objects.push_back(obj_id(b, x));
  for (std::size_t f = 0; f < base.num_morphisms(); ++f) {
    const std::size_t a = base.source_of(f), b = base.target_of(f);
    const FibreView& av = fib[base.object_id(a)];
    const FibreView& bv = fib[base.object_id(b)];
    for (const auto& x : av.p->category.objects) {
      std::string fx;
      try {
        fx = push_obj(f, x);
      } catch (const StructuralError& e) {
        r.add(Severity::structural, "grothendieck.transition", e.what(), {base.morphism_id(f), x});
        continue;
      }
      auto fxi = bv.cat.object_index(fx);
      if (!fxi) {
        r.add(Severity::structural, "grothendieck.transition", "image object is not in the fibre",
              {base.morphism_id(f), x, fx});
        continue;
      }
      for (const auto& y : bv.p->category.objects)
        for (std::size_t mi : bv.cat.hom_list(*fxi, *bv.cat.object_index(y))) {
          const std::string id = mor_id(f, x, bv.cat.morphism_id(mi));
          tp.morphisms.push_back({id, obj_id(a, x), obj_id(b, y)});
          tms[id] = TM{f, x, bv.cat.morphism_id(mi)};
          out.data.projection.morphisms[id] = base.morphism_id(f);
        }
      const std::string lid = mor_id(f, x, bv.identity(fx));
      out.data.cleavage[{base.morphism_id(f), obj_id(a, x)}] = lid;
    }
  }
  for (std::size_t b = 0; b < base.num_objects(); ++b) {
    const FibreView& v = fib[base.object_id(b)];
    for (const auto& x : v.p->category.objects) {
      tp.identities[obj_id(b, x)] = mor_id(base.identity_of(b), x, v.identity(x));
      out.data.projection.objects[obj_id(b, x)] = base.object_id(b);
    }
  }

  // (g, Y, n) ∘ (f, X, m) = (g∘f, X, n ∘ g_*(m) ∘ c_{g,f,X})
  std::set<std::pair<std::string, std::string>> failed;
  for (const auto& [gid, g] : tms)
    for (const auto& [fid, f] : tms) {
      const FibreView& mid = fib[base.object_id(base.target_of(f.f))];
      if (base.source_of(g.f) != base.target_of(f.f) || mid.target(f.m) != g.x) continue;
      try {
        const std::size_t gf = *base.composite(g.f, f.f);
        const FibreView& tv = fib[base.object_id(base.target_of(g.f))];
        const std::string m = tv.compose(tv.compose(g.m, push_mor(g.f, f.m)), comp_iso(g.f, f.f, f.x));
        tp.composites[{gid, fid}] = mor_id(gf, f.x, m);
      } catch (const StructuralError& e) {
        r.add(Severity::structural, "grothendieck.composition", e.what(),
              {base.morphism_id(g.f), base.morphism_id(f.f), f.x});
      }
    }

  // monoidal structure
  for (std::size_t b = 0; b < base.num_objects(); ++b) {
    const FibreView& v = fib[base.object_id(b)];
    const std::size_t idb = base.identity_of(b);
    out.data.unit_objects[base.object_id(b)] = obj_id(b, v.p->unit);
    for (const auto& [k, z] : v.p->tensor_objects) out.data.tensor_objects[{obj_id(b, k.first), obj_id(b, k.second)}] = obj_id(b, z);
    for (const auto& [k, a] : v.p->associator) {
      const auto& [x, y, z] = k;
      try {
        out.data.associator[{obj_id(b, x), obj_id(b, y), obj_id(b, z)}] = mor_id(idb, v.source(a), a);
      } catch (const std::exception&) {
        r.add(Severity::structural, "grothendieck.associator", "unknown associator component", {a});
      }
    }
    for (const auto& [x, l] : v.p->left_unitor) out.data.left_unitor[obj_id(b, x)] = mor_id(idb, v.source(l), l);
    for (const auto& [x, l] : v.p->right_unitor) out.data.right_unitor[obj_id(b, x)] = mor_id(idb, v.source(l), l);
    for (const auto& [k, s] : v.p->braiding)
      out.data.braiding[{obj_id(b, k.first), obj_id(b, k.second)}] = mor_id(idb, v.source(s), s);
  }
  for (std::size_t f = 0; f < base.num_morphisms(); ++f) {
    const std::size_t a = base.source_of(f), b = base.target_of(f);
    const FibreView& av = fib[base.object_id(a)];
    const FibreView& bv = fib[base.object_id(b)];
    try {
      const std::string ia = av.p->unit, fia = push_obj(f, ia);
      std::string eps = bv.identity(fia);
      if (!is_id(f) && !transition(f).unit_comparison.empty()) eps = transition(f).unit_comparison;
      out.data.unit_morphisms[base.morphism_id(f)] = mor_id(f, ia, eps);
    } catch (const StructuralError& e) {
      r.add(Severity::structural, "grothendieck.unit", e.what(), {base.morphism_id(f)});
    }
  }
  // (f, X, m) ⊗ (f, X', m') = (f, X⊗X', (m⊗m') ∘ τ_{X,X'})
  std::map<std::size_t, std::vector<const std::pair<const std::string, TM>*>> by_base;
  for (const auto& e : tms) by_base[e.second.f].push_back(&e);
  for (const auto& [f, list] : by_base) {
    const FibreView& av = fib[base.object_id(base.source_of(f))];
    const FibreView& bv = fib[base.object_id(base.target_of(f))];
    for (const auto* u : list)
      for (const auto* w : list) {
        try {
          const std::string xx = av.tensor(u->second.x, w->second.x);
          std::string tau = bv.identity(push_obj(f, xx));
          if (!is_id(f)) {
            auto it = transition(f).tensor_comparison.find({u->second.x, w->second.x});
            if (it != transition(f).tensor_comparison.end()) tau = it->second;
          }
          const std::string m = bv.compose(bv.tensor_mor(u->second.m, w->second.m), tau);
          out.data.tensor_morphisms[{u->first, w->first}] = mor_id(f, xx, m);
        } catch (const StructuralError&) {
          // left missing; the verifier reports it where it is needed
        }
      }
  }
  out.data.base = p.base;

  const auto rep = validate_category(tp);
  for (const auto& fnd : rep.findings()) {
    if (fnd.clause != "category.associativity") {
      r.add(fnd.severity, fnd.clause, fnd.message, fnd.witnesses);
      continue;
    }
    std::vector<std::string> w;
    for (const auto& id : fnd.witnesses) w.push_back(tms.count(id) ? base.morphism_id(tms[id].f) : id);
    w.insert(w.end(), fnd.witnesses.begin(), fnd.witnesses.end());
    r.add(Severity::violation, "grothendieck.coherence", "composition isos are incoherent", w);
  }
  return out;
}

}  // namespace fibred
