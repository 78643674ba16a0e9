#include "fibred/algebra.hpp"

#include <algorithm>
#include <set>

#include "fibred/error.hpp"
#include "fibred/linear.hpp"

namespace fibred {

namespace {

Mor base_id(const MonoidalOpfibration& m, Obj e) { return m.base().identity(m.base_of(e)); }

Coords unit_coords(const HomBasis& b, std::size_t prime, const Vec& v) {
  Coords c(b.ambient.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i].assign(b.ambient[i], 0);
  c[prime] = v;
  return c;
}

/// The fibre morphism u with u∘e = t.
Mor fill(const MonoidalOpfibration& m, const Mor& e, const Mor& t, const char* what) {
  const Mor idb = base_id(m, t.tgt);
  if (const FibreColimits* col = m.colimits(); col && !m.total().linear()) {
    try {
      auto u = col->factor({{e, t}});
      if (u && m.base_of(*u) == idb && m.total().compose(*u, e) == t) return *u;
    } catch (const StructuralError&) {
    }
  }
  auto u = find_filler(m.projection(), e, t, idb);
  if (!u) throw StructuralError(std::string(what) + ": no fibre morphism through the lift");
  return *u;
}

struct Laws {
  const MonoidalOpfibration& m;
  const Category& E;
  explicit Laws(const MonoidalOpfibration& mm) : m(mm), E(mm.total()) {}
  Mor C(const Mor& g, const Mor& f) const { return E.compose(g, f); }
  Mor T(const Mor& f, const Mor& g) const { return m.tensor(f, g); }
  Mor id(Obj x) const { return E.identity(x); }

  bool typed_monoid(const MonoidObject& r) const {
    const Obj R = r.carrier;
    const Obj b = m.base_of(R);
    const Mor idb = m.base().identity(b);
    return r.mu.src == m.tensor(R, R) && r.mu.tgt == R && r.eta.src == m.unit(b) && r.eta.tgt == R &&
           m.base_of(r.mu) == idb && m.base_of(r.eta) == idb;
  }
  bool left_unit(const MonoidObject& r) const { return C(r.mu, T(r.eta, id(r.carrier))) == m.left_unitor(r.carrier); }
  bool right_unit(const MonoidObject& r) const {
    return C(r.mu, T(id(r.carrier), r.eta)) == m.right_unitor(r.carrier);
  }
  bool associative(const MonoidObject& r) const {
    const Obj R = r.carrier;
    return C(r.mu, T(r.mu, id(R))) == C(C(r.mu, T(id(R), r.mu)), m.associator(R, R, R));
  }
  bool commutative(const MonoidObject& r) const { return C(r.mu, m.braiding(r.carrier, r.carrier)) == r.mu; }

  bool hom_mult(const MonoidObject& r, const MonoidObject& s, const Mor& phi) const {
    return C(phi, r.mu) == C(s.mu, T(phi, phi));
  }
  bool hom_unit(const MonoidObject& s, const MonoidObject& r, const Mor& phi) const {
    return C(phi, r.eta) == C(s.eta, m.unit(m.base_of(phi)));
  }
  bool is_hom(const MonoidObject& r, const MonoidObject& s, const Mor& phi) const {
    return phi.src == r.carrier && phi.tgt == s.carrier && hom_unit(s, r, phi) && hom_mult(r, s, phi);
  }

  bool typed_module(const MonoidObject& r, Obj M, const Mor& k) const {
    return k.src == m.tensor(M, r.carrier) && k.tgt == M && m.base_of(k) == base_id(m, M) &&
           m.base_of(M) == m.base_of(r.carrier);
  }
  bool module_assoc(const MonoidObject& r, Obj M, const Mor& k) const {
    return C(k, T(k, id(r.carrier))) == C(C(k, T(id(M), r.mu)), m.associator(M, r.carrier, r.carrier));
  }
  bool module_unit(const MonoidObject& r, Obj M, const Mor& k) const {
    return C(k, T(id(M), r.eta)) == m.right_unitor(M);
  }
};

template <class F>
void guarded(ValidationReport& rep, const std::string& clause, const std::vector<std::string>& w, F&& f) {
  try {
    f();
  } catch (const StructuralError& e) {
    rep.add(Severity::structural, clause, e.what(), w);
  } catch (const TruncationError& e) {
    rep.add(Severity::truncation, clause, e.what(), w);
  } catch (const UnsupportedError& e) {
    rep.add(Severity::structural, clause, e.what(), w);
  }
}

void absorb(ValidationReport& into, const ValidationReport& from, const std::string& prefix) {
  for (const auto& f : from.findings()) into.add(f.severity, prefix + f.clause, f.message, f.witnesses);
  for (const auto& n : from.notes()) into.note(prefix + n.clause, n.mode, n.cases, n.detail);
}

Code pack(const Mor& phi, const Mor& alpha) {
  Code c;
  c.push_back(phi.code.size());
  c.push_back(phi.over);
  c.push_back(alpha.over);
  c.insert(c.end(), phi.code.begin(), phi.code.end());
  c.insert(c.end(), alpha.code.begin(), alpha.code.end());
  return c;
}

/// Split "(a,b)" at the top-level comma.
std::optional<std::pair<std::string, std::string>> split_pair(std::string_view s) {
  if (s.size() < 3 || s.front() != '(' || s.back() != ')') return std::nullopt;
  int depth = 0;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    const char c = s[i];
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (c == ',' && depth == 0) return std::make_pair(std::string(s.substr(1, i - 1)), std::string(s.substr(i + 1, s.size() - i - 2)));
  }
  return std::nullopt;
}

class MonProjection final : public Projection {
 public:
  explicit MonProjection(const MonoidCategory& c) : c_(c) {}
  const Category& source() const override { return c_; }
  const Category& target() const override { return c_.fibration().base(); }
  Obj map_object(Obj x) const override { return c_.fibration().base_of(c_.monoid(x).carrier); }
  Mor map_morphism(const Mor& m) const override { return c_.fibration().base_of(c_.underlying(m)); }
  std::uint32_t tag_of(Obj x, Obj y, const Mor& h) const override {
    return c_.fibration().projection().tag_of(c_.monoid(x).carrier, c_.monoid(y).carrier, h);
  }

 private:
  const MonoidCategory& c_;
};

class ModProjection final : public Projection {
 public:
  explicit ModProjection(const ModuleCategory& c) : c_(c) {}
  const Category& source() const override { return c_; }
  const Category& target() const override { return c_.monoids(); }
  Obj map_object(Obj x) const override { return c_.module(x).monoid; }
  Mor map_morphism(const Mor& m) const override { return c_.phi(m); }
  std::uint32_t tag_of(Obj x, Obj y, const Mor& phi) const override {
    return c_.tag_of_phi(c_.module(x).monoid, c_.module(y).monoid, phi);
  }

 private:
  const ModuleCategory& c_;
};

}  // namespace

// ---------------------------------------------------------------- validation

ValidationReport validate_monoid(const MonoidalOpfibration& m, const MonoidObject& r, bool commutative) {
  ValidationReport rep;
  const Laws L(m);
  const std::vector<std::string> w{m.total().object_name(r.carrier)};
  guarded(rep, "monoid.typing", w, [&] {
    if (!L.typed_monoid(r)) {
      rep.add(Severity::structural, "monoid.typing", "μ or η is not a fibre morphism of the right type", w);
      return;
    }
    if (!L.associative(r)) rep.add(Severity::violation, "monoid.associativity", "μ∘(μ⊗R) ≠ μ∘(R⊗μ)∘α", w);
    if (!L.left_unit(r)) rep.add(Severity::violation, "monoid.left-unit", "μ∘(η⊗R) ≠ λ", w);
    if (!L.right_unit(r)) rep.add(Severity::violation, "monoid.right-unit", "μ∘(R⊗η) ≠ ρ", w);
    if (commutative && !L.commutative(r)) rep.add(Severity::violation, "monoid.commutativity", "μ∘β ≠ μ", w);
  });
  return rep;
}

ValidationReport validate_monoid_morphism(const MonoidalOpfibration& m, const MonoidObject& r, const MonoidObject& s,
                                          const Mor& phi) {
  ValidationReport rep;
  const Laws L(m);
  const std::vector<std::string> w{m.total().morphism_name(phi)};
  guarded(rep, "monoid-morphism.typing", w, [&] {
    if (phi.src != r.carrier || phi.tgt != s.carrier) {
      rep.add(Severity::structural, "monoid-morphism.typing", "morphism does not join the carriers", w);
      return;
    }
    if (!L.hom_mult(r, s, phi)) rep.add(Severity::violation, "monoid-morphism.multiplication", "φ∘μ ≠ ν∘(φ⊗φ)", w);
    if (!L.hom_unit(s, r, phi)) rep.add(Severity::violation, "monoid-morphism.unit", "φ∘η ≠ η∘I(P(φ))", w);
  });
  return rep;
}

ValidationReport validate_module(const MonoidalOpfibration& m, const MonoidObject& r, Obj carrier, const Mor& kappa) {
  ValidationReport rep;
  const Laws L(m);
  const std::vector<std::string> w{m.total().object_name(carrier), m.total().morphism_name(kappa)};
  guarded(rep, "module.typing", w, [&] {
    if (!L.typed_module(r, carrier, kappa)) {
      rep.add(Severity::structural, "module.typing", "κ is not a fibre morphism M⊗R -> M", w);
      return;
    }
    if (!L.module_assoc(r, carrier, kappa))
      rep.add(Severity::violation, "module.associativity", "κ∘(κ⊗R) ≠ κ∘(M⊗μ)∘α", w);
    if (!L.module_unit(r, carrier, kappa)) rep.add(Severity::violation, "module.unit", "κ∘(M⊗η) ≠ ρ", w);
  });
  return rep;
}

// ---------------------------------------------------------------- monoids

MonoidCategory::MonoidCategory(const MonoidalOpfibration& m, bool commutative_only, const Limits& limits)
    : m_(m), comm_(commutative_only), limits_(limits) {
  proj_ = std::make_unique<MonProjection>(*this);
  if (comm_ && !m.has_braiding()) throw UnsupportedError("commutative monoids need a symmetric structure");
  const Category& E = m.total();
  const Laws L(m);
  for (Obj b : m.base().objects()) {
    const Mor idb = m.base().identity(b);
    const Obj I = m.unit(b);
    std::vector<Obj> reps;
    for (Obj R : m.fibre_objects(b)) {
      if (!m.monoid_carrier(R)) continue;
      const Obj RR = m.tensor(R, R);
      const auto tm = m.projection().tag_of(RR, R, idb), te = m.projection().tag_of(I, R, idb);
      if (sat_mul(E.hom_size_over(RR, R, tm), E.hom_size_over(I, R, te)) > limits.enumeration_budget)
        throw TruncationError("monoid search on " + E.object_name(R) +
                              " exceeds the enumeration budget; lower the monoid carrier bound");
      std::vector<Mor> etas;
      E.for_each_hom_over(I, R, te, [&](const Mor& e) {
        etas.push_back(e);
        return true;
      });
      E.for_each_hom_over(RR, R, tm, [&](const Mor& mu) {
        for (const Mor& eta : etas) {
          const MonoidObject cand{R, mu, eta};
          if (!L.left_unit(cand) || !L.right_unit(cand) || !L.associative(cand)) continue;
          if (comm_ && !L.commutative(cand)) continue;
          const Obj x = intern(cand);
          bool dup = false;
          for (Obj y : reps) {
            const MonoidObject& other = table_[y];
            if (!E.may_be_isomorphic(other.carrier, R)) continue;
            const auto t = m.projection().tag_of(other.carrier, R, idb);
            E.for_each_hom_over(other.carrier, R, t, [&](const Mor& f) {
              if (L.is_hom(other, cand, f) && E.inverse(f)) dup = true;
              return !dup;
            });
            if (dup) break;
          }
          if (dup) continue;
          reps.push_back(x);
          universe_.push_back(x);
        }
        return true;
      });
    }
  }
  std::sort(universe_.begin(), universe_.end());
}

const MonoidObject& MonoidCategory::monoid(Obj x) const {
  if (x >= table_.size()) throw StructuralError("unknown monoid handle");
  return table_[x];
}

Obj MonoidCategory::intern(const MonoidObject& r) const {
  const auto key = std::make_tuple(r.carrier, r.mu.code, r.eta.code);
  {
    std::shared_lock lock(mu_);
    if (auto it = index_.find(key); it != index_.end()) return it->second;
  }
  std::unique_lock lock(mu_);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  const Obj x = table_.push(r);
  index_.emplace(key, x);
  return x;
}

Mor MonoidCategory::underlying(const Mor& phi) const {
  return Mor{monoid(phi.src).carrier, monoid(phi.tgt).carrier, phi.over, phi.code};
}

bool MonoidCategory::is_monoid_morphism(Obj x, Obj y, const Mor& f) const {
  return Laws(m_).is_hom(monoid(x), monoid(y), f);
}

Mor MonoidCategory::from_underlying(Obj x, Obj y, const Mor& f) const {
  if (!is_monoid_morphism(x, y, f))
    throw StructuralError(m_.total().morphism_name(f) + " is not a monoid morphism");
  return Mor{x, y, f.over, f.code};
}

Mor MonoidCategory::lift(const Mor& h, Obj x) const {
  const MonoidObject r = monoid(x);
  const Mor l = m_.lift(h, r.carrier);
  if (m_.total().is_identity(l)) return identity(x);
  const Laws L(m_);
  MonoidObject t;
  t.carrier = l.tgt;
  t.mu = fill(m_, L.T(l, l), L.C(l, r.mu), "transported multiplication");
  t.eta = fill(m_, m_.unit(h), L.C(l, r.eta), "transported unit");
  const Obj y = intern(t);
  return Mor{x, y, l.over, l.code};
}

std::string MonoidCategory::object_name(Obj x) const {
  const MonoidObject r = monoid(x);
  const Category& E = m_.total();
  return "mon(" + E.object_name(r.carrier) + ";" + E.morphism_name(r.mu) + ";" + E.morphism_name(r.eta) + ")";
}

std::string MonoidCategory::morphism_name(const Mor& m) const { return m_.total().morphism_name(underlying(m)); }

Mor MonoidCategory::identity(Obj x) const {
  const Mor i = m_.total().identity(monoid(x).carrier);
  return Mor{x, x, i.over, i.code};
}

Mor MonoidCategory::compose(const Mor& g, const Mor& f) const {
  const Mor c = m_.total().compose(underlying(g), underlying(f));
  return Mor{f.src, g.tgt, c.over, c.code};
}

void MonoidCategory::for_each_hom(Obj x, Obj y, const MorVisitor& visit) const {
  const Obj a = m_.base_of(monoid(x).carrier), b = m_.base_of(monoid(y).carrier);
  bool go = true;
  m_.base().for_each_hom(a, b, [&](const Mor& h) {
    for_each_hom_over(x, y, proj_->tag_of(x, y, h), [&](const Mor& f) { return go = visit(f); });
    return go;
  });
}

void MonoidCategory::for_each_hom_over(Obj x, Obj y, std::uint32_t over, const MorVisitor& visit) const {
  const auto key = std::make_tuple(x, y, over);
  std::shared_ptr<const std::vector<Mor>> list;
  {
    std::lock_guard lock(cache_mu_);
    if (auto it = hom_cache_.find(key); it != hom_cache_.end()) list = it->second;
  }
  if (!list) {
    auto fresh = std::make_shared<std::vector<Mor>>();
    enumerate_homs(x, y, over, [&](const Mor& f) {
      fresh->push_back(f);
      return true;
    });
    list = fresh;
    std::lock_guard lock(cache_mu_);
    hom_cache_.emplace(key, list);
  }
  for (const Mor& f : *list)
    if (!visit(f)) return;
}

void MonoidCategory::enumerate_homs(Obj x, Obj y, std::uint32_t over, const MorVisitor& visit) const {
  const MonoidObject r = monoid(x), s = monoid(y);
  const Category& E = m_.total();
  if (E.hom_size_over(r.carrier, s.carrier, over) > limits_.enumeration_budget)
    throw TruncationError("monoid morphisms " + object_name(x) + " -> " + object_name(y) +
                          " exceed the enumeration budget");
  const Laws L(m_);
  E.for_each_hom_over(r.carrier, s.carrier, over, [&](const Mor& f) {
    if (!L.hom_unit(s, r, f) || !L.hom_mult(r, s, f)) return true;
    return visit(Mor{x, y, f.over, f.code});
  });
}

std::optional<Mor> MonoidCategory::inverse(const Mor& m) const {
  auto inv = m_.total().inverse(underlying(m));
  if (!inv) return std::nullopt;
  return Mor{m.tgt, m.src, inv->over, inv->code};
}

std::optional<Obj> MonoidCategory::find_object(std::string_view name) const {
  const std::size_t n = table_.size();
  for (Obj x = 0; x < n; ++x)
    if (object_name(x) == name) return x;
  return std::nullopt;
}

std::optional<Mor> MonoidCategory::find_morphism(Obj x, Obj y, std::string_view name) const {
  auto f = m_.total().find_morphism(monoid(x).carrier, monoid(y).carrier, name);
  if (!f || !is_monoid_morphism(x, y, *f)) return std::nullopt;
  return Mor{x, y, f->over, f->code};
}

bool MonoidCategory::may_be_isomorphic(Obj x, Obj y) const {
  const Obj a = monoid(x).carrier, b = monoid(y).carrier;
  return m_.base_of(a) == m_.base_of(b) && m_.total().may_be_isomorphic(a, b);
}

// ---------------------------------------------------------------- modules

class ModuleLinearHoms final : public LinearHoms {
 public:
  ModuleLinearHoms(const ModuleCategory& c, const LinearHoms& e) : c_(c), e_(e) {}

  const std::vector<std::uint32_t>& primes() const override { return e_.primes(); }

  std::vector<std::uint32_t> components(Obj x, Obj y) const override {
    const ModuleObject a = c_.module(x), b = c_.module(y);
    const auto& homs = c_.monoid_homs(a.monoid, b.monoid);
    const auto have = e_.components(a.carrier, b.carrier);
    std::vector<std::uint32_t> out;
    for (std::uint32_t t = 0; t < homs.size(); ++t)
      if (std::find(have.begin(), have.end(), alpha_tag(a, b, homs[t])) != have.end()) out.push_back(t);
    return out;
  }

  HomBasis basis(Obj x, Obj y, std::uint32_t over) const override {
    const auto key = std::make_tuple(x, y, over);
    {
      std::lock_guard lock(mu_);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    HomBasis out = kernel(x, y, over);
    std::lock_guard lock(mu_);
    cache_.emplace(key, out);
    return out;
  }

  Coords coordinates(const Mor& m) const override { return e_.coordinates(c_.alpha(m)); }

  Mor from_coordinates(Obj x, Obj y, std::uint32_t over, const Coords& c) const override {
    const ModuleObject a = c_.module(x), b = c_.module(y);
    const Mor& phi = c_.monoid_homs(a.monoid, b.monoid).at(over);
    const Mor alpha = e_.from_coordinates(a.carrier, b.carrier, alpha_tag(a, b, phi), c);
    return Mor{x, y, over, pack(phi, alpha)};
  }

  std::uint32_t alpha_tag(const ModuleObject& a, const ModuleObject& b, const Mor& phi) const {
    const auto& m = c_.fibration();
    return m.projection().tag_of(a.carrier, b.carrier, m.base_of(c_.monoids().underlying(phi)));
  }

 private:
  /// Solutions of σ∘(α⊗φ) = α∘κ inside the component of α.
  HomBasis kernel(Obj x, Obj y, std::uint32_t over) const {
    const auto& m = c_.fibration();
    const Category& E = m.total();
    const ModuleObject a = c_.module(x), b = c_.module(y);
    const Mor& phi = c_.monoid_homs(a.monoid, b.monoid).at(over);
    const Mor phiE = c_.monoids().underlying(phi);
    const std::uint32_t at = alpha_tag(a, b, phi);
    const HomBasis hb = e_.basis(a.carrier, b.carrier, at);
    HomBasis out{hb.ambient, std::vector<std::vector<Vec>>(hb.vectors.size())};
    for (std::size_t i = 0; i < hb.vectors.size(); ++i) {
      const std::uint32_t p = e_.primes()[i];
      const std::size_t n = hb.vectors[i].size();
      if (n == 0) continue;
      std::vector<Vec> cols;
      for (const auto& v : hb.vectors[i]) {
        const Mor al = e_.from_coordinates(a.carrier, b.carrier, at, unit_coords(hb, i, v));
        const Vec l = e_.coordinates(E.compose(b.kappa, m.tensor(al, phiE)))[i];
        const Vec r = e_.coordinates(E.compose(al, a.kappa))[i];
        Vec d(l.size());
        for (std::size_t k = 0; k < l.size(); ++k) d[k] = static_cast<std::uint8_t>((l[k] + p - r[k]) % p);
        cols.push_back(std::move(d));
      }
      FpMatrix mat(p, cols.front().size(), n);
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t r = 0; r < cols[j].size(); ++r) mat(r, j) = cols[j][r];
      for (const auto& z : mat.nullspace()) {
        Vec k(hb.ambient[i], 0);
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t e = 0; e < k.size(); ++e)
            k[e] = static_cast<std::uint8_t>((k[e] + z[j] * hb.vectors[i][j][e]) % p);
        out.vectors[i].push_back(std::move(k));
      }
    }
    return out;
  }

  const ModuleCategory& c_;
  const LinearHoms& e_;
  mutable std::mutex mu_;
  mutable std::map<std::tuple<Obj, Obj, std::uint32_t>, HomBasis> cache_;
};

namespace {

ModuleLinearHoms& module_linear(const ModuleCategory& c) {
  return const_cast<ModuleLinearHoms&>(static_cast<const ModuleLinearHoms&>(*c.linear()));
}

}  // namespace

ModuleCategory::ModuleCategory(const MonoidCategory& mon, const Limits& limits) : mon_(mon), limits_(limits) {
  proj_ = std::make_unique<ModProjection>(*this);
  const auto& m = mon.fibration();
  const Category& E = m.total();
  if (const LinearHoms* lin = E.linear()) linear_ = std::make_unique<ModuleLinearHoms>(*this, *lin);
  const Laws L(m);
  for (Obj r : mon.objects()) {
    const MonoidObject R = mon.monoid(r);
    const Obj b = m.base_of(R.carrier);
    std::vector<Obj> reps;
    for (Obj M : m.fibre_objects(b)) {
      for (const Mor& k : m.action_candidates(R.mu, R.eta, M, limits)) {
        if (!L.module_unit(R, M, k) || !L.module_assoc(R, M, k)) continue;
        const Obj x = intern(ModuleObject{r, M, k});
        bool dup = false;
        for (Obj y : reps) {
          if (!E.may_be_isomorphic(table_[y].carrier, M)) continue;
          const std::uint32_t t = tag_of_phi(r, r, mon.identity(r));
          if (linear_ && hom_size_over(y, x, t) > limits.enumeration_budget) {
            auto rng = make_rng(limits.seed, object_name(x));
            for (std::size_t s = 0; s < limits.samples * 4 && !dup; ++s)
              if (auto f = sample_hom_over(y, x, t, rng); f && E.inverse(alpha(*f))) dup = true;
            if (!dup)
              throw TruncationError("isomorphism search between modules " + object_name(y) + " and " +
                                    object_name(x) + " exceeds the enumeration budget");
          } else {
            for_each_hom_over(y, x, t, [&](const Mor& f) {
              if (E.inverse(alpha(f))) dup = true;
              return !dup;
            });
          }
          if (dup) break;
        }
        if (dup) continue;
        reps.push_back(x);
        universe_.push_back(x);
      }
    }
  }
  std::sort(universe_.begin(), universe_.end());
}

ModuleCategory::~ModuleCategory() = default;

const ModuleObject& ModuleCategory::module(Obj x) const {
  if (x >= table_.size()) throw StructuralError("unknown module handle");
  return table_[x];
}

Obj ModuleCategory::intern(const ModuleObject& m) const {
  const auto key = std::make_tuple(m.monoid, m.carrier, m.kappa.code);
  {
    std::shared_lock lock(mu_);
    if (auto it = index_.find(key); it != index_.end()) return it->second;
  }
  std::unique_lock lock(mu_);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  const Obj x = table_.push(m);
  index_.emplace(key, x);
  return x;
}

const std::vector<Mor>& ModuleCategory::monoid_homs(Obj r, Obj s) const {
  {
    std::shared_lock lock(mu_);
    if (auto it = homs_.find({r, s}); it != homs_.end()) return it->second;
  }
  std::vector<Mor> list;
  mon_.for_each_hom(r, s, [&](const Mor& f) {
    list.push_back(f);
    return true;
  });
  std::unique_lock lock(mu_);
  return homs_.emplace(std::make_pair(r, s), std::move(list)).first->second;
}

std::uint32_t ModuleCategory::tag_of_phi(Obj r, Obj s, const Mor& phi) const {
  const auto& list = monoid_homs(r, s);
  for (std::uint32_t t = 0; t < list.size(); ++t)
    if (list[t] == phi) return t;
  throw StructuralError(mon_.morphism_name(phi) + " is not a monoid morphism " + mon_.object_name(r) + " -> " +
                        mon_.object_name(s));
}

Mor ModuleCategory::make(Obj x, Obj y, const Mor& phi, const Mor& alpha) const {
  const ModuleObject a = module(x), b = module(y);
  const auto& m = fibration();
  const Mor phiE = mon_.underlying(phi);
  if (phi.src != a.monoid || phi.tgt != b.monoid || alpha.src != a.carrier || alpha.tgt != b.carrier)
    throw StructuralError("module morphism components do not match the modules");
  if (!(m.base_of(alpha) == m.base_of(phiE)))
    throw StructuralError("module morphism components lie over different base morphisms");
  const Category& E = m.total();
  if (E.compose(b.kappa, m.tensor(alpha, phiE)) != E.compose(alpha, a.kappa))
    throw StructuralError("(" + mon_.morphism_name(phi) + "," + E.morphism_name(alpha) + ") is not equivariant");
  return Mor{x, y, tag_of_phi(a.monoid, b.monoid, phi), pack(phi, alpha)};
}

Mor ModuleCategory::phi(const Mor& m) const {
  const std::size_t n = m.code.at(0);
  return Mor{module(m.src).monoid, module(m.tgt).monoid, static_cast<std::uint32_t>(m.code.at(1)),
             Code(m.code.begin() + 3, m.code.begin() + 3 + n)};
}

Mor ModuleCategory::alpha(const Mor& m) const {
  const std::size_t n = m.code.at(0);
  return Mor{module(m.src).carrier, module(m.tgt).carrier, static_cast<std::uint32_t>(m.code.at(2)),
             Code(m.code.begin() + 3 + n, m.code.end())};
}

std::vector<Obj> ModuleCategory::modules_over(Obj monoid) const {
  std::vector<Obj> out;
  for (Obj x : universe_)
    if (module(x).monoid == monoid) out.push_back(x);
  return out;
}

std::string ModuleCategory::object_name(Obj x) const {
  const ModuleObject a = module(x);
  const Category& E = fibration().total();
  return "mod(" + mon_.object_name(a.monoid) + ";" + E.object_name(a.carrier) + ";" + E.morphism_name(a.kappa) + ")";
}

std::string ModuleCategory::morphism_name(const Mor& m) const {
  return "(" + mon_.morphism_name(phi(m)) + "," + fibration().total().morphism_name(alpha(m)) + ")";
}

Mor ModuleCategory::identity(Obj x) const {
  const ModuleObject a = module(x);
  const Mor i = mon_.identity(a.monoid);
  return Mor{x, x, tag_of_phi(a.monoid, a.monoid, i), pack(i, fibration().total().identity(a.carrier))};
}

Mor ModuleCategory::compose(const Mor& g, const Mor& f) const {
  const Mor p = mon_.compose(phi(g), phi(f));
  const Mor a = fibration().total().compose(alpha(g), alpha(f));
  return Mor{f.src, g.tgt, tag_of_phi(module(f.src).monoid, module(g.tgt).monoid, p), pack(p, a)};
}

void ModuleCategory::for_each_hom(Obj x, Obj y, const MorVisitor& visit) const {
  const auto n = monoid_homs(module(x).monoid, module(y).monoid).size();
  bool go = true;
  for (std::uint32_t t = 0; t < n && go; ++t)
    for_each_hom_over(x, y, t, [&](const Mor& f) { return go = visit(f); });
}

void ModuleCategory::for_each_hom_over(Obj x, Obj y, std::uint32_t over, const MorVisitor& visit) const {
  const ModuleObject a = module(x), b = module(y);
  const auto& homs = monoid_homs(a.monoid, b.monoid);
  if (over >= homs.size()) return;
  const Mor phi = homs[over];
  if (linear_) {
    auto& lin = module_linear(*this);
    const std::uint32_t at = lin.alpha_tag(a, b, phi);
    const auto have = fibration().total().linear()->components(a.carrier, b.carrier);
    if (std::find(have.begin(), have.end(), at) == have.end()) return;
    fibration().total().linear()->for_each_in_span(a.carrier, b.carrier, at, lin.basis(x, y, over),
                                                   [&](const Mor& al) {
                                                     return visit(Mor{x, y, over, pack(phi, al)});
                                                   });
    return;
  }
  if (auto list = cached_homs(x, y, over)) {
    for (const Mor& f : *list)
      if (!visit(f)) return;
    return;
  }
  fibration().for_each_equivariant(a.kappa, b.kappa, mon_.underlying(phi),
                                   [&](const Mor& al) { return visit(Mor{x, y, over, pack(phi, al)}); });
}

std::shared_ptr<const std::vector<Mor>> ModuleCategory::cached_homs(Obj x, Obj y, std::uint32_t over) const {
  constexpr std::size_t kCap = 1 << 12;
  const auto key = std::make_tuple(x, y, over);
  {
    std::lock_guard lock(cache_mu_);
    if (auto it = hom_cache_.find(key); it != hom_cache_.end()) return it->second;
  }
  const ModuleObject a = module(x), b = module(y);
  const Mor phi = monoid_homs(a.monoid, b.monoid).at(over);
  auto list = std::make_shared<std::vector<Mor>>();
  bool small = true;
  fibration().for_each_equivariant(a.kappa, b.kappa, mon_.underlying(phi), [&](const Mor& al) {
    if (list->size() == kCap) return small = false;
    list->push_back(Mor{x, y, over, pack(phi, al)});
    return true;
  });
  std::shared_ptr<const std::vector<Mor>> out = small ? std::move(list) : nullptr;
  std::lock_guard lock(cache_mu_);
  hom_cache_.emplace(key, out);
  return out;
}

std::uint64_t ModuleCategory::hom_size_over(Obj x, Obj y, std::uint32_t over) const {
  if (!linear_) {
    if (over >= monoid_homs(module(x).monoid, module(y).monoid).size()) return 0;
    if (auto list = cached_homs(x, y, over)) return list->size();
    return Category::hom_size_over(x, y, over);
  }
  const auto comps = linear_->components(x, y);
  if (std::find(comps.begin(), comps.end(), over) == comps.end()) return 0;
  return linear_->component_size(x, y, over);
}

std::uint64_t ModuleCategory::hom_size(Obj x, Obj y) const {
  if (!linear_) return Category::hom_size(x, y);
  std::uint64_t n = 0;
  for (std::uint32_t t : linear_->components(x, y)) n = sat_add(n, linear_->component_size(x, y, t));
  return n;
}

std::optional<Mor> ModuleCategory::sample_hom_over(Obj x, Obj y, std::uint32_t over, Rng& rng) const {
  if (!linear_) return Category::sample_hom_over(x, y, over, rng);
  const auto comps = linear_->components(x, y);
  if (std::find(comps.begin(), comps.end(), over) == comps.end()) return std::nullopt;
  const HomBasis hb = linear_->basis(x, y, over);
  Coords c(hb.ambient.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const std::uint32_t p = linear_->primes()[i];
    c[i].assign(hb.ambient[i], 0);
    std::uniform_int_distribution<std::uint32_t> d(0, p - 1);
    for (const auto& v : hb.vectors[i]) {
      const std::uint32_t s = d(rng);
      for (std::size_t e = 0; e < v.size(); ++e) c[i][e] = static_cast<std::uint8_t>((c[i][e] + s * v[e]) % p);
    }
  }
  return linear_->from_coordinates(x, y, over, c);
}

std::optional<Mor> ModuleCategory::inverse(const Mor& m) const {
  auto p = mon_.inverse(phi(m));
  if (!p) return std::nullopt;
  auto a = fibration().total().inverse(alpha(m));
  if (!a) return std::nullopt;
  const ModuleObject x = module(m.src), y = module(m.tgt);
  return Mor{m.tgt, m.src, tag_of_phi(y.monoid, x.monoid, *p), pack(*p, *a)};
}

std::optional<Obj> ModuleCategory::find_object(std::string_view name) const {
  const std::size_t n = table_.size();
  for (Obj x = 0; x < n; ++x)
    if (object_name(x) == name) return x;
  return std::nullopt;
}

std::optional<Mor> ModuleCategory::find_morphism(Obj x, Obj y, std::string_view name) const {
  auto parts = split_pair(name);
  if (!parts) return std::nullopt;
  const ModuleObject a = module(x), b = module(y);
  auto p = mon_.find_morphism(a.monoid, b.monoid, parts->first);
  if (!p) return std::nullopt;
  auto al = fibration().total().find_morphism(a.carrier, b.carrier, parts->second);
  if (!al) return std::nullopt;
  try {
    return make(x, y, *p, *al);
  } catch (const StructuralError&) {
    return std::nullopt;
  }
}

bool ModuleCategory::may_be_isomorphic(Obj x, Obj y) const {
  const ModuleObject a = module(x), b = module(y);
  return mon_.may_be_isomorphic(a.monoid, b.monoid) && fibration().total().may_be_isomorphic(a.carrier, b.carrier);
}

// ---------------------------------------------------------------- constructions

Obj restriction_of_scalars(const ModuleCategory& mod, const Mor& phi, Obj module) {
  const auto& m = mod.fibration();
  const MonoidCategory& mon = mod.monoids();
  const Mor phiE = mon.underlying(phi);
  if (!m.base().is_identity(m.base_of(phiE)))
    throw StructuralError("restriction of scalars along a monoid morphism outside a fibre");
  const ModuleObject n = mod.module(module);
  if (n.monoid != phi.tgt) throw StructuralError("restriction of scalars: module is over another monoid");
  const Category& E = m.total();
  const Mor k = E.compose(n.kappa, m.tensor(E.identity(n.carrier), phiE));
  return mod.intern(ModuleObject{phi.src, n.carrier, k});
}

Coequalizer reflexive_coequalizer(const MonoidalOpfibration& m, const Mor& f, const Mor& g, const Mor& section) {
  const FibreColimits* col = m.colimits();
  if (!col) throw UnsupportedError("the fibres have no coequalizers");
  const Category& E = m.total();
  const Mor id = E.identity(f.tgt);
  Coequalizer out;
  out.reflexive = section.src == f.tgt && section.tgt == f.src && E.compose(f, section) == id &&
                  E.compose(g, section) == id;
  out.quotient = col->coequalizer(f, g);
  return out;
}

CoequalizerCertificate certify_coequalizer(const MonoidalOpfibration& m, const Mor& f, const Mor& g, const Mor& q,
                                           const std::vector<Obj>& tests, const Limits& limits) {
  CoequalizerCertificate cert;
  const Category& E = m.total();
  if (E.compose(q, f) != E.compose(q, g)) {
    cert.ok = false;
    cert.detail = "q∘f ≠ q∘g";
    return cert;
  }
  const Obj X = f.src, Y = q.src, Q = q.tgt;
  const Mor idb = base_id(m, Y);
  const std::uint64_t cap = std::max<std::uint64_t>(limits.enumeration_budget >> 8, 64);
  for (Obj T : tests) {
    const auto tY = m.projection().tag_of(Y, T, idb), tQ = m.projection().tag_of(Q, T, idb);
    const auto tX = m.projection().tag_of(X, T, idb);
    if (const LinearHoms* lin = E.linear()) {
      const HomBasis bY = lin->basis(Y, T, tY), bQ = lin->basis(Q, T, tQ);
      for (std::size_t i = 0; i < bY.vectors.size(); ++i) {
        const std::uint32_t p = lin->primes()[i];
        std::vector<Vec> diff;
        for (const auto& v : bY.vectors[i]) {
          const Mor t = lin->from_coordinates(Y, T, tY, unit_coords(bY, i, v));
          const Vec a = lin->coordinates(E.compose(t, f))[i], b = lin->coordinates(E.compose(t, g))[i];
          Vec d(a.size());
          for (std::size_t k = 0; k < a.size(); ++k) d[k] = static_cast<std::uint8_t>((a[k] + p - b[k]) % p);
          diff.push_back(std::move(d));
        }
        const std::size_t kernel = bY.vectors[i].size() - vector_rank(diff, p);
        std::vector<Vec> images;
        for (const auto& v : bQ.vectors[i])
          images.push_back(lin->coordinates(E.compose(lin->from_coordinates(Q, T, tQ, unit_coords(bQ, i, v)), q))[i]);
        const std::size_t rank = vector_rank(images, p);
        if (rank != bQ.vectors[i].size() || rank != kernel) {
          cert.ok = false;
          cert.detail = "against " + E.object_name(T) + " at p=" + std::to_string(p) + ": Hom(Q,T) has dimension " +
                        std::to_string(bQ.vectors[i].size()) + ", image rank " + std::to_string(rank) +
                        ", equalizing maps " + std::to_string(kernel);
          return cert;
        }
      }
      (void)tX;
      ++cert.tested;
      continue;
    }
    if (E.hom_size_over(Y, T, tY) > cap) {
      ++cert.skipped;
      continue;
    }
    std::uint64_t equalizing = 0;
    E.for_each_hom_over(Y, T, tY, [&](const Mor& t) {
      equalizing += E.compose(t, f) == E.compose(t, g);
      return true;
    });
    std::set<Code> images;
    std::uint64_t n = 0;
    E.for_each_hom_over(Q, T, tQ, [&](const Mor& t) {
      ++n;
      images.insert(E.compose(t, q).code);
      return true;
    });
    if (images.size() != n || n != equalizing) {
      cert.ok = false;
      cert.detail = "against " + E.object_name(T) + ": |Hom(Q,T)| = " + std::to_string(n) + ", distinct images " +
                    std::to_string(images.size()) + ", equalizing maps " + std::to_string(equalizing);
      return cert;
    }
    ++cert.tested;
  }
  return cert;
}

Extension extension_of_scalars(const ModuleCategory& mod, Obj module, const Mor& phi) {
  const auto& m = mod.fibration();
  const MonoidCategory& mon = mod.monoids();
  const Category& E = m.total();
  const FibreColimits* col = m.colimits();
  if (!col) throw UnsupportedError("extension of scalars needs coequalizers in the fibres");
  const Laws L(m);
  const ModuleObject X = mod.module(module);
  if (X.monoid != phi.src) throw StructuralError("extension of scalars: module is over another monoid");
  const MonoidObject S = mon.monoid(phi.tgt);
  const Mor phiE = mon.underlying(phi);
  const Mor h = m.base_of(phiE);

  // transport M and R along h
  const Mor lM = m.lift(h, X.carrier);
  const Mor lRm = mon.lift(h, X.monoid);
  const MonoidObject R1 = mon.monoid(lRm.tgt);
  const Mor lR = mon.underlying(lRm);
  const Obj M1 = lM.tgt;
  const Mor phi1 = E.is_identity(lR) ? phiE : fill(m, lR, phiE, "transported monoid morphism");
  const Mor k1 = E.is_identity(lM) && E.is_identity(lR) ? X.kappa
                                                         : fill(m, L.T(lM, lR), L.C(lM, X.kappa), "transported action");

  Extension out;
  const Mor idM = E.identity(M1), idS = E.identity(S.carrier);
  out.f = L.T(k1, idS);
  out.g = L.C(L.T(idM, L.C(S.mu, L.T(phi1, idS))), m.associator(M1, R1.carrier, S.carrier));
  auto rho_inv = E.inverse(m.right_unitor(M1));
  if (!rho_inv) throw StructuralError("right unitor of " + E.object_name(M1) + " is not invertible");
  out.section = L.T(L.C(L.T(idM, R1.eta), *rho_inv), idS);
  out.quotient = col->coequalizer(out.f, out.g);
  const Mor& q = out.quotient;
  const Obj Q = q.tgt;
  auto sigma =
      col->factor({{L.T(q, idS), L.C(q, L.C(L.T(idM, S.mu), m.associator(M1, S.carrier, S.carrier)))}});
  if (!sigma) throw StructuralError("extension of scalars: the action does not descend to the quotient");
  out.module = mod.intern(ModuleObject{phi.tgt, Q, *sigma});
  const Mor u = L.C(q, L.C(L.T(idM, S.eta), L.C(*rho_inv, lM)));
  out.unit = mod.make(module, out.module, phi, u);
  return out;
}

Mor extend_morphism(const ModuleCategory& mod, const Mor& beta, const Mor& phi) {
  const auto& m = mod.fibration();
  const MonoidCategory& mon = mod.monoids();
  const Category& E = m.total();
  if (!mon.is_identity(mod.phi(beta))) throw StructuralError("extension of a module morphism not over an identity");
  const Extension a = extension_of_scalars(mod, beta.src, phi), b = extension_of_scalars(mod, beta.tgt, phi);
  const Mor h = m.base_of(mon.underlying(phi));
  const Mor la = m.lift(h, mod.module(beta.src).carrier), lb = m.lift(h, mod.module(beta.tgt).carrier);
  const Mor al = mod.alpha(beta);
  const Mor b1 = E.is_identity(la) && E.is_identity(lb) ? al : fill(m, la, E.compose(lb, al), "transported morphism");
  const Mor idS = E.identity(mon.monoid(phi.tgt).carrier);
  auto u = m.colimits()->factor({{a.quotient, E.compose(b.quotient, m.tensor(b1, idS))}});
  if (!u) throw StructuralError("extended morphism does not descend to the quotient");
  return mod.make(a.module, b.module, mon.identity(phi.tgt), *u);
}

std::optional<Mor> module_isomorphism(const ModuleCategory& mod, Obj x, Obj y) {
  const Obj r = mod.module(x).monoid;
  if (mod.module(y).monoid != r || !mod.may_be_isomorphic(x, y)) return std::nullopt;
  if (x == y) return mod.identity(x);
  const std::uint32_t t = mod.tag_of_phi(r, r, mod.monoids().identity(r));
  if (mod.hom_size_over(x, x, t) != mod.hom_size_over(y, y, t)) return std::nullopt;
  const std::uint64_t n = mod.hom_size_over(x, y, t);
  if (n == 0 || mod.hom_size_over(y, x, t) == 0) return std::nullopt;
  if (mod.linear()) {
    auto rng = make_rng(0x15c0, mod.object_name(x) + "|" + mod.object_name(y));
    for (int k = 0; k < 64; ++k)
      if (auto f = mod.sample_hom_over(x, y, t, rng); f && mod.inverse(*f)) return f;
    if (n > (std::uint64_t{1} << 22))
      throw TruncationError("isomorphism search between " + mod.object_name(x) + " and " + mod.object_name(y) +
                            " exceeds the enumeration budget");
  }
  std::optional<Mor> out;
  mod.for_each_hom_over(x, y, t, [&](const Mor& f) {
    if (mod.inverse(f)) out = f;
    return !out;
  });
  return out;
}

std::optional<Obj> module_direct_sum(const ModuleCategory& mod, Obj x, Obj y) {
  const auto& m = mod.fibration();
  const FibreColimits* col = m.colimits();
  if (!col) return std::nullopt;
  const ModuleObject a = mod.module(x), b = mod.module(y);
  if (a.monoid != b.monoid) throw StructuralError("direct sum of modules over different monoids");
  const auto s = col->direct_sum(a.carrier, b.carrier);
  if (!s) return std::nullopt;
  const Category& E = m.total();
  const Obj R = mod.monoids().monoid(a.monoid).carrier;
  const Mor idR = E.identity(R);
  auto k = col->factor({{m.tensor(s->left, idR), E.compose(s->left, a.kappa)},
                        {m.tensor(s->right, idR), E.compose(s->right, b.kappa)}});
  if (!k) throw StructuralError("direct sum: actions do not assemble");
  return mod.intern(ModuleObject{a.monoid, s->object, *k});
}

std::optional<Obj> free_module(const ModuleCategory& mod, Obj monoid, std::size_t rank) {
  const auto& m = mod.fibration();
  const Category& E = m.total();
  const MonoidObject R = mod.monoids().monoid(monoid);
  if (rank == 0) {
    const FibreColimits* col = m.colimits();
    if (!col) return std::nullopt;
    const auto z = col->zero_object(m.base_of(R.carrier));
    if (!z) return std::nullopt;
    const Obj zr = m.tensor(*z, R.carrier);
    std::optional<Mor> k;
    E.for_each_hom_over(zr, *z, m.projection().tag_of(zr, *z, base_id(m, *z)), [&](const Mor& f) {
      k = f;
      return false;
    });
    if (!k) return std::nullopt;
    return mod.intern(ModuleObject{monoid, *z, *k});
  }
  Obj acc = mod.intern(ModuleObject{monoid, R.carrier, R.mu});
  const Obj regular = acc;
  for (std::size_t i = 1; i < rank; ++i) {
    auto s = module_direct_sum(mod, acc, regular);
    if (!s) return std::nullopt;
    acc = *s;
    if (!E.in_universe(mod.module(acc).carrier)) return std::nullopt;
  }
  return acc;
}

// ---------------------------------------------------------------- hypotheses and conclusion

namespace {

struct Pair {
  Mor f, g, section;
  std::string origin;
};

template <class T, class F>
void quantified(const std::vector<T>& all, const Limits& limits, const std::string& ctx, CheckMode& mode, F&& each) {
  if (all.size() <= limits.samples * 4) {
    for (const auto& x : all) each(x);
    return;
  }
  mode = CheckMode::sampled;
  auto rng = make_rng(limits.seed, ctx);
  std::uniform_int_distribution<std::size_t> d(0, all.size() - 1);
  for (std::size_t k = 0; k < limits.samples; ++k) each(all[d(rng)]);
}

}  // namespace

ValidationReport verify_modovermon(const ModuleCategory& mod, const Limits& limits) {
  ValidationReport rep;
  const auto& m = mod.fibration();
  const MonoidCategory& mon = mod.monoids();
  const Category& E = m.total();
  const Category& B = m.base();
  const FibreColimits* col = m.colimits();
  if (!col) {
    rep.add(Severity::structural, "modovermon.coequalizers", "the fibres have no coequalizers");
    return rep;
  }

  // (a) reflexive pairs: those built by extension of scalars, and [id,u],[id,v] out of sums
  std::map<Obj, std::vector<Pair>> pairs;  // by base object
  std::set<std::pair<Mor, Mor>> seen;
  auto add_pair = [&](Pair p) {
    if (!seen.insert({p.f, p.g}).second) return false;
    pairs[m.base_of(p.f.tgt)].push_back(std::move(p));
    return true;
  };
  std::map<std::pair<Obj, Mor>, Extension> extensions;
  for (Obj x : mod.objects()) {
    const Obj r = mod.module(x).monoid;
    for (Obj s : mon.objects())
      for (const Mor& phi : mod.monoid_homs(r, s))
        guarded(rep, "modovermon.coequalizers", {mod.object_name(x), mon.morphism_name(phi)}, [&] {
          Extension e = extension_of_scalars(mod, x, phi);
          add_pair({e.f, e.g, e.section, "extension(" + mod.object_name(x) + "; " + mon.morphism_name(phi) + ")"});
          extensions.emplace(std::make_pair(x, phi), std::move(e));
        });
  }
  std::size_t built = 0;
  for (Obj b : B.objects()) {
    const auto objs = m.fibre_objects(b);
    const Mor idb = B.identity(b);
    for (Obj y : objs)
      for (Obj z : objs) {
        if (built >= limits.samples) break;
        std::optional<FibreSum> s;
        try {
          s = col->direct_sum(y, z);
        } catch (const std::exception&) {
        }
        if (!s || !E.in_universe(s->object)) continue;
        auto rng = make_rng(limits.seed, "pairs|" + E.object_name(y) + "|" + E.object_name(z));
        const auto gens = hom_generators(E, z, y, m.projection().tag_of(z, y, idb), limits, rng).morphisms;
        for (std::size_t i = 0; i + 1 < gens.size() && built < limits.samples; i += 2) {
          const Mor& u = gens[i];
          const Mor& v = gens[i + 1];
          auto fu = col->factor({{s->left, E.identity(y)}, {s->right, u}});
          auto fv = col->factor({{s->left, E.identity(y)}, {s->right, v}});
          if (!fu || !fv) continue;
          if (add_pair({*fu, *fv, s->left, "sum(" + E.object_name(y) + "; " + E.object_name(z) + ")"})) ++built;
        }
      }
  }

  std::map<Obj, std::vector<Mor>> quotients;
  std::size_t cases = 0, skipped = 0;
  for (auto& [b, list] : pairs) {
    const auto tests = m.fibre_objects(b);
    for (const Pair& p : list) {
      guarded(rep, "modovermon.coequalizers", {p.origin}, [&] {
        const Coequalizer c = reflexive_coequalizer(m, p.f, p.g, p.section);
        if (!c.reflexive)
          rep.add(Severity::violation, "modovermon.coequalizers", "pair is not reflexive through its section",
                  {p.origin});
        const auto cert = certify_coequalizer(m, p.f, p.g, c.quotient, tests, limits);
        ++cases;
        skipped += cert.skipped;
        if (!cert.ok)
          rep.add(Severity::violation, "modovermon.coequalizers", "quotient is not a coequalizer: " + cert.detail,
                  {p.origin});
        quotients[b].push_back(c.quotient);
      });
    }
  }
  rep.note("modovermon.coequalizers", E.linear() ? CheckMode::basis : CheckMode::exhaustive, cases,
           std::to_string(built) + " constructed pairs; " + std::to_string(skipped) + " test objects over budget");

  // (b) f_* preserves them
  {
    struct Cell {
      Mor h;
      Obj b;
      std::size_t i;
    };
    std::vector<Cell> cells;
    for (Obj a : B.objects())
      for (Obj c : B.objects())
        B.for_each_hom(a, c, [&](const Mor& h) {
          if (B.is_identity(h)) return true;
          for (std::size_t i = 0; i < pairs[a].size(); ++i) cells.push_back({h, a, i});
          return true;
        });
    CheckMode mode = E.linear() ? CheckMode::basis : CheckMode::exhaustive;
    std::map<std::string, std::unique_ptr<DirectImage>> images;
    std::size_t n = 0, sk = 0;
    quantified(cells, limits, "modovermon.direct-image", mode, [&](const Cell& k) {
      const Pair& p = pairs[k.b][k.i];
      const std::string hn = B.morphism_name(k.h);
      guarded(rep, "modovermon.direct-image", {p.origin, hn}, [&] {
        auto& d = images[hn];
        if (!d) d = std::make_unique<DirectImage>(m, k.h);
        const Mor q = quotients[k.b].at(k.i);
        const auto cert = certify_coequalizer(m, d->map_morphism(p.f), d->map_morphism(p.g), d->map_morphism(q),
                                              m.fibre_objects(k.h.tgt), limits);
        ++n;
        sk += cert.skipped;
        if (!cert.ok)
          rep.add(Severity::violation, "modovermon.direct-image",
                  "direct image does not preserve the coequalizer: " + cert.detail, {p.origin, hn});
      });
    });
    rep.note("modovermon.direct-image", mode, n, std::to_string(sk) + " test objects over budget");
  }

  // (c) −⊗E preserves them
  {
    struct Cell {
      Obj b;
      std::size_t i;
      Obj e;
    };
    std::vector<Cell> cells;
    for (auto& [b, list] : pairs)
      for (std::size_t i = 0; i < list.size(); ++i)
        for (Obj e : m.fibre_objects(b)) cells.push_back({b, i, e});
    CheckMode mode = E.linear() ? CheckMode::basis : CheckMode::exhaustive;
    std::size_t n = 0, sk = 0;
    quantified(cells, limits, "modovermon.tensor", mode, [&](const Cell& k) {
      const Pair& p = pairs[k.b][k.i];
      guarded(rep, "modovermon.tensor", {p.origin, E.object_name(k.e)}, [&] {
        const Mor ide = E.identity(k.e);
        const Mor q = quotients[k.b].at(k.i);
        const auto cert = certify_coequalizer(m, m.tensor(p.f, ide), m.tensor(p.g, ide), m.tensor(q, ide),
                                              m.fibre_objects(k.b), limits);
        ++n;
        sk += cert.skipped;
        if (!cert.ok)
          rep.add(Severity::violation, "modovermon.tensor", "−⊗E does not preserve the coequalizer: " + cert.detail,
                  {p.origin, E.object_name(k.e)});
      });
    });
    rep.note("modovermon.tensor", mode, n, std::to_string(sk) + " test objects over budget");
  }

  // (d) conclusion
  absorb(rep,
         verify_opfibration(
             mon.projection(), [&](const Mor& h, Obj x) -> std::optional<Mor> { return mon.lift(h, x); }, limits),
         "modovermon.monoids.");
  absorb(rep,
         verify_opfibration(
             mod.projection(),
             [&](const Mor& phi, Obj x) -> std::optional<Mor> {
               auto it = extensions.find({x, phi});
               if (it != extensions.end()) return it->second.unit;
               return extension_of_scalars(mod, x, phi).unit;
             },
             limits),
         "modovermon.modules.");
  return rep;
}

AdjunctionCount adjunction_count(const ModuleCategory& mod, Obj module, const Mor& phi, Obj target,
                                 const Limits& limits) {
  const auto& m = mod.fibration();
  const MonoidCategory& mon = mod.monoids();
  const Category& E = m.total();
  const Extension ext = extension_of_scalars(mod, module, phi);
  const Obj restricted = restriction_of_scalars(mod, phi, target);
  const Obj r = phi.src, s = phi.tgt;
  const Mor id_r = mon.identity(r);
  const std::uint32_t ts = mod.tag_of_phi(s, s, mon.identity(s)), tr = mod.tag_of_phi(r, r, id_r);
  AdjunctionCount out;
  out.extension_side = mod.hom_size_over(ext.module, target, ts);
  out.restriction_side = mod.hom_size_over(module, restricted, tr);
  const Mor u = mod.alpha(ext.unit);
  if (const LinearHoms* lin = mod.linear()) {
    const LinearHoms& el = *E.linear();
    const HomBasis hb = lin->basis(ext.module, target, ts);
    bool injective = true;
    for (std::size_t i = 0; i < hb.vectors.size(); ++i) {
      std::vector<Vec> images;
      for (const auto& v : hb.vectors[i]) {
        const Mor beta = mod.alpha(lin->from_coordinates(ext.module, target, ts, unit_coords(hb, i, v)));
        const Mor img = E.compose(beta, u);
        mod.make(module, restricted, id_r, img);
        images.push_back(el.coordinates(img)[i]);
      }
      injective = injective && vector_rank(images, lin->primes()[i]) == images.size();
    }
    out.bijection = injective && out.extension_side == out.restriction_side;
    return out;
  }

  if (out.extension_side > limits.enumeration_budget)
    throw TruncationError("adjunction count exceeds the enumeration budget");
  std::set<Code> images;
  bool valid = true;
  mod.for_each_hom_over(ext.module, target, ts, [&](const Mor& b) {
    const Mor img = E.compose(mod.alpha(b), u);
    try {
      mod.make(module, restricted, id_r, img);
    } catch (const StructuralError&) {
      valid = false;
    }
    images.insert(img.code);
    return true;
  });
  out.bijection = valid && images.size() == out.extension_side && out.extension_side == out.restriction_side;
  return out;
}

ConnectingCount extension_pseudofunctoriality(const ModuleCategory& mod, Obj module, const Mor& phi, const Mor& psi,
                                              const Limits& limits) {
  const MonoidCategory& mon = mod.monoids();
  const Extension whole = extension_of_scalars(mod, module, mon.compose(psi, phi));
  const Extension first = extension_of_scalars(mod, module, phi);
  const Extension second = extension_of_scalars(mod, first.module, psi);
  const Mor target = mod.compose(second.unit, first.unit);
  const Mor idt = mon.identity(psi.tgt);
  ConnectingCount out;
  if (mod.linear()) {
    out.morphisms = count_fillers(mod.projection(), whole.unit, target, idt, limits);
    if (out.morphisms == 1) out.isomorphisms = mod.inverse(*find_filler(mod.projection(), whole.unit, target, idt)) ? 1 : 0;
    return out;
  }
  const std::uint32_t tag = mod.tag_of_phi(psi.tgt, psi.tgt, idt);
  if (mod.hom_size_over(whole.module, second.module, tag) > limits.enumeration_budget)
    throw TruncationError("connecting morphism search exceeds the enumeration budget");
  mod.for_each_hom_over(whole.module, second.module, tag, [&](const Mor& c) {
    if (mod.compose(c, whole.unit) == target) {
      ++out.morphisms;
      if (mod.inverse(c)) ++out.isomorphisms;
    }
    return true;
  });
  return out;
}

// ---------------------------------------------------------------- fibre restriction

namespace {

/// One fibre of m as a monoidal opfibration over a one-object base.
class FibreOpfibration final : public MonoidalOpfibration {
 public:
  FibreOpfibration(const MonoidalOpfibration& m, Obj b) : m_(m), b_(b), idb_(m.base().identity(b)) {
    FinCatPresentation p;
    const std::string on = m.base().object_name(b), mn = m.base().morphism_name(idb_);
    p.objects = {on};
    p.morphisms = {{mn, on, on}};
    p.identities = {{on, mn}};
    p.composites = {{{mn, mn}, mn}};
    base_ = FinCat::from(p);
    total_ = std::make_unique<FibreCategory>(m.projection(), b);
    proj_ = std::make_unique<Proj>(*this);
  }

  const Category& total() const override { return *total_; }
  const Category& base() const override { return base_; }
  const Projection& projection() const override { return *proj_; }
  Mor lift(const Mor&, Obj e) const override { return m_.lift(idb_, e); }
  Obj tensor(Obj a, Obj b) const override { return m_.tensor(a, b); }
  Mor tensor(const Mor& f, const Mor& g) const override { return m_.tensor(f, g); }
  Obj unit(Obj) const override { return m_.unit(b_); }
  Mor unit(const Mor&) const override { return m_.unit(idb_); }
  Mor associator(Obj a, Obj b, Obj c) const override { return m_.associator(a, b, c); }
  Mor left_unitor(Obj a) const override { return m_.left_unitor(a); }
  Mor right_unitor(Obj a) const override { return m_.right_unitor(a); }
  bool has_braiding() const override { return m_.has_braiding(); }
  Mor braiding(Obj a, Obj b) const override { return m_.braiding(a, b); }
  const FibreColimits* colimits() const override { return m_.colimits(); }
  std::vector<Mor> action_candidates(const Mor& mu, const Mor& eta, Obj carrier, const Limits& l) const override {
    return m_.action_candidates(mu, eta, carrier, l);
  }
  void for_each_equivariant(const Mor& kappa, const Mor& sigma, const Mor& phi,
                            const MorVisitor& visit) const override {
    m_.for_each_equivariant(kappa, sigma, phi, visit);
  }
  bool monoid_carrier(Obj x) const override { return m_.monoid_carrier(x); }

 private:
  class Proj final : public Projection {
   public:
    explicit Proj(const FibreOpfibration& f) : f_(f) {}
    const Category& source() const override { return *f_.total_; }
    const Category& target() const override { return f_.base_; }
    Obj map_object(Obj) const override { return 0; }
    Mor map_morphism(const Mor&) const override { return f_.base_.mor(0); }
    std::uint32_t tag_of(Obj x, Obj y, const Mor&) const override {
      return f_.m_.projection().tag_of(x, y, f_.idb_);
    }

   private:
    const FibreOpfibration& f_;
  };

  const MonoidalOpfibration& m_;
  Obj b_;
  Mor idb_;
  FinCat base_;
  std::unique_ptr<FibreCategory> total_;
  std::unique_ptr<Proj> proj_;
};

/// Modules over monoids lying over b, with morphisms whose monoid part lies over id_b.
class ModulesOverBase final : public Category {
 public:
  ModulesOverBase(const ModuleCategory& mod, Obj b) : mod_(mod), b_(b) {
    const auto& m = mod.fibration();
    for (Obj x : mod.objects())
      if (m.base_of(mod.monoids().monoid(mod.module(x).monoid).carrier) == b) objects_.push_back(x);
    if (const LinearHoms* lin = mod.linear()) linear_ = std::make_unique<Linear>(*this, *lin);
  }

  const std::vector<Obj>& objects() const override { return objects_; }
  bool in_universe(Obj x) const override { return std::binary_search(objects_.begin(), objects_.end(), x); }
  std::string object_name(Obj x) const override { return mod_.object_name(x); }
  std::string morphism_name(const Mor& m) const override { return mod_.morphism_name(m); }
  Mor identity(Obj x) const override { return mod_.identity(x); }
  Mor compose(const Mor& g, const Mor& f) const override { return mod_.compose(g, f); }
  void for_each_hom(Obj x, Obj y, const MorVisitor& visit) const override {
    bool go = true;
    for (std::uint32_t t : tags(x, y)) {
      mod_.for_each_hom_over(x, y, t, [&](const Mor& f) { return go = visit(f); });
      if (!go) return;
    }
  }
  std::uint64_t hom_size(Obj x, Obj y) const override {
    std::uint64_t n = 0;
    for (std::uint32_t t : tags(x, y)) n = sat_add(n, mod_.hom_size_over(x, y, t));
    return n;
  }
  std::optional<Mor> inverse(const Mor& m) const override { return mod_.inverse(m); }
  const LinearHoms* linear() const override { return linear_.get(); }
  std::optional<Mor> find_morphism(Obj x, Obj y, std::string_view name) const override {
    auto f = mod_.find_morphism(x, y, name);
    if (!f) return std::nullopt;
    const auto t = tags(x, y);
    if (std::find(t.begin(), t.end(), f->over) == t.end()) return std::nullopt;
    return f;
  }
  bool may_be_isomorphic(Obj x, Obj y) const override { return mod_.may_be_isomorphic(x, y); }

  std::vector<std::uint32_t> tags(Obj x, Obj y) const {
    const auto& m = mod_.fibration();
    const auto& homs = mod_.monoid_homs(mod_.module(x).monoid, mod_.module(y).monoid);
    const Mor idb = m.base().identity(b_);
    std::vector<std::uint32_t> out;
    for (std::uint32_t t = 0; t < homs.size(); ++t)
      if (m.base_of(mod_.monoids().underlying(homs[t])) == idb) out.push_back(t);
    return out;
  }

 private:
  class Linear final : public LinearHoms {
   public:
    Linear(const ModulesOverBase& c, const LinearHoms& in) : c_(c), in_(in) {}
    const std::vector<std::uint32_t>& primes() const override { return in_.primes(); }
    std::vector<std::uint32_t> components(Obj x, Obj y) const override {
      const auto all = in_.components(x, y), mine = c_.tags(x, y);
      std::vector<std::uint32_t> out;
      for (auto t : all)
        if (std::find(mine.begin(), mine.end(), t) != mine.end()) out.push_back(t);
      return out;
    }
    HomBasis basis(Obj x, Obj y, std::uint32_t over) const override { return in_.basis(x, y, over); }
    Coords coordinates(const Mor& m) const override { return in_.coordinates(m); }
    Mor from_coordinates(Obj x, Obj y, std::uint32_t over, const Coords& c) const override {
      return in_.from_coordinates(x, y, over, c);
    }

   private:
    const ModulesOverBase& c_;
    const LinearHoms& in_;
  };

  const ModuleCategory& mod_;
  Obj b_;
  std::vector<Obj> objects_;
  std::unique_ptr<LinearHoms> linear_;
};

}  // namespace

std::unique_ptr<MonoidalOpfibration> fibre_opfibration(const MonoidalOpfibration& m, Obj b) {
  return std::make_unique<FibreOpfibration>(m, b);
}

std::unique_ptr<Category> module_fibre_over_base(const ModuleCategory& mod, Obj b) {
  return std::make_unique<ModulesOverBase>(mod, b);
}

ValidationReport compare_fibre_restriction(const ModuleCategory& mod, Obj b, const Category& intrinsic_mon,
                                           const Category& intrinsic_mod, const Limits& limits) {
  ValidationReport rep;
  const std::string where = mod.fibration().base().object_name(b);
  const FibreCategory mon_view(mod.monoids().projection(), b);
  auto r1 = check_equal(mon_view, intrinsic_mon, limits);
  for (const auto& f : r1.findings()) {
    auto w = f.witnesses;
    w.insert(w.begin(), where);
    rep.add(f.severity, "fibre-restriction.monoids", f.message, w);
  }
  for (const auto& n : r1.notes()) rep.note("fibre-restriction.monoids", n.mode, n.cases, where + ": " + n.detail);
  const ModulesOverBase mod_view(mod, b);
  auto r2 = check_equal(mod_view, intrinsic_mod, limits);
  for (const auto& f : r2.findings()) {
    auto w = f.witnesses;
    w.insert(w.begin(), where);
    rep.add(f.severity, "fibre-restriction.modules", f.message, w);
  }
  for (const auto& n : r2.notes()) rep.note("fibre-restriction.modules", n.mode, n.cases, where + ": " + n.detail);
  return rep;
}

ValidationReport fibre_restriction_check(const ModuleCategory& mod, Obj b, const Limits& limits) {
  ValidationReport rep;
  const auto& m = mod.fibration();
  const std::string where = m.base().object_name(b);
  guarded(rep, "fibre-restriction.build", {where}, [&] {
    const auto fib = fibre_opfibration(m, b);
    const MonoidCategory imon(*fib, mod.monoids().commutative_only(), limits);
    const ModuleCategory imod(imon, limits);
    rep.merge(compare_fibre_restriction(mod, b, imon, imod, limits));
    // projections agree: same monoid for every module and same monoid part for every component
    const ModulesOverBase view(mod, b);
    std::size_t n = 0;
    for (Obj x : imod.objects()) {
      auto y = view.find_object(imod.object_name(x));
      if (!y) continue;
      ++n;
      if (imon.object_name(imod.module(x).monoid) != mod.monoids().object_name(mod.module(*y).monoid))
        rep.add(Severity::violation, "fibre-restriction.projection", "modules lie over different monoids",
                {where, imod.object_name(x)});
      for (Obj x2 : imod.objects()) {
        auto y2 = view.find_object(imod.object_name(x2));
        if (!y2) continue;
        std::set<std::string> a, c;
        for (const Mor& p : imod.monoid_homs(imod.module(x).monoid, imod.module(x2).monoid))
          a.insert(imon.morphism_name(p));
        for (std::uint32_t t : view.tags(*y, *y2))
          c.insert(mod.monoids().morphism_name(mod.monoid_homs(mod.module(*y).monoid, mod.module(*y2).monoid)[t]));
        if (a != c)
          rep.add(Severity::violation, "fibre-restriction.projection", "monoid morphisms under the fibre differ",
                  {where, imod.object_name(x), imod.object_name(x2)});
      }
    }
    rep.note("fibre-restriction.projection", CheckMode::exhaustive, n, where);
  });
  return rep;
}

}  // namespace fibred
