#include "fibred/pipeline.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "fibred/algebra.hpp"
#include "fibred/backends.hpp"
#include "fibred/error.hpp"
#include "fibred/kzero.hpp"
#include "fibred/opfib.hpp"
#include "fibred/site.hpp"

namespace fibred::cli {

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {"validate", "verify-opfibration", "verify-monoidal",
                                                 "verify-modovermon", "build", "site", "loc", "kzero"};
  return names;
}

// ---------------------------------------------------------------- model

class Model {
 public:
  Limits limits;
  FinCat base;
  ValidationReport construction;
  std::optional<ExplicitOpfibData> explicit_data;
  std::unique_ptr<MonoidalOpfibration> backend;
  std::unique_ptr<MonoidalOpfibration> overridden;
  std::optional<FinCat> site_base;
  std::unique_ptr<MonoidCategory> mon, comm;
  std::unique_ptr<ModuleCategory> mod, modc;
  std::unique_ptr<Site> site;
  std::map<Obj, Loc> locs;

  const MonoidalOpfibration& fibration() const { return overridden ? *overridden : *backend; }

  MonoidCategory& monoids() {
    if (!mon) mon = std::make_unique<MonoidCategory>(fibration(), false, limits);
    return *mon;
  }
  ModuleCategory& modules() {
    if (!mod) mod = std::make_unique<ModuleCategory>(monoids(), limits);
    return *mod;
  }
  MonoidCategory& commutative() {
    if (!comm) comm = std::make_unique<MonoidCategory>(fibration(), true, limits);
    return *comm;
  }
  ModuleCategory& commutative_modules() {
    if (!modc) modc = std::make_unique<ModuleCategory>(commutative(), limits);
    return *modc;
  }
};

namespace {

Limits limits_of(const Presentation& p, const RunOptions& o) {
  Limits l;
  if (p.limits.enumeration_budget) l.enumeration_budget = *p.limits.enumeration_budget;
  if (p.limits.samples) l.samples = *p.limits.samples;
  if (p.limits.seed) l.seed = *p.limits.seed;
  l.workers = std::max(1u, o.workers);
  return l;
}

std::uint64_t ipow(std::uint64_t b, std::uint64_t e) {
  std::uint64_t r = 1;
  while (e--) r = sat_mul(r, b);
  return r;
}

std::optional<Mor> morphism_named(const Category& E, Obj x, Obj y, const std::string& name) {
  return E.find_morphism(x, y, name);
}

Obj object_named(const Category& E, const std::string& name, const std::string& field) {
  auto x = E.find_object(name);
  if (!x) throw StructuralError(field + ": unknown object " + name);
  return *x;
}

StructureOverrides resolve_overrides(const OverrideSpec& o, const MonoidalOpfibration& m, const FinCat& base) {
  StructureOverrides out;
  const Category& E = m.total();
  for (std::size_t i = 0; i < o.associator.size(); ++i) {
    const auto& a = o.associator[i];
    const std::string field = "overrides.associator[" + std::to_string(i) + "]";
    const Obj x = object_named(E, a.objects[0], field), y = object_named(E, a.objects[1], field),
              z = object_named(E, a.objects[2], field);
    auto f = morphism_named(E, m.tensor(m.tensor(x, y), z), m.tensor(x, m.tensor(y, z)), a.morphism);
    if (!f) throw StructuralError(field + ": no morphism " + a.morphism + " between the associator ends");
    out.associator[{x, y, z}] = *f;
  }
  for (std::size_t i = 0; i < o.lift.size(); ++i) {
    const auto& l = o.lift[i];
    const std::string field = "overrides.lift[" + std::to_string(i) + "]";
    const Mor h = base.mor(*base.morphism_index(l.base));
    const Obj e = object_named(E, l.object, field);
    if (m.base_of(e) != h.src) throw StructuralError(field + ": " + l.object + " is not over the source of " + l.base);
    std::optional<Mor> f;
    for (Obj t : m.fibre_objects(h.tgt))
      if ((f = morphism_named(E, e, t, l.morphism))) break;
    if (!f) throw StructuralError(field + ": no morphism " + l.morphism + " out of " + l.object);
    out.cleavage[{l.base, e}] = *f;
  }
  for (std::size_t i = 0; i < o.unit.size(); ++i) {
    const auto& u = o.unit[i];
    const std::string field = "overrides.unit[" + std::to_string(i) + "]";
    const Mor h = base.mor(*base.morphism_index(u.base));
    auto f = morphism_named(E, m.unit(h.src), m.unit(h.tgt), u.morphism);
    if (!f) throw StructuralError(field + ": no morphism " + u.morphism + " between the units");
    out.unit[u.base] = *f;
  }
  return out;
}

}  // namespace

std::unique_ptr<Model> build_model(const Presentation& p, const RunOptions& options) {
  auto model = std::make_unique<Model>();
  Model& md = *model;
  md.limits = limits_of(p, options);
  md.base = FinCat::from(p.base);
  const FibreSpec& f = p.fibres;
  std::optional<std::uint64_t> bound = options.universe_bound ? options.universe_bound : f.universe_bound;
  if (f.backend == "finite-set") {
    FinsetOptions o;
    if (bound) o.bound = static_cast<std::uint32_t>(*bound);
    if (f.monoid_bound) o.monoid_bound = *f.monoid_bound;
    md.backend = make_finset_opfibration(md.base, o);
  } else if (f.backend == "finite-module" || f.backend == "finite-field-vect") {
    ModuleOptions o;
    if (f.backend == "finite-module") {
      for (Obj b : md.base.objects()) o.rings.push_back(f.rings.at(md.base.object_name(b)));
      o.bound = bound.value_or(36);
    } else {
      const auto primes = squarefree_primes(*f.field);
      if (primes.size() != 1 || primes[0] != *f.field)
        throw UnsupportedError("finite-field-vect supports prime fields only, got " + std::to_string(*f.field));
      o.rings.assign(md.base.num_objects(), *f.field);
      o.bound = bound.value_or(ipow(*f.field, *f.dimension_bound));
    }
    if (f.monoid_bound) o.monoid_dim = *f.monoid_bound;
    md.backend = make_module_opfibration(md.base, o);
  } else if (f.backend == "enumerated") {
    auto g = grothendieck_construction(*f.indexed);
    md.construction = g.report;
    md.explicit_data = g.data;
    md.backend = make_explicit_opfibration(g.data, md.limits);
  } else if (f.backend == "finite-abelian") {
    throw UnsupportedError("finite-abelian fibres are not supported; present them as finite-module fibres");
  } else {
    throw StructuralError("unknown backend " + f.backend);
  }
  if (!p.overrides.empty())
    md.overridden =
        std::make_unique<OverriddenOpfibration>(*md.backend, resolve_overrides(p.overrides, *md.backend, md.base));
  if (p.site && p.site->base) md.site_base = FinCat::from(*p.site->base);
  return model;
}

// ---------------------------------------------------------------- report helpers

namespace {

using Clock = std::chrono::steady_clock;

Report findings_json(const ValidationReport& r) {
  Report fs = Report::array();
  for (const auto& f : r.findings())
    fs.push_back(Report{{"severity", to_string(f.severity)},
                        {"clause", f.clause},
                        {"message", f.message},
                        {"witnesses", f.witnesses}});
  return fs;
}

Report checks_json(const ValidationReport& r) {
  Report cs = Report::array();
  for (const auto& n : r.notes()) {
    Report c{{"clause", n.clause}, {"mode", to_string(n.mode)}, {"cases", n.cases}};
    if (!n.detail.empty()) c["detail"] = n.detail;
    cs.push_back(c);
  }
  return cs;
}

void absorb(ValidationReport& into, const ValidationReport& from, const std::string& prefix) {
  for (const auto& f : from.findings()) into.add(f.severity, prefix + f.clause, f.message, f.witnesses);
  for (const auto& n : from.notes()) into.note(prefix + n.clause, n.mode, n.cases, n.detail);
}

std::string status_of(const ValidationReport& r) {
  if (r.count(Severity::structural) || r.count(Severity::violation)) return "fail";
  if (r.count(Severity::truncation)) return "truncated";
  return "pass";
}

struct Stage {
  std::string name;
  std::string status = "pass";
  std::string reason;
  std::vector<std::string> operations;
  ValidationReport report;
  Report data = Report::object();
  double seconds = 0;
};

template <class F>
void guarded(ValidationReport& r, const std::string& clause, const std::vector<std::string>& who, F&& f) {
  try {
    f();
  } catch (const TruncationError& e) {
    r.add(Severity::truncation, clause, e.what(), who);
  } catch (const StructuralError& e) {
    r.add(Severity::structural, clause, e.what(), who);
  } catch (const UnsupportedError& e) {
    r.add(Severity::structural, clause, e.what(), who);
  }
}

std::string group_name(const std::vector<Integer>& inv) {
  std::vector<std::string> parts;
  std::size_t free = 0;
  for (const Integer& d : inv) {
    if (d == 0) ++free;
    else parts.push_back("Z/" + d.str());
  }
  if (free == 1) parts.push_back("Z");
  else if (free > 1) parts.push_back("Z^" + std::to_string(free));
  if (parts.empty()) return "0";
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? " + " : "") + parts[i];
  return s;
}

std::vector<Obj> sample_indices(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<Obj> out;
  if (n <= k) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(i);
    return out;
  }
  std::uniform_int_distribution<std::size_t> d(0, n - 1);
  for (std::size_t i = 0; i < k; ++i) out.push_back(d(rng));
  return out;
}

void rank_map(const IsoClasses& classes, const AbelianGroupPresentation& g, const Category& c,
              const std::vector<std::uint32_t>& primes, const std::function<std::uint64_t(Obj)>& points, Report& rj,
              ValidationReport& rep);

// ---------------------------------------------------------------- stages

class Runner {
 public:
  Runner(const Presentation& p, const RunOptions& o) : p_(p), o_(o) {}

  Report run() {
    Report out;
    out["format"] = kReportFormat;
    out["input"] = p_.name;
    Report opts;
    opts["strict"] = o_.strict;
    if (o_.stage) opts["stage"] = *o_.stage;
    if (o_.universe_bound) opts["universe_bound"] = *o_.universe_bound;
    out["options"] = opts;

    std::map<std::string, std::string> status;
    Report stages = Report::array();
    Report timings = Report::object();
    for (const auto& name : stage_names()) {
      Stage s;
      s.name = name;
      const auto t0 = Clock::now();
      execute(s, status);
      s.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
      status[name] = s.status;
      Report sj;
      sj["name"] = s.name;
      sj["status"] = s.status;
      if (!s.reason.empty()) sj["reason"] = s.reason;
      sj["operations"] = s.operations;
      sj["checks"] = checks_json(s.report);
      sj["findings"] = findings_json(s.report);
      if (s.report.suppressed()) sj["suppressed"] = s.report.suppressed();
      if (!s.data.empty()) sj["data"] = s.data;
      stages.push_back(sj);
      timings[name] = std::round(s.seconds * 1000) / 1000;
      if (o_.stage && *o_.stage == name) break;
    }
    out["stages"] = stages;
    std::string overall = "pass";
    for (const auto& s : stages) {
      const std::string st = s["status"];
      if (st == "error") overall = "error";
      else if (st == "fail" && overall != "error") overall = "fail";
      else if (st == "truncated" && overall == "pass") overall = "truncated";
    }
    out["status"] = overall;
    out["exit_code"] = overall == "error"                      ? kStructural
                       : overall == "fail"                     ? kFail
                       : (overall == "truncated" && o_.strict) ? kTruncated
                                                               : kPass;
    if (o_.timings) out["timings"] = timings;
    return out;
  }

 private:
  const Presentation& p_;
  RunOptions o_;
  std::unique_ptr<Model> model_;

  static bool usable(const std::string& st) { return st == "pass" || st == "truncated"; }

  bool needs(Stage& s, const std::map<std::string, std::string>& status, const std::string& dep) {
    auto it = status.find(dep);
    if (it != status.end() && usable(it->second)) return true;
    s.status = "skipped";
    s.reason = "requires " + dep + (it == status.end() ? "" : " (" + it->second + ")");
    return false;
  }

  void execute(Stage& s, const std::map<std::string, std::string>& status) {
    try {
      if (s.name == "validate") validate(s);
      else if (s.name == "verify-opfibration") {
        if (needs(s, status, "validate")) opfibration(s);
      } else if (s.name == "verify-monoidal") {
        if (needs(s, status, "verify-opfibration")) monoidal(s);
      } else if (s.name == "verify-modovermon") {
        if (needs(s, status, "verify-monoidal")) modovermon(s);
      } else if (s.name == "build") {
        if (needs(s, status, "verify-monoidal")) build(s);
      } else if (s.name == "site") {
        if (!p_.site) {
          s.status = "skipped";
          s.reason = "no site block";
        } else if (needs(s, status, "build")) {
          site(s);
        }
      } else if (s.name == "loc") {
        if (!p_.site) {
          s.status = "skipped";
          s.reason = "no site block";
        } else if (needs(s, status, "site")) {
          loc(s);
        }
      } else if (s.name == "kzero") {
        kzero(s, status);
      }
      if (s.status != "skipped") s.status = status_of(s.report);
    } catch (const TruncationError& e) {
      s.report.add(Severity::truncation, s.name, e.what());
      s.status = status_of(s.report);
    } catch (const UnsupportedError& e) {
      s.status = "error";
      s.reason = e.what();
    } catch (const StructuralError& e) {
      s.status = "error";
      s.reason = e.what();
    }
  }

  Model& model() { return *model_; }
  const MonoidalOpfibration& fib() { return model_->fibration(); }

  // ------------------------------------------------------------ validate
  void validate(Stage& s) {
    s.operations = {"validate_category", "validate_functor", "fibre_category", "pullback_category",
                    "find_isomorphisms"};
    absorb(s.report, validate_category(p_.base), "base.");
    if (p_.fibres.backend == "enumerated") s.operations.push_back("grothendieck_construction");
    model_ = build_model(p_, o_);
    Model& md = model();
    const Limits& L = md.limits;
    if (md.explicit_data) {
      absorb(s.report, md.construction, "construction.");
      absorb(s.report, validate_category(md.explicit_data->total), "total.");
    } else {
      absorb(s.report, validate_category(fib().total(), L), "total.");
    }
    absorb(s.report, validate_functor(fib().projection(), L), "projection.");
    if (md.site_base) absorb(s.report, validate_category(*p_.site->base), "site-base.");

    const Category& E = fib().total();
    Report fibres = Report::object();
    std::uint64_t squares = 0;
    for (Obj b : md.base.objects()) {
      FibreCategory F(fib().projection(), b);
      const std::size_t n = F.objects().size();
      squares += n * n;
      Report fj;
      fj["objects"] = n;
      // automorphism groups of the smallest objects
      Report autos = Report::object();
      std::size_t k = 0;
      for (Obj x : F.objects()) {
        if (k >= 4) break;
        if (F.hom_size(x, x) > 4096) continue;
        ++k;
        const auto isos = find_isomorphisms(F, x, x);
        const bool has_id = std::any_of(isos.begin(), isos.end(), [&](const auto& pr) {
          return F.is_identity(pr.first) && F.is_identity(pr.second);
        });
        if (!has_id)
          s.report.add(Severity::violation, "fibre.automorphisms", "identity missing from the automorphisms",
                       {E.object_name(x)});
        autos[E.object_name(x)] = isos.size();
      }
      fj["automorphisms"] = autos;
      fibres[md.base.object_name(b)] = fj;
    }
    s.report.note("fibre.automorphisms", CheckMode::exhaustive, md.base.num_objects());
    s.data["fibres"] = fibres;
    PullbackCategory pb(fib().projection(), fib().projection());
    if (pb.objects().size() != squares)
      s.report.add(Severity::violation, "pullback.objects", "E x_B E does not have one object per pair in a fibre",
                   {std::to_string(pb.objects().size()), std::to_string(squares)});
    s.report.note("pullback.objects", CheckMode::exhaustive, 1);
    s.data["pullback_objects"] = pb.objects().size();
  }

  // ------------------------------------------------------------ opfibration
  void opfibration(Stage& s) {
    s.operations = {"verify_opfibration", "is_opcartesian"};
    absorb(s.report, verify_opfibration(fib(), model().limits), "");
  }

  // ------------------------------------------------------------ monoidal
  void monoidal(Stage& s) {
    s.operations = {"verify_monoidal_opfibration", "verify_symmetry", "direct_image_functor"};
    const Limits& L = model().limits;
    const MonoidalOpfibration& m = fib();
    const FinCat& B = model().base;
    const Category& E = m.total();
    absorb(s.report, verify_monoidal_opfibration(m, L), "");
    if (m.has_braiding()) absorb(s.report, verify_symmetry(m, L), "");
    else s.report.note("braiding", CheckMode::skipped, 0, "not claimed symmetric");

    for (std::size_t i = 0; i < B.num_morphisms(); ++i) {
      const Mor f = B.mor(i);
      if (B.is_identity(f)) continue;
      guarded(s.report, "direct-image", {B.morphism_id(i)},
              [&] { absorb(s.report, certify_direct_image(m, f, L), "direct-image." + B.morphism_id(i) + "."); });
    }
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < B.num_morphisms(); ++i)
      for (std::size_t j = 0; j < B.num_morphisms(); ++j) {
        const Mor f = B.mor(i), g = B.mor(j);
        if (f.tgt != g.src) continue;
        ++pairs;
        guarded(s.report, "pseudofunctor", {B.morphism_id(j), B.morphism_id(i)},
                [&] { absorb(s.report, certify_pseudofunctoriality(m, f, g, L), ""); });
      }
    s.data["pseudofunctor_pairs"] = pairs;

    // two lifts of (f, e) differing by a fibre automorphism have one connecting morphism
    Rng rng = make_rng(L.seed, "lift-uniqueness");
    std::size_t cases = 0;
    for (std::size_t i = 0; i < B.num_morphisms(); ++i) {
      const Mor f = B.mor(i);
      const auto objs = m.fibre_objects(f.src);
      for (Obj idx : sample_indices(objs.size(), L.samples, rng)) {
        const Obj e = objs[idx];
        const std::string who = B.morphism_id(i) + " at " + E.object_name(e);
        guarded(s.report, "lift.unique", {who}, [&] {
          const Mor l = m.lift(f, e);
          const std::uint32_t t = m.projection().tag_of(l.tgt, l.tgt, B.identity(f.tgt));
          std::vector<Mor> others = {l};
          for (int k = 0; k < 16 && others.size() < 2; ++k) {
            auto a = E.sample_hom_over(l.tgt, l.tgt, t, rng);
            if (a && !E.is_identity(*a) && E.is_iso(*a)) others.push_back(E.compose(*a, l));
          }
          for (const Mor& other : others) {
            ++cases;
            const std::uint64_t n = connecting_morphisms(m, f, e, other, L);
            if (n != 1)
              s.report.add(Severity::violation, "lift.unique", "lifts are not related by exactly one morphism",
                           {who, E.morphism_name(other), std::to_string(n) + " connecting morphisms"});
          }
        });
      }
    }
    s.report.note("lift.unique", CheckMode::sampled, cases);
  }

  // ------------------------------------------------------------ modovermon
  void modovermon(Stage& s) {
    s.operations = {"build_Mon",           "validate_monoid",       "build_Mod",
                    "validate_module",     "verify_modovermon",     "reflexive_coequalizer",
                    "extension_of_scalars", "restriction_of_scalars", "fibre_restriction_check"};
    Model& md = model();
    if (!fib().colimits()) {
      s.status = "skipped";
      s.reason = "the fibres have no designated coequalizers";
      s.operations.clear();
      return;
    }
    const Limits& L = md.limits;
    MonoidCategory& mon = md.monoids();
    ModuleCategory& mod = md.modules();
    s.data["monoids"] = mon.objects().size();
    s.data["modules"] = mod.objects().size();
    for (Obj r : mon.objects())
      absorb(s.report, validate_monoid(fib(), mon.monoid(r), false), "monoid.");
    for (Obj x : mod.objects()) {
      const ModuleObject& a = mod.module(x);
      absorb(s.report, validate_module(fib(), mon.monoid(a.monoid), a.carrier, a.kappa), "module.");
    }
    absorb(s.report, verify_modovermon(mod, L), "");
    for (Obj b : md.base.objects())
      absorb(s.report, fibre_restriction_check(mod, b, L), "fibre-restriction." + md.base.object_name(b) + ".");

    // adjunction φ_! ⊣ φ* on triples (M, φ, N), φ inside a fibre
    struct Triple {
      Obj m;
      Mor phi;
      Obj n;
    };
    std::vector<Triple> triples;
    std::vector<std::pair<Mor, Mor>> composable;
    std::vector<Mor> homs;
    for (Obj r : mon.objects())
      for (Obj t : mon.objects()) {
        mon.for_each_hom(r, t, [&](const Mor& phi) {
          homs.push_back(phi);
          return true;
        });
      }
    for (const Mor& phi : homs) {
      if (fib().base().is_identity(fib().base_of(mon.underlying(phi))))
        for (Obj x : mod.modules_over(phi.src))
          for (Obj y : mod.modules_over(phi.tgt)) triples.push_back({x, phi, y});
      for (const Mor& psi : homs)
        if (psi.src == phi.tgt) composable.emplace_back(phi, psi);
    }
    Rng rng = make_rng(L.seed, "adjunction");
    std::size_t checked = 0, discrepancies = 0;
    const std::size_t want = p_.analyses.adjunction_samples;
    for (Obj i : sample_indices(triples.size(), want, rng)) {
      const Triple& t = triples[i];
      const std::string who = mod.object_name(t.m) + " | " + mon.morphism_name(t.phi) + " | " + mod.object_name(t.n);
      guarded(s.report, "adjunction", {who}, [&] {
        const AdjunctionCount c = adjunction_count(mod, t.m, t.phi, t.n, L);
        ++checked;
        if (c.extension_side != c.restriction_side || !c.bijection) {
          ++discrepancies;
          s.report.add(Severity::violation, "adjunction", "hom counts differ",
                       {who, std::to_string(c.extension_side), std::to_string(c.restriction_side)});
        }
      });
    }
    s.report.note("adjunction", triples.size() <= want ? CheckMode::exhaustive : CheckMode::sampled, checked,
                  "of " + std::to_string(triples.size()));
    s.data["adjunction"] = Report{{"triples", checked}, {"discrepancies", discrepancies}};

    // (ψ∘φ)_! against ψ_!φ_!
    std::size_t pcases = 0;
    for (Obj i : sample_indices(composable.size(), want, rng)) {
      const auto& [phi, psi] = composable[i];
      const auto over = mod.modules_over(phi.src);
      if (over.empty()) continue;
      std::uniform_int_distribution<std::size_t> d(0, over.size() - 1);
      const Obj x = over[d(rng)];
      const std::string who = mod.object_name(x) + " | " + mon.morphism_name(phi) + " | " + mon.morphism_name(psi);
      guarded(s.report, "extension.pseudofunctor", {who}, [&] {
        const ConnectingCount c = extension_pseudofunctoriality(mod, x, phi, psi, L);
        ++pcases;
        if (c.morphisms != 1 || c.isomorphisms != 1)
          s.report.add(Severity::violation, "extension.pseudofunctor", "connecting isomorphism is not unique",
                       {who, std::to_string(c.morphisms) + " morphisms", std::to_string(c.isomorphisms) + " isos"});
      });
    }
    s.report.note("extension.pseudofunctor", composable.size() <= want ? CheckMode::exhaustive : CheckMode::sampled,
                  pcases, "of " + std::to_string(composable.size()) + " composable pairs, one module each");
  }

  // ------------------------------------------------------------ build
  void build(Stage& s) {
    Model& md = model();
    s.operations = {"build_Mon", "build_Mod"};
    s.data["monoids"] = md.monoids().objects().size();
    s.data["modules"] = md.modules().objects().size();
    if (p_.analyses.commutative) {
      s.operations.push_back("build_Comm");
      s.operations.push_back("build_Mod_c");
      MonoidCategory& comm = md.commutative();
      for (Obj r : comm.objects())
        absorb(s.report, validate_monoid(fib(), comm.monoid(r), true), "commutative.");
      s.data["commutative_monoids"] = comm.objects().size();
      s.data["commutative_modules"] = md.commutative_modules().objects().size();
    }
    Report per = Report::object();
    for (Obj b : md.base.objects()) {
      std::size_t nm = 0, nx = 0;
      for (Obj r : md.monoids().objects())
        if (fib().base_of(md.monoids().monoid(r).carrier) == b) {
          ++nm;
          nx += md.modules().modules_over(r).size();
        }
      per[md.base.object_name(b)] = Report{{"monoids", nm}, {"modules", nx}};
    }
    s.data["by_base_object"] = per;
  }

  // ------------------------------------------------------------ site
  ModuleCategory& site_modules() {
    return p_.analyses.commutative ? model().commutative_modules() : model().modules();
  }

  void site(Stage& s) {
    s.operations = {"pullback_modules_along_F", "is_locally_trivial_object"};
    Model& md = model();
    const SiteSpec& sp = *p_.site;
    const FinCat& X = md.site_base ? *md.site_base : md.base;
    md.site = std::make_unique<Site>(X, site_modules(), sp.diagram, sp.cotopology, sp.trivial, md.limits);
    const Site& st = *md.site;
    absorb(s.report, st.validate(), "");
    if (sp.require_identities) absorb(s.report, validate_precotopology(X, sp.cotopology, true), "");
    PulledBackModules pb(st);
    absorb(s.report, pb.verify(md.limits), "");
    s.data["pullback_objects"] = pb.total().objects().size();
    Report objs = Report::object();
    for (Obj x : X.objects()) {
      const ObjectTriviality t = is_locally_trivial_object(st, x);
      Report oj;
      oj["monoid"] = st.modules().monoids().object_name(st.monoid_at(x));
      oj["fibre"] = st.fibre(x).size();
      oj["trivial_modules"] = st.trivial_modules(x).size();
      oj["locally_trivial"] = t.locally_trivial;
      if (t.family) oj["family"] = *t.family;
      objs[X.object_name(x)] = oj;
    }
    s.data["objects"] = objs;
  }

  // ------------------------------------------------------------ loc
  void loc(Stage& s) {
    s.operations = {"is_locally_trivial_module", "build_Loc", "induced_functor_on_Loc"};
    Model& md = model();
    const Site& st = *md.site;
    const FinCat& X = st.base();
    const ModuleCategory& mod = st.modules();
    Report table = Report::object();
    for (Obj x : X.objects()) {
      Loc l = build_loc(st, x);
      absorb(s.report, l.report, "");
      Report members = Report::array();
      for (Obj m : st.fibre(x)) {
        const ModuleTriviality t = is_locally_trivial_module(st, x, m);
        Report mj;
        mj["module"] = mod.object_name(m);
        mj["locally_trivial"] = t.locally_trivial;
        if (t.family) mj["family"] = *t.family;
        if (!t.matches.empty()) mj["matches"] = t.matches;
        if (!t.reason.empty()) mj["reason"] = t.reason;
        members.push_back(mj);
      }
      table[X.object_name(x)] = Report{{"fibre", st.fibre(x).size()},
                                       {"members", l.modules.size()},
                                       {"object_locally_trivial", l.object_locally_trivial},
                                       {"modules", members}};
      md.locs.emplace(x, std::move(l));
    }
    s.data["loc"] = table;
    Report induced = Report::object();
    for (std::size_t i = 0; i < X.num_morphisms(); ++i) {
      const Mor u = X.mor(i);
      if (X.is_identity(u)) continue;
      const InducedFunctor f = induced_functor_on_loc(st, u, md.limits);
      for (const auto& fd : f.report.findings())
        if (fd.clause.rfind("induced.", 0) == 0)
          s.report.add(fd.severity, fd.clause, X.morphism_id(i) + ": " + fd.message, fd.witnesses);
      for (const auto& n : f.report.notes())
        if (n.clause.rfind("induced.", 0) == 0) s.report.note(n.clause, n.mode, n.cases, X.morphism_id(i));
      Report offenders = Report::array();
      for (Obj o : f.offenders) offenders.push_back(mod.object_name(o));
      induced[X.morphism_id(i)] = Report{{"lands_in_loc", f.offenders.empty()}, {"offenders", offenders}};
    }
    s.data["induced"] = induced;
  }

  // ------------------------------------------------------------ kzero
  void kzero(Stage& s, const std::map<std::string, std::string>& status) {
    if (p_.analyses.kzero.empty()) {
      s.status = "skipped";
      s.reason = "no K0 requests";
      return;
    }
    s.operations = {"iso_classes", "group_completion", "smith_normal_form"};
    Report results = Report::array();
    std::size_t done = 0;
    for (const KZeroRequest& r : p_.analyses.kzero) {
      Report rj{{"category", r.category}, {"object", r.object}};
      auto skip = [&](const std::string& why) {
        rj["status"] = "skipped";
        rj["reason"] = why;
      };
      auto dep = status.find(r.category == "loc" ? "loc" : "validate");
      if (!r.sum) skip("no sum designation");
      else if (dep == status.end() || !usable(dep->second))
        skip(std::string("requires ") + (r.category == "loc" ? "loc" : "validate"));
      else {
        ++done;
        kzero_one(s, r, rj);
      }
      results.push_back(rj);
    }
    s.data["requests"] = results;
    if (done == 0) {
      s.status = "skipped";
      s.reason = "every request was skipped";
    }
  }

  void kzero_one(Stage& s, const KZeroRequest& r, Report& rj) {
    Model& md = model();
    ValidationReport rep;
    std::unique_ptr<Category> fibre;
    const Category* cat = nullptr;
    std::function<bool(Obj, Obj)> iso;
    SumDesignation sum;
    // |Hom(unit, x)| over the identity; its p-adic valuations give the rank map
    std::function<std::uint64_t(Obj)> points;
    const LinearHoms* lin = nullptr;
    const std::string prefix = "kzero." + r.category + "." + r.object + ".";
    if (r.category == "fibre") {
      const MonoidalOpfibration& m = fib();
      const Obj b = *md.base.object_index(r.object);
      const FibreColimits* col = m.colimits();
      auto zero = col ? col->zero_object(b) : std::nullopt;
      if (!zero) {
        rj["status"] = "skipped";
        rj["reason"] = "the fibre has no designated sum";
        return;
      }
      fibre = std::make_unique<FibreCategory>(m.projection(), b);
      cat = fibre.get();
      const Category& E = m.total();
      sum.zero = *zero;
      lin = E.linear();
      const Obj u = m.unit(b);
      const std::uint32_t tag = m.projection().tag_of(u, u, md.base.identity(b));
      points = [&E, u, tag](Obj x) { return E.hom_size_over(u, x, tag); };
      sum.sum = [col, &E](Obj x, Obj y) -> std::optional<Obj> {
        auto d = col->direct_sum(x, y);
        if (!d || !E.in_universe(d->object)) return std::nullopt;
        return d->object;
      };
    } else {
      const Site& st = *md.site;
      const Obj x = *st.base().object_index(r.object);
      const Loc& l = md.locs.at(x);
      const ModuleCategory& mod = st.modules();
      cat = l.category.get();
      iso = [&mod](Obj a, Obj b) { return module_isomorphism(mod, a, b).has_value(); };
      auto zero = free_module(mod, st.monoid_at(x), 0);
      if (!zero) {
        rj["status"] = "skipped";
        rj["reason"] = "no zero module";
        return;
      }
      sum.zero = *zero;
      const Category& E = mod.fibration().total();
      lin = E.linear();
      const Obj r = st.monoid_at(x);
      if (auto one = free_module(mod, r, 1)) {
        const std::uint32_t tag = mod.tag_of_phi(r, r, mod.monoids().identity(r));
        points = [&mod, o = *one, tag](Obj y) { return mod.hom_size_over(o, y, tag); };
      }
      sum.sum = [&mod, &E](Obj a, Obj b) -> std::optional<Obj> {
        auto d = module_direct_sum(mod, a, b);
        if (!d || !E.in_universe(mod.module(*d).carrier)) return std::nullopt;
        return d;
      };
    }
    const IsoClasses classes = iso_classes(*cat, iso);
    absorb(rep, validate_sum(classes, sum), "");
    const AbelianGroupPresentation g = group_completion(classes, sum, &rep);
    rj["status"] = status_of(rep);
    rj["label"] = "split K0";
    rj["classes"] = classes.representatives.size();
    rj["generators"] = g.generators;
    rj["relations"] = g.relations.rows;
    Report inv = Report::array();
    for (const Integer& d : g.invariants) inv.push_back(d.str());
    rj["invariant_factors"] = inv;
    rj["group"] = group_name(g.invariants);
    Report omitted = Report::array();
    for (const auto& [a, b] : g.omitted) omitted.push_back(Report{a, b});
    rj["omitted"] = omitted;
    rj["smith_verified"] = verify_smith(g.relations, g.smith);
    if (lin && points) rank_map(classes, g, *cat, lin->primes(), points, rj, rep);
    for (const auto& f : rep.findings())
      if (f.severity != Severity::truncation) s.report.add(f.severity, prefix + f.clause, f.message, f.witnesses);
    if (!g.omitted.empty())
      s.report.add(Severity::truncation, prefix + "omitted",
                   std::to_string(g.omitted.size()) + " sums leave the universe", {r.object});
    for (const auto& n : rep.notes()) s.report.note(prefix + n.clause, n.mode, n.cases, n.detail);
  }
};

/// Sends the class of x to the p-adic valuations of |Hom(unit, x)| and checks that
/// this is an isomorphism onto Z^k, k the number of primes that occur.
void rank_map(const IsoClasses& classes, const AbelianGroupPresentation& g, const Category& c,
              const std::vector<std::uint32_t>& primes, const std::function<std::uint64_t(Obj)>& points, Report& rj,
              ValidationReport& rep) {
  std::vector<std::vector<long>> vals;
  std::vector<bool> used(primes.size(), false);
  for (Obj x : classes.representatives) {
    std::uint64_t n = points(x);
    std::vector<long> v(primes.size(), 0);
    for (std::size_t i = 0; i < primes.size(); ++i)
      while (n % primes[i] == 0 && n > 1) {
        n /= primes[i];
        ++v[i];
        used[i] = true;
      }
    vals.push_back(v);
  }
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < primes.size(); ++i)
    if (used[i]) cols.push_back(i);
  IntMatrix w(vals.size(), cols.size());
  Report images = Report::object(), ps = Report::array();
  for (std::size_t i : cols) ps.push_back(primes[i]);
  for (std::size_t r = 0; r < vals.size(); ++r) {
    Report row = Report::array();
    for (std::size_t j = 0; j < cols.size(); ++j) {
      w.a[r * cols.size() + j] = vals[r][cols[j]];
      row.push_back(vals[r][cols[j]]);
    }
    images[c.object_name(classes.representatives[r])] = row;
  }
  const ValidationReport iso = verify_group_isomorphism(g, w);
  Report rm{{"primes", ps}, {"images", images}, {"isomorphism", iso.ok()}};
  if (!iso.ok()) rm["reason"] = iso.findings().front().message;
  rj["rank_map"] = rm;
  rep.note("rank-map", CheckMode::exhaustive, vals.size(), iso.ok() ? "isomorphism" : "not an isomorphism");
}

void diff_into(const Report& a, const Report& b, const std::string& path, std::vector<std::string>& out) {
  if (a.is_number() && b.is_number()) {
    if (a != b) out.push_back(path + ": " + a.dump() + " -> " + b.dump());
    return;
  }
  if (a.type() != b.type()) {
    out.push_back(path + ": " + a.dump() + " -> " + b.dump());
    return;
  }
  if (a.is_object()) {
    for (const auto& [k, v] : a.items()) {
      if (path.empty() && k == "timings") continue;
      if (!b.contains(k)) out.push_back(path + "/" + k + ": removed");
      else diff_into(v, b[k], path + "/" + k, out);
    }
    for (const auto& [k, v] : b.items()) {
      if (path.empty() && k == "timings") continue;
      if (!a.contains(k)) out.push_back(path + "/" + k + ": added " + v.dump());
    }
    return;
  }
  if (a.is_array()) {
    // elements with a name or clause are matched by it, the rest by position
    auto keyed = [](const Report& arr) {
      std::vector<std::pair<std::string, const Report*>> out;
      std::map<std::string, int> seen;
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const Report& e = arr[i];
        std::string k = std::to_string(i);
        for (const char* f : {"name", "clause"})
          if (e.is_object() && e.contains(f) && e[f].is_string()) {
            k = e[f].get<std::string>();
            if (int n = seen[k]++) k += "#" + std::to_string(n + 1);
            break;
          }
        out.emplace_back(k, &e);
      }
      return out;
    };
    const auto ka = keyed(a), kb = keyed(b);
    std::map<std::string, const Report*> ib(kb.begin(), kb.end()), ia(ka.begin(), ka.end());
    for (const auto& [k, e] : ka) {
      auto it = ib.find(k);
      if (it == ib.end()) out.push_back(path + "/" + k + ": removed " + e->dump());
      else diff_into(*e, *it->second, path + "/" + k, out);
    }
    for (const auto& [k, e] : kb)
      if (!ia.count(k)) out.push_back(path + "/" + k + ": added " + e->dump());
    return;
  }
  if (a != b) out.push_back(path + ": " + a.dump() + " -> " + b.dump());
}

}  // namespace

Report run(const Presentation& p, const RunOptions& options) {
  if (options.stage) {
    const auto& names = stage_names();
    if (std::find(names.begin(), names.end(), *options.stage) == names.end())
      throw ParseError("--stage", "unknown stage " + *options.stage);
  }
  return Runner(p, options).run();
}

int exit_code(const Report& r) { return r.at("exit_code").get<int>(); }

std::string render_machine(const Report& r) { return r.dump(2) + "\n"; }

std::string render_human(const Report& r) {
  std::ostringstream os;
  os << "fibred report for " << r["input"].get<std::string>() << ": " << r["status"].get<std::string>() << "\n";
  for (const auto& s : r["stages"]) {
    std::string name = s["name"];
    name.resize(20, ' ');
    os << "  " << name << s["status"].get<std::string>();
    if (s.contains("reason")) os << "  (" << s["reason"].get<std::string>() << ")";
    os << "\n";
    std::size_t shown = 0;
    for (const auto& f : s["findings"]) {
      if (f["severity"] == "warning") continue;
      if (shown++ == 5) {
        os << "      ...\n";
        break;
      }
      os << "      " << f["severity"].get<std::string>() << " " << f["clause"].get<std::string>() << ": "
         << f["message"].get<std::string>();
      for (const auto& w : f["witnesses"]) os << " [" << w.get<std::string>() << "]";
      os << "\n";
    }
    if (s.contains("data") && s["data"].contains("requests"))
      for (const auto& k : s["data"]["requests"]) {
        os << "      K0(" << k["category"].get<std::string>() << " " << k["object"].get<std::string>() << ")";
        if (k.contains("group"))
          os << " = " << k["group"].get<std::string>() << ", invariant factors " << k["invariant_factors"].dump()
             << ", " << k["omitted"].size() << " sums omitted";
        else
          os << " skipped: " << k["reason"].get<std::string>();
        os << "\n";
      }
    if (s.contains("data") && s["data"].contains("loc"))
      for (const auto& [x, l] : s["data"]["loc"].items())
        os << "      Loc(" << x << "): " << l["members"] << " of " << l["fibre"] << " modules\n";
  }
  if (r.contains("timings")) {
    os << "  timings (s):";
    for (const auto& [k, v] : r["timings"].items()) os << " " << k << "=" << v.dump();
    os << "\n";
  }
  return os.str();
}

Report parse_report(const std::string& text) {
  try {
    return Report::parse(text);
  } catch (const Report::parse_error& e) {
    throw ParseError("report", e.what());
  }
}

std::vector<std::string> diff_reports(const Report& a, const Report& b) {
  if (!a.contains("format") || !b.contains("format") || a["format"] != b["format"])
    throw ParseError("format", "report versions differ");
  std::vector<std::string> out;
  diff_into(a, b, "", out);
  return out;
}

}  // namespace fibred::cli
