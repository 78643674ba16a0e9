#include "fibred/presentation.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace fibred::cli {

using Json = nlohmann::ordered_json;

PresentationError::PresentationError(std::vector<Issue> issues)
    : ParseError(issues.empty() ? std::string() : issues.front().location,
                 issues.empty() ? std::string("invalid presentation")
                                : issues.front().message +
                                      (issues.size() > 1 ? " (+" + std::to_string(issues.size() - 1) + " more)" : "")),
      issues_(std::move(issues)) {}

namespace {

const std::set<std::string> kBackends = {"finite-set", "finite-module", "finite-field-vect", "enumerated",
                                         "finite-abelian"};

std::string escape(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

class Reader {
 public:
  std::vector<Issue> issues;

  void error(const std::string& path, const std::string& msg) { issues.push_back({path.empty() ? "/" : path, msg}); }

  bool object(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
      error(path, "expected an object");
      return false;
    }
    for (const auto& [k, _] : j.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || k == a;
      if (!ok) error(path + "/" + escape(k), "unknown field");
    }
    return true;
  }

  const Json* get(const Json& j, const std::string& path, const char* key, bool required) {
    auto it = j.find(key);
    if (it == j.end()) {
      if (required) error(path + "/" + key, "missing field");
      return nullptr;
    }
    return &*it;
  }

  std::string str(const Json& j, const std::string& path) {
    if (!j.is_string()) {
      error(path, "expected a string");
      return {};
    }
    return j.get<std::string>();
  }

  std::uint64_t uint(const Json& j, const std::string& path, bool positive) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
      error(path, "expected a non-negative integer");
      return 0;
    }
    const auto v = j.get<std::uint64_t>();
    if (positive && v == 0) error(path, "must be positive");
    return v;
  }

  bool boolean(const Json& j, const std::string& path) {
    if (!j.is_boolean()) {
      error(path, "expected true or false");
      return false;
    }
    return j.get<bool>();
  }

  std::vector<std::string> strings(const Json& j, const std::string& path) {
    std::vector<std::string> out;
    if (!j.is_array()) {
      error(path, "expected an array of strings");
      return out;
    }
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(str(j[i], path + "/" + std::to_string(i)));
    return out;
  }

  std::map<std::string, std::string> string_map(const Json& j, const std::string& path) {
    std::map<std::string, std::string> out;
    if (!j.is_object()) {
      error(path, "expected an object of strings");
      return out;
    }
    for (const auto& [k, v] : j.items()) out[k] = str(v, path + "/" + escape(k));
    return out;
  }

  /// Arrays of fixed-length string tuples.
  std::vector<std::vector<std::string>> tuples(const Json& j, const std::string& path, std::size_t n) {
    std::vector<std::vector<std::string>> out;
    if (!j.is_array()) {
      error(path, "expected an array");
      return out;
    }
    for (std::size_t i = 0; i < j.size(); ++i) {
      const std::string p = path + "/" + std::to_string(i);
      auto t = strings(j[i], p);
      if (t.size() != n) {
        error(p, "expected " + std::to_string(n) + " entries");
        continue;
      }
      out.push_back(std::move(t));
    }
    return out;
  }

  FinCatPresentation fincat(const Json& j, const std::string& path) {
    FinCatPresentation c;
    if (!object(j, path, {"objects", "morphisms", "identities", "composites"})) return c;
    if (auto o = get(j, path, "objects", true)) c.objects = strings(*o, path + "/objects");
    if (auto ms = get(j, path, "morphisms", true)) {
      if (!ms->is_array()) error(path + "/morphisms", "expected an array");
      else
        for (std::size_t i = 0; i < ms->size(); ++i) {
          const std::string p = path + "/morphisms/" + std::to_string(i);
          const Json& m = (*ms)[i];
          if (!object(m, p, {"id", "source", "target"})) continue;
          FinCatPresentation::Morphism mm;
          if (auto v = get(m, p, "id", true)) mm.id = str(*v, p + "/id");
          if (auto v = get(m, p, "source", true)) mm.source = str(*v, p + "/source");
          if (auto v = get(m, p, "target", true)) mm.target = str(*v, p + "/target");
          c.morphisms.push_back(std::move(mm));
        }
    }
    if (auto v = get(j, path, "identities", true)) c.identities = string_map(*v, path + "/identities");
    // composites with identities are implied
    std::map<std::string, const FinCatPresentation::Morphism*> by_id;
    for (const auto& m : c.morphisms) by_id[m.id] = &m;
    for (const auto& m : c.morphisms) {
      auto s = c.identities.find(m.source), t = c.identities.find(m.target);
      if (t != c.identities.end()) c.composites[{t->second, m.id}] = m.id;
      if (s != c.identities.end()) c.composites[{m.id, s->second}] = m.id;
    }
    if (auto v = get(j, path, "composites", false))
      for (auto& t : tuples(*v, path + "/composites", 3)) c.composites[{t[0], t[1]}] = t[2];
    check_fincat(c, path);
    return c;
  }

  void check_fincat(const FinCatPresentation& c, const std::string& path) {
    std::set<std::string> objs(c.objects.begin(), c.objects.end()), mors;
    if (objs.size() != c.objects.size()) error(path + "/objects", "duplicate object identifier");
    for (std::size_t i = 0; i < c.morphisms.size(); ++i) {
      const auto& m = c.morphisms[i];
      const std::string p = path + "/morphisms/" + std::to_string(i);
      if (!mors.insert(m.id).second) error(p + "/id", "duplicate morphism identifier " + m.id);
      if (!objs.count(m.source)) error(p + "/source", "unknown object " + m.source);
      if (!objs.count(m.target)) error(p + "/target", "unknown object " + m.target);
    }
    for (const auto& [o, m] : c.identities) {
      if (!objs.count(o)) error(path + "/identities/" + escape(o), "unknown object " + o);
      if (!mors.count(m)) error(path + "/identities/" + escape(o), "unknown morphism " + m);
    }
    for (const auto& o : c.objects)
      if (!c.identities.count(o)) error(path + "/identities", "no identity for " + o);
    for (const auto& [gf, h] : c.composites)
      if (!mors.count(gf.first) || !mors.count(gf.second) || !mors.count(h))
        error(path + "/composites", "unknown morphism in composite (" + gf.first + ", " + gf.second + ")");
  }

  IndexedMonoidalPresentation indexed(const Json& j, const std::string& path) {
    IndexedMonoidalPresentation ip;
    if (auto fs = get(j, path, "fibres", true)) {
      if (!fs->is_object()) error(path + "/fibres", "expected an object");
      else
        for (const auto& [b, fj] : fs->items()) {
          const std::string p = path + "/fibres/" + escape(b);
          if (!object(fj, p, {"category", "tensor", "tensor_morphisms", "unit", "associator", "left_unitor",
                              "right_unitor", "braiding"}))
            continue;
          IndexedMonoidalPresentation::Fibre f;
          if (auto v = get(fj, p, "category", true)) f.category = fincat(*v, p + "/category");
          if (auto v = get(fj, p, "tensor", true))
            for (auto& t : tuples(*v, p + "/tensor", 3)) f.tensor_objects[{t[0], t[1]}] = t[2];
          if (auto v = get(fj, p, "tensor_morphisms", false))
            for (auto& t : tuples(*v, p + "/tensor_morphisms", 3)) f.tensor_morphisms[{t[0], t[1]}] = t[2];
          if (auto v = get(fj, p, "unit", true)) f.unit = str(*v, p + "/unit");
          if (auto v = get(fj, p, "associator", false))
            for (auto& t : tuples(*v, p + "/associator", 4)) f.associator[{t[0], t[1], t[2]}] = t[3];
          if (auto v = get(fj, p, "left_unitor", false)) f.left_unitor = string_map(*v, p + "/left_unitor");
          if (auto v = get(fj, p, "right_unitor", false)) f.right_unitor = string_map(*v, p + "/right_unitor");
          if (auto v = get(fj, p, "braiding", false))
            for (auto& t : tuples(*v, p + "/braiding", 3)) f.braiding[{t[0], t[1]}] = t[2];
          check_fibre(f, p);
          ip.fibres[b] = std::move(f);
        }
    }
    if (auto ts = get(j, path, "transitions", false)) {
      if (!ts->is_object()) error(path + "/transitions", "expected an object");
      else
        for (const auto& [h, tj] : ts->items()) {
          const std::string p = path + "/transitions/" + escape(h);
          if (!object(tj, p, {"objects", "morphisms", "tensor_comparison", "unit_comparison"})) continue;
          IndexedMonoidalPresentation::Transition t;
          if (auto v = get(tj, p, "objects", true)) t.functor.objects = string_map(*v, p + "/objects");
          if (auto v = get(tj, p, "morphisms", true)) t.functor.morphisms = string_map(*v, p + "/morphisms");
          if (auto v = get(tj, p, "tensor_comparison", false))
            for (auto& x : tuples(*v, p + "/tensor_comparison", 3)) t.tensor_comparison[{x[0], x[1]}] = x[2];
          if (auto v = get(tj, p, "unit_comparison", false)) t.unit_comparison = str(*v, p + "/unit_comparison");
          ip.transitions[h] = std::move(t);
        }
    }
    if (auto v = get(j, path, "composition", false))
      for (auto& t : tuples(*v, path + "/composition", 4)) ip.composition[{t[0], t[1], t[2]}] = t[3];
    return ip;
  }

  void check_fibre(const IndexedMonoidalPresentation::Fibre& f, const std::string& p) {
    std::set<std::string> objs(f.category.objects.begin(), f.category.objects.end()), mors;
    for (const auto& m : f.category.morphisms) mors.insert(m.id);
    auto obj = [&](const std::string& x, const std::string& field) {
      if (!objs.count(x)) error(p + "/" + field, "unknown object " + x);
    };
    auto mor = [&](const std::string& x, const std::string& field) {
      if (!mors.count(x)) error(p + "/" + field, "unknown morphism " + x);
    };
    for (const auto& [ab, c] : f.tensor_objects) {
      obj(ab.first, "tensor");
      obj(ab.second, "tensor");
      obj(c, "tensor");
    }
    for (const auto& [ab, c] : f.tensor_morphisms) {
      mor(ab.first, "tensor_morphisms");
      mor(ab.second, "tensor_morphisms");
      mor(c, "tensor_morphisms");
    }
    obj(f.unit, "unit");
    for (const auto& [abc, m] : f.associator) {
      obj(std::get<0>(abc), "associator");
      obj(std::get<1>(abc), "associator");
      obj(std::get<2>(abc), "associator");
      mor(m, "associator");
    }
    for (const auto& [a, m] : f.left_unitor) {
      obj(a, "left_unitor");
      mor(m, "left_unitor");
    }
    for (const auto& [a, m] : f.right_unitor) {
      obj(a, "right_unitor");
      mor(m, "right_unitor");
    }
    for (const auto& [ab, m] : f.braiding) {
      obj(ab.first, "braiding");
      obj(ab.second, "braiding");
      mor(m, "braiding");
    }
  }

  FibreSpec fibres(const Json& j, const std::string& path) {
    FibreSpec f;
    if (!object(j, path,
                {"backend", "universe_bound", "monoid_bound", "rings", "field", "dimension_bound", "fibres",
                 "transitions", "composition"}))
      return f;
    if (auto v = get(j, path, "backend", true)) {
      f.backend = str(*v, path + "/backend");
      if (!f.backend.empty() && !kBackends.count(f.backend))
        error(path + "/backend", "unknown backend tag " + f.backend);
    }
    if (auto v = get(j, path, "universe_bound", false)) f.universe_bound = uint(*v, path + "/universe_bound", true);
    if (auto v = get(j, path, "monoid_bound", false))
      f.monoid_bound = static_cast<std::uint32_t>(uint(*v, path + "/monoid_bound", true));
    if (auto v = get(j, path, "rings", f.backend == "finite-module")) {
      if (!v->is_object()) error(path + "/rings", "expected an object");
      else
        for (const auto& [b, n] : v->items())
          f.rings[b] = static_cast<std::uint32_t>(uint(n, path + "/rings/" + escape(b), true));
    }
    if (auto v = get(j, path, "field", f.backend == "finite-field-vect"))
      f.field = static_cast<std::uint32_t>(uint(*v, path + "/field", true));
    if (auto v = get(j, path, "dimension_bound", f.backend == "finite-field-vect"))
      f.dimension_bound = static_cast<std::uint32_t>(uint(*v, path + "/dimension_bound", false));
    const bool enumerated = f.backend == "enumerated";
    if (enumerated) f.indexed = indexed(j, path);
    else
      for (const char* k : {"fibres", "transitions", "composition"})
        if (j.contains(k)) error(path + "/" + k, "only for the enumerated backend");
    return f;
  }

  OverrideSpec overrides(const Json& j, const std::string& path) {
    OverrideSpec o;
    if (!object(j, path, {"associator", "lift", "unit"})) return o;
    auto each = [&](const char* key, auto&& f) {
      if (auto v = get(j, path, key, false)) {
        if (!v->is_array()) return error(path + "/" + key, "expected an array");
        for (std::size_t i = 0; i < v->size(); ++i) f((*v)[i], path + "/" + key + "/" + std::to_string(i));
      }
    };
    each("associator", [&](const Json& e, const std::string& p) {
      if (!object(e, p, {"objects", "morphism"})) return;
      OverrideSpec::Associator a;
      if (auto v = get(e, p, "objects", true)) {
        auto xs = strings(*v, p + "/objects");
        if (xs.size() != 3) error(p + "/objects", "expected 3 objects");
        else a.objects = {xs[0], xs[1], xs[2]};
      }
      if (auto v = get(e, p, "morphism", true)) a.morphism = str(*v, p + "/morphism");
      o.associator.push_back(std::move(a));
    });
    each("lift", [&](const Json& e, const std::string& p) {
      if (!object(e, p, {"base", "object", "morphism"})) return;
      OverrideSpec::Lift l;
      if (auto v = get(e, p, "base", true)) l.base = str(*v, p + "/base");
      if (auto v = get(e, p, "object", true)) l.object = str(*v, p + "/object");
      if (auto v = get(e, p, "morphism", true)) l.morphism = str(*v, p + "/morphism");
      o.lift.push_back(std::move(l));
    });
    each("unit", [&](const Json& e, const std::string& p) {
      if (!object(e, p, {"base", "morphism"})) return;
      OverrideSpec::Unit u;
      if (auto v = get(e, p, "base", true)) u.base = str(*v, p + "/base");
      if (auto v = get(e, p, "morphism", true)) u.morphism = str(*v, p + "/morphism");
      o.unit.push_back(std::move(u));
    });
    return o;
  }

  SiteSpec site(const Json& j, const std::string& path) {
    SiteSpec s;
    if (!object(j, path, {"base", "monoids", "morphisms", "cotopology", "require_identities", "trivial"})) return s;
    if (auto v = get(j, path, "base", false)) s.base = fincat(*v, path + "/base");
    if (auto v = get(j, path, "monoids", true)) s.diagram.objects = string_map(*v, path + "/monoids");
    if (auto v = get(j, path, "morphisms", false)) s.diagram.morphisms = string_map(*v, path + "/morphisms");
    if (auto v = get(j, path, "cotopology", true)) {
      if (!v->is_object()) error(path + "/cotopology", "expected an object");
      else
        for (const auto& [x, fams] : v->items()) {
          const std::string p = path + "/cotopology/" + escape(x);
          auto& out = s.cotopology.families[x];
          if (!fams.is_array()) {
            error(p, "expected an array of families");
            continue;
          }
          for (std::size_t i = 0; i < fams.size(); ++i) out.push_back(strings(fams[i], p + "/" + std::to_string(i)));
        }
    }
    if (auto v = get(j, path, "require_identities", false))
      s.require_identities = boolean(*v, path + "/require_identities");
    if (auto v = get(j, path, "trivial", true)) {
      const std::string p = path + "/trivial";
      if (object(*v, p, {"objects", "modules", "constant_rank"})) {
        if (auto o = get(*v, p, "objects", false)) {
          auto xs = strings(*o, p + "/objects");
          s.trivial.objects.insert(xs.begin(), xs.end());
        }
        if (auto c = get(*v, p, "constant_rank", false)) s.trivial.constant_rank = boolean(*c, p + "/constant_rank");
        if (auto ms = get(*v, p, "modules", false)) {
          if (!ms->is_object()) error(p + "/modules", "expected an object");
          else
            for (const auto& [x, fj] : ms->items()) {
              const std::string q = p + "/modules/" + escape(x);
              if (!object(fj, q, {"generator", "modules"})) continue;
              TrivialDesignation::Family fam;
              if (auto g = get(fj, q, "generator", false)) {
                fam.generator = str(*g, q + "/generator");
                if (fam.generator != "free") error(q + "/generator", "unknown generator " + fam.generator);
              }
              if (auto es = get(fj, q, "modules", false)) {
                if (!es->is_array()) error(q + "/modules", "expected an array");
                else
                  for (std::size_t i = 0; i < es->size(); ++i) {
                    const std::string r = q + "/modules/" + std::to_string(i);
                    if (!object((*es)[i], r, {"module", "rank"})) continue;
                    TrivialDesignation::Entry e;
                    if (auto m = get((*es)[i], r, "module", true)) e.module = str(*m, r + "/module");
                    if (auto k = get((*es)[i], r, "rank", false)) e.rank = static_cast<long>(uint(*k, r + "/rank", false));
                    fam.modules.push_back(std::move(e));
                  }
              }
              s.trivial.modules[x] = std::move(fam);
            }
        }
      }
    }
    return s;
  }

  AnalysesSpec analyses(const Json& j, const std::string& path) {
    AnalysesSpec a;
    if (!object(j, path, {"commutative", "adjunction_samples", "kzero"})) return a;
    if (auto v = get(j, path, "commutative", false)) a.commutative = boolean(*v, path + "/commutative");
    if (auto v = get(j, path, "adjunction_samples", false))
      a.adjunction_samples = static_cast<std::uint32_t>(uint(*v, path + "/adjunction_samples", false));
    if (auto v = get(j, path, "kzero", false)) {
      if (!v->is_array()) error(path + "/kzero", "expected an array");
      else
        for (std::size_t i = 0; i < v->size(); ++i) {
          const std::string p = path + "/kzero/" + std::to_string(i);
          const Json& e = (*v)[i];
          if (!object(e, p, {"category", "object", "sum"})) continue;
          KZeroRequest r;
          if (auto c = get(e, p, "category", true)) {
            r.category = str(*c, p + "/category");
            if (r.category != "fibre" && r.category != "loc") error(p + "/category", "expected fibre or loc");
          }
          if (auto o = get(e, p, "object", true)) r.object = str(*o, p + "/object");
          if (auto s = get(e, p, "sum", false)) {
            r.sum = str(*s, p + "/sum");
            if (*r.sum != "direct-sum") error(p + "/sum", "unknown sum designation " + *r.sum);
          }
          a.kzero.push_back(std::move(r));
        }
    }
    return a;
  }

  LimitsSpec limits(const Json& j, const std::string& path) {
    LimitsSpec l;
    if (!object(j, path, {"enumeration_budget", "samples", "seed"})) return l;
    if (auto v = get(j, path, "enumeration_budget", false))
      l.enumeration_budget = uint(*v, path + "/enumeration_budget", true);
    if (auto v = get(j, path, "samples", false))
      l.samples = static_cast<std::uint32_t>(uint(*v, path + "/samples", true));
    if (auto v = get(j, path, "seed", false)) l.seed = uint(*v, path + "/seed", false);
    return l;
  }

  void cross_references(const Presentation& p) {
    std::set<std::string> objs(p.base.objects.begin(), p.base.objects.end()), mors;
    for (const auto& m : p.base.morphisms) mors.insert(m.id);
    if (p.fibres.backend == "finite-module") {
      for (const auto& [b, _] : p.fibres.rings)
        if (!objs.count(b)) error("/fibres/rings/" + escape(b), "unknown base object " + b);
      for (const auto& o : p.base.objects)
        if (!p.fibres.rings.count(o)) error("/fibres/rings", "no ring for base object " + o);
    }
    if (p.fibres.indexed) {
      for (const auto& [b, _] : p.fibres.indexed->fibres)
        if (!objs.count(b)) error("/fibres/fibres/" + escape(b), "unknown base object " + b);
      for (const auto& [h, _] : p.fibres.indexed->transitions)
        if (!mors.count(h)) error("/fibres/transitions/" + escape(h), "unknown base morphism " + h);
    }
    for (std::size_t i = 0; i < p.overrides.lift.size(); ++i)
      if (!mors.count(p.overrides.lift[i].base))
        error("/overrides/lift/" + std::to_string(i) + "/base", "unknown base morphism " + p.overrides.lift[i].base);
    for (std::size_t i = 0; i < p.overrides.unit.size(); ++i)
      if (!mors.count(p.overrides.unit[i].base))
        error("/overrides/unit/" + std::to_string(i) + "/base", "unknown base morphism " + p.overrides.unit[i].base);
    std::set<std::string> sobjs = objs, smors = mors;
    if (p.site) {
      const SiteSpec& s = *p.site;
      if (s.base) {
        sobjs = {s.base->objects.begin(), s.base->objects.end()};
        smors.clear();
        for (const auto& m : s.base->morphisms) smors.insert(m.id);
      }
      for (const auto& [x, _] : s.diagram.objects)
        if (!sobjs.count(x)) error("/site/monoids/" + escape(x), "unknown site object " + x);
      for (const auto& x : sobjs)
        if (!s.diagram.objects.count(x)) error("/site/monoids", "no monoid for site object " + x);
      for (const auto& [h, _] : s.diagram.morphisms)
        if (!smors.count(h)) error("/site/morphisms/" + escape(h), "unknown site morphism " + h);
      for (const auto& [x, fams] : s.cotopology.families) {
        if (!sobjs.count(x)) error("/site/cotopology/" + escape(x), "unknown site object " + x);
        for (std::size_t i = 0; i < fams.size(); ++i)
          for (std::size_t k = 0; k < fams[i].size(); ++k)
            if (!smors.count(fams[i][k]))
              error("/site/cotopology/" + escape(x) + "/" + std::to_string(i) + "/" + std::to_string(k),
                    "unknown site morphism " + fams[i][k]);
      }
      for (const auto& x : s.trivial.objects)
        if (!sobjs.count(x)) error("/site/trivial/objects", "unknown site object " + x);
      for (const auto& [x, _] : s.trivial.modules)
        if (!sobjs.count(x)) error("/site/trivial/modules/" + escape(x), "unknown site object " + x);
    }
    for (std::size_t i = 0; i < p.analyses.kzero.size(); ++i) {
      const auto& r = p.analyses.kzero[i];
      const std::string at = "/analyses/kzero/" + std::to_string(i) + "/object";
      if (r.category == "fibre" && !objs.count(r.object)) error(at, "unknown base object " + r.object);
      if (r.category == "loc") {
        if (!p.site) error(at, "loc requested without a site block");
        else if (!sobjs.count(r.object)) error(at, "unknown site object " + r.object);
      }
    }
  }
};

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

Json fincat_json(const FinCatPresentation& c) {
  Json j;
  j["objects"] = c.objects;
  Json ms = Json::array();
  for (const auto& m : c.morphisms) ms.push_back(Json{{"id", m.id}, {"source", m.source}, {"target", m.target}});
  j["morphisms"] = ms;
  Json ids = Json::object();
  for (const auto& [o, m] : c.identities) ids[o] = m;
  j["identities"] = ids;
  std::map<std::string, const FinCatPresentation::Morphism*> by_id;
  for (const auto& m : c.morphisms) by_id[m.id] = &m;
  auto implied = [&](const std::string& g, const std::string& f, const std::string& h) {
    auto gi = by_id.find(g), fi = by_id.find(f);
    if (gi == by_id.end() || fi == by_id.end()) return false;
    auto t = c.identities.find(fi->second->target);
    if (t != c.identities.end() && g == t->second && h == f) return true;
    auto s = c.identities.find(gi->second->source);
    return s != c.identities.end() && f == s->second && h == g;
  };
  Json comps = Json::array();
  for (const auto& [gf, h] : c.composites)
    if (!implied(gf.first, gf.second, h)) comps.push_back(Json{gf.first, gf.second, h});
  if (!comps.empty()) j["composites"] = comps;
  return j;
}

Json indexed_json(const IndexedMonoidalPresentation& ip) {
  Json fs = Json::object();
  for (const auto& [b, f] : ip.fibres) {
    Json fj;
    fj["category"] = fincat_json(f.category);
    Json t = Json::array();
    for (const auto& [ab, c] : f.tensor_objects) t.push_back(Json{ab.first, ab.second, c});
    fj["tensor"] = t;
    if (!f.tensor_morphisms.empty()) {
      Json tm = Json::array();
      for (const auto& [ab, c] : f.tensor_morphisms) tm.push_back(Json{ab.first, ab.second, c});
      fj["tensor_morphisms"] = tm;
    }
    fj["unit"] = f.unit;
    if (!f.associator.empty()) {
      Json a = Json::array();
      for (const auto& [abc, m] : f.associator)
        a.push_back(Json{std::get<0>(abc), std::get<1>(abc), std::get<2>(abc), m});
      fj["associator"] = a;
    }
    if (!f.left_unitor.empty()) fj["left_unitor"] = f.left_unitor;
    if (!f.right_unitor.empty()) fj["right_unitor"] = f.right_unitor;
    if (!f.braiding.empty()) {
      Json br = Json::array();
      for (const auto& [ab, m] : f.braiding) br.push_back(Json{ab.first, ab.second, m});
      fj["braiding"] = br;
    }
    fs[b] = fj;
  }
  Json out;
  out["fibres"] = fs;
  if (!ip.transitions.empty()) {
    Json ts = Json::object();
    for (const auto& [h, t] : ip.transitions) {
      Json tj;
      tj["objects"] = t.functor.objects;
      tj["morphisms"] = t.functor.morphisms;
      if (!t.tensor_comparison.empty()) {
        Json c = Json::array();
        for (const auto& [xy, m] : t.tensor_comparison) c.push_back(Json{xy.first, xy.second, m});
        tj["tensor_comparison"] = c;
      }
      if (!t.unit_comparison.empty()) tj["unit_comparison"] = t.unit_comparison;
      ts[h] = tj;
    }
    out["transitions"] = ts;
  }
  if (!ip.composition.empty()) {
    Json c = Json::array();
    for (const auto& [gfx, m] : ip.composition)
      c.push_back(Json{std::get<0>(gfx), std::get<1>(gfx), std::get<2>(gfx), m});
    out["composition"] = c;
  }
  return out;
}

}  // namespace

Presentation parse_presentation(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    std::string msg = e.what();
    if (auto k = msg.find("syntax error"); k != std::string::npos) msg = msg.substr(k);
    throw PresentationError({{line_column(text, e.byte == 0 ? 0 : e.byte - 1), msg}});
  }
  Reader r;
  Presentation p;
  if (!r.object(j, "", {"format", "name", "description", "limits", "base", "fibres", "overrides", "site", "analyses"}))
    throw PresentationError(r.issues);
  if (auto v = r.get(j, "", "format", true)) {
    p.format = r.str(*v, "/format");
    if (p.format != kFormat && v->is_string())
      throw PresentationError({{"/format", "version mismatch: expected " + std::string(kFormat) + ", got " + p.format}});
  }
  if (auto v = r.get(j, "", "name", true)) p.name = r.str(*v, "/name");
  if (auto v = r.get(j, "", "description", false)) p.description = r.str(*v, "/description");
  if (auto v = r.get(j, "", "limits", false)) p.limits = r.limits(*v, "/limits");
  if (auto v = r.get(j, "", "base", true)) p.base = r.fincat(*v, "/base");
  if (auto v = r.get(j, "", "fibres", true)) p.fibres = r.fibres(*v, "/fibres");
  if (p.fibres.indexed) p.fibres.indexed->base = p.base;
  if (auto v = r.get(j, "", "overrides", false)) p.overrides = r.overrides(*v, "/overrides");
  if (auto v = r.get(j, "", "site", false)) p.site = r.site(*v, "/site");
  if (auto v = r.get(j, "", "analyses", false)) p.analyses = r.analyses(*v, "/analyses");
  if (r.issues.empty()) r.cross_references(p);
  if (!r.issues.empty()) throw PresentationError(r.issues);
  return p;
}

Presentation load_presentation(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PresentationError({{path, "cannot read file"}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_presentation(ss.str());
}

std::string serialize_presentation(const Presentation& p) {
  Json j;
  j["format"] = p.format;
  j["name"] = p.name;
  if (!p.description.empty()) j["description"] = p.description;
  if (p.limits != LimitsSpec{}) {
    Json l;
    if (p.limits.enumeration_budget) l["enumeration_budget"] = *p.limits.enumeration_budget;
    if (p.limits.samples) l["samples"] = *p.limits.samples;
    if (p.limits.seed) l["seed"] = *p.limits.seed;
    j["limits"] = l;
  }
  j["base"] = fincat_json(p.base);
  Json f;
  f["backend"] = p.fibres.backend;
  if (!p.fibres.rings.empty()) f["rings"] = p.fibres.rings;
  if (p.fibres.field) f["field"] = *p.fibres.field;
  if (p.fibres.dimension_bound) f["dimension_bound"] = *p.fibres.dimension_bound;
  if (p.fibres.universe_bound) f["universe_bound"] = *p.fibres.universe_bound;
  if (p.fibres.monoid_bound) f["monoid_bound"] = *p.fibres.monoid_bound;
  if (p.fibres.indexed) {
    const Json ij = indexed_json(*p.fibres.indexed);
    for (const auto& [k, v] : ij.items()) f[k] = v;
  }
  j["fibres"] = f;
  if (!p.overrides.empty()) {
    Json o;
    if (!p.overrides.associator.empty()) {
      Json a = Json::array();
      for (const auto& e : p.overrides.associator)
        a.push_back(Json{{"objects", Json{e.objects[0], e.objects[1], e.objects[2]}}, {"morphism", e.morphism}});
      o["associator"] = a;
    }
    if (!p.overrides.lift.empty()) {
      Json a = Json::array();
      for (const auto& e : p.overrides.lift)
        a.push_back(Json{{"base", e.base}, {"object", e.object}, {"morphism", e.morphism}});
      o["lift"] = a;
    }
    if (!p.overrides.unit.empty()) {
      Json a = Json::array();
      for (const auto& e : p.overrides.unit) a.push_back(Json{{"base", e.base}, {"morphism", e.morphism}});
      o["unit"] = a;
    }
    j["overrides"] = o;
  }
  if (p.site) {
    const SiteSpec& s = *p.site;
    Json sj;
    if (s.base) sj["base"] = fincat_json(*s.base);
    sj["monoids"] = s.diagram.objects;
    if (!s.diagram.morphisms.empty()) sj["morphisms"] = s.diagram.morphisms;
    Json cot = Json::object();
    for (const auto& [x, fams] : s.cotopology.families) cot[x] = fams;
    sj["cotopology"] = cot;
    if (s.require_identities) sj["require_identities"] = true;
    Json t;
    if (!s.trivial.objects.empty()) t["objects"] = std::vector<std::string>(s.trivial.objects.begin(), s.trivial.objects.end());
    if (!s.trivial.modules.empty()) {
      Json ms = Json::object();
      for (const auto& [x, fam] : s.trivial.modules) {
        Json fj = Json::object();
        if (!fam.generator.empty()) fj["generator"] = fam.generator;
        if (!fam.modules.empty()) {
          Json es = Json::array();
          for (const auto& e : fam.modules) {
            Json ej{{"module", e.module}};
            if (e.rank) ej["rank"] = *e.rank;
            es.push_back(ej);
          }
          fj["modules"] = es;
        }
        ms[x] = fj;
      }
      t["modules"] = ms;
    }
    if (s.trivial.constant_rank) t["constant_rank"] = true;
    sj["trivial"] = t.is_null() ? Json::object() : t;
    j["site"] = sj;
  }
  if (p.analyses != AnalysesSpec{}) {
    Json a;
    a["commutative"] = p.analyses.commutative;
    a["adjunction_samples"] = p.analyses.adjunction_samples;
    if (!p.analyses.kzero.empty()) {
      Json ks = Json::array();
      for (const auto& r : p.analyses.kzero) {
        Json kj{{"category", r.category}, {"object", r.object}};
        if (r.sum) kj["sum"] = *r.sum;
        ks.push_back(kj);
      }
      a["kzero"] = ks;
    }
    j["analyses"] = a;
  }
  return j.dump(2) + "\n";
}

}  // namespace fibred::cli
