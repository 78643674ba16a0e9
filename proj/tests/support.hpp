#pragma once

#include <algorithm>
#include <boost/pending/disjoint_sets.hpp>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "fibred/algebra.hpp"
#include "fibred/backends.hpp"
#include "fibred/fincat.hpp"

namespace fibred::testing {

inline std::string corpus_path(const std::string& name) { return std::string(FIBRED_CORPUS_DIR) + "/" + name + ".json"; }

/// Objects with identities "id_X" plus the given morphisms; only unit composites.
inline FinCatPresentation arrows(const std::vector<std::string>& objects,
                                 const std::vector<FinCatPresentation::Morphism>& extra) {
  FinCatPresentation p;
  p.objects = objects;
  for (const auto& o : objects) {
    p.morphisms.push_back({"id_" + o, o, o});
    p.identities[o] = "id_" + o;
  }
  for (const auto& m : extra) p.morphisms.push_back(m);
  for (const auto& m : p.morphisms) {
    p.composites[{p.identities[m.target], m.id}] = m.id;
    p.composites[{m.id, p.identities[m.source]}] = m.id;
  }
  return p;
}

inline FinCatPresentation z6_base() { return arrows({"Z6", "Z2", "Z3"}, {{"q2", "Z6", "Z2"}, {"q3", "Z6", "Z3"}}); }

/// A fibration with its monoid and module categories, kept at a stable address.
struct World {
  FinCat base;
  std::unique_ptr<MonoidalOpfibration> fibration;
  std::unique_ptr<MonoidCategory> mon;
  std::unique_ptr<ModuleCategory> mod;
  Limits limits;
};

inline std::unique_ptr<World> finset_world(bool commutative = false) {
  auto w = std::make_unique<World>();
  w->base = FinCat::terminal();
  w->fibration = make_finset_opfibration(w->base, {});
  w->mon = std::make_unique<MonoidCategory>(*w->fibration, commutative, w->limits);
  w->mod = std::make_unique<ModuleCategory>(*w->mon, w->limits);
  return w;
}

inline std::unique_ptr<World> z6_world(bool commutative = false, std::uint64_t bound = 36) {
  auto w = std::make_unique<World>();
  w->base = FinCat::from(z6_base());
  ModuleOptions o;
  for (Obj b : w->base.objects()) {
    const auto n = w->base.object_name(b);
    o.rings.push_back(n == "Z6" ? 6 : n == "Z2" ? 2 : 3);
  }
  o.bound = bound;
  w->fibration = make_module_opfibration(w->base, o);
  w->mon = std::make_unique<MonoidCategory>(*w->fibration, commutative, w->limits);
  w->mod = std::make_unique<ModuleCategory>(*w->mon, w->limits);
  return w;
}

/// The function table of a finite-set morphism named "h[f(0),f(1),...]".
inline std::vector<std::size_t> function_of(const std::string& name) {
  std::vector<std::size_t> out;
  const auto open = name.rfind('[');
  std::size_t i = open + 1;
  while (i < name.size() && name[i] != ']') {
    std::size_t j = i;
    while (name[j] != ',' && name[j] != ']') ++j;
    out.push_back(std::stoul(name.substr(i, j - i)));
    i = name[j] == ',' ? j + 1 : j;
  }
  return out;
}

/// M⊗_R S for finite sets as the orbit quotient of M×S by (m·r, s) ~ (m, φ(r)·s),
/// computed with a disjoint-set forest and compared with the quotient map of the
/// extension, element by element.
inline bool extension_matches_orbits(const ModuleCategory& mod, Obj module, const Mor& phi, std::string* why) {
  const auto& m = mod.fibration();
  const Category& E = m.total();
  const MonoidCategory& mon = mod.monoids();
  const ModuleObject& a = mod.module(module);
  const MonoidObject& s = mon.monoid(phi.tgt);
  const auto kappa = function_of(E.morphism_name(a.kappa));
  const auto f = function_of(E.morphism_name(mon.underlying(phi)));
  const auto mu = function_of(E.morphism_name(s.mu));
  const auto size_of = [&](Obj x) { return std::stoul(E.object_name(x).substr(E.object_name(x).find(':') + 1)); };
  const std::size_t nr = f.size(), ns = size_of(s.carrier), nm = size_of(a.carrier);
  std::vector<std::size_t> rank(nm * ns), parent(nm * ns);
  boost::disjoint_sets<std::size_t*, std::size_t*> ds(rank.data(), parent.data());
  for (std::size_t i = 0; i < nm * ns; ++i) ds.make_set(i);
  for (std::size_t x = 0; x < nm; ++x)
    for (std::size_t y = 0; y < nr; ++y)
      for (std::size_t z = 0; z < ns; ++z) ds.union_set(kappa[x * nr + y] * ns + z, x * ns + mu[f[y] * ns + z]);

  const Extension ext = extension_of_scalars(mod, module, phi);
  const auto q = function_of(E.morphism_name(ext.quotient));
  if (q.size() != nm * ns) {
    if (why) *why = "quotient has domain " + std::to_string(q.size()) + ", expected " + std::to_string(nm * ns);
    return false;
  }
  for (std::size_t i = 0; i < q.size(); ++i)
    for (std::size_t j = i + 1; j < q.size(); ++j)
      if ((q[i] == q[j]) != (ds.find_set(i) == ds.find_set(j))) {
        if (why) *why = "elements " + std::to_string(i) + " and " + std::to_string(j) + " disagree";
        return false;
      }
  if (q.empty()) return true;
  std::vector<bool> hit(*std::max_element(q.begin(), q.end()) + 1, false);
  for (auto v : q) hit[v] = true;
  if (std::find(hit.begin(), hit.end(), false) != hit.end()) {
    if (why) *why = "quotient is not surjective";
    return false;
  }
  return true;
}

/// Z/2^a ⊕ Z/3^b is a free Z/6-module of rank k iff all its invariant factors are 6.
inline std::optional<long> free_rank_over_z6(long a, long b) {
  std::vector<long> factors;
  for (long i = 0; i < std::max(a, b); ++i) factors.push_back((i < a ? 2 : 1) * (i < b ? 3 : 1));
  for (long d : factors)
    if (d != 6) return std::nullopt;
  return static_cast<long>(factors.size());
}

/// (a, b) from a Z/6 module named "...Z6:a,b...".
inline std::pair<long, long> z6_dimensions(const std::string& carrier) {
  const auto p = carrier.find("Z6:");
  const auto comma = carrier.find(',', p);
  return {std::stol(carrier.substr(p + 3, comma - p - 3)), std::stol(carrier.substr(comma + 1))};
}

}  // namespace fibred::testing
