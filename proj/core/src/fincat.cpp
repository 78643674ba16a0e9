#include "fibred/fincat.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "fibred/error.hpp"

namespace fibred {

FinCat FinCat::from(const FinCatPresentation& p) {
  FinCat c;
  c.object_ids_ = p.objects;
  std::sort(c.object_ids_.begin(), c.object_ids_.end());
  if (std::adjacent_find(c.object_ids_.begin(), c.object_ids_.end()) != c.object_ids_.end())
    throw StructuralError("duplicate object identifier");
  for (std::size_t i = 0; i < c.object_ids_.size(); ++i) c.obj_lookup_[c.object_ids_[i]] = i;

  std::vector<const FinCatPresentation::Morphism*> ms;
  for (const auto& m : p.morphisms) ms.push_back(&m);
  std::sort(ms.begin(), ms.end(), [](auto* a, auto* b) { return a->id < b->id; });
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (i && ms[i]->id == ms[i - 1]->id) throw StructuralError("duplicate morphism identifier '" + ms[i]->id + "'");
    auto s = c.obj_lookup_.find(ms[i]->source), t = c.obj_lookup_.find(ms[i]->target);
    if (s == c.obj_lookup_.end() || t == c.obj_lookup_.end())
      throw StructuralError("morphism '" + ms[i]->id + "' has a dangling endpoint");
    c.mor_ids_.push_back(ms[i]->id);
    c.src_.push_back(s->second);
    c.tgt_.push_back(t->second);
    c.mor_lookup_[ms[i]->id] = i;
  }

  const std::size_t n = c.object_ids_.size(), m = c.mor_ids_.size();
  c.id_.assign(n, 0);
  for (std::size_t x = 0; x < n; ++x) {
    auto it = p.identities.find(c.object_ids_[x]);
    if (it == p.identities.end()) throw StructuralError("object '" + c.object_ids_[x] + "' has no identity");
    auto mi = c.mor_lookup_.find(it->second);
    if (mi == c.mor_lookup_.end()) throw StructuralError("identity of '" + c.object_ids_[x] + "' is dangling");
    if (c.src_[mi->second] != x || c.tgt_[mi->second] != x)
      throw StructuralError("identity of '" + c.object_ids_[x] + "' is not an endomorphism");
    c.id_[x] = mi->second;
  }

  c.table_.assign(m * m, kNone);
  for (const auto& [gf, h] : p.composites) {
    auto g = c.mor_lookup_.find(gf.first), f = c.mor_lookup_.find(gf.second), r = c.mor_lookup_.find(h);
    if (g == c.mor_lookup_.end() || f == c.mor_lookup_.end() || r == c.mor_lookup_.end())
      throw StructuralError("composite entry (" + gf.first + "," + gf.second + ") is dangling");
    c.table_[g->second * m + f->second] = static_cast<std::int32_t>(r->second);
  }

  c.homs_.assign(n * n, {});
  for (std::size_t i = 0; i < m; ++i) c.homs_[c.src_[i] * n + c.tgt_[i]].push_back(i);
  c.handles_.resize(n);
  std::iota(c.handles_.begin(), c.handles_.end(), Obj{0});
  return c;
}

std::optional<std::size_t> FinCat::composite(std::size_t g, std::size_t f) const {
  const auto r = table_.at(g * mor_ids_.size() + f);
  if (r == kNone) return std::nullopt;
  return static_cast<std::size_t>(r);
}

const std::vector<std::size_t>& FinCat::hom_list(std::size_t x, std::size_t y) const {
  return homs_.at(x * object_ids_.size() + y);
}

std::optional<std::size_t> FinCat::object_index(std::string_view id) const {
  auto it = obj_lookup_.find(std::string(id));
  if (it == obj_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> FinCat::morphism_index(std::string_view id) const {
  auto it = mor_lookup_.find(std::string(id));
  if (it == mor_lookup_.end()) return std::nullopt;
  return it->second;
}

Mor FinCat::mor(std::size_t i) const {
  return Mor{src_.at(i), tgt_.at(i), tags_.empty() ? 0u : tags_[i], Code{i}};
}

void FinCat::set_tags(std::vector<std::uint32_t> tags) {
  if (!tags.empty() && tags.size() != mor_ids_.size()) throw StructuralError("tag vector has wrong length");
  tags_ = std::move(tags);
}

FinCatPresentation FinCat::presentation() const {
  FinCatPresentation p;
  p.objects = object_ids_;
  for (std::size_t i = 0; i < mor_ids_.size(); ++i)
    p.morphisms.push_back({mor_ids_[i], object_ids_[src_[i]], object_ids_[tgt_[i]]});
  for (std::size_t x = 0; x < object_ids_.size(); ++x) p.identities[object_ids_[x]] = mor_ids_[id_[x]];
  const std::size_t m = mor_ids_.size();
  for (std::size_t g = 0; g < m; ++g)
    for (std::size_t f = 0; f < m; ++f)
      if (table_[g * m + f] != kNone) p.composites[{mor_ids_[g], mor_ids_[f]}] = mor_ids_[table_[g * m + f]];
  return p;
}

Mor FinCat::compose(const Mor& g, const Mor& f) const {
  if (f.tgt != g.src)
    throw StructuralError("compose(" + mor_ids_.at(index(g)) + "," + mor_ids_.at(index(f)) + "): not composable");
  auto r = composite(index(g), index(f));
  if (!r) throw StructuralError("compose(" + mor_ids_[index(g)] + "," + mor_ids_[index(f)] + ") is missing");
  return mor(*r);
}

void FinCat::for_each_hom(Obj x, Obj y, const MorVisitor& visit) const {
  for (std::size_t i : hom_list(x, y))
    if (!visit(mor(i))) return;
}

std::optional<Obj> FinCat::find_object(std::string_view name) const {
  auto i = object_index(name);
  if (!i) return std::nullopt;
  return *i;
}

std::optional<Mor> FinCat::find_morphism(Obj x, Obj y, std::string_view name) const {
  auto i = morphism_index(name);
  if (!i || src_[*i] != x || tgt_[*i] != y) return std::nullopt;
  return mor(*i);
}

FinCat FinCat::terminal() {
  FinCatPresentation p;
  p.objects = {"*"};
  p.morphisms = {{"id_*", "*", "*"}};
  p.identities["*"] = "id_*";
  p.composites[{"id_*", "id_*"}] = "id_*";
  return from(p);
}

FinCat FinCat::discrete(std::size_t n) {
  FinCatPresentation p;
  for (std::size_t i = 0; i < n; ++i) {
    const auto o = "o" + std::to_string(i), id = "id_o" + std::to_string(i);
    p.objects.push_back(o);
    p.morphisms.push_back({id, o, o});
    p.identities[o] = id;
    p.composites[{id, id}] = id;
  }
  return from(p);
}

FinCat FinCat::from_monoid(const std::vector<std::vector<std::size_t>>& table) {
  FinCatPresentation p;
  p.objects = {"*"};
  auto name = [](std::size_t i) { return "m" + std::to_string(i); };
  for (std::size_t i = 0; i < table.size(); ++i) p.morphisms.push_back({name(i), "*", "*"});
  p.identities["*"] = name(0);
  for (std::size_t g = 0; g < table.size(); ++g)
    for (std::size_t f = 0; f < table.size(); ++f) p.composites[{name(g), name(f)}] = name(table[g][f]);
  return from(p);
}

ExplicitFunctor::ExplicitFunctor(const FinCat& source, const FinCat& target, const FunctorPresentation& p)
    : src_(source), tgt_(target) {
  obj_.resize(source.num_objects());
  for (std::size_t x = 0; x < source.num_objects(); ++x) {
    auto it = p.objects.find(source.object_id(x));
    if (it == p.objects.end()) throw StructuralError("functor object map misses '" + source.object_id(x) + "'");
    auto t = target.object_index(it->second);
    if (!t) throw StructuralError("functor maps '" + it->first + "' to unknown object '" + it->second + "'");
    obj_[x] = *t;
  }
  mor_.resize(source.num_morphisms());
  for (std::size_t m = 0; m < source.num_morphisms(); ++m) {
    auto it = p.morphisms.find(source.morphism_id(m));
    if (it == p.morphisms.end())
      throw StructuralError("functor morphism map misses '" + source.morphism_id(m) + "'");
    auto t = target.morphism_index(it->second);
    if (!t) throw StructuralError("functor maps '" + it->first + "' to unknown morphism '" + it->second + "'");
    mor_[m] = *t;
  }
}

}  // namespace fibred
