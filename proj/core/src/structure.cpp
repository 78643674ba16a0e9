#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "fibred/error.hpp"
#include "fibred/fincat.hpp"

namespace fibred {

// ---------------------------------------------------------------- pullback

namespace {

Code pack_pair(const Mor& a, const Mor& b) {
  Code c;
  c.push_back(a.code.size());
  c.push_back(a.over);
  c.push_back(b.over);
  c.insert(c.end(), a.code.begin(), a.code.end());
  c.insert(c.end(), b.code.begin(), b.code.end());
  return c;
}

}  // namespace

PullbackCategory::PullbackCategory(const Functor& f, const Functor& g) : f_(f), g_(g) {
  if (&f.target() != &g.target()) throw StructuralError("pullback of functors with different targets");
  std::unordered_map<Obj, std::vector<Obj>> by_image;
  for (Obj d : g.source().objects()) by_image[g.map_object(d)].push_back(d);
  for (Obj c : f.source().objects()) {
    auto it = by_image.find(f.map_object(c));
    if (it == by_image.end()) continue;
    for (Obj d : it->second) {
      index_[{c, d}] = pairs_.size();
      handles_.push_back(pairs_.size());
      pairs_.emplace_back(c, d);
    }
  }
  left_ = std::make_unique<LambdaFunctor>(
      *this, f.source(), [this](Obj x) { return pairs_.at(x).first; },
      [this](const Mor& m) { return components(m).first; });
  right_ = std::make_unique<LambdaFunctor>(
      *this, g.source(), [this](Obj x) { return pairs_.at(x).second; },
      [this](const Mor& m) { return components(m).second; });
}

std::pair<Mor, Mor> PullbackCategory::components(const Mor& m) const {
  const auto [c, d] = pairs_.at(m.src);
  const auto [c2, d2] = pairs_.at(m.tgt);
  const std::size_t na = m.code.at(0);
  Mor a{c, c2, static_cast<std::uint32_t>(m.code.at(1)), Code(m.code.begin() + 3, m.code.begin() + 3 + na)};
  Mor b{d, d2, static_cast<std::uint32_t>(m.code.at(2)), Code(m.code.begin() + 3 + na, m.code.end())};
  return {a, b};
}

std::optional<Obj> PullbackCategory::pair_object(Obj c, Obj d) const {
  auto it = index_.find({c, d});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Mor PullbackCategory::pair(const Mor& a, const Mor& b) const {
  auto s = pair_object(a.src, b.src), t = pair_object(a.tgt, b.tgt);
  if (!s || !t) throw StructuralError("pair of morphisms leaves the pullback universe");
  return Mor{*s, *t, 0, pack_pair(a, b)};
}

std::string PullbackCategory::object_name(Obj x) const {
  const auto [c, d] = pairs_.at(x);
  return "(" + f_.source().object_name(c) + "," + g_.source().object_name(d) + ")";
}

std::string PullbackCategory::morphism_name(const Mor& m) const {
  const auto [a, b] = components(m);
  return "(" + f_.source().morphism_name(a) + "," + g_.source().morphism_name(b) + ")";
}

Mor PullbackCategory::identity(Obj x) const {
  const auto [c, d] = pairs_.at(x);
  return Mor{x, x, 0, pack_pair(f_.source().identity(c), g_.source().identity(d))};
}

Mor PullbackCategory::compose(const Mor& g, const Mor& f) const {
  if (f.tgt != g.src) throw StructuralError("pullback compose: not composable");
  const auto [ga, gb] = components(g);
  const auto [fa, fb] = components(f);
  return Mor{f.src, g.tgt, 0, pack_pair(f_.source().compose(ga, fa), g_.source().compose(gb, fb))};
}

void PullbackCategory::for_each_hom(Obj x, Obj y, const MorVisitor& visit) const {
  const auto [c, d] = pairs_.at(x);
  const auto [c2, d2] = pairs_.at(y);
  std::unordered_map<Mor, std::vector<Mor>, MorHash> right;
  g_.source().for_each_hom(d, d2, [&](const Mor& b) {
    right[g_.map_morphism(b)].push_back(b);
    return true;
  });
  bool go = true;
  f_.source().for_each_hom(c, c2, [&](const Mor& a) {
    auto it = right.find(f_.map_morphism(a));
    if (it == right.end()) return true;
    for (const auto& b : it->second)
      if (!(go = visit(Mor{x, y, 0, pack_pair(a, b)}))) return false;
    return true;
  });
}

// ---------------------------------------------------------------- isomorphisms

std::vector<std::pair<Mor, Mor>> find_isomorphisms(const Category& c, Obj x, Obj y) {
  std::vector<std::pair<Mor, Mor>> out;
  std::vector<Mor> back;
  c.for_each_hom(y, x, [&](const Mor& g) {
    back.push_back(g);
    return true;
  });
  const Mor idx = c.identity(x), idy = c.identity(y);
  c.for_each_hom(x, y, [&](const Mor& f) {
    for (const auto& g : back)
      if (c.compose(g, f) == idx && c.compose(f, g) == idy) {
        out.emplace_back(f, g);
        break;
      }
    return true;
  });
  return out;
}

std::optional<std::pair<Mor, Mor>> first_isomorphism(const Category& c, Obj x, Obj y) {
  if (x == y) return std::make_pair(c.identity(x), c.identity(x));
  auto kx = c.canonical_key(x), ky = c.canonical_key(y);
  if (kx && ky && *kx != *ky) return std::nullopt;
  if (!c.may_be_isomorphic(x, y)) return std::nullopt;
  if (c.hom_size(x, x) != c.hom_size(y, y)) return std::nullopt;
  if (c.hom_size(x, y) == 0 || c.hom_size(y, x) == 0) return std::nullopt;

  if (const LinearHoms* lin = c.linear()) {
    // invertible elements are dense in a hom component that contains any
    auto rng = make_rng(0x15c0, c.object_name(x) + "|" + c.object_name(y));
    for (std::uint32_t t : lin->components(x, y)) {
      for (int k = 0; k < 64; ++k) {
        auto f = c.sample_hom_over(x, y, t, rng);
        if (!f) break;
        if (auto g = c.inverse(*f)) return std::make_pair(*f, *g);
      }
    }
    if (kx && ky) {
      // keys agree, so an isomorphism exists; finish by enumeration
    } else if (c.hom_size(x, y) > (std::uint64_t{1} << 22)) {
      throw TruncationError("isomorphism search between " + c.object_name(x) + " and " + c.object_name(y) +
                            " exceeds the enumeration budget");
    }
  }
  std::optional<std::pair<Mor, Mor>> out;
  c.for_each_hom(x, y, [&](const Mor& f) {
    if (auto g = c.inverse(f)) {
      out = std::make_pair(f, *g);
      return false;
    }
    return true;
  });
  return out;
}

// ---------------------------------------------------------------- subcategories

FullSubcategory::FullSubcategory(const Category& parent, std::vector<Obj> objects)
    : parent_(parent), objects_(std::move(objects)) {}

bool FullSubcategory::in_universe(Obj x) const {
  return std::find(objects_.begin(), objects_.end(), x) != objects_.end();
}

namespace {

/// Linear structure of a single component of the total hom-sets.
class ComponentLinear final : public LinearHoms {
 public:
  ComponentLinear(const LinearHoms& inner, std::function<std::uint32_t(Obj, Obj)> tag)
      : inner_(inner), tag_(std::move(tag)) {}
  const std::vector<std::uint32_t>& primes() const override { return inner_.primes(); }
  std::vector<std::uint32_t> components(Obj x, Obj y) const override {
    const auto t = tag_(x, y);
    auto all = inner_.components(x, y);
    if (std::find(all.begin(), all.end(), t) == all.end()) return {};
    return {t};
  }
  HomBasis basis(Obj x, Obj y, std::uint32_t over) const override { return inner_.basis(x, y, over); }
  Coords coordinates(const Mor& m) const override { return inner_.coordinates(m); }
  Mor from_coordinates(Obj x, Obj y, std::uint32_t over, const Coords& c) const override {
    return inner_.from_coordinates(x, y, over, c);
  }

 private:
  const LinearHoms& inner_;
  std::function<std::uint32_t(Obj, Obj)> tag_;
};

}  // namespace

FibreCategory::FibreCategory(const Functor& p, Obj b) : p_(p), total_(p.source()), b_(b) {
  if (!p.target().in_universe(b)) throw StructuralError("fibre requested at an object outside the base");
  id_b_ = p.target().identity(b);
  projection_ = dynamic_cast<const Projection*>(&p);
  for (Obj x : total_.objects())
    if (p.map_object(x) == b) objects_.push_back(x);
  inclusion_ = std::make_unique<LambdaFunctor>(
      *this, total_, [](Obj x) { return x; }, [](const Mor& m) { return m; });
  if (const LinearHoms* lin = total_.linear(); lin && projection_)
    linear_ = std::make_unique<ComponentLinear>(*lin,
                                                [this](Obj x, Obj y) { return projection_->tag_of(x, y, id_b_); });
}

bool FibreCategory::in_universe(Obj x) const { return total_.in_universe(x) && p_.map_object(x) == b_; }

void FibreCategory::for_each_hom(Obj x, Obj y, const MorVisitor& visit) const {
  if (projection_) {
    total_.for_each_hom_over(x, y, projection_->tag_of(x, y, id_b_), visit);
    return;
  }
  total_.for_each_hom(x, y, [&](const Mor& m) { return !(p_.map_morphism(m) == id_b_) || visit(m); });
}

std::uint64_t FibreCategory::hom_size(Obj x, Obj y) const {
  if (projection_) return total_.hom_size_over(x, y, projection_->tag_of(x, y, id_b_));
  return Category::hom_size(x, y);
}

std::optional<Mor> FibreCategory::sample_hom(Obj x, Obj y, Rng& rng) const {
  if (projection_) return total_.sample_hom_over(x, y, projection_->tag_of(x, y, id_b_), rng);
  return Category::sample_hom(x, y, rng);
}

std::optional<Mor> FibreCategory::find_morphism(Obj x, Obj y, std::string_view name) const {
  auto m = total_.find_morphism(x, y, name);
  if (!m || !(p_.map_morphism(*m) == id_b_)) return std::nullopt;
  return m;
}

// ---------------------------------------------------------------- materialize / equality

FinCatPresentation materialize(const Category& c, std::size_t max_morphisms) {
  FinCatPresentation p;
  std::map<std::string, Obj> by_name;
  for (Obj x : c.objects()) by_name[c.object_name(x)] = x;
  std::vector<Obj> objs;
  for (const auto& [n, x] : by_name) {
    p.objects.push_back(n);
    objs.push_back(x);
  }
  std::unordered_map<Mor, std::string, MorHash> ids;
  std::map<std::string, std::size_t> seen;
  std::vector<std::vector<std::vector<Mor>>> homs(objs.size(), std::vector<std::vector<Mor>>(objs.size()));
  std::size_t count = 0;
  for (std::size_t i = 0; i < objs.size(); ++i)
    for (std::size_t j = 0; j < objs.size(); ++j)
      c.for_each_hom(objs[i], objs[j], [&](const Mor& m) {
        if (++count > max_morphisms)
          throw TruncationError("category has more than " + std::to_string(max_morphisms) + " morphisms");
        homs[i][j].push_back(m);
        return true;
      });
  for (std::size_t i = 0; i < objs.size(); ++i)
    for (std::size_t j = 0; j < objs.size(); ++j)
      for (const auto& m : homs[i][j]) ++seen[c.morphism_name(m)];
  for (std::size_t i = 0; i < objs.size(); ++i)
    for (std::size_t j = 0; j < objs.size(); ++j)
      for (const auto& m : homs[i][j]) {
        std::string id = c.morphism_name(m);
        if (seen[id] > 1) id += "@" + p.objects[i] + "->" + p.objects[j];
        ids[m] = id;
        p.morphisms.push_back({id, p.objects[i], p.objects[j]});
      }
  for (std::size_t i = 0; i < objs.size(); ++i) p.identities[p.objects[i]] = ids.at(c.identity(objs[i]));
  for (std::size_t i = 0; i < objs.size(); ++i)
    for (std::size_t j = 0; j < objs.size(); ++j)
      for (std::size_t k = 0; k < objs.size(); ++k)
        for (const auto& f : homs[i][j])
          for (const auto& g : homs[j][k]) {
            auto it = ids.find(c.compose(g, f));
            if (it == ids.end()) throw StructuralError("composite outside the enumerated hom-set");
            p.composites[{ids.at(g), ids.at(f)}] = it->second;
          }
  std::sort(p.morphisms.begin(), p.morphisms.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return p;
}

ValidationReport check_equal(const Category& a, const Category& b, const Limits& limits) {
  ValidationReport r;
  const char* clause = "equality";
  std::map<std::string, Obj> oa, ob;
  for (Obj x : a.objects()) oa[a.object_name(x)] = x;
  for (Obj x : b.objects()) ob[b.object_name(x)] = x;
  for (const auto& [n, x] : oa)
    if (!ob.count(n)) r.add(Severity::violation, clause, "object missing on the right", {n});
  for (const auto& [n, x] : ob)
    if (!oa.count(n)) r.add(Severity::violation, clause, "object missing on the left", {n});

  std::vector<std::pair<Obj, Obj>> common;
  std::vector<std::string> names;
  for (const auto& [n, x] : oa)
    if (auto it = ob.find(n); it != ob.end()) {
      common.emplace_back(x, it->second);
      names.push_back(n);
    }
  const std::size_t n = common.size();

  // translate a morphism of a into b by identifier
  auto to_b = [&](const Mor& m, std::size_t i, std::size_t j) {
    return b.find_morphism(common[i].second, common[j].second, a.morphism_name(m));
  };

  std::uint64_t total = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto sa = a.hom_size(common[i].first, common[j].first);
      const auto sb = b.hom_size(common[i].second, common[j].second);
      total = sat_add(total, sa);
      if (sa != sb)
        r.add(Severity::violation, clause,
              "hom-set sizes differ: " + std::to_string(sa) + " vs " + std::to_string(sb), {names[i], names[j]});
    }
  if (!r.ok()) return r;

  const LinearHoms* la = a.linear();
  const LinearHoms* lb = b.linear();
  // generators of each hom-set: a basis when linear, everything otherwise
  std::vector<std::vector<std::vector<Mor>>> gens(n, std::vector<std::vector<Mor>>(n));
  CheckMode mode = CheckMode::exhaustive;
  if (la && lb) {
    mode = CheckMode::basis;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::uint32_t t : la->components(common[i].first, common[j].first)) {
          const HomBasis hb = la->basis(common[i].first, common[j].first, t);
          for (std::size_t q = 0; q < hb.vectors.size(); ++q)
            for (const auto& v : hb.vectors[q]) {
              Coords cs(hb.ambient.size());
              for (std::size_t k = 0; k < cs.size(); ++k) cs[k].assign(hb.ambient[k], 0);
              cs[q] = v;
              gens[i][j].push_back(la->from_coordinates(common[i].first, common[j].first, t, cs));
            }
          gens[i][j].push_back(la->zero(common[i].first, common[j].first, t));
        }
  } else if (total <= limits.enumeration_budget) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        a.for_each_hom(common[i].first, common[j].first, [&](const Mor& m) {
          gens[i][j].push_back(m);
          return true;
        });
  } else {
    mode = CheckMode::sampled;
    auto rng = make_rng(limits.seed, "equality");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < std::max<std::size_t>(1, limits.samples / std::max<std::size_t>(1, n * n)); ++k)
          if (auto m = a.sample_hom(common[i].first, common[j].first, rng)) gens[i][j].push_back(*m);
  }

  std::size_t cases = 0;
  std::vector<std::vector<std::vector<std::optional<Mor>>>> image(n, std::vector<std::vector<std::optional<Mor>>>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (const auto& m : gens[i][j]) {
        ++cases;
        auto mb = to_b(m, i, j);
        if (!mb) r.add(Severity::violation, clause, "morphism missing on the right", {a.morphism_name(m)});
        image[i][j].push_back(mb);
      }
  // identities and composition through the identifier bijection
  for (std::size_t i = 0; i < n; ++i)
    if (a.morphism_name(a.identity(common[i].first)) != b.morphism_name(b.identity(common[i].second)))
      r.add(Severity::violation, clause, "identities differ", {names[i]});
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) pairs = sat_add(pairs, sat_mul(gens[i][j].size(), gens[j][k].size()));
  if (pairs <= limits.enumeration_budget) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          for (std::size_t u = 0; u < gens[i][j].size(); ++u)
            for (std::size_t v = 0; v < gens[j][k].size(); ++v) {
              const auto& fb = image[i][j][u];
              const auto& gb = image[j][k][v];
              if (!fb || !gb) continue;
              const Mor ga = a.compose(gens[j][k][v], gens[i][j][u]);
              const Mor gbm = b.compose(*gb, *fb);
              if (a.morphism_name(ga) != b.morphism_name(gbm))
                r.add(Severity::violation, clause, "composites differ",
                      {a.morphism_name(gens[j][k][v]), a.morphism_name(gens[i][j][u])});
            }
  } else {
    mode = CheckMode::sampled;
  }
  r.note(clause, mode, cases);
  return r;
}

std::optional<FunctorPresentation> find_category_isomorphism(const FinCat& a, const FinCat& b) {
  const std::size_t n = a.num_objects(), m = a.num_morphisms();
  if (n != b.num_objects() || m != b.num_morphisms()) return std::nullopt;
  std::vector<std::size_t> obj(n, SIZE_MAX), used_obj(n, 0), mor(m, SIZE_MAX);
  std::vector<char> used_mor(m, 0);

  // morphisms of a grouped by endpoint pair, in order
  std::function<bool(std::size_t)> assign_objects;
  std::function<bool(std::size_t)> assign_morphisms;

  auto consistent = [&](std::size_t f) {
    // every composite among assigned morphisms involving f maps correctly
    for (std::size_t g = 0; g < m; ++g) {
      if (mor[g] == SIZE_MAX) continue;
      for (auto [x, y] : {std::pair{g, f}, std::pair{f, g}}) {
        if (a.target_of(y) != a.source_of(x)) continue;
        auto h = a.composite(x, y);
        if (!h || mor[*h] == SIZE_MAX) continue;
        auto hb = b.composite(mor[x], mor[y]);
        if (!hb || *hb != mor[*h]) return false;
      }
    }
    for (std::size_t g = 0; g < m; ++g) {
      if (mor[g] == SIZE_MAX) continue;
      for (std::size_t h = 0; h < m; ++h) {
        if (mor[h] == SIZE_MAX || a.target_of(h) != a.source_of(g)) continue;
        auto gh = a.composite(g, h);
        if (gh && *gh == f) {
          auto bb = b.composite(mor[g], mor[h]);
          if (!bb || *bb != mor[f]) return false;
        }
      }
    }
    return true;
  };

  assign_morphisms = [&](std::size_t f) -> bool {
    if (f == m) return true;
    if (mor[f] != SIZE_MAX) return assign_morphisms(f + 1);
    for (std::size_t c : b.hom_list(obj[a.source_of(f)], obj[a.target_of(f)])) {
      if (used_mor[c]) continue;
      mor[f] = c;
      used_mor[c] = 1;
      if (consistent(f) && assign_morphisms(f + 1)) return true;
      used_mor[c] = 0;
      mor[f] = SIZE_MAX;
    }
    return false;
  };

  assign_objects = [&](std::size_t x) -> bool {
    if (x == n) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (a.hom_list(i, j).size() != b.hom_list(obj[i], obj[j]).size()) return false;
      std::fill(mor.begin(), mor.end(), SIZE_MAX);
      std::fill(used_mor.begin(), used_mor.end(), 0);
      for (std::size_t i = 0; i < n; ++i) {
        mor[a.identity_of(i)] = b.identity_of(obj[i]);
        used_mor[b.identity_of(obj[i])] = 1;
      }
      return assign_morphisms(0);
    }
    for (std::size_t y = 0; y < n; ++y) {
      if (used_obj[y] || a.hom_list(x, x).size() != b.hom_list(y, y).size()) continue;
      obj[x] = y;
      used_obj[y] = 1;
      if (assign_objects(x + 1)) return true;
      used_obj[y] = 0;
    }
    return false;
  };

  if (!assign_objects(0)) return std::nullopt;
  FunctorPresentation fp;
  for (std::size_t x = 0; x < n; ++x) fp.objects[a.object_id(x)] = b.object_id(obj[x]);
  for (std::size_t f = 0; f < m; ++f) fp.morphisms[a.morphism_id(f)] = b.morphism_id(mor[f]);
  return fp;
}

}  // namespace fibred
