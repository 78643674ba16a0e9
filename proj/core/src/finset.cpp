#include <algorithm>
#include <charconv>
#include <numeric>

#include "fibred/backends.hpp"
#include "fibred/error.hpp"

namespace fibred {

namespace {

using Values = std::vector<std::uint32_t>;

Obj make_obj(std::size_t b, std::uint32_t n) { return (Obj{b} << 32) | n; }
std::size_t base_index(Obj x) { return static_cast<std::size_t>(x >> 32); }
std::uint32_t size_of(Obj x) { return static_cast<std::uint32_t>(x & 0xffffffffu); }

std::uint64_t ipow(std::uint64_t b, std::uint64_t e) {
  std::uint64_t r = 1;
  while (e--) r = sat_mul(r, b);
  return r;
}

/// True iff the base has no isomorphism between distinct objects.
bool skeletal(const FinCat& base) {
  for (Obj a : base.objects())
    for (Obj b : base.objects())
      if (a < b && first_isomorphism(base, a, b)) return false;
  return true;
}

class FinsetTotal final : public Category {
 public:
  FinsetTotal(const FinCat& base, const FinsetOptions& o) : base_(base), o_(o), skeletal_(skeletal(base)) {
    for (Obj b : base.objects())
      for (std::uint32_t n = 0; n <= o.bound; ++n) objects_.push_back(make_obj(b, n));
  }

  Mor make(Obj x, Obj y, std::size_t h, const Values& v) const {
    BitWriter w;
    const unsigned bits = bits_for(size_of(y));
    for (auto a : v) w.put(a, bits);
    Mor m{x, y, static_cast<std::uint32_t>(h), {}};
    m.code = std::move(w).finish();
    return m;
  }
  Values values(const Mor& m) const {
    BitReader r(m.code);
    const unsigned bits = bits_for(size_of(m.tgt));
    Values v(size_of(m.src));
    for (auto& a : v) a = static_cast<std::uint32_t>(r.get(bits));
    return v;
  }
  void check(Obj x) const {
    if (base_index(x) >= base_.num_objects()) throw StructuralError("not an object over the base");
    if (size_of(x) > o_.cap) throw TruncationError("finite set larger than the construction cap");
  }

  const std::vector<Obj>& objects() const override { return objects_; }
  bool in_universe(Obj x) const override { return base_index(x) < base_.num_objects() && size_of(x) <= o_.bound; }
  std::string object_name(Obj x) const override {
    return base_.object_id(base_index(x)) + ":" + std::to_string(size_of(x));
  }
  std::string morphism_name(const Mor& m) const override {
    std::string s = base_.morphism_id(m.over) + "[";
    const auto v = values(m);
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + "]";
  }
  Mor identity(Obj x) const override {
    Values v(size_of(x));
    std::iota(v.begin(), v.end(), 0u);
    return make(x, x, base_.identity_of(base_index(x)), v);
  }
  Mor compose(const Mor& g, const Mor& f) const override {
    if (f.tgt != g.src) throw StructuralError("composing non-composable functions");
    const auto h = base_.composite(g.over, f.over);
    if (!h) throw StructuralError("base composite missing");
    const auto a = values(f), b = values(g);
    Values c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = b[a[i]];
    return make(f.src, g.tgt, *h, c);
  }
  void for_each_hom(Obj x, Obj y, const MorVisitor& visit) const override {
    bool go = true;
    for (std::size_t h : base_.hom_list(base_index(x), base_index(y))) {
      if (!go) return;
      for_each_hom_over(x, y, static_cast<std::uint32_t>(h), [&](const Mor& m) { return go = visit(m); });
    }
  }
  void for_each_hom_over(Obj x, Obj y, std::uint32_t over, const MorVisitor& visit) const override {
    if (base_.source_of(over) != base_index(x) || base_.target_of(over) != base_index(y)) return;
    const std::uint32_t n = size_of(x), m = size_of(y);
    if (m == 0 && n > 0) return;
    Values v(n, 0);
    while (true) {
      if (!visit(make(x, y, over, v))) return;
      std::size_t i = 0;
      while (i < n && ++v[i] == m) v[i++] = 0;
      if (i == n) return;
    }
  }
  std::uint64_t hom_size(Obj x, Obj y) const override {
    return sat_mul(base_.hom_list(base_index(x), base_index(y)).size(), ipow(size_of(y), size_of(x)));
  }
  std::uint64_t hom_size_over(Obj x, Obj y, std::uint32_t over) const override {
    if (base_.source_of(over) != base_index(x) || base_.target_of(over) != base_index(y)) return 0;
    return ipow(size_of(y), size_of(x));
  }
  std::optional<Mor> sample_hom_over(Obj x, Obj y, std::uint32_t over, Rng& rng) const override {
    if (hom_size_over(x, y, over) == 0) return std::nullopt;
    std::uniform_int_distribution<std::uint32_t> d(0, size_of(y) - 1);
    Values v(size_of(x));
    for (auto& a : v) a = size_of(y) ? d(rng) : 0;
    return make(x, y, over, v);
  }
  std::optional<Mor> sample_hom(Obj x, Obj y, Rng& rng) const override {
    const auto& hs = base_.hom_list(base_index(x), base_index(y));
    if (hs.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> d(0, hs.size() - 1);
    return sample_hom_over(x, y, static_cast<std::uint32_t>(hs[d(rng)]), rng);
  }
  std::optional<Mor> inverse(const Mor& m) const override {
    if (size_of(m.src) != size_of(m.tgt)) return std::nullopt;
    std::optional<std::size_t> hinv;
    for (std::size_t g : base_.hom_list(base_.target_of(m.over), base_.source_of(m.over)))
      if (base_.composite(g, m.over) == base_.identity_of(base_.source_of(m.over)) &&
          base_.composite(m.over, g) == base_.identity_of(base_.target_of(m.over)))
        hinv = g;
    if (!hinv) return std::nullopt;
    const auto v = values(m);
    Values w(v.size(), 0);
    std::vector<bool> hit(v.size(), false);
    for (std::uint32_t i = 0; i < v.size(); ++i) {
      if (hit[v[i]]) return std::nullopt;
      hit[v[i]] = true;
      w[v[i]] = i;
    }
    return make(m.tgt, m.src, *hinv, w);
  }
  std::optional<Obj> find_object(std::string_view name) const override {
    const auto colon = name.rfind(':');
    if (colon == std::string_view::npos) return std::nullopt;
    auto b = base_.object_index(name.substr(0, colon));
    std::uint32_t n = 0;
    auto rest = name.substr(colon + 1);
    auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), n);
    if (!b || ec != std::errc() || p != rest.data() + rest.size() || n > o_.cap) return std::nullopt;
    return make_obj(*b, n);
  }
  std::optional<Mor> find_morphism(Obj x, Obj y, std::string_view name) const override {
    const auto open = name.find('[');
    if (open == std::string_view::npos || name.back() != ']') return std::nullopt;
    auto h = base_.morphism_index(name.substr(0, open));
    if (!h || base_.source_of(*h) != base_index(x) || base_.target_of(*h) != base_index(y)) return std::nullopt;
    Values v;
    auto body = name.substr(open + 1, name.size() - open - 2);
    while (!body.empty()) {
      const auto comma = body.find(',');
      auto tok = body.substr(0, comma);
      std::uint32_t a = 0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), a);
      if (ec != std::errc() || p != tok.data() + tok.size() || a >= size_of(y)) return std::nullopt;
      v.push_back(a);
      if (comma == std::string_view::npos) break;
      body = body.substr(comma + 1);
    }
    if (v.size() != size_of(x)) return std::nullopt;
    return make(x, y, *h, v);
  }
  std::optional<std::string> canonical_key(Obj x) const override {
    if (!skeletal_) return std::nullopt;
    return object_name(x);
  }
  bool may_be_isomorphic(Obj x, Obj y) const override { return size_of(x) == size_of(y); }

  const FinCat& base_;
  FinsetOptions o_;
  bool skeletal_;
  std::vector<Obj> objects_;
};

class FinsetProjection final : public Projection {
 public:
  FinsetProjection(const FinsetTotal& e, const FinCat& b) : e_(e), b_(b) {}
  const Category& source() const override { return e_; }
  const Category& target() const override { return b_; }
  Obj map_object(Obj x) const override { return base_index(x); }
  Mor map_morphism(const Mor& m) const override { return b_.mor(m.over); }
  std::uint32_t tag_of(Obj, Obj, const Mor& h) const override { return static_cast<std::uint32_t>(FinCat::index(h)); }

 private:
  const FinsetTotal& e_;
  const FinCat& b_;
};

/// Union-find over {0..n-1}; classes numbered by first element.
struct Classes {
  explicit Classes(std::uint32_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a), b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::uint32_t> parent;
};

class FinsetOpfibration final : public MonoidalOpfibration, public FibreColimits {
 public:
  FinsetOpfibration(const FinCat& base, const FinsetOptions& o) : base_(base), e_(base, o), p_(e_, base) {}

  const Category& total() const override { return e_; }
  const Category& base() const override { return base_; }
  const Projection& projection() const override { return p_; }

  Mor lift(const Mor& f, Obj e) const override {
    e_.check(e);
    const std::size_t h = FinCat::index(f);
    if (base_.source_of(h) != base_index(e)) throw StructuralError("lift: object is not over the source of f");
    Values v(size_of(e));
    std::iota(v.begin(), v.end(), 0u);
    return e_.make(e, make_obj(base_.target_of(h), size_of(e)), h, v);
  }
  Obj tensor(Obj a, Obj b) const override {
    if (base_index(a) != base_index(b)) throw StructuralError("tensor of objects in different fibres");
    const std::uint64_t n = std::uint64_t{size_of(a)} * size_of(b);
    if (n > e_.o_.cap) throw TruncationError("finite set larger than the construction cap");
    return make_obj(base_index(a), static_cast<std::uint32_t>(n));
  }
  Mor tensor(const Mor& f, const Mor& g) const override {
    if (f.over != g.over) throw StructuralError("tensor of morphisms over different base morphisms");
    const auto a = e_.values(f), b = e_.values(g);
    const std::uint32_t m = size_of(g.src), m2 = size_of(g.tgt);
    Values v(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) v[i * m + j] = a[i] * m2 + b[j];
    return e_.make(tensor(f.src, g.src), tensor(f.tgt, g.tgt), f.over, v);
  }
  Obj unit(Obj b) const override { return make_obj(b, 1); }
  Mor unit(const Mor& h) const override {
    const std::size_t i = FinCat::index(h);
    return e_.make(make_obj(base_.source_of(i), 1), make_obj(base_.target_of(i), 1), i, Values{0});
  }
  Mor associator(Obj a, Obj b, Obj c) const override { return e_.identity(tensor(tensor(a, b), c)); }
  Mor left_unitor(Obj a) const override { return e_.identity(a); }
  Mor right_unitor(Obj a) const override { return e_.identity(a); }
  bool has_braiding() const override { return true; }
  Mor braiding(Obj a, Obj b) const override {
    const std::uint32_t n = size_of(a), m = size_of(b);
    Values v(n * m);
    for (std::uint32_t i = 0; i < n; ++i)
      for (std::uint32_t j = 0; j < m; ++j) v[i * m + j] = j * n + i;
    return e_.make(tensor(a, b), tensor(b, a), base_.identity_of(base_index(a)), v);
  }
  const FibreColimits* colimits() const override { return this; }
  bool monoid_carrier(Obj x) const override { return size_of(x) <= e_.o_.monoid_bound; }

  // FibreColimits
  Mor coequalizer(const Mor& f, const Mor& g) const override {
    if (f.src != g.src || f.tgt != g.tgt) throw StructuralError("coequalizer of non-parallel morphisms");
    if (!base_.is_identity(base_.mor(f.over)) || f.over != g.over)
      throw StructuralError("coequalizer outside a fibre");
    const auto a = e_.values(f), b = e_.values(g);
    Classes uf(size_of(f.tgt));
    for (std::size_t i = 0; i < a.size(); ++i) uf.unite(a[i], b[i]);
    std::vector<std::uint32_t> label(size_of(f.tgt), 0);
    std::uint32_t k = 0;
    for (std::uint32_t y = 0; y < label.size(); ++y)
      if (uf.find(y) == y) label[y] = k++;
    Values q(label.size());
    for (std::uint32_t y = 0; y < label.size(); ++y) q[y] = label[uf.find(y)];
    const Obj qo = make_obj(base_index(f.tgt), k);
    return e_.make(f.tgt, qo, f.over, q);
  }
  std::optional<Mor> factor(const std::vector<std::pair<Mor, Mor>>& cs) const override {
    if (cs.empty()) return std::nullopt;
    const Obj y = cs.front().first.tgt, t = cs.front().second.tgt;
    std::vector<std::int64_t> u(size_of(y), -1);
    std::optional<std::uint32_t> over;
    for (const auto& [e, tt] : cs) {
      if (e.tgt != y || tt.tgt != t || e.src != tt.src) throw StructuralError("factor: mismatched constraints");
      // u lies over the base morphism h with h∘P(e) = P(t)
      for (std::size_t h : base_.hom_list(base_index(y), base_index(t)))
        if (base_.composite(h, e.over) == tt.over) {
          if (over && *over != h) return std::nullopt;
          over = static_cast<std::uint32_t>(h);
          break;
        }
      if (!over) return std::nullopt;
      const auto ev = e_.values(e), tv = e_.values(tt);
      for (std::size_t i = 0; i < ev.size(); ++i) {
        if (u[ev[i]] >= 0 && u[ev[i]] != tv[i]) return std::nullopt;
        u[ev[i]] = tv[i];
      }
    }
    Values v(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (u[i] < 0) return std::nullopt;
      v[i] = static_cast<std::uint32_t>(u[i]);
    }
    return e_.make(y, t, *over, v);
  }
  std::optional<FibreSum> direct_sum(Obj x, Obj y) const override {
    if (base_index(x) != base_index(y)) throw StructuralError("sum of objects in different fibres");
    const Obj s = make_obj(base_index(x), size_of(x) + size_of(y));
    e_.check(s);
    Values l(size_of(x)), r(size_of(y));
    std::iota(l.begin(), l.end(), 0u);
    std::iota(r.begin(), r.end(), size_of(x));
    const std::size_t id = base_.identity_of(base_index(x));
    return FibreSum{s, e_.make(x, s, id, l), e_.make(y, s, id, r)};
  }
  std::optional<Obj> zero_object(Obj b) const override { return make_obj(b, 0); }

  std::vector<Mor> action_candidates(const Mor& mu, const Mor& eta, Obj carrier, const Limits& limits) const override {
    const std::uint32_t n = size_of(carrier), r = size_of(mu.tgt);
    const auto mt = e_.values(mu);
    const std::uint32_t one = e_.values(eta).at(0);
    const std::size_t id = base_.identity_of(base_index(carrier));
    // κ(m, one) = m and κ(κ(m, a), b) = κ(m, a·b); fill cells (m, a) in order
    std::vector<std::int64_t> k(std::size_t{n} * r, -1);
    for (std::uint32_t m = 0; m < n; ++m) k[m * r + one] = m;
    std::vector<Mor> out;
    std::uint64_t visited = 0;
    auto consistent = [&]() {
      for (std::uint32_t m = 0; m < n; ++m)
        for (std::uint32_t a = 0; a < r; ++a) {
          const auto ma = k[m * r + a];
          if (ma < 0) continue;
          for (std::uint32_t b = 0; b < r; ++b) {
            const auto lhs = k[ma * r + b], rhs = k[m * r + mt[a * r + b]];
            if (lhs >= 0 && rhs >= 0 && lhs != rhs) return false;
          }
        }
      return true;
    };
    std::function<void(std::size_t)> go = [&](std::size_t cell) {
      if (++visited > limits.enumeration_budget) throw TruncationError("action search exceeds the enumeration budget");
      while (cell < k.size() && k[cell] >= 0) ++cell;
      if (cell == k.size()) {
        Values v(k.begin(), k.end());
        out.push_back(e_.make(tensor(carrier, mu.tgt), carrier, id, v));
        return;
      }
      for (std::uint32_t val = 0; val < n; ++val) {
        k[cell] = val;
        if (consistent()) go(cell + 1);
      }
      k[cell] = -1;
    };
    go(0);
    return out;
  }

  void for_each_equivariant(const Mor& kappa, const Mor& sigma, const Mor& phi, const MorVisitor& visit) const override {
    const Obj mo = kappa.tgt, no = sigma.tgt;
    const std::uint32_t n = size_of(mo), nn = size_of(no), r = size_of(phi.src), s = size_of(phi.tgt);
    const auto kt = e_.values(kappa), st = e_.values(sigma), ph = e_.values(phi);
    if (nn == 0 && n > 0) return;
    std::vector<std::int64_t> a(n, -1);
    // assigning a(m) forces a(κ(m, x)) = σ(a(m), φ(x)); propagate, undo on conflict
    auto assign = [&](std::uint32_t m0, std::uint32_t v0, std::vector<std::uint32_t>& trail) {
      std::vector<std::pair<std::uint32_t, std::uint32_t>> stack{{m0, v0}};
      while (!stack.empty()) {
        auto [m, v] = stack.back();
        stack.pop_back();
        if (a[m] >= 0) {
          if (a[m] != v) return false;
          continue;
        }
        a[m] = v;
        trail.push_back(m);
        for (std::uint32_t x = 0; x < r; ++x) stack.push_back({kt[m * r + x], st[v * s + ph[x]]});
      }
      return true;
    };
    bool go_on = true;
    std::function<void(std::uint32_t)> go = [&](std::uint32_t m) {
      while (m < n && a[m] >= 0) ++m;
      if (m == n) {
        Values v(a.begin(), a.end());
        go_on = visit(e_.make(mo, no, phi.over, v));
        return;
      }
      for (std::uint32_t v = 0; v < nn && go_on; ++v) {
        std::vector<std::uint32_t> trail;
        if (assign(m, v, trail)) go(m + 1);
        for (auto t : trail) a[t] = -1;
      }
    };
    go(0);
  }

 private:
  const FinCat& base_;
  FinsetTotal e_;
  FinsetProjection p_;
};

}  // namespace

std::unique_ptr<MonoidalOpfibration> make_finset_opfibration(const FinCat& base, const FinsetOptions& options) {
  return std::make_unique<FinsetOpfibration>(base, options);
}

}  // namespace fibred
