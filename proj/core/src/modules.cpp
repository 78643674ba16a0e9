#include <algorithm>
#include <charconv>

#include "fibred/backends.hpp"
#include "fibred/error.hpp"
#include "fibred/linalg.hpp"

namespace fibred {

std::vector<std::uint32_t> squarefree_primes(std::uint32_t n) {
  if (n < 2) throw UnsupportedError("ring Z/" + std::to_string(n) + " is not supported");
  std::vector<std::uint32_t> out;
  for (std::uint32_t p = 2; p * p <= n; ++p)
    if (n % p == 0) {
      n /= p;
      if (n % p == 0) throw UnsupportedError("Z/n with n not squarefree is not supported");
      out.push_back(p);
    }
  if (n > 1) out.push_back(n);
  return out;
}

namespace {

constexpr unsigned kDimBits = 8;

std::uint64_t ipow(std::uint64_t b, std::uint64_t e) {
  std::uint64_t r = 1;
  while (e--) r = sat_mul(r, b);
  return r;
}

/// Global prime list and, per base object, which of them divide its ring.
struct Rings {
  std::vector<std::uint32_t> primes;
  std::vector<std::vector<bool>> divides;  // [base object][prime index]
  std::vector<std::uint32_t> n;
};

class ModuleTotal;

class ModuleLinear final : public LinearHoms {
 public:
  explicit ModuleLinear(const ModuleTotal& t) : t_(t) {}
  const std::vector<std::uint32_t>& primes() const override;
  std::vector<std::uint32_t> components(Obj x, Obj y) const override;
  HomBasis basis(Obj x, Obj y, std::uint32_t over) const override;
  Coords coordinates(const Mor& m) const override;
  Mor from_coordinates(Obj x, Obj y, std::uint32_t over, const Coords& c) const override;

 private:
  const ModuleTotal& t_;
};

class ModuleTotal final : public Category {
 public:
  ModuleTotal(const FinCat& base, const Rings& rings, const ModuleOptions& o)
      : base_(base), r_(rings), o_(o), lin_(*this) {
    skeletal_ = true;
    for (Obj a : base.objects())
      for (Obj b : base.objects())
        if (a < b && first_isomorphism(base, a, b)) skeletal_ = false;
    for (Obj b : base.objects()) {
      std::vector<std::uint32_t> dims(r_.primes.size(), 0);
      enumerate(b, 0, 1, dims);
    }
  }

  std::size_t np() const { return r_.primes.size(); }
  static std::size_t base_index(Obj x) { return static_cast<std::size_t>(x >> 48); }
  std::uint32_t dim(Obj x, std::size_t i) const {
    return static_cast<std::uint32_t>((x >> (kDimBits * i)) & ((1u << kDimBits) - 1));
  }
  Obj make_obj(std::size_t b, const std::vector<std::uint32_t>& dims) const {
    Obj x = Obj{b} << 48;
    for (std::size_t i = 0; i < dims.size(); ++i) {
      if (dims[i] >= (1u << kDimBits)) throw TruncationError("module dimension exceeds the construction cap");
      if (dims[i] && !r_.divides[b][i]) throw StructuralError("dimension at a prime not dividing the ring");
      x |= Obj{dims[i]} << (kDimBits * i);
    }
    return x;
  }
  std::vector<std::uint32_t> dims(Obj x) const {
    std::vector<std::uint32_t> d(np());
    for (std::size_t i = 0; i < np(); ++i) d[i] = dim(x, i);
    return d;
  }
  std::uint64_t card(Obj x) const {
    std::uint64_t c = 1;
    for (std::size_t i = 0; i < np(); ++i) c = sat_mul(c, ipow(r_.primes[i], dim(x, i)));
    return c;
  }
  /// Primes of the ring of the target of h, where matrices live.
  bool active(std::uint32_t over, std::size_t i) const { return r_.divides[base_.target_of(over)][i]; }

  using Mats = std::vector<FpMatrix>;  // one per global prime; empty 0x0 when inactive

  Mor make(Obj x, Obj y, std::uint32_t over, const Mats& ms) const {
    BitWriter w;
    for (std::size_t i = 0; i < np(); ++i) {
      if (!active(over, i)) continue;
      const unsigned bits = bits_for(r_.primes[i]);
      for (auto v : ms[i].data()) w.put(v, bits);
    }
    Mor m{x, y, over, {}};
    m.code = std::move(w).finish();
    return m;
  }
  Mats mats(const Mor& m) const {
    Mats out(np());
    BitReader r(m.code);
    for (std::size_t i = 0; i < np(); ++i) {
      if (!active(m.over, i)) {
        out[i] = FpMatrix(r_.primes[i], 0, 0);
        continue;
      }
      out[i] = FpMatrix(r_.primes[i], dim(m.tgt, i), dim(m.src, i));
      const unsigned bits = bits_for(r_.primes[i]);
      for (auto& v : out[i].data()) v = static_cast<std::uint8_t>(r.get(bits));
    }
    return out;
  }
  Mats identity_mats(Obj x, std::uint32_t over) const {
    Mats out(np());
    for (std::size_t i = 0; i < np(); ++i)
      out[i] = active(over, i) ? FpMatrix::identity(r_.primes[i], dim(x, i)) : FpMatrix(r_.primes[i], 0, 0);
    return out;
  }
  /// Object over the target of h with the dimensions of x at the primes that survive.
  Obj transport(std::uint32_t h, Obj x) const {
    const std::size_t b = base_.target_of(h);
    auto d = dims(x);
    for (std::size_t i = 0; i < np(); ++i)
      if (!r_.divides[b][i]) d[i] = 0;
    return make_obj(b, d);
  }

  const std::vector<Obj>& objects() const override { return objects_; }
  bool in_universe(Obj x) const override {
    if (base_index(x) >= base_.num_objects() || card(x) > o_.bound) return false;
    for (std::size_t i = 0; i < np(); ++i)
      if (dim(x, i) && !r_.divides[base_index(x)][i]) return false;
    return true;
  }
  std::string object_name(Obj x) const override {
    std::string s = base_.object_id(base_index(x)) + ":";
    bool first = true;
    for (std::size_t i = 0; i < np(); ++i) {
      if (!r_.divides[base_index(x)][i]) continue;
      s += (first ? "" : ",") + std::to_string(dim(x, i));
      first = false;
    }
    return s;
  }
  std::string morphism_name(const Mor& m) const override {
    std::string s = base_.morphism_id(m.over) + "[";
    const auto ms = mats(m);
    bool first = true;
    for (std::size_t i = 0; i < np(); ++i) {
      if (!active(m.over, i)) continue;
      s += (first ? "" : ";") + std::to_string(r_.primes[i]) + ":";
      first = false;
      for (std::size_t row = 0; row < ms[i].rows(); ++row) {
        if (row) s += "/";
        for (std::size_t c = 0; c < ms[i].cols(); ++c) s += static_cast<char>('0' + ms[i](row, c));
      }
    }
    return s + "]";
  }
  Mor identity(Obj x) const override {
    const auto id = static_cast<std::uint32_t>(base_.identity_of(base_index(x)));
    return make(x, x, id, identity_mats(x, id));
  }
  Mor compose(const Mor& g, const Mor& f) const override {
    if (f.tgt != g.src) throw StructuralError("composing non-composable module maps");
    const auto h = base_.composite(g.over, f.over);
    if (!h) throw StructuralError("base composite missing");
    const auto a = mats(f), b = mats(g);
    Mats c(np());
    for (std::size_t i = 0; i < np(); ++i)
      c[i] = active(static_cast<std::uint32_t>(*h), i) ? b[i] * a[i] : FpMatrix(r_.primes[i], 0, 0);
    return make(f.src, g.tgt, static_cast<std::uint32_t>(*h), c);
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
    Mats m(np());
    std::vector<std::pair<std::size_t, std::size_t>> slots;  // (prime, entry)
    for (std::size_t i = 0; i < np(); ++i) {
      m[i] = active(over, i) ? FpMatrix(r_.primes[i], dim(y, i), dim(x, i)) : FpMatrix(r_.primes[i], 0, 0);
      for (std::size_t k = 0; k < m[i].data().size(); ++k) slots.push_back({i, k});
    }
    while (true) {
      if (!visit(make(x, y, over, m))) return;
      std::size_t s = 0;
      for (; s < slots.size(); ++s) {
        auto& v = m[slots[s].first].data()[slots[s].second];
        if (++v < r_.primes[slots[s].first]) break;
        v = 0;
      }
      if (s == slots.size()) return;
    }
  }
  std::uint64_t hom_size_over(Obj x, Obj y, std::uint32_t over) const override {
    if (base_.source_of(over) != base_index(x) || base_.target_of(over) != base_index(y)) return 0;
    std::uint64_t n = 1;
    for (std::size_t i = 0; i < np(); ++i)
      if (active(over, i)) n = sat_mul(n, ipow(r_.primes[i], std::uint64_t{dim(x, i)} * dim(y, i)));
    return n;
  }
  std::uint64_t hom_size(Obj x, Obj y) const override {
    std::uint64_t n = 0;
    for (std::size_t h : base_.hom_list(base_index(x), base_index(y)))
      n = sat_add(n, hom_size_over(x, y, static_cast<std::uint32_t>(h)));
    return n;
  }
  std::optional<Mor> sample_hom_over(Obj x, Obj y, std::uint32_t over, Rng& rng) const override {
    if (hom_size_over(x, y, over) == 0) return std::nullopt;
    Mats m(np());
    for (std::size_t i = 0; i < np(); ++i) {
      m[i] = active(over, i) ? FpMatrix(r_.primes[i], dim(y, i), dim(x, i)) : FpMatrix(r_.primes[i], 0, 0);
      std::uniform_int_distribution<std::uint32_t> d(0, r_.primes[i] - 1);
      for (auto& v : m[i].data()) v = static_cast<std::uint8_t>(d(rng));
    }
    return make(x, y, over, m);
  }
  std::optional<Mor> sample_hom(Obj x, Obj y, Rng& rng) const override {
    const auto& hs = base_.hom_list(base_index(x), base_index(y));
    if (hs.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> d(0, hs.size() - 1);
    return sample_hom_over(x, y, static_cast<std::uint32_t>(hs[d(rng)]), rng);
  }
  std::optional<Mor> inverse(const Mor& m) const override {
    std::optional<std::size_t> hinv;
    for (std::size_t g : base_.hom_list(base_.target_of(m.over), base_.source_of(m.over)))
      if (base_.composite(g, m.over) == base_.identity_of(base_.source_of(m.over)) &&
          base_.composite(m.over, g) == base_.identity_of(base_.target_of(m.over)))
        hinv = g;
    if (!hinv) return std::nullopt;
    const auto a = mats(m);
    Mats out(np());
    for (std::size_t i = 0; i < np(); ++i) {
      if (!active(m.over, i)) {
        if (dim(m.src, i)) return std::nullopt;
        out[i] = FpMatrix(r_.primes[i], 0, 0);
        continue;
      }
      auto inv = a[i].inverse();
      if (!inv) return std::nullopt;
      out[i] = *inv;
    }
    return make(m.tgt, m.src, static_cast<std::uint32_t>(*hinv), out);
  }
  const LinearHoms* linear() const override { return &lin_; }

  std::optional<Obj> find_object(std::string_view name) const override {
    const auto colon = name.rfind(':');
    if (colon == std::string_view::npos) return std::nullopt;
    auto b = base_.object_index(name.substr(0, colon));
    if (!b) return std::nullopt;
    std::vector<std::uint32_t> d(np(), 0);
    auto rest = name.substr(colon + 1);
    for (std::size_t i = 0; i < np(); ++i) {
      if (!r_.divides[*b][i]) continue;
      const auto comma = rest.find(',');
      auto tok = rest.substr(0, comma);
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), d[i]);
      if (ec != std::errc() || p != tok.data() + tok.size() || d[i] >= (1u << kDimBits)) return std::nullopt;
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      if (comma == std::string_view::npos) {
        for (std::size_t j = i + 1; j < np(); ++j)
          if (r_.divides[*b][j]) return std::nullopt;
        break;
      }
    }
    if (!rest.empty()) return std::nullopt;
    return make_obj(*b, d);
  }
  std::optional<Mor> find_morphism(Obj x, Obj y, std::string_view name) const override {
    const auto open = name.find('[');
    if (open == std::string_view::npos || name.back() != ']') return std::nullopt;
    auto h = base_.morphism_index(name.substr(0, open));
    if (!h || base_.source_of(*h) != base_index(x) || base_.target_of(*h) != base_index(y)) return std::nullopt;
    const auto over = static_cast<std::uint32_t>(*h);
    std::string_view body = name.substr(open + 1, name.size() - open - 2);
    Mats m(np());
    for (std::size_t i = 0; i < np(); ++i) {
      if (!active(over, i)) {
        m[i] = FpMatrix(r_.primes[i], 0, 0);
        continue;
      }
      const auto semi = body.find(';');
      std::string_view part = body.substr(0, semi);
      body = semi == std::string_view::npos ? std::string_view{} : body.substr(semi + 1);
      const std::string prefix = std::to_string(r_.primes[i]) + ":";
      if (part.substr(0, prefix.size()) != prefix) return std::nullopt;
      part.remove_prefix(prefix.size());
      const std::size_t rows = dim(y, i), cols = dim(x, i);
      m[i] = FpMatrix(r_.primes[i], rows, cols);
      std::vector<std::string_view> rs;
      if (rows > 0) {
        while (true) {
          const auto slash = part.find('/');
          rs.push_back(part.substr(0, slash));
          if (slash == std::string_view::npos) break;
          part = part.substr(slash + 1);
        }
      } else if (!part.empty()) {
        return std::nullopt;
      }
      if (rs.size() != rows) return std::nullopt;
      for (std::size_t r = 0; r < rows; ++r) {
        if (rs[r].size() != cols) return std::nullopt;
        for (std::size_t c = 0; c < cols; ++c) {
          const int v = rs[r][c] - '0';
          if (v < 0 || static_cast<std::uint32_t>(v) >= r_.primes[i]) return std::nullopt;
          m[i](r, c) = static_cast<std::uint8_t>(v);
        }
      }
    }
    if (!body.empty()) return std::nullopt;
    return make(x, y, over, m);
  }
  std::optional<std::string> canonical_key(Obj x) const override {
    if (!skeletal_) return std::nullopt;
    return object_name(x);
  }
  bool may_be_isomorphic(Obj x, Obj y) const override {
    for (std::size_t i = 0; i < np(); ++i)
      if (dim(x, i) != dim(y, i)) return false;
    return true;
  }

  const FinCat& base_;
  const Rings& r_;
  ModuleOptions o_;
  ModuleLinear lin_;
  bool skeletal_ = true;
  std::vector<Obj> objects_;

 private:
  void enumerate(Obj b, std::size_t i, std::uint64_t c, std::vector<std::uint32_t>& d) {
    if (i == np()) {
      objects_.push_back(make_obj(b, d));
      return;
    }
    if (!r_.divides[b][i]) {
      enumerate(b, i + 1, c, d);
      return;
    }
    for (d[i] = 0; sat_mul(c, ipow(r_.primes[i], d[i])) <= o_.bound; ++d[i])
      enumerate(b, i + 1, sat_mul(c, ipow(r_.primes[i], d[i])), d);
    d[i] = 0;
  }
};

const std::vector<std::uint32_t>& ModuleLinear::primes() const { return t_.r_.primes; }
std::vector<std::uint32_t> ModuleLinear::components(Obj x, Obj y) const {
  std::vector<std::uint32_t> out;
  for (std::size_t h : t_.base_.hom_list(ModuleTotal::base_index(x), ModuleTotal::base_index(y)))
    out.push_back(static_cast<std::uint32_t>(h));
  return out;
}
HomBasis ModuleLinear::basis(Obj x, Obj y, std::uint32_t over) const {
  HomBasis hb;
  for (std::size_t i = 0; i < t_.np(); ++i) {
    const std::size_t n = t_.active(over, i) ? std::size_t{t_.dim(x, i)} * t_.dim(y, i) : 0;
    hb.ambient.push_back(n);
    std::vector<Vec> vs;
    for (std::size_t k = 0; k < n; ++k) {
      Vec v(n, 0);
      v[k] = 1;
      vs.push_back(std::move(v));
    }
    hb.vectors.push_back(std::move(vs));
  }
  return hb;
}
Coords ModuleLinear::coordinates(const Mor& m) const {
  Coords c;
  for (auto& a : t_.mats(m)) c.push_back(a.data());
  return c;
}
Mor ModuleLinear::from_coordinates(Obj x, Obj y, std::uint32_t over, const Coords& c) const {
  ModuleTotal::Mats m(t_.np());
  for (std::size_t i = 0; i < t_.np(); ++i) {
    if (!t_.active(over, i)) {
      m[i] = FpMatrix(t_.r_.primes[i], 0, 0);
      continue;
    }
    m[i] = FpMatrix(t_.r_.primes[i], t_.dim(y, i), t_.dim(x, i));
    if (c.at(i).size() != m[i].data().size()) throw StructuralError("coordinate vector has the wrong length");
    m[i].data() = c[i];
  }
  return t_.make(x, y, over, m);
}

class ModuleProjection final : public Projection {
 public:
  ModuleProjection(const ModuleTotal& e, const FinCat& b) : e_(e), b_(b) {}
  const Category& source() const override { return e_; }
  const Category& target() const override { return b_; }
  Obj map_object(Obj x) const override { return ModuleTotal::base_index(x); }
  Mor map_morphism(const Mor& m) const override { return b_.mor(m.over); }
  std::uint32_t tag_of(Obj, Obj, const Mor& h) const override { return static_cast<std::uint32_t>(FinCat::index(h)); }

 private:
  const ModuleTotal& e_;
  const FinCat& b_;
};

Rings make_rings(const FinCat& base, const ModuleOptions& o) {
  if (o.rings.size() != base.num_objects()) throw StructuralError("one ring per base object is required");
  Rings r;
  r.n = o.rings;
  for (auto n : o.rings)
    for (auto p : squarefree_primes(n))
      if (std::find(r.primes.begin(), r.primes.end(), p) == r.primes.end()) r.primes.push_back(p);
  std::sort(r.primes.begin(), r.primes.end());
  for (auto p : r.primes)
    if (p > 255) throw UnsupportedError("primes above 255 are not supported");
  for (auto n : o.rings) {
    std::vector<bool> d;
    for (auto p : r.primes) d.push_back(n % p == 0);
    r.divides.push_back(d);
  }
  for (std::size_t m = 0; m < base.num_morphisms(); ++m)
    if (o.rings[base.source_of(m)] % o.rings[base.target_of(m)] != 0)
      throw StructuralError("base morphism " + base.morphism_id(m) + " is not a quotient of rings");
  return r;
}

class ModuleOpfibration final : public MonoidalOpfibration, public FibreColimits {
 public:
  ModuleOpfibration(const FinCat& base, const ModuleOptions& o)
      : base_(base), rings_(make_rings(base, o)), e_(base, rings_, o), p_(e_, base) {}

  const Category& total() const override { return e_; }
  const Category& base() const override { return base_; }
  const Projection& projection() const override { return p_; }

  Mor lift(const Mor& f, Obj x) const override {
    const auto h = static_cast<std::uint32_t>(FinCat::index(f));
    if (base_.source_of(h) != ModuleTotal::base_index(x)) throw StructuralError("lift: object is not over the source of f");
    return e_.make(x, e_.transport(h, x), h, e_.identity_mats(x, h));
  }
  Obj tensor(Obj a, Obj b) const override {
    const std::size_t ba = ModuleTotal::base_index(a);
    if (ba != ModuleTotal::base_index(b)) throw StructuralError("tensor of objects in different fibres");
    std::vector<std::uint32_t> d(e_.np());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = e_.dim(a, i) * e_.dim(b, i);
    return e_.make_obj(ba, d);
  }
  Mor tensor(const Mor& f, const Mor& g) const override {
    if (f.over != g.over) throw StructuralError("tensor of morphisms over different base morphisms");
    const auto a = e_.mats(f), b = e_.mats(g);
    ModuleTotal::Mats c(e_.np());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i].kron(b[i]);
    return e_.make(tensor(f.src, g.src), tensor(f.tgt, g.tgt), f.over, c);
  }
  Obj unit(Obj b) const override {
    std::vector<std::uint32_t> d(e_.np());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = rings_.divides[b][i] ? 1 : 0;
    return e_.make_obj(b, d);
  }
  Mor unit(const Mor& h) const override { return lift(h, unit(h.src)); }
  Mor associator(Obj a, Obj b, Obj c) const override { return e_.identity(tensor(tensor(a, b), c)); }
  Mor left_unitor(Obj a) const override { return e_.identity(a); }
  Mor right_unitor(Obj a) const override { return e_.identity(a); }
  bool has_braiding() const override { return true; }
  Mor braiding(Obj a, Obj b) const override {
    const auto id = static_cast<std::uint32_t>(base_.identity_of(ModuleTotal::base_index(a)));
    ModuleTotal::Mats m(e_.np());
    for (std::size_t i = 0; i < m.size(); ++i)
      m[i] = FpMatrix::commutation(rings_.primes[i], e_.dim(a, i), e_.dim(b, i));
    return e_.make(tensor(a, b), tensor(b, a), id, m);
  }
  const FibreColimits* colimits() const override { return this; }
  bool monoid_carrier(Obj x) const override {
    for (std::size_t i = 0; i < e_.np(); ++i)
      if (e_.dim(x, i) > e_.o_.monoid_dim) return false;
    return true;
  }

  Mor coequalizer(const Mor& f, const Mor& g) const override {
    if (f.src != g.src || f.tgt != g.tgt || f.over != g.over) throw StructuralError("coequalizer of non-parallel morphisms");
    if (!base_.is_identity(base_.mor(f.over))) throw StructuralError("coequalizer outside a fibre");
    const auto a = e_.mats(f), b = e_.mats(g);
    ModuleTotal::Mats q(e_.np());
    auto d = e_.dims(f.tgt);
    for (std::size_t i = 0; i < q.size(); ++i) {
      const auto rows = (a[i] - b[i]).left_nullspace();
      q[i] = FpMatrix(rings_.primes[i], rows.size(), e_.dim(f.tgt, i));
      for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < q[i].cols(); ++c) q[i](r, c) = rows[r][c];
      d[i] = static_cast<std::uint32_t>(rows.size());
    }
    const Obj qo = e_.make_obj(ModuleTotal::base_index(f.tgt), d);
    return e_.make(f.tgt, qo, f.over, q);
  }
  std::optional<Mor> factor(const std::vector<std::pair<Mor, Mor>>& cs) const override {
    if (cs.empty()) return std::nullopt;
    const Obj y = cs.front().first.tgt, t = cs.front().second.tgt;
    std::optional<std::uint32_t> over;
    for (const auto& [e, tt] : cs) {
      if (e.tgt != y || tt.tgt != t || e.src != tt.src) throw StructuralError("factor: mismatched constraints");
      bool found = false;
      for (std::size_t h : base_.hom_list(ModuleTotal::base_index(y), ModuleTotal::base_index(t)))
        if (base_.composite(h, e.over) == tt.over) {
          if (over && *over != h) return std::nullopt;
          over = static_cast<std::uint32_t>(h);
          found = true;
          break;
        }
      if (!found) return std::nullopt;
    }
    ModuleTotal::Mats u(e_.np());
    for (std::size_t i = 0; i < u.size(); ++i) {
      const std::uint32_t p = rings_.primes[i];
      if (!e_.active(*over, i)) {
        u[i] = FpMatrix(p, 0, 0);
        continue;
      }
      // u E = T for the horizontally stacked E, T; solve Eᵀ uᵀ = Tᵀ row by row
      std::size_t width = 0;
      for (const auto& c : cs) width += e_.dim(c.first.src, i);
      FpMatrix et(p, width, e_.dim(y, i)), tt(p, width, e_.dim(t, i));
      std::size_t off = 0;
      for (const auto& [e, t2] : cs) {
        const auto em = e_.mats(e)[i], tm = e_.mats(t2)[i];
        if (!e_.active(e.over, i) || !e_.active(t2.over, i)) return std::nullopt;
        for (std::size_t c = 0; c < em.cols(); ++c) {
          for (std::size_t r = 0; r < em.rows(); ++r) et(off + c, r) = em(r, c);
          for (std::size_t r = 0; r < tm.rows(); ++r) tt(off + c, r) = tm(r, c);
        }
        off += em.cols();
      }
      u[i] = FpMatrix(p, e_.dim(t, i), e_.dim(y, i));
      for (std::size_t r = 0; r < u[i].rows(); ++r) {
        Vec rhs(width);
        for (std::size_t k = 0; k < width; ++k) rhs[k] = tt(k, r);
        auto x = et.solve(rhs);
        if (!x) return std::nullopt;
        for (std::size_t c = 0; c < u[i].cols(); ++c) u[i](r, c) = (*x)[c];
      }
    }
    return e_.make(y, t, *over, u);
  }
  std::optional<FibreSum> direct_sum(Obj x, Obj y) const override {
    const std::size_t b = ModuleTotal::base_index(x);
    if (b != ModuleTotal::base_index(y)) throw StructuralError("sum of objects in different fibres");
    std::vector<std::uint32_t> d(e_.np());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = e_.dim(x, i) + e_.dim(y, i);
    const Obj s = e_.make_obj(b, d);
    const auto id = static_cast<std::uint32_t>(base_.identity_of(b));
    ModuleTotal::Mats l(e_.np()), r(e_.np());
    for (std::size_t i = 0; i < d.size(); ++i) {
      l[i] = FpMatrix(rings_.primes[i], d[i], e_.dim(x, i));
      r[i] = FpMatrix(rings_.primes[i], d[i], e_.dim(y, i));
      if (!e_.active(id, i)) {
        l[i] = r[i] = FpMatrix(rings_.primes[i], 0, 0);
        continue;
      }
      for (std::size_t k = 0; k < e_.dim(x, i); ++k) l[i](k, k) = 1;
      for (std::size_t k = 0; k < e_.dim(y, i); ++k) r[i](e_.dim(x, i) + k, k) = 1;
    }
    return FibreSum{s, e_.make(x, s, id, l), e_.make(y, s, id, r)};
  }
  std::optional<Obj> zero_object(Obj b) const override {
    return e_.make_obj(b, std::vector<std::uint32_t>(e_.np(), 0));
  }

 private:
  const FinCat& base_;
  Rings rings_;
  ModuleTotal e_;
  ModuleProjection p_;
};

}  // namespace

std::unique_ptr<MonoidalOpfibration> make_module_opfibration(const FinCat& base, const ModuleOptions& options) {
  return std::make_unique<ModuleOpfibration>(base, options);
}

}  // namespace fibred
