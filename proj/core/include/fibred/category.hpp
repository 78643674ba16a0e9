#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "fibred/code.hpp"

namespace fibred {

/// Object handle. Interpretation is private to the owning category: an index for
/// explicit presentations, a packed value for algebraic backends.
using Obj = std::uint64_t;

/// A morphism src -> tgt. `over` tags the component of the hom-set the morphism
/// lives in (for total categories, the morphism it projects to); `code` is the payload.
struct Mor {
  Obj src = 0;
  Obj tgt = 0;
  std::uint32_t over = 0;
  Code code;

  friend bool operator==(const Mor& a, const Mor& b) {
    return a.src == b.src && a.tgt == b.tgt && a.over == b.over && a.code == b.code;
  }
  friend bool operator<(const Mor& a, const Mor& b) {
    if (a.src != b.src) return a.src < b.src;
    if (a.tgt != b.tgt) return a.tgt < b.tgt;
    if (a.over != b.over) return a.over < b.over;
    return std::lexicographical_compare(a.code.begin(), a.code.end(), b.code.begin(), b.code.end());
  }
};

struct MorHash {
  std::size_t operator()(const Mor& m) const noexcept {
    return hash_code(m.code) ^ (std::hash<Obj>{}(m.src) * 31) ^ (std::hash<Obj>{}(m.tgt) * 131) ^
           (std::size_t{m.over} << 17);
  }
};

using Rng = std::mt19937_64;

/// Visitor over a hom-set; return false to stop the enumeration.
using MorVisitor = std::function<bool(const Mor&)>;

class LinearHoms;

/// A finite category, possibly presented lazily. `objects()` is the enumerated
/// universe; hom-sets are enumerated on demand and may be large.
class Category {
 public:
  virtual ~Category() = default;

  virtual const std::vector<Obj>& objects() const = 0;
  virtual bool in_universe(Obj x) const;
  virtual std::string object_name(Obj x) const = 0;
  virtual std::string morphism_name(const Mor& m) const = 0;

  virtual Mor identity(Obj x) const = 0;
  /// g after f; requires f.tgt == g.src.
  virtual Mor compose(const Mor& g, const Mor& f) const = 0;

  virtual void for_each_hom(Obj x, Obj y, const MorVisitor& visit) const = 0;
  /// Morphisms x -> y carrying tag `over`. Default filters the full hom-set.
  virtual void for_each_hom_over(Obj x, Obj y, std::uint32_t over, const MorVisitor& visit) const;

  /// Saturates at UINT64_MAX.
  virtual std::uint64_t hom_size(Obj x, Obj y) const;
  virtual std::uint64_t hom_size_over(Obj x, Obj y, std::uint32_t over) const;
  virtual std::optional<Mor> sample_hom(Obj x, Obj y, Rng& rng) const;
  virtual std::optional<Mor> sample_hom_over(Obj x, Obj y, std::uint32_t over, Rng& rng) const;

  virtual std::optional<Mor> inverse(const Mor& m) const;
  virtual const LinearHoms* linear() const { return nullptr; }

  virtual std::optional<Obj> find_object(std::string_view name) const;
  virtual std::optional<Mor> find_morphism(Obj x, Obj y, std::string_view name) const;

  /// Complete isomorphism invariant when the category knows one: objects are
  /// isomorphic iff their keys are equal. nullopt means "search instead".
  virtual std::optional<std::string> canonical_key(Obj) const { return std::nullopt; }
  /// Cheap necessary condition for x ≅ y; false rules an isomorphism out.
  virtual bool may_be_isomorphic(Obj, Obj) const { return true; }

  bool is_identity(const Mor& m) const { return m.src == m.tgt && m == identity(m.src); }
  bool is_iso(const Mor& m) const { return inverse(m).has_value(); }
};

class Functor {
 public:
  virtual ~Functor() = default;
  virtual const Category& source() const = 0;
  virtual const Category& target() const = 0;
  virtual Obj map_object(Obj x) const = 0;
  virtual Mor map_morphism(const Mor& m) const = 0;
};

/// A functor P: E -> B whose source tags each morphism with (a code for) its image,
/// so the morphisms lying over a given h can be enumerated directly.
class Projection : public Functor {
 public:
  /// Tag carried by source morphisms x -> y over the target morphism h.
  virtual std::uint32_t tag_of(Obj x, Obj y, const Mor& h) const = 0;
};

/// Functor given by two callables.
class LambdaFunctor final : public Functor {
 public:
  LambdaFunctor(const Category& src, const Category& tgt, std::function<Obj(Obj)> on_objects,
                std::function<Mor(const Mor&)> on_morphisms)
      : src_(src), tgt_(tgt), obj_(std::move(on_objects)), mor_(std::move(on_morphisms)) {}

  const Category& source() const override { return src_; }
  const Category& target() const override { return tgt_; }
  Obj map_object(Obj x) const override { return obj_(x); }
  Mor map_morphism(const Mor& m) const override { return mor_(m); }

 private:
  const Category& src_;
  const Category& tgt_;
  std::function<Obj(Obj)> obj_;
  std::function<Mor(const Mor&)> mor_;
};

class IdentityFunctor final : public Functor {
 public:
  explicit IdentityFunctor(const Category& c) : c_(c) {}
  const Category& source() const override { return c_; }
  const Category& target() const override { return c_; }
  Obj map_object(Obj x) const override { return x; }
  Mor map_morphism(const Mor& m) const override { return m; }

 private:
  const Category& c_;
};

/// Saturating product for hom-size arithmetic.
std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) noexcept;
std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) noexcept;

/// Deterministic generator for a check: seed mixed with a context string.
Rng make_rng(std::uint64_t seed, std::string_view context);

}  // namespace fibred
