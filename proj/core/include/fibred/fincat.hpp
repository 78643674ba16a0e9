#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fibred/category.hpp"
#include "fibred/limits.hpp"
#include "fibred/linear.hpp"
#include "fibred/report.hpp"

namespace fibred {

/// A finite category as explicit lists and a composition table keyed by
/// (g, f) -> g∘f. Identifiers are opaque strings.
struct FinCatPresentation {
  struct Morphism {
    std::string id;
    std::string source;
    std::string target;
    friend bool operator==(const Morphism&, const Morphism&) = default;
  };

  std::vector<std::string> objects;
  std::vector<Morphism> morphisms;
  std::map<std::string, std::string> identities;
  std::map<std::pair<std::string, std::string>, std::string> composites;

  friend bool operator==(const FinCatPresentation&, const FinCatPresentation&) = default;
};

/// Interned explicit category. Objects and morphisms are numbered in lexicographic
/// order of their identifiers; Obj is the object number and a morphism's code is
/// its number. Missing composites are kept as holes and reported by validation.
class FinCat final : public Category {
 public:
  static constexpr std::int32_t kNone = -1;

  FinCat() = default;
  /// Throws StructuralError on duplicate or dangling identifiers.
  static FinCat from(const FinCatPresentation& p);

  std::size_t num_objects() const noexcept { return object_ids_.size(); }
  std::size_t num_morphisms() const noexcept { return mor_ids_.size(); }
  const std::string& object_id(std::size_t i) const { return object_ids_.at(i); }
  const std::string& morphism_id(std::size_t i) const { return mor_ids_.at(i); }
  std::size_t source_of(std::size_t m) const { return src_.at(m); }
  std::size_t target_of(std::size_t m) const { return tgt_.at(m); }
  std::size_t identity_of(std::size_t x) const { return id_.at(x); }
  std::optional<std::size_t> composite(std::size_t g, std::size_t f) const;
  const std::vector<std::size_t>& hom_list(std::size_t x, std::size_t y) const;
  std::optional<std::size_t> object_index(std::string_view id) const;
  std::optional<std::size_t> morphism_index(std::string_view id) const;

  Mor mor(std::size_t i) const;
  static std::size_t index(const Mor& m) { return static_cast<std::size_t>(m.code.at(0)); }

  /// Per-morphism tags reported as Mor::over (used when this is the total
  /// category of an explicit fibration: the tag is the index of the image).
  void set_tags(std::vector<std::uint32_t> tags);

  FinCatPresentation presentation() const;

  // Category
  const std::vector<Obj>& objects() const override { return handles_; }
  bool in_universe(Obj x) const override { return x < object_ids_.size(); }
  std::string object_name(Obj x) const override { return object_ids_.at(x); }
  std::string morphism_name(const Mor& m) const override { return mor_ids_.at(index(m)); }
  Mor identity(Obj x) const override { return mor(id_.at(x)); }
  Mor compose(const Mor& g, const Mor& f) const override;
  void for_each_hom(Obj x, Obj y, const MorVisitor& visit) const override;
  std::uint64_t hom_size(Obj x, Obj y) const override { return hom_list(x, y).size(); }
  std::optional<Obj> find_object(std::string_view name) const override;
  std::optional<Mor> find_morphism(Obj x, Obj y, std::string_view name) const override;

  // Small standard shapes used by tests and bundled examples.
  static FinCat terminal();
  static FinCat discrete(std::size_t n);
  /// One-object category of a finite monoid given by its multiplication table
  /// (element 0 must be the identity).
  static FinCat from_monoid(const std::vector<std::vector<std::size_t>>& table);

 private:
  std::vector<std::string> object_ids_;
  std::vector<std::string> mor_ids_;
  std::vector<std::size_t> src_, tgt_, id_;
  std::vector<std::int32_t> table_;  // g * n + f
  std::vector<std::vector<std::size_t>> homs_;  // x * num_objects + y
  std::vector<std::uint32_t> tags_;
  std::vector<Obj> handles_;
  std::unordered_map<std::string, std::size_t> obj_lookup_, mor_lookup_;
};

/// Functor between explicit categories by identifier maps.
struct FunctorPresentation {
  std::map<std::string, std::string> objects;
  std::map<std::string, std::string> morphisms;
  friend bool operator==(const FunctorPresentation&, const FunctorPresentation&) = default;
};

class ExplicitFunctor final : public Functor {
 public:
  /// Throws StructuralError if the maps are not total or name unknown identifiers.
  ExplicitFunctor(const FinCat& source, const FinCat& target, const FunctorPresentation& p);

  const Category& source() const override { return src_; }
  const Category& target() const override { return tgt_; }
  Obj map_object(Obj x) const override { return obj_.at(x); }
  Mor map_morphism(const Mor& m) const override { return tgt_.mor(mor_.at(FinCat::index(m))); }

 private:
  const FinCat& src_;
  const FinCat& tgt_;
  std::vector<std::size_t> obj_, mor_;
};

/// Structural problems and law violations of an explicit presentation. Never throws.
ValidationReport validate_category(const FinCatPresentation& p);
/// Laws of a (possibly lazy) category: typing of composites, identities, associativity.
ValidationReport validate_category(const Category& c, const Limits& limits);

ValidationReport validate_functor(const FinCatPresentation& source, const FinCatPresentation& target,
                                  const FunctorPresentation& f);
ValidationReport validate_functor(const Functor& f, const Limits& limits);

/// Component lookup for a natural transformation; nullopt marks a missing component.
using Components = std::function<std::optional<Mor>(Obj)>;

/// Checks a transformation F => G: typing, naturality, optionally that every
/// component lies over an identity of `over` and that every component is invertible.
ValidationReport validate_nat_trans(const Functor& f, const Functor& g, const Components& component,
                                    const Functor* over, bool iso, const std::string& name, const Limits& limits);

/// The pullback C ×_B D of F: C -> B and G: D -> B.
class PullbackCategory final : public Category {
 public:
  PullbackCategory(const Functor& f, const Functor& g);

  const Functor& left_projection() const { return *left_; }
  const Functor& right_projection() const { return *right_; }
  std::pair<Obj, Obj> components(Obj x) const { return pairs_.at(x); }
  std::pair<Mor, Mor> components(const Mor& m) const;
  std::optional<Obj> pair_object(Obj c, Obj d) const;
  Mor pair(const Mor& a, const Mor& b) const;

  const std::vector<Obj>& objects() const override { return handles_; }
  bool in_universe(Obj x) const override { return x < pairs_.size(); }
  std::string object_name(Obj x) const override;
  std::string morphism_name(const Mor& m) const override;
  Mor identity(Obj x) const override;
  Mor compose(const Mor& g, const Mor& f) const override;
  void for_each_hom(Obj x, Obj y, const MorVisitor& visit) const override;

 private:
  const Functor& f_;
  const Functor& g_;
  std::vector<std::pair<Obj, Obj>> pairs_;
  std::vector<Obj> handles_;
  std::map<std::pair<Obj, Obj>, Obj> index_;
  std::unique_ptr<Functor> left_, right_;
};

/// Every isomorphism X -> Y with its inverse, each exactly once.
std::vector<std::pair<Mor, Mor>> find_isomorphisms(const Category& c, Obj x, Obj y);
/// First isomorphism X -> Y if any. Rejects early on hom-count invariants.
std::optional<std::pair<Mor, Mor>> first_isomorphism(const Category& c, Obj x, Obj y);

/// Full subcategory on a chosen list of objects.
class FullSubcategory : public Category {
 public:
  FullSubcategory(const Category& parent, std::vector<Obj> objects);

  const Category& parent() const { return parent_; }
  const std::vector<Obj>& objects() const override { return objects_; }
  bool in_universe(Obj x) const override;
  std::string object_name(Obj x) const override { return parent_.object_name(x); }
  std::string morphism_name(const Mor& m) const override { return parent_.morphism_name(m); }
  Mor identity(Obj x) const override { return parent_.identity(x); }
  Mor compose(const Mor& g, const Mor& f) const override { return parent_.compose(g, f); }
  void for_each_hom(Obj x, Obj y, const MorVisitor& visit) const override { parent_.for_each_hom(x, y, visit); }
  void for_each_hom_over(Obj x, Obj y, std::uint32_t over, const MorVisitor& visit) const override {
    parent_.for_each_hom_over(x, y, over, visit);
  }
  std::uint64_t hom_size(Obj x, Obj y) const override { return parent_.hom_size(x, y); }
  std::uint64_t hom_size_over(Obj x, Obj y, std::uint32_t over) const override {
    return parent_.hom_size_over(x, y, over);
  }
  std::optional<Mor> sample_hom(Obj x, Obj y, Rng& rng) const override { return parent_.sample_hom(x, y, rng); }
  std::optional<Mor> inverse(const Mor& m) const override { return parent_.inverse(m); }
  const LinearHoms* linear() const override { return parent_.linear(); }
  std::optional<Mor> find_morphism(Obj x, Obj y, std::string_view name) const override {
    return parent_.find_morphism(x, y, name);
  }
  std::optional<std::string> canonical_key(Obj x) const override { return parent_.canonical_key(x); }
  bool may_be_isomorphic(Obj x, Obj y) const override { return parent_.may_be_isomorphic(x, y); }

 private:
  const Category& parent_;
  std::vector<Obj> objects_;
};

/// The fibre P^{-1}(b): objects over b, morphisms over id_b.
class FibreCategory final : public Category {
 public:
  /// Throws StructuralError if b is not an object of P's target.
  FibreCategory(const Functor& p, Obj b);

  Obj base_object() const { return b_; }
  const Functor& inclusion() const { return *inclusion_; }

  const std::vector<Obj>& objects() const override { return objects_; }
  bool in_universe(Obj x) const override;
  std::string object_name(Obj x) const override { return total_.object_name(x); }
  std::string morphism_name(const Mor& m) const override { return total_.morphism_name(m); }
  Mor identity(Obj x) const override { return total_.identity(x); }
  Mor compose(const Mor& g, const Mor& f) const override { return total_.compose(g, f); }
  void for_each_hom(Obj x, Obj y, const MorVisitor& visit) const override;
  std::uint64_t hom_size(Obj x, Obj y) const override;
  std::optional<Mor> sample_hom(Obj x, Obj y, Rng& rng) const override;
  std::optional<Mor> inverse(const Mor& m) const override { return total_.inverse(m); }
  const LinearHoms* linear() const override { return linear_.get(); }
  std::optional<Mor> find_morphism(Obj x, Obj y, std::string_view name) const override;
  std::optional<std::string> canonical_key(Obj x) const override { return total_.canonical_key(x); }
  bool may_be_isomorphic(Obj x, Obj y) const override { return total_.may_be_isomorphic(x, y); }

 private:
  const Functor& p_;
  const Category& total_;
  Obj b_;
  Mor id_b_;
  const Projection* projection_ = nullptr;
  std::uint32_t tag_ = 0;
  std::vector<Obj> objects_;
  std::unique_ptr<Functor> inclusion_;
  std::unique_ptr<LinearHoms> linear_;
};

/// Explicit copy of a finite category. Throws TruncationError if it has more
/// than `max_morphisms` morphisms.
FinCatPresentation materialize(const Category& c, std::size_t max_morphisms);

/// Equality of categories: same object identifiers and a bijection on morphisms
/// by identifier commuting with source, target and composition.
ValidationReport check_equal(const Category& a, const Category& b, const Limits& limits);

/// Isomorphism of explicit categories (bijective object map); returns the functor.
std::optional<FunctorPresentation> find_category_isomorphism(const FinCat& a, const FinCat& b);

}  // namespace fibred
