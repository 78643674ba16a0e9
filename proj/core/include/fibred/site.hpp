#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fibred/algebra.hpp"
#include "fibred/fincat.hpp"

namespace fibred {

/// For each object, families of morphisms out of it (by identifier), in
/// canonical order.
struct PreCotopology {
  std::map<std::string, std::vector<std::vector<std::string>>> families;
  friend bool operator==(const PreCotopology&, const PreCotopology&) = default;
};

/// Families must consist of morphisms out of their object. With
/// `require_identities`, {id_X} must be a family of X.
ValidationReport validate_precotopology(const FinCat& base, const PreCotopology& j, bool require_identities = false);

/// Designated trivial objects and, per object, trivial modules: either listed by
/// name with an optional rank label, or generated ("free": R^0, R^1, ... while
/// the carrier stays in the universe, labelled by rank).
struct TrivialDesignation {
  struct Entry {
    std::string module;
    std::optional<long> rank;
    friend bool operator==(const Entry&, const Entry&) = default;
  };
  struct Family {
    std::string generator;  // "free" or empty
    std::vector<Entry> modules;
    friend bool operator==(const Family&, const Family&) = default;
  };
  std::set<std::string> objects;
  std::map<std::string, Family> modules;
  /// A covering family matches only when every matched module has the same rank.
  bool constant_rank = false;
  friend bool operator==(const TrivialDesignation&, const TrivialDesignation&) = default;
};

/// Objects of the external base go to commutative monoids (by name, or by the
/// name of a carrier with a single monoid structure), morphisms to monoid
/// morphisms by identifier.
struct MonoidDiagram {
  std::map<std::string, std::string> objects;
  std::map<std::string, std::string> morphisms;
  friend bool operator==(const MonoidDiagram&, const MonoidDiagram&) = default;
};

/// F: X -> Comm(P) with modules pulled back along it, a pre-cotopology and a
/// trivial designation on X.
class Site {
 public:
  /// Throws StructuralError on unknown identifiers.
  Site(const FinCat& base, const ModuleCategory& modules, const MonoidDiagram& f, const PreCotopology& j,
       const TrivialDesignation& t, const Limits& limits);

  const FinCat& base() const { return base_; }
  const PreCotopology& cotopology() const { return j_; }
  const TrivialDesignation& designation() const { return t_; }
  const ModuleCategory& modules() const { return mod_; }
  const Functor& functor() const { return *functor_; }
  Obj monoid_at(Obj x) const { return functor_->map_object(x); }
  /// Modules over F(x) in the enumerated universe: the fibre of the pullback at x.
  std::vector<Obj> fibre(Obj x) const;
  /// The fibre at x as a category (morphisms over the identity of F(x)).
  std::unique_ptr<Category> fibre_category(Obj x) const;
  /// Trivial modules at x with their rank labels; throws StructuralError on unknown names.
  const std::vector<std::pair<Obj, std::optional<long>>>& trivial_modules(Obj x) const;

  /// Functoriality of F and well-formedness of J and the designation.
  ValidationReport validate() const;

 private:
  const FinCat& base_;
  const ModuleCategory& mod_;
  PreCotopology j_;
  TrivialDesignation t_;
  Limits limits_;
  std::vector<Obj> objects_;
  std::vector<Mor> morphisms_;
  std::unique_ptr<Functor> functor_;
  std::map<Obj, std::vector<std::pair<Obj, std::optional<long>>>> trivial_;
};

/// Modules pulled back along F: objects (x, M) with M over F(x). The lift of u at
/// (x, M) is (u, unit of the extension along F(u)).
class PulledBackModules {
 public:
  explicit PulledBackModules(const Site& s);

  const PullbackCategory& total() const { return *total_; }
  /// Objects over x.
  std::vector<Obj> fibre(Obj x) const;
  /// nullopt when the extended module is outside the enumerated universe.
  std::optional<Mor> lift(const Mor& u, Obj e) const;
  /// Each fibre is the module fibre of F(x) and each lift has an opcartesian
  /// module component.
  ValidationReport verify(const Limits& limits) const;

 private:
  const Site& s_;
  std::unique_ptr<PullbackCategory> total_;
};

/// Some family of J(x) lies entirely in the trivial objects.
struct ObjectTriviality {
  bool locally_trivial = false;
  std::optional<std::size_t> family;
};
ObjectTriviality is_locally_trivial_object(const Site& s, Obj x);

/// Some family of J(x) along which M extends to trivial modules (with equal ranks
/// under constant_rank). The witness lists, per morphism, the matched trivial
/// module and its rank.
struct ModuleTriviality {
  bool locally_trivial = false;
  std::optional<std::size_t> family;
  std::vector<std::string> matches;
  std::string reason;
};
ModuleTriviality is_locally_trivial_module(const Site& s, Obj x, Obj module);

/// Loc_x: full subcategory of the fibre on the locally trivial modules. A warning
/// is recorded when x itself is not locally trivial.
struct Loc {
  Obj object = 0;
  std::unique_ptr<Category> fibre;
  std::unique_ptr<FullSubcategory> category;
  std::vector<Obj> modules;
  bool object_locally_trivial = false;
  ValidationReport report;
};
Loc build_loc(const Site& s, Obj x);

/// Extension along F(u) restricted to Loc_x: where each module lands (up to
/// isomorphism in Loc_y), the modules that leave Loc, and functoriality on
/// sampled morphisms.
struct InducedFunctor {
  std::map<Obj, Obj> objects;
  std::vector<Obj> offenders;
  ValidationReport report;
};
InducedFunctor induced_functor_on_loc(const Site& s, const Mor& u, const Limits& limits);

}  // namespace fibred
