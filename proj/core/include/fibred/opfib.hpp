#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "fibred/category.hpp"
#include "fibred/fincat.hpp"
#include "fibred/limits.hpp"
#include "fibred/report.hpp"

namespace fibred {

/// Sum of two objects of one fibre with its injections.
struct FibreSum {
  Obj object = 0;
  Mor left, right;
};

/// Colimits computed inside a single fibre.
class FibreColimits {
 public:
  virtual ~FibreColimits() = default;
  /// Coequalizer of f, g: X -> Y lying in one fibre; returns q: Y -> Q.
  virtual Mor coequalizer(const Mor& f, const Mor& g) const = 0;
  /// The morphism u with u∘e = t for every (e, t), if one exists. The e share a
  /// target and are expected to be jointly epic, which makes u unique.
  virtual std::optional<Mor> factor(const std::vector<std::pair<Mor, Mor>>& constraints) const = 0;
  /// Direct sum in a fibre, when the backend has one.
  virtual std::optional<FibreSum> direct_sum(Obj, Obj) const { return std::nullopt; }
  /// Zero (initial) object of the fibre over b.
  virtual std::optional<Obj> zero_object(Obj) const { return std::nullopt; }
};

/// A monoidal opfibration (E -P-> B, ⊗, I, α, λ, ρ) with a chosen cleavage and an
/// optional braiding. Structure maps may throw StructuralError when a table entry
/// is missing; the verifiers turn those into structural findings.
class MonoidalOpfibration {
 public:
  virtual ~MonoidalOpfibration() = default;

  virtual const Category& total() const = 0;
  virtual const Category& base() const = 0;
  virtual const Projection& projection() const = 0;

  /// Chosen lift of f: P(e) -> B at e.
  virtual Mor lift(const Mor& f, Obj e) const = 0;
  Obj transport(const Mor& f, Obj e) const { return lift(f, e).tgt; }

  virtual Obj tensor(Obj a, Obj b) const = 0;
  /// f ⊗ g for f, g over the same base morphism.
  virtual Mor tensor(const Mor& f, const Mor& g) const = 0;
  virtual Obj unit(Obj b) const = 0;
  virtual Mor unit(const Mor& h) const = 0;
  /// (a⊗b)⊗c -> a⊗(b⊗c)
  virtual Mor associator(Obj a, Obj b, Obj c) const = 0;
  /// I⊗a -> a
  virtual Mor left_unitor(Obj a) const = 0;
  /// a⊗I -> a
  virtual Mor right_unitor(Obj a) const = 0;

  virtual bool has_braiding() const { return false; }
  /// a⊗b -> b⊗a
  virtual Mor braiding(Obj a, Obj b) const;

  virtual const FibreColimits* colimits() const { return nullptr; }

  /// Right actions M⊗R -> M on `carrier` satisfying the unit law for (μ, η) on R,
  /// as candidates for validation. The default enumerates the fibre hom-set.
  virtual std::vector<Mor> action_candidates(const Mor& mu, const Mor& eta, Obj carrier, const Limits& limits) const;
  /// Every α over P(φ) with σ∘(α⊗φ) = α∘κ. The default filters the hom-set.
  virtual void for_each_equivariant(const Mor& kappa, const Mor& sigma, const Mor& phi,
                                    const MorVisitor& visit) const;

  /// Whether x is small enough to carry monoid structures in the enumerated universe.
  virtual bool monoid_carrier(Obj) const { return true; }

  /// Universe objects over b, in handle order.
  std::vector<Obj> fibre_objects(Obj b) const;
  Mor base_of(const Mor& m) const { return projection().map_morphism(m); }
  Obj base_of(Obj x) const { return projection().map_object(x); }
};

/// Outcome of the opcartesian test for one morphism.
struct OpcartesianCertificate {
  bool opcartesian = true;
  CheckMode mode = CheckMode::exhaustive;
  std::uint64_t cases = 0;
  // first failure: a morphism g: E -> E'' over k = h∘P(m) with `fillers` != 1 lifts of h
  std::optional<Obj> target;
  std::optional<Mor> factor;
  std::optional<Mor> witness;
  std::uint64_t fillers = 0;
  std::string detail;
};

/// m is opcartesian iff for every E'' in the universe and every h out of P(E'),
/// precomposition with m is a bijection Hom_h(E', E'') -> Hom_{h∘P(m)}(E, E'').
/// Throws StructuralError if m is not a morphism of the total category.
OpcartesianCertificate is_opcartesian(const Projection& p, const Mor& m, const Limits& limits);

/// Some ĥ over h with ĥ∘m = g.
std::optional<Mor> find_filler(const Projection& p, const Mor& m, const Mor& g, const Mor& h);
/// Number of ĥ over h with ĥ∘m = g (saturating).
std::uint64_t count_fillers(const Projection& p, const Mor& m, const Mor& g, const Mor& h, const Limits& limits);

/// Chosen lifts: nullopt marks a missing entry.
using Cleavage = std::function<std::optional<Mor>(const Mor& f, Obj e)>;

ValidationReport verify_opfibration(const Projection& p, const Cleavage& cleavage, const Limits& limits);
ValidationReport verify_opfibration(const MonoidalOpfibration& m, const Limits& limits);

/// Tensor (functoriality, over B, opcartesian on lift pairs), unit section, α/λ/ρ
/// natural isos over B, pentagon and triangle in every fibre. Reports strictness
/// as a note.
ValidationReport verify_monoidal_opfibration(const MonoidalOpfibration& m, const Limits& limits);
/// Throws UnsupportedError("not claimed symmetric") without a braiding.
ValidationReport verify_symmetry(const MonoidalOpfibration& m, const Limits& limits);

/// Morphisms generating Hom_over(x, y) for multilinear identities: a basis plus
/// zero when linear, everything when small, samples otherwise.
struct HomGenerators {
  std::vector<Mor> morphisms;
  CheckMode mode = CheckMode::exhaustive;
};
HomGenerators hom_generators(const Category& c, Obj x, Obj y, std::optional<std::uint32_t> over, const Limits& limits,
                             Rng& rng);

/// f_*: E_A -> E_B induced by the cleavage.
class DirectImage final : public Functor {
 public:
  DirectImage(const MonoidalOpfibration& m, const Mor& f);

  const Category& source() const override { return *src_; }
  const Category& target() const override { return *tgt_; }
  Obj map_object(Obj x) const override { return m_.transport(f_, x); }
  /// Unique fibre morphism with f_*(u)∘lift(f,X) = lift(f,Y)∘u.
  Mor map_morphism(const Mor& u) const override;

  const Mor& base_morphism() const { return f_; }
  /// f_*X ⊗ f_*Y -> f_*(X⊗Y)
  Mor tensor_comparison(Obj x, Obj y) const;
  /// I_B -> f_*(I_A)
  Mor unit_comparison() const;

 private:
  const MonoidalOpfibration& m_;
  Mor f_;
  std::unique_ptr<FibreCategory> src_, tgt_;
};

/// Functoriality of f_*, invertibility of the comparisons and the strong-monoidal
/// coherence squares.
ValidationReport certify_direct_image(const MonoidalOpfibration& m, const Mor& f, const Limits& limits);

/// (g∘f)_* ≅ g_*∘f_*: component at X is the fibre morphism c with
/// c∘lift(g∘f, X) = lift(g, f_*X)∘lift(f, X). Checks existence, uniqueness,
/// invertibility and naturality.
ValidationReport certify_pseudofunctoriality(const MonoidalOpfibration& m, const Mor& f, const Mor& g,
                                             const Limits& limits);

/// Number of fibre morphisms c: f_*E -> T with c∘lift(f,E) = other, where other is
/// another lift of (f, E) ending at T.
std::uint64_t connecting_morphisms(const MonoidalOpfibration& m, const Mor& f, Obj e, const Mor& other,
                                   const Limits& limits);

/// Overrides of individual structure components, for mutation studies.
struct StructureOverrides {
  std::map<std::tuple<Obj, Obj, Obj>, Mor> associator;
  std::map<Obj, Mor> left_unitor, right_unitor;
  std::map<std::pair<Obj, Obj>, Mor> braiding;
  /// keyed by (base morphism name, object)
  std::map<std::pair<std::string, Obj>, Mor> cleavage;
  /// keyed by base morphism name
  std::map<std::string, Mor> unit;

  bool empty() const {
    return associator.empty() && left_unitor.empty() && right_unitor.empty() && braiding.empty() &&
           cleavage.empty() && unit.empty();
  }
};

class OverriddenOpfibration final : public MonoidalOpfibration {
 public:
  OverriddenOpfibration(const MonoidalOpfibration& inner, StructureOverrides o) : in_(inner), o_(std::move(o)) {}

  const Category& total() const override { return in_.total(); }
  const Category& base() const override { return in_.base(); }
  const Projection& projection() const override { return in_.projection(); }
  Mor lift(const Mor& f, Obj e) const override;
  Obj tensor(Obj a, Obj b) const override { return in_.tensor(a, b); }
  Mor tensor(const Mor& f, const Mor& g) const override { return in_.tensor(f, g); }
  Obj unit(Obj b) const override { return in_.unit(b); }
  Mor unit(const Mor& h) const override;
  Mor associator(Obj a, Obj b, Obj c) const override;
  Mor left_unitor(Obj a) const override;
  Mor right_unitor(Obj a) const override;
  bool has_braiding() const override { return in_.has_braiding(); }
  Mor braiding(Obj a, Obj b) const override;
  const FibreColimits* colimits() const override { return in_.colimits(); }
  std::vector<Mor> action_candidates(const Mor& mu, const Mor& eta, Obj carrier, const Limits& l) const override {
    return in_.action_candidates(mu, eta, carrier, l);
  }
  void for_each_equivariant(const Mor& kappa, const Mor& sigma, const Mor& phi,
                            const MorVisitor& visit) const override {
    in_.for_each_equivariant(kappa, sigma, phi, visit);
  }
  bool monoid_carrier(Obj x) const override { return in_.monoid_carrier(x); }

 private:
  const MonoidalOpfibration& in_;
  StructureOverrides o_;
};

}  // namespace fibred
