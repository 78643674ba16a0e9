#pragma once

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "fibred/opfib.hpp"

namespace fibred {

/// Append-only table whose elements never move: readers index it without a lock,
/// writers append under the owner's lock.
template <class T>
class StableTable {
 public:
  static constexpr std::size_t kChunk = 1024, kMaxChunks = 1 << 14;
  StableTable() : chunks_(kMaxChunks) {}
  std::size_t size() const noexcept { return size_.load(std::memory_order_acquire); }
  const T& operator[](std::size_t i) const { return chunks_[i / kChunk][i % kChunk]; }
  std::size_t push(T v) {
    const std::size_t i = size_.load(std::memory_order_relaxed);
    if (i / kChunk >= kMaxChunks) throw std::length_error("interned table is full");
    if (!chunks_[i / kChunk]) chunks_[i / kChunk] = std::make_unique<T[]>(kChunk);
    chunks_[i / kChunk][i % kChunk] = std::move(v);
    size_.store(i + 1, std::memory_order_release);
    return i;
  }

 private:
  std::vector<std::unique_ptr<T[]>> chunks_;
  std::atomic<std::size_t> size_{0};
};

/// (R, μ: R⊗R -> R, η: I -> R) in one fibre.
struct MonoidObject {
  Obj carrier = 0;
  Mor mu, eta;
  friend bool operator==(const MonoidObject&, const MonoidObject&) = default;
};

/// (R, (M, κ: M⊗R -> M)); `monoid` is an object of the monoid category.
struct ModuleObject {
  Obj monoid = 0;
  Obj carrier = 0;
  Mor kappa;
  friend bool operator==(const ModuleObject&, const ModuleObject&) = default;
};

ValidationReport validate_monoid(const MonoidalOpfibration& m, const MonoidObject& r, bool commutative);
/// φ∘μ = ν∘(φ⊗φ) and φ∘η = η_S∘I(P(φ)).
ValidationReport validate_monoid_morphism(const MonoidalOpfibration& m, const MonoidObject& r, const MonoidObject& s,
                                          const Mor& phi);
ValidationReport validate_module(const MonoidalOpfibration& m, const MonoidObject& r, Obj carrier, const Mor& kappa);

/// Mon(P) or Comm(P): monoids in the fibres, morphisms the underlying total
/// morphisms commuting with μ and η. Objects are interned; the enumerated universe
/// is a prefix and constructions may add objects beyond it.
class MonoidCategory final : public Category {
 public:
  /// Throws TruncationError naming the bound when a candidate space exceeds the budget.
  MonoidCategory(const MonoidalOpfibration& m, bool commutative_only, const Limits& limits);

  const MonoidalOpfibration& fibration() const { return m_; }
  bool commutative_only() const { return comm_; }
  const MonoidObject& monoid(Obj x) const;
  Obj intern(const MonoidObject& r) const;
  Mor underlying(const Mor& phi) const;
  /// The monoid morphism with underlying total morphism f.
  Mor from_underlying(Obj x, Obj y, const Mor& f) const;
  bool is_monoid_morphism(Obj x, Obj y, const Mor& f) const;
  /// Transport of R along h: the lift of the carrier with the induced structure.
  Mor lift(const Mor& h, Obj x) const;
  const Projection& projection() const { return *proj_; }

  const std::vector<Obj>& objects() const override { return universe_; }
  bool in_universe(Obj x) const override { return std::binary_search(universe_.begin(), universe_.end(), x); }
  std::string object_name(Obj x) const override;
  std::string morphism_name(const Mor& m) const override;
  Mor identity(Obj x) const override;
  Mor compose(const Mor& g, const Mor& f) const override;
  void for_each_hom(Obj x, Obj y, const MorVisitor& visit) const override;
  void for_each_hom_over(Obj x, Obj y, std::uint32_t over, const MorVisitor& visit) const override;
  std::optional<Mor> inverse(const Mor& m) const override;
  std::optional<Obj> find_object(std::string_view name) const override;
  std::optional<Mor> find_morphism(Obj x, Obj y, std::string_view name) const override;
  bool may_be_isomorphic(Obj x, Obj y) const override;

 private:
  const MonoidalOpfibration& m_;
  bool comm_;
  Limits limits_;
  mutable std::shared_mutex mu_;
  mutable StableTable<MonoidObject> table_;
  mutable std::map<std::tuple<Obj, Code, Code>, Obj> index_;
  mutable std::mutex cache_mu_;
  mutable std::map<std::tuple<Obj, Obj, std::uint32_t>, std::shared_ptr<const std::vector<Mor>>> hom_cache_;
  std::vector<Obj> universe_;
  std::unique_ptr<Projection> proj_;

  void enumerate_homs(Obj x, Obj y, std::uint32_t over, const MorVisitor& visit) const;
};

/// Mod(P) over a monoid category: pairs (φ, α) with P(φ) = P(α) and
/// σ∘(α⊗φ) = α∘κ. A morphism's tag is the position of φ in the monoid hom list.
class ModuleCategory final : public Category {
 public:
  ModuleCategory(const MonoidCategory& mon, const Limits& limits);
  ~ModuleCategory() override;

  const MonoidCategory& monoids() const { return mon_; }
  const MonoidalOpfibration& fibration() const { return mon_.fibration(); }
  const ModuleObject& module(Obj x) const;
  Obj intern(const ModuleObject& m) const;
  /// (φ, α) as a morphism; throws StructuralError if it is not one.
  Mor make(Obj x, Obj y, const Mor& phi, const Mor& alpha) const;
  Mor phi(const Mor& m) const;
  Mor alpha(const Mor& m) const;
  const std::vector<Mor>& monoid_homs(Obj r, Obj s) const;
  std::uint32_t tag_of_phi(Obj r, Obj s, const Mor& phi) const;
  const Projection& projection() const { return *proj_; }
  /// Objects over the given monoid, in handle order.
  std::vector<Obj> modules_over(Obj monoid) const;

  const std::vector<Obj>& objects() const override { return universe_; }
  bool in_universe(Obj x) const override { return std::binary_search(universe_.begin(), universe_.end(), x); }
  std::string object_name(Obj x) const override;
  std::string morphism_name(const Mor& m) const override;
  Mor identity(Obj x) const override;
  Mor compose(const Mor& g, const Mor& f) const override;
  void for_each_hom(Obj x, Obj y, const MorVisitor& visit) const override;
  void for_each_hom_over(Obj x, Obj y, std::uint32_t over, const MorVisitor& visit) const override;
  std::uint64_t hom_size_over(Obj x, Obj y, std::uint32_t over) const override;
  std::uint64_t hom_size(Obj x, Obj y) const override;
  std::optional<Mor> sample_hom_over(Obj x, Obj y, std::uint32_t over, Rng& rng) const override;
  std::optional<Mor> inverse(const Mor& m) const override;
  const LinearHoms* linear() const override { return linear_.get(); }
  std::optional<Obj> find_object(std::string_view name) const override;
  std::optional<Mor> find_morphism(Obj x, Obj y, std::string_view name) const override;
  bool may_be_isomorphic(Obj x, Obj y) const override;

 private:
  friend class ModuleLinearHoms;
  const MonoidCategory& mon_;
  Limits limits_;
  mutable std::shared_mutex mu_;
  mutable StableTable<ModuleObject> table_;
  mutable std::map<std::tuple<Obj, Obj, Code>, Obj> index_;
  mutable std::map<std::pair<Obj, Obj>, std::vector<Mor>> homs_;
  mutable std::mutex cache_mu_;
  mutable std::map<std::tuple<Obj, Obj, std::uint32_t>, std::shared_ptr<const std::vector<Mor>>> hom_cache_;
  std::vector<Obj> universe_;
  std::unique_ptr<Projection> proj_;
  std::unique_ptr<LinearHoms> linear_;

  std::shared_ptr<const std::vector<Mor>> cached_homs(Obj x, Obj y, std::uint32_t over) const;
};

/// Restriction of scalars along φ: R -> S over an identity: carrier N, action σ∘(N⊗φ).
Obj restriction_of_scalars(const ModuleCategory& mod, const Mor& phi, Obj module);

/// Coequalizer of a reflexive pair with its section checked.
struct Coequalizer {
  Mor quotient;
  bool reflexive = false;
};
Coequalizer reflexive_coequalizer(const MonoidalOpfibration& m, const Mor& f, const Mor& g, const Mor& section);

/// Checks that q coequalizes (f, g) and that precomposition with q is a bijection
/// Hom(Q, T) -> {t : t∘f = t∘g} for every test object T. Tests whose hom-sets are
/// too large to count are skipped and counted.
struct CoequalizerCertificate {
  bool ok = true;
  std::size_t tested = 0, skipped = 0;
  std::string detail;
};
CoequalizerCertificate certify_coequalizer(const MonoidalOpfibration& m, const Mor& f, const Mor& g, const Mor& q,
                                           const std::vector<Obj>& tests, const Limits& limits);

/// M⊗_R S along a monoid morphism φ: R -> S (over any base morphism): transport
/// along P(φ), then the coequalizer of M'⊗R'⊗S ⇉ M'⊗S.
struct Extension {
  Obj module = 0;      // object of the module category
  Mor unit;            // (φ, u): M -> M⊗_R S in the module category
  Mor f, g, section;   // the reflexive pair and its section
  Mor quotient;        // M'⊗S -> M⊗_R S
};
Extension extension_of_scalars(const ModuleCategory& mod, Obj module, const Mor& phi);

/// φ_!(β): φ_!M -> φ_!M' for β: M -> M' over the identity of R.
Mor extend_morphism(const ModuleCategory& mod, const Mor& beta, const Mor& phi);

/// An isomorphism of modules over the identity of their common monoid.
std::optional<Mor> module_isomorphism(const ModuleCategory& mod, Obj x, Obj y);

/// Direct sum of modules over one monoid.
std::optional<Obj> module_direct_sum(const ModuleCategory& mod, Obj x, Obj y);

/// The free module R^k as an iterated sum of the regular module; nullopt if a
/// carrier leaves the universe.
std::optional<Obj> free_module(const ModuleCategory& mod, Obj monoid, std::size_t rank);

/// Hypotheses (reflexive coequalizers, preserved by each f_* and each −⊗E) and
/// conclusion (Mod -> Mon and Mon -> B are opfibrations).
ValidationReport verify_modovermon(const ModuleCategory& mod, const Limits& limits);

/// |Hom_S(φ_!M, N)| against |Hom_R(M, φ*N)| with the bijection β ↦ β∘u checked.
struct AdjunctionCount {
  std::uint64_t extension_side = 0, restriction_side = 0;
  bool bijection = false;
};
AdjunctionCount adjunction_count(const ModuleCategory& mod, Obj module, const Mor& phi, Obj target,
                                 const Limits& limits);

/// Module morphisms c: (ψ∘φ)_!M -> ψ_!φ_!M over the identity with
/// c∘u_{ψ∘φ} = u_ψ∘u_φ, and how many of them are invertible.
struct ConnectingCount {
  std::uint64_t morphisms = 0, isomorphisms = 0;
};
ConnectingCount extension_pseudofunctoriality(const ModuleCategory& mod, Obj module, const Mor& phi, const Mor& psi,
                                              const Limits& limits);

/// The fibre over b as a monoidal opfibration over the terminal category.
std::unique_ptr<MonoidalOpfibration> fibre_opfibration(const MonoidalOpfibration& m, Obj b);

/// Mod restricted to modules and morphisms over id_b.
std::unique_ptr<Category> module_fibre_over_base(const ModuleCategory& mod, Obj b);

/// Equality of the fibre of Mod -> Mon -> B at b with Mod(E_b) -> Mon(E_b) built
/// from the standalone fibre, including the projections.
ValidationReport fibre_restriction_check(const ModuleCategory& mod, Obj b, const Limits& limits);
/// Same comparison against caller-supplied intrinsic builds.
ValidationReport compare_fibre_restriction(const ModuleCategory& mod, Obj b, const Category& intrinsic_mon,
                                           const Category& intrinsic_mod, const Limits& limits);

}  // namespace fibred
