#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "fibred/fincat.hpp"
#include "fibred/opfib.hpp"

namespace fibred {

using IdPair = std::pair<std::string, std::string>;
using IdTriple = std::tuple<std::string, std::string, std::string>;

/// A monoidal opfibration given entirely by tables of identifiers.
struct ExplicitOpfibData {
  FinCatPresentation total;
  FinCatPresentation base;
  FunctorPresentation projection;
  /// (base morphism, object) -> chosen lift; missing entries are filled with the
  /// least opcartesian lift by identifier.
  std::map<IdPair, std::string> cleavage;
  std::map<IdPair, std::string> tensor_objects;
  std::map<IdPair, std::string> tensor_morphisms;
  std::map<std::string, std::string> unit_objects;    // base object -> I(b)
  std::map<std::string, std::string> unit_morphisms;  // base morphism -> I(h)
  std::map<IdTriple, std::string> associator;
  std::map<std::string, std::string> left_unitor, right_unitor;
  std::map<IdPair, std::string> braiding;

  friend bool operator==(const ExplicitOpfibData&, const ExplicitOpfibData&) = default;
};

/// Throws StructuralError on dangling identifiers or a projection that is not a functor.
std::unique_ptr<MonoidalOpfibration> make_explicit_opfibration(const ExplicitOpfibData& data, const Limits& limits);

/// Least opcartesian lift of f at e by identifier, if any.
std::optional<Mor> least_opcartesian_lift(const Projection& p, const Mor& f, Obj e, const Limits& limits);

/// A monoidal indexed category over a finite base: one monoidal fibre per base
/// object and a strong monoidal transition functor per non-identity base morphism.
struct IndexedMonoidalPresentation {
  struct Fibre {
    FinCatPresentation category;
    std::map<IdPair, std::string> tensor_objects;
    std::map<IdPair, std::string> tensor_morphisms;
    std::string unit;
    std::map<IdTriple, std::string> associator;
    std::map<std::string, std::string> left_unitor, right_unitor;
    std::map<IdPair, std::string> braiding;
    friend bool operator==(const Fibre&, const Fibre&) = default;
  };
  struct Transition {
    FunctorPresentation functor;
    /// (X, Y) -> f_*(X⊗Y) -> f_*X ⊗ f_*Y; missing entries mean identity.
    std::map<IdPair, std::string> tensor_comparison;
    /// f_*(I_A) -> I_B; empty means identity.
    std::string unit_comparison;
    friend bool operator==(const Transition&, const Transition&) = default;
  };

  FinCatPresentation base;
  std::map<std::string, Fibre> fibres;            // by base object
  std::map<std::string, Transition> transitions;  // by non-identity base morphism
  /// (g, f, X) -> (g∘f)_*X -> g_*f_*X; missing entries mean identity.
  std::map<IdTriple, std::string> composition;

  friend bool operator==(const IndexedMonoidalPresentation&, const IndexedMonoidalPresentation&) = default;
};

struct GrothendieckResult {
  ExplicitOpfibData data;
  ValidationReport report;
};

/// Total category with objects "b:X" and morphisms "f[X;m]" for m: f_*X -> Y in
/// the fibre over the target of f. Composition uses the composition isos;
/// incoherent data is reported with the failing triple of base morphisms.
GrothendieckResult grothendieck_construction(const IndexedMonoidalPresentation& p);

}  // namespace fibred
