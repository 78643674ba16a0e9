#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fibred/error.hpp"
#include "fibred/explicit.hpp"
#include "fibred/fincat.hpp"
#include "fibred/site.hpp"

namespace fibred::cli {

inline constexpr const char* kFormat = "fibred/1";

/// Which fibres the base carries and their universe bounds.
struct FibreSpec {
  std::string backend;  // finite-set | finite-module | finite-field-vect | enumerated | finite-abelian
  std::optional<std::uint64_t> universe_bound;
  std::optional<std::uint32_t> monoid_bound;
  std::map<std::string, std::uint32_t> rings;  // finite-module: Z/n per base object
  std::optional<std::uint32_t> field;          // finite-field-vect: q
  std::optional<std::uint32_t> dimension_bound;
  std::optional<IndexedMonoidalPresentation> indexed;  // enumerated
  friend bool operator==(const FibreSpec&, const FibreSpec&) = default;
};

/// Replacement structure components, by identifier.
struct OverrideSpec {
  struct Associator {
    std::array<std::string, 3> objects;
    std::string morphism;
    friend bool operator==(const Associator&, const Associator&) = default;
  };
  struct Lift {
    std::string base, object, morphism;
    friend bool operator==(const Lift&, const Lift&) = default;
  };
  struct Unit {
    std::string base, morphism;
    friend bool operator==(const Unit&, const Unit&) = default;
  };
  std::vector<Associator> associator;
  std::vector<Lift> lift;
  std::vector<Unit> unit;
  bool empty() const { return associator.empty() && lift.empty() && unit.empty(); }
  friend bool operator==(const OverrideSpec&, const OverrideSpec&) = default;
};

struct SiteSpec {
  /// External base; the fibration's base when absent.
  std::optional<FinCatPresentation> base;
  MonoidDiagram diagram;
  PreCotopology cotopology;
  bool require_identities = false;
  TrivialDesignation trivial;
  friend bool operator==(const SiteSpec&, const SiteSpec&) = default;
};

struct KZeroRequest {
  std::string category;  // "fibre" (of the fibration) or "loc" (of the site)
  std::string object;
  std::optional<std::string> sum;  // "direct-sum"
  friend bool operator==(const KZeroRequest&, const KZeroRequest&) = default;
};

struct AnalysesSpec {
  bool commutative = true;
  std::uint32_t adjunction_samples = 64;
  std::vector<KZeroRequest> kzero;
  friend bool operator==(const AnalysesSpec&, const AnalysesSpec&) = default;
};

struct LimitsSpec {
  std::optional<std::uint64_t> enumeration_budget;
  std::optional<std::uint32_t> samples;
  std::optional<std::uint64_t> seed;
  friend bool operator==(const LimitsSpec&, const LimitsSpec&) = default;
};

struct Presentation {
  std::string format = kFormat;
  std::string name;
  std::string description;
  FinCatPresentation base;
  FibreSpec fibres;
  OverrideSpec overrides;
  std::optional<SiteSpec> site;
  AnalysesSpec analyses;
  LimitsSpec limits;
  friend bool operator==(const Presentation&, const Presentation&) = default;
};

struct Issue {
  std::string location;  // "line:column" or a JSON pointer
  std::string message;
};

/// Every problem found in one file.
class PresentationError : public ParseError {
 public:
  explicit PresentationError(std::vector<Issue> issues);
  const std::vector<Issue>& issues() const noexcept { return issues_; }

 private:
  std::vector<Issue> issues_;
};

/// Throws PresentationError listing syntax errors, schema errors, unknown backend
/// tags, dangling references and version mismatches.
Presentation parse_presentation(std::string_view text);
Presentation load_presentation(const std::string& path);

/// Fixed key order; composites implied by identities are left out.
std::string serialize_presentation(const Presentation& p);

}  // namespace fibred::cli
