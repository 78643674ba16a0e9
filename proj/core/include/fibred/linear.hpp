#pragma once

#include <cstdint>
#include <vector>

#include "fibred/category.hpp"
#include "fibred/linalg.hpp"

namespace fibred {

/// Coordinates split by prime: entry i belongs to primes()[i].
using Coords = std::vector<Vec>;

/// A subspace of a hom component, per prime, in ambient coordinates.
struct HomBasis {
  std::vector<std::size_t> ambient;      // ambient dimension per prime
  std::vector<std::vector<Vec>> vectors;  // basis vectors per prime
};

/// Optional capability of a category whose hom components are finite modules over
/// a squarefree Z/n (products of F_p-vector spaces) and composition is bilinear.
/// Checks use it to replace enumeration by rank computations.
class LinearHoms {
 public:
  virtual ~LinearHoms() = default;
  virtual const std::vector<std::uint32_t>& primes() const = 0;
  /// Tags of the non-empty components of Hom(x, y).
  virtual std::vector<std::uint32_t> components(Obj x, Obj y) const = 0;
  virtual HomBasis basis(Obj x, Obj y, std::uint32_t over) const = 0;
  virtual Coords coordinates(const Mor& m) const = 0;
  virtual Mor from_coordinates(Obj x, Obj y, std::uint32_t over, const Coords& c) const = 0;

  Mor add(const Mor& a, const Mor& b) const;
  Mor zero(Obj x, Obj y, std::uint32_t over) const;
  /// Number of elements of a component, saturating.
  std::uint64_t component_size(Obj x, Obj y, std::uint32_t over) const;
  /// Enumerate every element of the span of `basis`.
  void for_each_in_span(Obj x, Obj y, std::uint32_t over, const HomBasis& basis, const MorVisitor& visit) const;
};

}  // namespace fibred
