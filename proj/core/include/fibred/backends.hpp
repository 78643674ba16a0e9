#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "fibred/fincat.hpp"
#include "fibred/opfib.hpp"

namespace fibred {

/// Finite sets {0..n-1} over every base object, cartesian product as tensor
/// ((i, j) ↦ i·m + j), one-point unit, swap braiding, strict coherence. A morphism
/// over h is a function, named "h[f(0),f(1),...]"; objects are named "b:n".
struct FinsetOptions {
  std::uint32_t bound = 4;         // universe: n ≤ bound
  std::uint32_t monoid_bound = 3;  // monoid carriers: n ≤ monoid_bound
  std::uint32_t cap = 4096;        // largest set constructed on demand
};
std::unique_ptr<MonoidalOpfibration> make_finset_opfibration(const FinCat& base, const FinsetOptions& options);

/// Finite modules over squarefree Z/n_b, one ring per base object; every base
/// morphism must be a quotient Z/n_a -> Z/n_b (n_b | n_a). A module is a tuple of
/// dimensions over the primes of its ring ("b:d1,d2"); a morphism over h is a
/// matrix per prime of the target ring ("h[2:10/01;3:1]"). Tensor is ⊗ over the
/// ring (Kronecker), direct image is −⊗ Z/n_b, coherence is strict.
struct ModuleOptions {
  std::vector<std::uint32_t> rings;  // n_b per base object index
  std::uint64_t bound = 36;          // universe: cardinality ≤ bound
  std::uint32_t monoid_dim = 1;      // monoid carriers: every dimension ≤ monoid_dim
};
/// Throws UnsupportedError when some n_b is not squarefree.
std::unique_ptr<MonoidalOpfibration> make_module_opfibration(const FinCat& base, const ModuleOptions& options);

/// Distinct primes of n; throws UnsupportedError if n is not squarefree.
std::vector<std::uint32_t> squarefree_primes(std::uint32_t n);

}  // namespace fibred
