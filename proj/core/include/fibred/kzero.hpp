#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fibred/category.hpp"
#include "fibred/limits.hpp"
#include "fibred/report.hpp"

namespace fibred {

using Integer = boost::multiprecision::cpp_int;

/// Dense row-major integer matrix.
struct IntMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<Integer> a;

  IntMatrix() = default;
  IntMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c) {}
  static IntMatrix identity(std::size_t n);
  static IntMatrix from(const std::vector<std::vector<long>>& rows);

  Integer& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const Integer& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
  IntMatrix operator*(const IntMatrix& o) const;
  IntMatrix transposed() const;
  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;
};

/// Exact determinant (fraction-free elimination).
Integer determinant(const IntMatrix& m);

/// U·A·V = D with U, V unimodular and D diagonal, d1 | d2 | ..., d_i >= 0.
struct SmithForm {
  IntMatrix u, d, v;
  std::vector<Integer> diagonal;  // min(rows, cols) entries
};
SmithForm smith_normal_form(const IntMatrix& a);
/// Multiplies the certificate out and checks shape, divisibility and |det| = 1.
bool verify_smith(const IntMatrix& a, const SmithForm& s, std::string* why = nullptr);

/// Iso classes of the enumerated objects; the representative is the object with
/// the least name.
struct IsoClasses {
  std::vector<std::vector<Obj>> classes;
  std::vector<Obj> representatives;
  /// Index of the class of x, searching by isomorphism for objects outside the list.
  std::optional<std::size_t> class_of(Obj x) const;

  const Category* category = nullptr;
  std::function<bool(Obj, Obj)> isomorphic;
};
/// `isomorphic` defaults to first_isomorphism in c.
IsoClasses iso_classes(const Category& c, std::function<bool(Obj, Obj)> isomorphic = {});

/// A designated sum on objects (nullopt when it leaves the constructible range)
/// and a zero object.
struct SumDesignation {
  std::function<std::optional<Obj>(Obj, Obj)> sum;
  Obj zero = 0;
};

/// Zero is a unit and the sum is commutative and associative on representatives,
/// up to isomorphism, wherever the sums stay in the universe.
ValidationReport validate_sum(const IsoClasses& classes, const SumDesignation& s);

/// Z^generators / rows of `relations`.
struct AbelianGroupPresentation {
  std::vector<std::string> generators;
  IntMatrix relations;
  SmithForm smith;
  /// Non-unit invariant factors followed by one 0 per free summand.
  std::vector<Integer> invariants;
  std::vector<std::pair<std::string, std::string>> omitted;
};

/// Split K0: generators are iso classes, one relation [X]+[Y]-[X⊕Y] per unordered
/// pair of representatives whose sum lands in a known class. Pairs without one are
/// listed as omitted and reported as truncation.
AbelianGroupPresentation group_completion(const IsoClasses& classes, const SumDesignation& s,
                                          ValidationReport* report = nullptr);

/// Checks that generator i ↦ row i of `images` (in Z^k) induces an isomorphism of
/// the presented group with Z^k.
ValidationReport verify_group_isomorphism(const AbelianGroupPresentation& g, const IntMatrix& images);

std::string format_invariants(const std::vector<Integer>& inv);

}  // namespace fibred
