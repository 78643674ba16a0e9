#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fibred {

using Vec = std::vector<std::uint8_t>;

/// Dense matrix over the prime field F_p (p < 256), row-major.
class FpMatrix {
 public:
  FpMatrix() = default;
  FpMatrix(std::uint32_t p, std::size_t rows, std::size_t cols)
      : p_(p), rows_(rows), cols_(cols), a_(rows * cols, 0) {}

  static FpMatrix identity(std::uint32_t p, std::size_t n);
  /// Matrix of the swap V⊗W -> W⊗V in the Kronecker basis (i,j) -> i*dim(W)+j.
  static FpMatrix commutation(std::uint32_t p, std::size_t v, std::size_t w);

  std::uint32_t prime() const noexcept { return p_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::uint8_t operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }
  std::uint8_t& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
  const Vec& data() const noexcept { return a_; }
  Vec& data() noexcept { return a_; }

  FpMatrix operator*(const FpMatrix& b) const;
  FpMatrix operator+(const FpMatrix& b) const;
  FpMatrix operator-(const FpMatrix& b) const;
  FpMatrix scaled(std::uint8_t s) const;
  FpMatrix transpose() const;
  FpMatrix kron(const FpMatrix& b) const;

  bool is_zero() const;
  std::size_t rank() const;
  std::optional<FpMatrix> inverse() const;
  /// Basis of {x : A x = 0} as column vectors.
  std::vector<Vec> nullspace() const;
  /// Basis of {w : w A = 0} as row vectors.
  std::vector<Vec> left_nullspace() const;
  /// Some x with A x = b, if one exists.
  std::optional<Vec> solve(const Vec& b) const;

  std::string to_string() const;

  friend bool operator==(const FpMatrix&, const FpMatrix&) = default;

 private:
  std::uint32_t p_ = 2;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vec a_;
};

std::uint8_t fp_inv(std::uint8_t a, std::uint32_t p);

/// Row-reduce a list of vectors; returns the rank. Used for span tests.
std::size_t vector_rank(std::vector<Vec> vs, std::uint32_t p);
bool in_span(const std::vector<Vec>& basis, const Vec& v, std::uint32_t p);
/// Coefficients c with sum c_i basis_i = v, if v is in the span of an independent basis.
std::optional<Vec> span_coefficients(const std::vector<Vec>& basis, const Vec& v, std::uint32_t p);

}  // namespace fibred
