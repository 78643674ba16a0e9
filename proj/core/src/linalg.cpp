#include "fibred/linalg.hpp"

#include <cassert>
#include <sstream>
#include <stdexcept>

namespace fibred {

std::uint8_t fp_inv(std::uint8_t a, std::uint32_t p) {
  // p is prime and small; Fermat by repeated multiplication
  std::uint32_t r = 1, b = a % p, e = p - 2;
  while (e) {
    if (e & 1) r = r * b % p;
    b = b * b % p;
    e >>= 1;
  }
  return static_cast<std::uint8_t>(r);
}

FpMatrix FpMatrix::identity(std::uint32_t p, std::size_t n) {
  FpMatrix m(p, n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

FpMatrix FpMatrix::commutation(std::uint32_t p, std::size_t v, std::size_t w) {
  FpMatrix m(p, v * w, v * w);
  for (std::size_t i = 0; i < v; ++i)
    for (std::size_t j = 0; j < w; ++j) m(j * v + i, i * w + j) = 1;
  return m;
}

FpMatrix FpMatrix::operator*(const FpMatrix& b) const {
  if (cols_ != b.rows_) throw std::logic_error("FpMatrix: dimension mismatch in product");
  FpMatrix c(p_, rows_, b.cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) {
      const std::uint32_t aik = (*this)(i, k);
      if (!aik) continue;
      for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) = static_cast<std::uint8_t>((c(i, j) + aik * b(k, j)) % p_);
    }
  return c;
}

FpMatrix FpMatrix::operator+(const FpMatrix& b) const {
  if (rows_ != b.rows_ || cols_ != b.cols_) throw std::logic_error("FpMatrix: dimension mismatch in sum");
  FpMatrix c(p_, rows_, cols_);
  for (std::size_t i = 0; i < a_.size(); ++i) c.a_[i] = static_cast<std::uint8_t>((a_[i] + b.a_[i]) % p_);
  return c;
}

FpMatrix FpMatrix::operator-(const FpMatrix& b) const {
  if (rows_ != b.rows_ || cols_ != b.cols_) throw std::logic_error("FpMatrix: dimension mismatch in difference");
  FpMatrix c(p_, rows_, cols_);
  for (std::size_t i = 0; i < a_.size(); ++i) c.a_[i] = static_cast<std::uint8_t>((a_[i] + p_ - b.a_[i]) % p_);
  return c;
}

FpMatrix FpMatrix::scaled(std::uint8_t s) const {
  FpMatrix c(p_, rows_, cols_);
  for (std::size_t i = 0; i < a_.size(); ++i) c.a_[i] = static_cast<std::uint8_t>(a_[i] * s % p_);
  return c;
}

FpMatrix FpMatrix::transpose() const {
  FpMatrix t(p_, cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

FpMatrix FpMatrix::kron(const FpMatrix& b) const {
  FpMatrix c(p_, rows_ * b.rows_, cols_ * b.cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) {
      const std::uint32_t aij = (*this)(i, j);
      if (!aij) continue;
      for (std::size_t k = 0; k < b.rows_; ++k)
        for (std::size_t l = 0; l < b.cols_; ++l)
          c(i * b.rows_ + k, j * b.cols_ + l) = static_cast<std::uint8_t>(aij * b(k, l) % p_);
    }
  return c;
}

bool FpMatrix::is_zero() const {
  for (auto x : a_)
    if (x) return false;
  return true;
}

namespace {

// In-place reduced row echelon form; returns pivot columns.
std::vector<std::size_t> rref(FpMatrix& m) {
  const std::uint32_t p = m.prime();
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
    std::size_t piv = r;
    while (piv < m.rows() && m(piv, c) == 0) ++piv;
    if (piv == m.rows()) continue;
    if (piv != r)
      for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(piv, j), m(r, j));
    const std::uint32_t inv = fp_inv(m(r, c), p);
    for (std::size_t j = 0; j < m.cols(); ++j) m(r, j) = static_cast<std::uint8_t>(m(r, j) * inv % p);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == r || m(i, c) == 0) continue;
      const std::uint32_t f = m(i, c);
      for (std::size_t j = 0; j < m.cols(); ++j)
        m(i, j) = static_cast<std::uint8_t>((m(i, j) + p * p - f * m(r, j)) % p);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

}  // namespace

std::size_t FpMatrix::rank() const {
  FpMatrix m = *this;
  return rref(m).size();
}

std::optional<FpMatrix> FpMatrix::inverse() const {
  if (rows_ != cols_) return std::nullopt;
  const std::size_t n = rows_;
  FpMatrix aug(p_, n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = (*this)(i, j);
    aug(i, n + i) = 1;
  }
  auto piv = rref(aug);
  if (piv.size() < n || (n > 0 && piv[n - 1] != n - 1)) return std::nullopt;
  FpMatrix inv(p_, n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
  return inv;
}

std::vector<Vec> FpMatrix::nullspace() const {
  FpMatrix m = *this;
  auto piv = rref(m);
  std::vector<bool> is_piv(cols_, false);
  for (auto c : piv) is_piv[c] = true;
  std::vector<Vec> basis;
  for (std::size_t free = 0; free < cols_; ++free) {
    if (is_piv[free]) continue;
    Vec v(cols_, 0);
    v[free] = 1;
    for (std::size_t r = 0; r < piv.size(); ++r)
      v[piv[r]] = static_cast<std::uint8_t>((p_ - m(r, free)) % p_);
    basis.push_back(std::move(v));
  }
  return basis;
}

std::vector<Vec> FpMatrix::left_nullspace() const { return transpose().nullspace(); }

std::optional<Vec> FpMatrix::solve(const Vec& b) const {
  FpMatrix aug(p_, rows_, cols_ + 1);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) aug(i, j) = (*this)(i, j);
    aug(i, cols_) = b[i];
  }
  auto piv = rref(aug);
  if (!piv.empty() && piv.back() == cols_) return std::nullopt;
  Vec x(cols_, 0);
  for (std::size_t r = 0; r < piv.size(); ++r) x[piv[r]] = aug(r, cols_);
  return x;
}

std::string FpMatrix::to_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < rows_; ++i) {
    if (i) os << ',';
    for (std::size_t j = 0; j < cols_; ++j) os << int((*this)(i, j));
  }
  os << ']';
  return os.str();
}

std::size_t vector_rank(std::vector<Vec> vs, std::uint32_t p) {
  if (vs.empty()) return 0;
  FpMatrix m(p, vs.size(), vs.front().size());
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = 0; j < vs[i].size(); ++j) m(i, j) = vs[i][j];
  return m.rank();
}

bool in_span(const std::vector<Vec>& basis, const Vec& v, std::uint32_t p) {
  return span_coefficients(basis, v, p).has_value();
}

std::optional<Vec> span_coefficients(const std::vector<Vec>& basis, const Vec& v, std::uint32_t p) {
  // columns are basis vectors
  FpMatrix m(p, v.size(), basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j)
    for (std::size_t i = 0; i < v.size(); ++i) m(i, j) = basis[j][i];
  return m.solve(v);
}

}  // namespace fibred
