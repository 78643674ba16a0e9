#include "fibred/kzero.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "fibred/error.hpp"
#include "fibred/fincat.hpp"

namespace fibred {

IntMatrix IntMatrix::identity(std::size_t n) {
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

IntMatrix IntMatrix::from(const std::vector<std::vector<long>>& rows) {
  IntMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < m.rows; ++i) {
    if (rows[i].size() != m.cols) throw StructuralError("ragged integer matrix");
    for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

IntMatrix IntMatrix::operator*(const IntMatrix& o) const {
  if (cols != o.rows) throw StructuralError("matrix shapes do not match");
  IntMatrix out(rows, o.cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = 0; k < cols; ++k) {
      const Integer& x = (*this)(i, k);
      if (x == 0) continue;
      for (std::size_t j = 0; j < o.cols; ++j) out(i, j) += x * o(k, j);
    }
  return out;
}

IntMatrix IntMatrix::transposed() const {
  IntMatrix t(cols, rows);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Integer determinant(const IntMatrix& m) {
  if (m.rows != m.cols) throw StructuralError("determinant of a non-square matrix");
  const std::size_t n = m.rows;
  if (n == 0) return 1;
  IntMatrix a = m;
  Integer prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a(k, k) == 0) {
      std::size_t p = k + 1;
      while (p < n && a(p, k) == 0) ++p;
      if (p == n) return 0;
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
      a(i, k) = 0;
    }
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

namespace {

void swap_rows(IntMatrix& m, std::size_t i, std::size_t j) {
  if (i == j) return;
  for (std::size_t c = 0; c < m.cols; ++c) std::swap(m(i, c), m(j, c));
}
void swap_cols(IntMatrix& m, std::size_t i, std::size_t j) {
  if (i == j) return;
  for (std::size_t r = 0; r < m.rows; ++r) std::swap(m(r, i), m(r, j));
}
// row i -= q * row j
void sub_row(IntMatrix& m, std::size_t i, std::size_t j, const Integer& q) {
  if (q == 0) return;
  for (std::size_t c = 0; c < m.cols; ++c) m(i, c) -= q * m(j, c);
}
// col i -= q * col j
void sub_col(IntMatrix& m, std::size_t i, std::size_t j, const Integer& q) {
  if (q == 0) return;
  for (std::size_t r = 0; r < m.rows; ++r) m(r, i) -= q * m(r, j);
}

// floor-free quotient: a = q*b + r with |r| < |b|
Integer quot(const Integer& a, const Integer& b) { return a / b; }

}  // namespace

SmithForm smith_normal_form(const IntMatrix& a) {
  SmithForm s;
  s.d = a;
  s.u = IntMatrix::identity(a.rows);
  s.v = IntMatrix::identity(a.cols);
  IntMatrix& d = s.d;
  const std::size_t n = std::min(a.rows, a.cols);
  for (std::size_t t = 0; t < n; ++t) {
    for (;;) {
      // least nonzero entry of the remaining block as pivot
      std::optional<std::pair<std::size_t, std::size_t>> piv;
      for (std::size_t i = t; i < d.rows; ++i)
        for (std::size_t j = t; j < d.cols; ++j)
          if (d(i, j) != 0 && (!piv || abs(d(i, j)) < abs(d(piv->first, piv->second)))) piv = {i, j};
      if (!piv) break;
      swap_rows(d, t, piv->first);
      swap_rows(s.u, t, piv->first);
      swap_cols(d, t, piv->second);
      swap_cols(s.v, t, piv->second);
      bool clean = true;
      for (std::size_t i = t + 1; i < d.rows; ++i) {
        const Integer q = quot(d(i, t), d(t, t));
        sub_row(d, i, t, q);
        sub_row(s.u, i, t, q);
        if (d(i, t) != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < d.cols; ++j) {
        const Integer q = quot(d(t, j), d(t, t));
        sub_col(d, j, t, q);
        sub_col(s.v, j, t, q);
        if (d(t, j) != 0) clean = false;
      }
      if (!clean) continue;
      // the pivot must divide the rest of the block
      std::optional<std::size_t> bad;
      for (std::size_t i = t + 1; i < d.rows && !bad; ++i)
        for (std::size_t j = t + 1; j < d.cols; ++j)
          if (d(i, j) % d(t, t) != 0) {
            bad = i;
            break;
          }
      if (!bad) break;
      sub_row(d, t, *bad, Integer(-1));
      sub_row(s.u, t, *bad, Integer(-1));
    }
    if (d(t, t) < 0) {
      for (std::size_t c = 0; c < d.cols; ++c) d(t, c) = -d(t, c);
      for (std::size_t c = 0; c < s.u.cols; ++c) s.u(t, c) = -s.u(t, c);
    }
  }
  for (std::size_t t = 0; t < n; ++t) s.diagonal.push_back(d(t, t));
  return s;
}

bool verify_smith(const IntMatrix& a, const SmithForm& s, std::string* why) {
  auto fail = [&](const std::string& w) {
    if (why) *why = w;
    return false;
  };
  if (s.u.rows != a.rows || s.u.cols != a.rows || s.v.rows != a.cols || s.v.cols != a.cols)
    return fail("transformation shapes");
  if (!(s.u * a * s.v == s.d)) return fail("U·A·V differs from D");
  for (std::size_t i = 0; i < s.d.rows; ++i)
    for (std::size_t j = 0; j < s.d.cols; ++j)
      if (i != j && s.d(i, j) != 0) return fail("D is not diagonal");
  const std::size_t n = std::min(a.rows, a.cols);
  if (s.diagonal.size() != n) return fail("diagonal length");
  for (std::size_t t = 0; t < n; ++t) {
    if (s.diagonal[t] != s.d(t, t)) return fail("diagonal disagrees with D");
    if (s.diagonal[t] < 0) return fail("negative invariant factor");
    if (t + 1 < n) {
      const Integer& x = s.diagonal[t];
      const Integer& y = s.diagonal[t + 1];
      if (x == 0 ? y != 0 : y % x != 0) return fail("divisibility chain broken at " + std::to_string(t));
    }
  }
  if (abs(determinant(s.u)) != 1) return fail("U is not unimodular");
  if (abs(determinant(s.v)) != 1) return fail("V is not unimodular");
  return true;
}

std::optional<std::size_t> IsoClasses::class_of(Obj x) const {
  for (std::size_t k = 0; k < classes.size(); ++k)
    if (std::find(classes[k].begin(), classes[k].end(), x) != classes[k].end()) return k;
  for (std::size_t k = 0; k < representatives.size(); ++k)
    if (isomorphic(x, representatives[k])) return k;
  return std::nullopt;
}

IsoClasses iso_classes(const Category& c, std::function<bool(Obj, Obj)> isomorphic) {
  IsoClasses out;
  out.category = &c;
  out.isomorphic = isomorphic ? std::move(isomorphic)
                              : [&c](Obj x, Obj y) { return first_isomorphism(c, x, y).has_value(); };
  std::vector<std::pair<std::string, Obj>> named;
  for (Obj x : c.objects()) named.emplace_back(c.object_name(x), x);
  std::sort(named.begin(), named.end());
  std::map<std::string, std::size_t> by_key;
  for (const auto& [name, x] : named) {
    std::optional<std::size_t> hit;
    if (auto key = c.canonical_key(x)) {
      if (auto it = by_key.find(*key); it != by_key.end()) hit = it->second;
      else by_key.emplace(*key, out.classes.size());
    } else {
      for (std::size_t k = 0; k < out.representatives.size() && !hit; ++k)
        if (out.isomorphic(x, out.representatives[k])) hit = k;
    }
    if (hit) {
      out.classes[*hit].push_back(x);
    } else {
      out.classes.push_back({x});
      out.representatives.push_back(x);
    }
  }
  return out;
}

ValidationReport validate_sum(const IsoClasses& classes, const SumDesignation& s) {
  ValidationReport rep;
  const Category& c = *classes.category;
  const auto& reps = classes.representatives;
  auto cls = [&](Obj a, Obj b) -> std::optional<std::size_t> {
    auto x = s.sum(a, b);
    if (!x) return std::nullopt;
    return classes.class_of(*x);
  };
  if (!classes.class_of(s.zero))
    rep.add(Severity::structural, "sum.zero", "zero object lies in no class", {c.object_name(s.zero)});
  std::size_t cases = 0;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    ++cases;
    auto z = cls(s.zero, reps[i]);
    if (z && *z != i)
      rep.add(Severity::violation, "sum.unit", "0 ⊕ X is not isomorphic to X", {c.object_name(reps[i])});
  }
  rep.note("sum.unit", CheckMode::exhaustive, cases);
  cases = 0;
  for (std::size_t i = 0; i < reps.size(); ++i)
    for (std::size_t j = i + 1; j < reps.size(); ++j) {
      auto a = cls(reps[i], reps[j]), b = cls(reps[j], reps[i]);
      if (!a || !b) continue;
      ++cases;
      if (*a != *b)
        rep.add(Severity::violation, "sum.commutative", "X ⊕ Y is not isomorphic to Y ⊕ X",
                {c.object_name(reps[i]), c.object_name(reps[j])});
    }
  rep.note("sum.commutative", CheckMode::exhaustive, cases);
  cases = 0;
  std::map<std::pair<std::size_t, std::size_t>, std::optional<std::size_t>> table;
  for (std::size_t i = 0; i < reps.size(); ++i)
    for (std::size_t j = 0; j < reps.size(); ++j) table[{i, j}] = cls(reps[i], reps[j]);
  for (std::size_t i = 0; i < reps.size(); ++i)
    for (std::size_t j = 0; j < reps.size(); ++j)
      for (std::size_t k = 0; k < reps.size(); ++k) {
        auto ij = table[{i, j}], jk = table[{j, k}];
        if (!ij || !jk) continue;
        auto l = table[{*ij, k}], r = table[{i, *jk}];
        if (!l || !r) continue;
        ++cases;
        if (*l != *r)
          rep.add(Severity::violation, "sum.associative", "(X ⊕ Y) ⊕ Z is not isomorphic to X ⊕ (Y ⊕ Z)",
                  {c.object_name(reps[i]), c.object_name(reps[j]), c.object_name(reps[k])});
      }
  rep.note("sum.associative", CheckMode::exhaustive, cases);
  return rep;
}

AbelianGroupPresentation group_completion(const IsoClasses& classes, const SumDesignation& s,
                                          ValidationReport* report) {
  AbelianGroupPresentation g;
  const Category& c = *classes.category;
  const auto& reps = classes.representatives;
  const std::size_t n = reps.size();
  for (Obj r : reps) g.generators.push_back(c.object_name(r));
  std::vector<std::vector<Integer>> rows;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      auto x = s.sum(reps[i], reps[j]);
      std::optional<std::size_t> k;
      if (x) k = classes.class_of(*x);
      if (!k) {
        g.omitted.emplace_back(g.generators[i], g.generators[j]);
        continue;
      }
      std::vector<Integer> row(n);
      row[i] += 1;
      row[j] += 1;
      row[*k] -= 1;
      rows.push_back(std::move(row));
    }
  g.relations = IntMatrix(rows.size(), n);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t j = 0; j < n; ++j) g.relations(r, j) = rows[r][j];
  g.smith = smith_normal_form(g.relations);
  std::size_t free = n - std::min(rows.size(), n);
  for (const Integer& d : g.smith.diagonal) {
    if (d == 0) ++free;
    else if (d != 1) g.invariants.push_back(d);
  }
  for (std::size_t k = 0; k < free; ++k) g.invariants.push_back(0);
  if (report) {
    report->note("kzero.relations", CheckMode::exhaustive, rows.size(),
                 std::to_string(g.omitted.size()) + " pairs omitted");
    for (const auto& [a, b] : g.omitted)
      report->add(Severity::truncation, "kzero.omitted", "sum leaves the universe", {a, b});
    std::string why;
    if (!verify_smith(g.relations, g.smith, &why))
      report->add(Severity::violation, "kzero.smith", "Smith certificate rejected: " + why);
  }
  return g;
}

ValidationReport verify_group_isomorphism(const AbelianGroupPresentation& g, const IntMatrix& images) {
  ValidationReport rep;
  const std::size_t n = g.generators.size();
  if (images.rows != n) {
    rep.add(Severity::structural, "kzero.iso", "one image per generator required");
    return rep;
  }
  const std::size_t k = images.cols;
  const IntMatrix rw = g.relations * images;
  for (std::size_t r = 0; r < rw.rows; ++r)
    for (std::size_t j = 0; j < k; ++j)
      if (rw(r, j) != 0) {
        rep.add(Severity::violation, "kzero.iso.relations", "a relation does not map to zero", {std::to_string(r)});
        j = k;
      }
  const SmithForm w = smith_normal_form(images);
  std::size_t units = 0;
  for (const Integer& d : w.diagonal)
    if (d == 1) ++units;
  if (units != k) rep.add(Severity::violation, "kzero.iso.surjective", "the map onto Z^k is not surjective");
  const bool free_k = g.invariants.size() == k &&
                      std::all_of(g.invariants.begin(), g.invariants.end(), [](const Integer& d) { return d == 0; });
  if (!free_k)
    rep.add(Severity::violation, "kzero.iso.injective", "the group is not free of rank " + std::to_string(k),
            {format_invariants(g.invariants)});
  rep.note("kzero.iso", CheckMode::exhaustive, rw.rows);
  return rep;
}

std::string format_invariants(const std::vector<Integer>& inv) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < inv.size(); ++i) os << (i ? "," : "") << inv[i];
  os << ")";
  return os.str();
}

}  // namespace fibred
