#include "fibred/linear.hpp"

#include <limits>

namespace fibred {

Mor LinearHoms::add(const Mor& a, const Mor& b) const {
  Coords ca = coordinates(a), cb = coordinates(b);
  const auto& ps = primes();
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (std::size_t j = 0; j < ca[i].size(); ++j) ca[i][j] = static_cast<std::uint8_t>((ca[i][j] + cb[i][j]) % ps[i]);
  return from_coordinates(a.src, a.tgt, a.over, ca);
}

Mor LinearHoms::zero(Obj x, Obj y, std::uint32_t over) const {
  HomBasis b = basis(x, y, over);
  Coords c(b.ambient.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i].assign(b.ambient[i], 0);
  return from_coordinates(x, y, over, c);
}

std::uint64_t LinearHoms::component_size(Obj x, Obj y, std::uint32_t over) const {
  HomBasis b = basis(x, y, over);
  std::uint64_t n = 1;
  for (std::size_t i = 0; i < b.vectors.size(); ++i)
    for (std::size_t k = 0; k < b.vectors[i].size(); ++k) n = sat_mul(n, primes()[i]);
  return n;
}

void LinearHoms::for_each_in_span(Obj x, Obj y, std::uint32_t over, const HomBasis& b,
                                  const MorVisitor& visit) const {
  const auto& ps = primes();
  // odometer over coefficient vectors, prime by prime
  std::vector<std::pair<std::size_t, std::size_t>> slots;  // (prime index, basis index)
  for (std::size_t i = 0; i < b.vectors.size(); ++i)
    for (std::size_t k = 0; k < b.vectors[i].size(); ++k) slots.emplace_back(i, k);
  std::vector<std::uint32_t> coef(slots.size(), 0);
  for (;;) {
    Coords c(b.ambient.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i].assign(b.ambient[i], 0);
    for (std::size_t s = 0; s < slots.size(); ++s) {
      if (!coef[s]) continue;
      const auto [i, k] = slots[s];
      for (std::size_t j = 0; j < c[i].size(); ++j)
        c[i][j] = static_cast<std::uint8_t>((c[i][j] + coef[s] * b.vectors[i][k][j]) % ps[i]);
    }
    if (!visit(from_coordinates(x, y, over, c))) return;
    std::size_t s = 0;
    while (s < slots.size()) {
      if (++coef[s] < ps[slots[s].first]) break;
      coef[s] = 0;
      ++s;
    }
    if (s == slots.size()) return;
  }
}

}  // namespace fibred
