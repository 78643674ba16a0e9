#include "fibred/category.hpp"

#include <algorithm>
#include <limits>

namespace fibred {

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) noexcept {
  if (a == 0 || b == 0) return 0;
  if (a > std::numeric_limits<std::uint64_t>::max() / b) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) noexcept {
  const auto s = a + b;
  return s < a ? std::numeric_limits<std::uint64_t>::max() : s;
}

Rng make_rng(std::uint64_t seed, std::string_view context) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : context) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
  return Rng(seed ^ h);
}

bool Category::in_universe(Obj x) const {
  const auto& objs = objects();
  return std::find(objs.begin(), objs.end(), x) != objs.end();
}

void Category::for_each_hom_over(Obj x, Obj y, std::uint32_t over, const MorVisitor& visit) const {
  for_each_hom(x, y, [&](const Mor& m) { return m.over != over || visit(m); });
}

std::uint64_t Category::hom_size(Obj x, Obj y) const {
  std::uint64_t n = 0;
  for_each_hom(x, y, [&](const Mor&) {
    ++n;
    return true;
  });
  return n;
}

std::uint64_t Category::hom_size_over(Obj x, Obj y, std::uint32_t over) const {
  std::uint64_t n = 0;
  for_each_hom_over(x, y, over, [&](const Mor&) {
    ++n;
    return true;
  });
  return n;
}

namespace {

std::optional<Mor> pick(const std::function<void(const MorVisitor&)>& each, std::uint64_t n, Rng& rng) {
  if (n == 0) return std::nullopt;
  std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
  std::uint64_t k = dist(rng);
  std::optional<Mor> out;
  each([&](const Mor& m) {
    if (k-- == 0) {
      out = m;
      return false;
    }
    return true;
  });
  return out;
}

}  // namespace

std::optional<Mor> Category::sample_hom(Obj x, Obj y, Rng& rng) const {
  return pick([&](const MorVisitor& v) { for_each_hom(x, y, v); }, hom_size(x, y), rng);
}

std::optional<Mor> Category::sample_hom_over(Obj x, Obj y, std::uint32_t over, Rng& rng) const {
  return pick([&](const MorVisitor& v) { for_each_hom_over(x, y, over, v); }, hom_size_over(x, y, over), rng);
}

std::optional<Mor> Category::inverse(const Mor& m) const {
  const Mor id_src = identity(m.src), id_tgt = identity(m.tgt);
  std::optional<Mor> out;
  for_each_hom(m.tgt, m.src, [&](const Mor& g) {
    if (compose(g, m) == id_src && compose(m, g) == id_tgt) {
      out = g;
      return false;
    }
    return true;
  });
  return out;
}

std::optional<Obj> Category::find_object(std::string_view name) const {
  for (Obj x : objects())
    if (object_name(x) == name) return x;
  return std::nullopt;
}

std::optional<Mor> Category::find_morphism(Obj x, Obj y, std::string_view name) const {
  std::optional<Mor> out;
  for_each_hom(x, y, [&](const Mor& m) {
    if (morphism_name(m) == name) {
      out = m;
      return false;
    }
    return true;
  });
  return out;
}

}  // namespace fibred
