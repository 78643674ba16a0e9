#include <unordered_map>

#include "fibred/error.hpp"
#include "fibred/linear.hpp"
#include "fibred/opfib.hpp"

namespace fibred {

namespace {

Coords unit_coords(const HomBasis& b, std::size_t prime, const Vec& v) {
  Coords c(b.ambient.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i].assign(b.ambient[i], 0);
  c[prime] = v;
  return c;
}

void require_member(const Category& c, const Mor& m) {
  std::optional<Mor> found;
  try {
    found = c.find_morphism(m.src, m.tgt, c.morphism_name(m));
  } catch (const std::exception&) {
  }
  if (!found || !(*found == m)) throw StructuralError("morphism is not in the total category");
}

std::uint64_t ipow(std::uint64_t p, std::size_t k) {
  std::uint64_t r = 1;
  while (k--) r = sat_mul(r, p);
  return r;
}

/// Images of the basis of Hom_h(E', E'') under precomposition with m, per prime.
struct Precomposition {
  HomBasis source, target;
  std::vector<std::vector<Vec>> images;  // per prime, in target ambient coordinates
};

Precomposition precompose(const Category& total, const LinearHoms& lin, const Mor& m, Obj e2, std::uint32_t th,
                          std::uint32_t tk) {
  Precomposition pc;
  pc.source = lin.basis(m.tgt, e2, th);
  pc.target = lin.basis(m.src, e2, tk);
  pc.images.resize(lin.primes().size());
  for (std::size_t i = 0; i < pc.source.vectors.size(); ++i)
    for (const auto& v : pc.source.vectors[i]) {
      const Mor b = lin.from_coordinates(m.tgt, e2, th, unit_coords(pc.source, i, v));
      pc.images[i].push_back(lin.coordinates(total.compose(b, m))[i]);
    }
  return pc;
}

}  // namespace

OpcartesianCertificate is_opcartesian(const Projection& p, const Mor& m, const Limits& limits) {
  const Category& total = p.source();
  const Category& base = p.target();
  require_member(total, m);
  const Mor f = p.map_morphism(m);
  const Obj b = p.map_object(m.tgt);
  const LinearHoms* lin = total.linear();

  OpcartesianCertificate cert;
  cert.mode = lin ? CheckMode::basis : CheckMode::exhaustive;
  auto fail = [&](Obj e2, const Mor& h, const Mor& g, std::uint64_t fillers, std::string detail) {
    if (!cert.opcartesian) return;
    cert.opcartesian = false;
    cert.target = e2;
    cert.factor = h;
    cert.witness = g;
    cert.fillers = fillers;
    cert.detail = std::move(detail);
  };

  for (Obj e2 : total.objects()) {
    const Obj y = p.map_object(e2);
    std::vector<Mor> hs;
    base.for_each_hom(b, y, [&](const Mor& h) {
      hs.push_back(h);
      return true;
    });
    for (const Mor& h : hs) {
      const Mor k = base.compose(h, f);
      const std::uint32_t th = p.tag_of(m.tgt, e2, h), tk = p.tag_of(m.src, e2, k);
      ++cert.cases;
      if (lin) {
        const Precomposition pc = precompose(total, *lin, m, e2, th, tk);
        for (std::size_t i = 0; i < pc.images.size(); ++i) {
          const std::uint32_t q = lin->primes()[i];
          const std::size_t nh = pc.source.vectors[i].size(), nk = pc.target.vectors[i].size();
          const std::size_t r = vector_rank(pc.images[i], q);
          if (r < nh) {
            fail(e2, h, lin->zero(m.src, e2, tk), ipow(q, nh - r), "precomposition is not injective");
          } else if (r < nk) {
            for (const auto& v : pc.target.vectors[i])
              if (!in_span(pc.images[i], v, q)) {
                fail(e2, h, lin->from_coordinates(m.src, e2, tk, unit_coords(pc.target, i, v)), 0,
                     "precomposition is not surjective");
                break;
              }
          }
        }
        continue;
      }
      const std::uint64_t sh = total.hom_size_over(m.tgt, e2, th), sk = total.hom_size_over(m.src, e2, tk);
      if (sat_add(sh, sk) > limits.enumeration_budget) {
        cert.mode = CheckMode::skipped;
        cert.detail = "hom-sets exceed the enumeration budget";
        continue;
      }
      std::unordered_map<Mor, std::uint64_t, MorHash> image;
      total.for_each_hom_over(m.tgt, e2, th, [&](const Mor& hh) {
        const Mor g = total.compose(hh, m);
        if (++image[g] == 2) fail(e2, h, g, 2, "two fillers");
        return true;
      });
      if (image.size() != sk) {
        total.for_each_hom_over(m.src, e2, tk, [&](const Mor& g) {
          if (image.count(g)) return true;
          fail(e2, h, g, 0, "no filler");
          return false;
        });
      }
    }
  }
  return cert;
}

std::optional<Mor> find_filler(const Projection& p, const Mor& m, const Mor& g, const Mor& h) {
  const Category& total = p.source();
  const Obj e2 = g.tgt;
  const std::uint32_t th = p.tag_of(m.tgt, e2, h);
  if (const LinearHoms* lin = total.linear()) {
    const Precomposition pc = precompose(total, *lin, m, e2, th, g.over);
    const Coords target = lin->coordinates(g);
    Coords out(pc.source.ambient.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const std::uint32_t q = lin->primes()[i];
      out[i].assign(pc.source.ambient[i], 0);
      const std::size_t nh = pc.source.vectors[i].size();
      const std::size_t rows = target[i].size();
      FpMatrix a(q, rows, nh);
      for (std::size_t j = 0; j < nh; ++j)
        for (std::size_t r = 0; r < rows; ++r) a(r, j) = pc.images[i][j][r];
      auto c = a.solve(target[i]);
      if (!c) return std::nullopt;
      for (std::size_t j = 0; j < nh; ++j)
        for (std::size_t r = 0; r < out[i].size(); ++r)
          out[i][r] = static_cast<std::uint8_t>((out[i][r] + (*c)[j] * pc.source.vectors[i][j][r]) % q);
    }
    return lin->from_coordinates(m.tgt, e2, th, out);
  }
  std::optional<Mor> found;
  total.for_each_hom_over(m.tgt, e2, th, [&](const Mor& hh) {
    if (total.compose(hh, m) == g) {
      found = hh;
      return false;
    }
    return true;
  });
  return found;
}

std::uint64_t count_fillers(const Projection& p, const Mor& m, const Mor& g, const Mor& h, const Limits& limits) {
  const Category& total = p.source();
  const Obj e2 = g.tgt;
  const std::uint32_t th = p.tag_of(m.tgt, e2, h);
  if (const LinearHoms* lin = total.linear()) {
    if (!find_filler(p, m, g, h)) return 0;
    const Precomposition pc = precompose(total, *lin, m, e2, th, g.over);
    std::uint64_t n = 1;
    for (std::size_t i = 0; i < pc.images.size(); ++i)
      n = sat_mul(n, ipow(lin->primes()[i], pc.source.vectors[i].size() - vector_rank(pc.images[i], lin->primes()[i])));
    return n;
  }
  if (total.hom_size_over(m.tgt, e2, th) > limits.enumeration_budget)
    throw TruncationError("filler count exceeds the enumeration budget");
  std::uint64_t n = 0;
  total.for_each_hom_over(m.tgt, e2, th, [&](const Mor& hh) {
    n += total.compose(hh, m) == g;
    return true;
  });
  return n;
}

HomGenerators hom_generators(const Category& c, Obj x, Obj y, std::optional<std::uint32_t> over,
                             const Limits& limits, Rng& rng) {
  HomGenerators out;
  if (const LinearHoms* lin = c.linear()) {
    out.mode = CheckMode::basis;
    std::vector<std::uint32_t> tags = over ? std::vector<std::uint32_t>{*over} : lin->components(x, y);
    for (std::uint32_t t : tags) {
      const HomBasis hb = lin->basis(x, y, t);
      out.morphisms.push_back(lin->zero(x, y, t));
      for (std::size_t i = 0; i < hb.vectors.size(); ++i)
        for (const auto& v : hb.vectors[i]) out.morphisms.push_back(lin->from_coordinates(x, y, t, unit_coords(hb, i, v)));
    }
    return out;
  }
  const std::uint64_t n = over ? c.hom_size_over(x, y, *over) : c.hom_size(x, y);
  const std::uint64_t cap = std::max<std::uint64_t>(limits.samples, 64);
  if (n <= cap) {
    auto push = [&](const Mor& m) {
      out.morphisms.push_back(m);
      return true;
    };
    if (over)
      c.for_each_hom_over(x, y, *over, push);
    else
      c.for_each_hom(x, y, push);
    return out;
  }
  out.mode = CheckMode::sampled;
  for (std::uint64_t k = 0; k < cap; ++k) {
    auto m = over ? c.sample_hom_over(x, y, *over, rng) : c.sample_hom(x, y, rng);
    if (m) out.morphisms.push_back(*m);
  }
  return out;
}

// ---------------------------------------------------------------- defaults

Mor MonoidalOpfibration::braiding(Obj, Obj) const { throw UnsupportedError("not claimed symmetric"); }

std::vector<Obj> MonoidalOpfibration::fibre_objects(Obj b) const {
  std::vector<Obj> out;
  for (Obj x : total().objects())
    if (base_of(x) == b) out.push_back(x);
  return out;
}

std::vector<Mor> MonoidalOpfibration::action_candidates(const Mor& mu, const Mor& eta, Obj carrier,
                                                        const Limits& limits) const {
  const Obj r = mu.tgt;
  const Obj b = base_of(r);
  const Mor idb = base().identity(b);
  const Obj mr = tensor(carrier, r);
  const Mor rho = right_unitor(carrier);
  const Mor unit_arm = tensor(total().identity(carrier), eta);  // M⊗I -> M⊗R
  const std::uint32_t tag = projection().tag_of(mr, carrier, idb);
  std::vector<Mor> out;

  if (const LinearHoms* lin = total().linear()) {
    // the unit law κ∘(M⊗η) = ρ is affine in κ
    const HomBasis hb = lin->basis(mr, carrier, tag);
    const Coords want = lin->coordinates(rho);
    Coords particular(hb.ambient.size());
    std::vector<std::vector<Vec>> kernel(hb.ambient.size());
    for (std::size_t i = 0; i < hb.vectors.size(); ++i) {
      const std::uint32_t q = lin->primes()[i];
      const std::size_t n = hb.vectors[i].size();
      particular[i].assign(hb.ambient[i], 0);
      std::vector<Vec> images;
      for (const auto& v : hb.vectors[i])
        images.push_back(lin->coordinates(total().compose(lin->from_coordinates(mr, carrier, tag, unit_coords(hb, i, v)),
                                                          unit_arm))[i]);
      FpMatrix a(q, want[i].size(), n);
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t row = 0; row < want[i].size(); ++row) a(row, j) = images[j][row];
      auto c = a.solve(want[i]);
      if (!c) return out;
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t e = 0; e < hb.ambient[i]; ++e)
          particular[i][e] = static_cast<std::uint8_t>((particular[i][e] + (*c)[j] * hb.vectors[i][j][e]) % q);
      for (const auto& z : a.nullspace()) {
        Vec k(hb.ambient[i], 0);
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t e = 0; e < hb.ambient[i]; ++e)
            k[e] = static_cast<std::uint8_t>((k[e] + z[j] * hb.vectors[i][j][e]) % q);
        kernel[i].push_back(std::move(k));
      }
    }
    HomBasis kb{hb.ambient, kernel};
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < kernel.size(); ++i) count = sat_mul(count, ipow(lin->primes()[i], kernel[i].size()));
    if (count > limits.enumeration_budget)
      throw TruncationError("action search on " + total().object_name(carrier) + " exceeds the enumeration budget");
    const Mor p0 = lin->from_coordinates(mr, carrier, tag, particular);
    lin->for_each_in_span(mr, carrier, tag, kb, [&](const Mor& k) {
      out.push_back(lin->add(p0, k));
      return true;
    });
    return out;
  }

  if (total().hom_size_over(mr, carrier, tag) > limits.enumeration_budget)
    throw TruncationError("action search on " + total().object_name(carrier) + " exceeds the enumeration budget");
  total().for_each_hom_over(mr, carrier, tag, [&](const Mor& k) {
    if (total().compose(k, unit_arm) == rho) out.push_back(k);
    return true;
  });
  return out;
}

void MonoidalOpfibration::for_each_equivariant(const Mor& kappa, const Mor& sigma, const Mor& phi,
                                               const MorVisitor& visit) const {
  const Obj m = kappa.tgt, n = sigma.tgt;
  const Mor f = base_of(phi);
  total().for_each_hom_over(m, n, projection().tag_of(m, n, f), [&](const Mor& a) {
    if (total().compose(sigma, tensor(a, phi)) != total().compose(a, kappa)) return true;
    return visit(a);
  });
}

// ---------------------------------------------------------------- overrides

Mor OverriddenOpfibration::lift(const Mor& f, Obj e) const {
  auto it = o_.cleavage.find({base().morphism_name(f), e});
  return it == o_.cleavage.end() ? in_.lift(f, e) : it->second;
}

Mor OverriddenOpfibration::unit(const Mor& h) const {
  auto it = o_.unit.find(base().morphism_name(h));
  return it == o_.unit.end() ? in_.unit(h) : it->second;
}

Mor OverriddenOpfibration::associator(Obj a, Obj b, Obj c) const {
  auto it = o_.associator.find({a, b, c});
  return it == o_.associator.end() ? in_.associator(a, b, c) : it->second;
}

Mor OverriddenOpfibration::left_unitor(Obj a) const {
  auto it = o_.left_unitor.find(a);
  return it == o_.left_unitor.end() ? in_.left_unitor(a) : it->second;
}

Mor OverriddenOpfibration::right_unitor(Obj a) const {
  auto it = o_.right_unitor.find(a);
  return it == o_.right_unitor.end() ? in_.right_unitor(a) : it->second;
}

Mor OverriddenOpfibration::braiding(Obj a, Obj b) const {
  auto it = o_.braiding.find({a, b});
  return it == o_.braiding.end() ? in_.braiding(a, b) : it->second;
}

}  // namespace fibred
