#include <benchmark/benchmark.h>

#include "fibred/algebra.hpp"
#include "fibred/backends.hpp"
#include "fibred/kzero.hpp"
#include "fibred/opfib.hpp"

using namespace fibred;

namespace {

FinCat z6_base() {
  FinCatPresentation p;
  p.objects = {"Z6", "Z2", "Z3"};
  for (const auto& o : p.objects) {
    p.morphisms.push_back({"id_" + o, o, o});
    p.identities[o] = "id_" + o;
  }
  p.morphisms.push_back({"q2", "Z6", "Z2"});
  p.morphisms.push_back({"q3", "Z6", "Z3"});
  for (const auto& m : p.morphisms) {
    p.composites[{p.identities[m.target], m.id}] = m.id;
    p.composites[{m.id, p.identities[m.source]}] = m.id;
  }
  return FinCat::from(p);
}

std::unique_ptr<MonoidalOpfibration> z6_modules(const FinCat& base, std::uint64_t bound) {
  ModuleOptions o;
  for (Obj b : base.objects()) {
    const auto n = base.object_name(b);
    o.rings.push_back(n == "Z6" ? 6 : n == "Z2" ? 2 : 3);
  }
  o.bound = bound;
  return make_module_opfibration(base, o);
}

IntMatrix random_matrix(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  IntMatrix m(n, n);
  for (auto& x : m.a) x = static_cast<long>(rng() % 41) - 20;
  return m;
}

}  // namespace

static void BM_SmithNormalForm(benchmark::State& state) {
  const IntMatrix a = random_matrix(static_cast<std::size_t>(state.range(0)), 42);
  for (auto _ : state) benchmark::DoNotOptimize(smith_normal_form(a));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SmithNormalForm)->RangeMultiplier(2)->Range(4, 64)->Complexity();

static void BM_VerifyOpfibrationZ6(benchmark::State& state) {
  const FinCat base = z6_base();
  const auto m = z6_modules(base, static_cast<std::uint64_t>(state.range(0)));
  const Limits l;
  for (auto _ : state) benchmark::DoNotOptimize(verify_opfibration(*m, l));
}
BENCHMARK(BM_VerifyOpfibrationZ6)->Arg(12)->Arg(36)->Unit(benchmark::kMillisecond);

static void BM_VerifyMonoidalZ6(benchmark::State& state) {
  const FinCat base = z6_base();
  const auto m = z6_modules(base, 36);
  Limits l;
  l.workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(verify_monoidal_opfibration(*m, l));
}
BENCHMARK(BM_VerifyMonoidalZ6)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

static void BM_FinsetIsOpcartesian(benchmark::State& state) {
  const FinCat base = FinCat::terminal();
  FinsetOptions o;
  o.bound = static_cast<std::uint32_t>(state.range(0));
  const auto m = make_finset_opfibration(base, o);
  const Category& E = m->total();
  const Obj x = *E.find_object("*:2");
  const Limits l;
  for (auto _ : state) benchmark::DoNotOptimize(is_opcartesian(m->projection(), E.identity(x), l));
}
BENCHMARK(BM_FinsetIsOpcartesian)->DenseRange(2, 4);

static void BM_FinsetExtensionOfScalars(benchmark::State& state) {
  const FinCat base = FinCat::terminal();
  const auto m = make_finset_opfibration(base, {});
  const Limits l;
  MonoidCategory mon(*m, false, l);
  ModuleCategory mod(mon, l);
  std::vector<std::pair<Obj, Mor>> pairs;
  for (Obj x : mod.objects())
    for (Obj s : mon.objects())
      mon.for_each_hom(mod.module(x).monoid, s, [&](const Mor& phi) {
        pairs.emplace_back(x, phi);
        return true;
      });
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [x, phi] = pairs[i++ % pairs.size()];
    benchmark::DoNotOptimize(extension_of_scalars(mod, x, phi));
  }
}
BENCHMARK(BM_FinsetExtensionOfScalars);

static void BM_IsoClassesF2(benchmark::State& state) {
  const FinCat t = FinCat::terminal();
  ModuleOptions o;
  o.rings = {2};
  o.bound = std::uint64_t{1} << state.range(0);
  const auto m = make_module_opfibration(t, o);
  FibreCategory fibre(m->projection(), 0);
  for (auto _ : state) benchmark::DoNotOptimize(iso_classes(fibre));
}
BENCHMARK(BM_IsoClassesF2)->DenseRange(2, 5);

BENCHMARK_MAIN();
