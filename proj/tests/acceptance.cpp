// One line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "fibred/kzero.hpp"
#include "fibred/pipeline.hpp"
#include "fibred/presentation.hpp"
#include "support.hpp"

using namespace fibred;
using namespace fibred::cli;
using fibred::testing::corpus_path;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("FAILED " + what);
    }
  }
  void info(const std::string& what) { notes.push_back(what); }
};

struct Timed {
  Report report;
  double seconds = 0;
};

std::map<std::string, Timed>& runs() {
  static std::map<std::string, Timed> cache;
  return cache;
}

const Timed& timed_run(const std::string& name, const RunOptions& o = {}) {
  auto& c = runs();
  auto it = c.find(name);
  if (it != c.end()) return it->second;
  const auto start = std::chrono::steady_clock::now();
  Report r = run(load_presentation(corpus_path(name)), o);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return c.emplace(name, Timed{std::move(r), s}).first->second;
}
const Report& full(const std::string& name) { return timed_run(name).report; }

const Report& stage(const Report& r, const std::string& name) {
  for (const auto& s : r["stages"])
    if (s["name"] == name) return s;
  throw std::runtime_error("no stage " + name);
}

bool no_findings_under(const Report& s, const std::string& clause) {
  for (const auto& f : s["findings"])
    if (f["clause"].get<std::string>().find(clause) != std::string::npos) return false;
  return true;
}

std::uint64_t cases_of(const Report& s, const std::string& clause) {
  std::uint64_t n = 0;
  for (const auto& c : s["checks"])
    if (c["clause"].get<std::string>().find(clause) != std::string::npos) n += c["cases"].get<std::uint64_t>();
  return n;
}

/// (a, b) of the carrier of a module named "mod(mon(...);Z6:a,b;...)".
std::pair<long, long> module_dimensions(const std::string& name) {
  const auto start = name.find(");") + 2;
  return fibred::testing::z6_dimensions(name.substr(start, name.find(';', start) - start));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ------------------------------------------------------------------ criteria

Outcome verifiers_and_mutations() {
  Outcome o;
  RunOptions upto;
  upto.stage = "verify-monoidal";
  const auto start = std::chrono::steady_clock::now();
  const Report r = run(load_presentation(corpus_path("z6-cover")), upto);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.expect(stage(r, "verify-opfibration")["status"] == "pass", "z6-cover opfibration");
  const Report& mon = stage(r, "verify-monoidal");
  o.expect(mon["status"] == "pass", "z6-cover monoidal");
  o.expect(cases_of(mon, "braiding.") > 0 && no_findings_under(mon, "braiding."), "z6-cover symmetry");
  o.expect(s < 120, "verifiers under two minutes");
  o.info("z6-cover verifiers in " + std::to_string(s) + " s");
  const std::map<std::string, std::pair<std::string, std::string>> mutations{
      {"z6-bad-associator", {"verify-monoidal", "associator(Z6:2,0; Z6:2,0; Z6:1,0)"}},
      {"z6-bad-lift", {"verify-opfibration", "lift(q2; Z6:1,0)"}},
      {"z6-bad-unit", {"verify-monoidal", "unit(q2)"}}};
  for (const auto& [name, where] : mutations) {
    const Report& st = stage(full(name), where.first);
    const bool rejected = st["status"] == "fail" && !st["findings"].empty() &&
                          st["findings"][0]["witnesses"][0] == where.second;
    o.expect(rejected && exit_code(full(name)) == kFail, name + " rejected naming " + where.second);
  }
  return o;
}

Outcome modovermon_and_union_find() {
  Outcome o;
  for (const char* name : {"z6-cover", "finset-terminal"})
    o.expect(stage(full(name), "verify-modovermon")["status"] == "pass", std::string(name) + " modovermon");
  const auto w = fibred::testing::finset_world();
  std::size_t pairs = 0, agree = 0;
  for (Obj x : w->mod->objects())
    for (Obj s : w->mon->objects())
      w->mon->for_each_hom(w->mod->module(x).monoid, s, [&](const Mor& phi) {
        ++pairs;
        std::string why;
        if (fibred::testing::extension_matches_orbits(*w->mod, x, phi, &why)) ++agree;
        else o.info(w->mod->object_name(x) + ": " + why);
        return true;
      });
  o.expect(pairs > 0 && agree == pairs, "union-find oracle on every pair");
  o.info("union-find oracle " + std::to_string(agree) + "/" + std::to_string(pairs) + " pairs");
  return o;
}

Outcome fibre_restriction() {
  Outcome o;
  for (bool z6 : {false, true}) {
    const auto w = z6 ? fibred::testing::z6_world() : fibred::testing::finset_world();
    for (Obj b : w->base.objects()) {
      const auto r = fibre_restriction_check(*w->mod, b, w->limits);
      o.expect(r.ok(), "fibre restriction at " + w->base.object_name(b) + ": " + r.summary());
    }
  }
  for (const char* name : {"z6-cover", "finset-terminal"})
    o.expect(no_findings_under(stage(full(name), "verify-modovermon"), "fibre-restriction"),
             std::string(name) + " pipeline fibre restriction");
  return o;
}

Outcome adjunction() {
  Outcome o;
  auto check = [&](const std::string& name, bool exhaustive, std::uint64_t at_least) {
    const Report& s = stage(full(name), "verify-modovermon");
    std::string mode;
    std::uint64_t cases = 0;
    for (const auto& c : s["checks"])
      if (c["clause"] == "adjunction") {
        mode = c["mode"];
        cases = c["cases"];
      }
    const auto& d = s["data"]["adjunction"];
    o.expect(d["discrepancies"] == 0, name + " discrepancies");
    o.expect(cases >= at_least, name + " triples");
    if (exhaustive) o.expect(mode == "exhaustive", name + " exhaustive");
    o.info(name + " adjunction " + mode + " on " + std::to_string(cases) + " triples");
  };
  check("finset-terminal", true, 1);
  check("z6-cover", false, 50);
  return o;
}

Outcome local_triviality() {
  Outcome o;
  auto members = [&](const std::string& name) {
    std::map<std::pair<long, long>, bool> out;
    for (const auto& m : stage(full(name), "loc")["data"]["loc"]["Z6"]["modules"])
      out[module_dimensions(m["module"])] = m["locally_trivial"];
    return out;
  };
  const auto free = members("z6-cover");
  const auto constant = members("z6-constant-rank");
  o.expect(free.size() == 14 && constant.size() == 14, "fourteen Z/6 modules");
  const Report& loc = stage(full("z6-cover"), "loc")["data"]["loc"]["Z6"];
  o.expect(loc["members"] == loc["fibre"], "Loc is the full fibre");
  std::size_t agree = 0;
  for (const auto& [ab, in] : free) agree += in;
  o.expect(agree == free.size(), "every module locally trivial with trivial = free");
  std::size_t exact = 0;
  for (const auto& [ab, in] : constant) {
    const bool oracle = fibred::testing::free_rank_over_z6(ab.first, ab.second).has_value();
    exact += in == oracle;
    if (in != oracle) o.info("disagreement at a=" + std::to_string(ab.first) + " b=" + std::to_string(ab.second));
  }
  o.expect(exact == constant.size(), "constant rank matches the invariant-factor oracle");
  o.info("constant rank: " + std::to_string(exact) + "/" + std::to_string(constant.size()) + " agree");
  return o;
}

Outcome kzero() {
  Outcome o;
  const Report& f2 = stage(full("f2-vect"), "kzero")["data"]["requests"][0];
  o.expect(f2["invariant_factors"] == Report::array({"0"}), "F2 K0 is (0)");
  o.expect(f2["rank_map"]["isomorphism"] == true, "dimension map is an isomorphism");
  for (const auto& [name, row] : f2["rank_map"]["images"].items()) {
    const std::string d = name.substr(name.find(':') + 1);
    o.expect(row.size() == 1 && row[0] == std::stol(d), "dimension of " + name);
  }
  o.expect(f2["smith_verified"] == true, "F2 Smith certificate");

  const Report& z6 = stage(full("z6-cover"), "kzero")["data"]["requests"][0];
  o.expect(z6["invariant_factors"] == Report::array({"0", "0"}), "z6 Loc K0 is (0,0)");
  o.expect(z6["rank_map"]["isomorphism"] == true, "(a, b) coordinates give an isomorphism");
  o.expect(z6["rank_map"]["primes"] == Report::array({2, 3}), "coordinates are 2- and 3-ranks");
  for (const auto& [name, row] : z6["rank_map"]["images"].items()) {
    const auto [a, b] = module_dimensions(name);
    o.expect(row == Report::array({a, b}), "coordinates of " + name);
  }
  o.expect(z6["smith_verified"] == true, "z6 Smith certificate");

  Rng rng(1);
  std::size_t verified = 0;
  for (int t = 0; t < 200; ++t) {
    IntMatrix a(1 + rng() % 5, 1 + rng() % 5);
    for (auto& x : a.a) x = static_cast<long>(rng() % 21) - 10;
    const SmithForm s = smith_normal_form(a);
    verified += verify_smith(a, s) && s.u * a * s.v == s.d;
  }
  o.expect(verified == 200, "random Smith certificates multiply out");
  return o;
}

Outcome pseudofunctoriality() {
  Outcome o;
  for (const char* name : {"z6-cover", "finset-terminal"}) {
    const Report& mon = stage(full(name), "verify-monoidal");
    const Report& mod = stage(full(name), "verify-modovermon");
    o.expect(cases_of(mon, "pseudofunctor.unique") > 0 && no_findings_under(mon, "pseudofunctor"),
             std::string(name) + " direct images are pseudofunctorial");
    o.expect(cases_of(mon, "lift.unique") > 0 && no_findings_under(mon, "lift.unique"),
             std::string(name) + " lifts connected by exactly one morphism");
    o.expect(cases_of(mod, "extension.pseudofunctor") > 0 && no_findings_under(mod, "extension.pseudofunctor"),
             std::string(name) + " extension connecting isos unique");
  }
  return o;
}

Outcome determinism() {
  Outcome o;
  for (const char* name : {"z6-cover", "f2-vect", "arrow-indexed", "z6-bad-associator"}) {
    const Presentation p = load_presentation(corpus_path(name));
    const std::string a = render_machine(run(p, {})), b = render_machine(run(p, {}));
    o.expect(a == b, std::string(name) + " byte-identical");
    o.expect(diff_reports(parse_report(a), parse_report(b)).empty(), std::string(name) + " empty self-diff");
  }
  o.expect(render_machine(timed_run("finset-terminal").report) ==
               render_machine(run(load_presentation(corpus_path("finset-terminal")), {})),
           "finset-terminal byte-identical");
  const auto manifest = nlohmann::json::parse(slurp(std::string(FIBRED_CORPUS_DIR) + "/coverage.json"));
  std::size_t files = 0;
  for (const auto& name : manifest["operations"]["cli"]["parse"]) {
    const Presentation p = load_presentation(corpus_path(name));
    const std::string text = serialize_presentation(p);
    const Presentation q = parse_presentation(text);
    o.expect(q == p && serialize_presentation(q) == text, name.get<std::string>() + " round-trips");
    ++files;
  }
  o.info(std::to_string(files) + " corpus files round-trip");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"z6-cover passes the opfibration, monoidal and symmetry verifiers; mutations are rejected",
       verifiers_and_mutations},
      {"modovermon on z6 and finset; finset extension matches the union-find oracle", modovermon_and_union_find},
      {"fibre restriction at every base object of both examples", fibre_restriction},
      {"adjunction exhaustive on finset-terminal and sampled on z6 without discrepancies", adjunction},
      {"z6 local triviality with free and constant-rank designations", local_triviality},
      {"K0 of F2 vector spaces and of z6 Loc with verified Smith certificates", kzero},
      {"pseudofunctoriality and uniqueness of connecting morphisms", pseudofunctoriality},
      {"deterministic reports and round-tripping presentations", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.notes.push_back(std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << (i + 1) << "  " << criteria[i].first << "\n";
    for (const auto& n : o.notes) std::cout << "       " << n << "\n";
    std::cout.flush();
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
