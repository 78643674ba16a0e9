#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fibred/pipeline.hpp"
#include "fibred/presentation.hpp"
#include "support.hpp"

using namespace fibred;
using namespace fibred::cli;
using fibred::testing::corpus_path;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::ordered_json corpus_json(const std::string& name) {
  return nlohmann::ordered_json::parse(slurp(corpus_path(name)));
}

std::vector<std::string> presentation_files() {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(FIBRED_CORPUS_DIR)) {
    const auto stem = e.path().stem().string();
    if (e.path().extension() == ".json" && stem != "coverage") out.push_back(stem);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Full runs are shared between test cases.
const Report& full_run(const std::string& name) {
  static std::map<std::string, Report> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, run(load_presentation(corpus_path(name)), {})).first;
  return it->second;
}

const Report* stage(const Report& r, const std::string& name) {
  for (const auto& s : r["stages"])
    if (s["name"] == name) return &s;
  return nullptr;
}

std::vector<Issue> issues_of(const std::string& text) {
  try {
    parse_presentation(text);
  } catch (const PresentationError& e) {
    return e.issues();
  }
  return {};
}

bool mentions(const std::vector<Issue>& issues, const std::string& what) {
  for (const auto& i : issues)
    if (i.location.find(what) != std::string::npos || i.message.find(what) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("every corpus file parses and round-trips through serialization") {
  const auto files = presentation_files();
  CHECK(files.size() >= 8);
  for (const auto& name : files) {
    INFO(name);
    const Presentation p = load_presentation(corpus_path(name));
    const std::string once = serialize_presentation(p);
    const Presentation q = parse_presentation(once);
    CHECK(q == p);
    CHECK(serialize_presentation(q) == once);
  }
}

TEST_CASE("the z6 presentation has three base objects and two co-coverings") {
  const Presentation p = load_presentation(corpus_path("z6-cover"));
  CHECK(p.base.objects.size() == 3);
  REQUIRE(p.site);
  CHECK(p.site->cotopology.families.at("Z6").size() == 2);
  CHECK(load_presentation(corpus_path("finset-terminal")).base.objects.size() == 1);
}

TEST_CASE("parse errors name the offending field") {
  auto j = corpus_json("arrow-indexed");
  j["fibres"]["fibres"]["A"]["tensor"][1][1] = "h";
  const auto issues = issues_of(j.dump());
  REQUIRE_FALSE(issues.empty());
  CHECK(mentions(issues, "tensor"));
  CHECK(mentions(issues, "h"));

  auto syntax = issues_of("{\"format\": \"fibred/1\",\n  \"base\": [}");
  REQUIRE_FALSE(syntax.empty());
  CHECK(syntax.front().location.find(':') != std::string::npos);
}

TEST_CASE("version mismatches and unknown backends are rejected") {
  auto v = corpus_json("f2-vect");
  v["format"] = "fibred/2";
  CHECK(mentions(issues_of(v.dump()), "fibred/2"));
  auto b = corpus_json("f2-vect");
  b["fibres"]["backend"] = "finite-groupoid";
  CHECK(mentions(issues_of(b.dump()), "finite-groupoid"));
}

TEST_CASE("several problems are reported together") {
  auto j = corpus_json("z6-cover");
  j["base"]["morphisms"][3]["target"] = "Z7";
  j["fibres"]["rings"]["Z6"] = "six";
  CHECK(issues_of(j.dump()).size() >= 2);
}

TEST_CASE("the finite-abelian backend is unsupported") {
  auto j = corpus_json("f2-vect");
  j["fibres"] = {{"backend", "finite-abelian"}};
  const Report r = run(parse_presentation(j.dump()), {});
  const Report* v = stage(r, "validate");
  REQUIRE(v);
  CHECK((*v)["status"] == "error");
  CHECK((*v)["reason"].get<std::string>().find("not supported") != std::string::npos);
  CHECK(exit_code(r) == kStructural);
}

TEST_CASE("reports are byte-identical across runs") {
  for (const char* name : {"z6-cover", "f2-vect", "arrow-indexed", "z6-bad-lift"}) {
    INFO(name);
    const Presentation p = load_presentation(corpus_path(name));
    const std::string a = render_machine(run(p, {})), b = render_machine(run(p, {}));
    CHECK(a == b);
    CHECK(a == render_machine(parse_report(a)));
  }
}

TEST_CASE("worker count does not change the report") {
  const Presentation p = load_presentation(corpus_path("z6-cover"));
  RunOptions four;
  four.workers = 4;
  CHECK(render_machine(run(p, four)) == render_machine(full_run("z6-cover")));
}

TEST_CASE("exit codes") {
  CHECK(exit_code(full_run("z6-cover")) == kPass);
  CHECK(exit_code(full_run("f2-vect")) == kPass);
  for (const char* bad : {"z6-bad-associator", "z6-bad-lift", "z6-bad-unit"}) CHECK(exit_code(full_run(bad)) == kFail);
  RunOptions strict;
  strict.strict = true;
  CHECK(exit_code(run(load_presentation(corpus_path("f2-vect")), strict)) == kTruncated);
}

TEST_CASE("the mutations fail with the overridden datum as witness") {
  const std::map<std::string, std::pair<std::string, std::string>> expected{
      {"z6-bad-associator", {"verify-monoidal", "associator(Z6:2,0; Z6:2,0; Z6:1,0)"}},
      {"z6-bad-lift", {"verify-opfibration", "lift(q2; Z6:1,0)"}},
      {"z6-bad-unit", {"verify-monoidal", "unit(q2)"}}};
  for (const auto& [name, where] : expected) {
    INFO(name);
    const Report* s = stage(full_run(name), where.first);
    REQUIRE(s);
    CHECK((*s)["status"] == "fail");
    REQUIRE_FALSE((*s)["findings"].empty());
    CHECK((*s)["findings"][0]["witnesses"][0] == where.second);
  }
}

TEST_CASE("stage selection runs a prefix") {
  RunOptions o;
  o.stage = "verify-opfibration";
  const Report r = run(load_presentation(corpus_path("z6-cover")), o);
  CHECK(r["stages"].size() == 2);
  o.stage = "nonsense";
  CHECK_THROWS(run(load_presentation(corpus_path("z6-cover")), o));
}

TEST_CASE("a K0 request without a sum designation is skipped with a reason") {
  auto j = corpus_json("f2-vect");
  j["analyses"]["kzero"][0].erase("sum");
  const Report r = run(parse_presentation(j.dump()), {});
  const Report* k = stage(r, "kzero");
  REQUIRE(k);
  const auto& req = (*k)["data"]["requests"][0];
  CHECK(req["status"] == "skipped");
  CHECK_FALSE(req["reason"].get<std::string>().empty());
}

TEST_CASE("K0 values through the pipeline") {
  const Report* f2 = stage(full_run("f2-vect"), "kzero");
  REQUIRE(f2);
  CHECK((*f2)["data"]["requests"][0]["group"] == "Z");
  CHECK((*f2)["data"]["requests"][0]["smith_verified"] == true);
  const Report* z6 = stage(full_run("z6-cover"), "kzero");
  REQUIRE(z6);
  CHECK((*z6)["data"]["requests"][0]["group"] == "Z^2");
  CHECK((*z6)["data"]["requests"][0]["rank_map"]["isomorphism"] == true);
}

TEST_CASE("diff: self is empty, a mutation names the stage, a smaller universe lists omitted pairs") {
  const Report& pass = full_run("z6-cover");
  CHECK(diff_reports(pass, pass).empty());
  CHECK(diff_reports(pass, parse_report(render_machine(pass))).empty());

  const auto lines = diff_reports(pass, full_run("z6-bad-unit"));
  REQUIRE_FALSE(lines.empty());
  bool named = false;
  for (const auto& l : lines) named = named || l.find("verify-monoidal") != std::string::npos;
  CHECK(named);

  RunOptions small;
  small.universe_bound = 4;
  const Presentation f2 = load_presentation(corpus_path("f2-vect"));
  const auto trunc = diff_reports(run(f2, small), full_run("f2-vect"));
  bool omitted = false;
  for (const auto& l : trunc) omitted = omitted || l.find("omitted") != std::string::npos;
  CHECK(omitted);

  Report other = pass;
  other["format"] = "something-else";
  CHECK_THROWS_AS(diff_reports(pass, other), ParseError);
}

TEST_CASE("timings stay out of reports unless asked for") {
  const Presentation p = load_presentation(corpus_path("arrow-indexed"));
  CHECK_FALSE(run(p, {}).contains("timings"));
  RunOptions t;
  t.timings = true;
  const Report r = run(p, t);
  CHECK(r.contains("timings"));
  CHECK(diff_reports(r, run(p, {})).empty());
}

TEST_CASE("coverage manifest: every operation is exercised by its examples") {
  const auto manifest = nlohmann::json::parse(slurp(std::string(FIBRED_CORPUS_DIR) + "/coverage.json"));
  REQUIRE(manifest["format"] == "fibred-coverage/1");
  std::size_t operations = 0;
  for (const auto& [module, ops] : manifest["operations"].items())
    for (const auto& [op, examples] : ops.items()) {
      REQUIRE_FALSE(examples.empty());
      ++operations;
      for (const auto& ex : examples) {
        const std::string name = ex.get<std::string>();
        INFO(module << "/" << op << " on " << name);
        if (op == "parse") {
          CHECK_NOTHROW(load_presentation(corpus_path(name)));
        } else if (op == "run") {
          CHECK(full_run(name)["stages"].size() == stage_names().size());
        } else if (op == "diff_reports") {
          const bool empty = diff_reports(full_run("z6-cover"), full_run(name)).empty();
          CHECK(empty == (name == "z6-cover"));
        } else {
          bool seen = false;
          for (const auto& s : full_run(name)["stages"])
            for (const auto& o : s["operations"]) seen = seen || o == op;
          CHECK(seen);
        }
      }
    }
  CHECK(operations >= 30);
}
