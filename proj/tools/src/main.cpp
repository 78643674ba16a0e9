#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fibred/error.hpp"
#include "fibred/pipeline.hpp"

using namespace fibred;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, "cannot read file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_issues(const cli::PresentationError& e) {
  for (const auto& i : e.issues()) std::cerr << "error: " << i.location << ": " << i.message << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certify monoidal opfibrations, build module towers, local triviality and K0"};
  app.require_subcommand(1);

  cli::RunOptions opt;
  std::string input, report_path, format = "human";
  if (const char* w = std::getenv("FIBRED_WORKERS")) opt.workers = static_cast<unsigned>(std::max(1, std::atoi(w)));

  auto* run = app.add_subcommand("run", "run the pipeline on a presentation");
  run->add_option("file", input, "presentation file")->required()->check(CLI::ExistingFile);
  run->add_option("--universe-bound", opt.universe_bound, "override the universe bound of the fibres")
      ->check(CLI::PositiveNumber);
  run->add_flag("--strict", opt.strict, "treat truncation as failure (exit 3)");
  run->add_option("--stage", opt.stage, "run the pipeline up to this stage")
      ->check(CLI::IsMember(cli::stage_names()));
  run->add_option("--report", report_path, "write the machine report here");
  run->add_option("--format", format, "standard output format")->check(CLI::IsMember({"human", "machine"}));
  run->add_flag("--timings", opt.timings, "include stage timings");

  auto* check = app.add_subcommand("check", "parse a presentation and print its normal form");
  check->add_option("file", input, "presentation file")->required()->check(CLI::ExistingFile);

  std::string left, right;
  auto* diff = app.add_subcommand("diff", "compare two machine reports");
  diff->add_option("a", left, "first report")->required()->check(CLI::ExistingFile);
  diff->add_option("b", right, "second report")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : cli::kStructural;
  }

  try {
    if (*check) {
      std::cout << cli::serialize_presentation(cli::load_presentation(input));
      return cli::kPass;
    }
    if (*diff) {
      const auto lines = cli::diff_reports(cli::parse_report(slurp(left)), cli::parse_report(slurp(right)));
      for (const auto& l : lines) std::cout << l << "\n";
      return lines.empty() ? cli::kPass : cli::kFail;
    }
    const cli::Presentation p = cli::load_presentation(input);
    const cli::Report r = cli::run(p, opt);
    if (!report_path.empty()) {
      std::ofstream out(report_path, std::ios::binary);
      if (!out) throw ParseError(report_path, "cannot write report");
      out << cli::render_machine(r);
    }
    std::cout << (format == "machine" ? cli::render_machine(r) : cli::render_human(r));
    return cli::exit_code(r);
  } catch (const cli::PresentationError& e) {
    print_issues(e);
    return cli::kStructural;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kStructural;
  } catch (const StructuralError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kStructural;
  } catch (const UnsupportedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kStructural;
  }
}
