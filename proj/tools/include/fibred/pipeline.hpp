#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fibred/presentation.hpp"
#include "json.hpp"

namespace fibred::cli {

using Report = nlohmann::ordered_json;

inline constexpr const char* kReportFormat = "fibred-report/1";

/// Pipeline stages in dependency order.
const std::vector<std::string>& stage_names();

struct RunOptions {
  std::optional<std::uint64_t> universe_bound;
  bool strict = false;
  std::optional<std::string> stage;  // run the prefix ending here
  unsigned workers = 1;
  bool timings = false;
};

enum ExitCode : int { kPass = 0, kFail = 1, kStructural = 2, kTruncated = 3 };

/// The opfibration a presentation describes, with overrides applied.
/// Throws StructuralError or UnsupportedError.
class Model;
std::unique_ptr<Model> build_model(const Presentation& p, const RunOptions& options);

/// Runs the requested stages. Never throws on check failures; structural errors
/// inside a stage mark it "error".
Report run(const Presentation& p, const RunOptions& options);
int exit_code(const Report& r);

std::string render_machine(const Report& r);
std::string render_human(const Report& r);

/// Structural differences, one per line, ignoring timings. Throws ParseError on
/// a format mismatch.
std::vector<std::string> diff_reports(const Report& a, const Report& b);
Report parse_report(const std::string& text);

}  // namespace fibred::cli
