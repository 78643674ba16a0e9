#include "fibred/report.hpp"

#include <sstream>

namespace fibred {

const char* to_string(Severity s) noexcept {
  switch (s) {
    case Severity::structural: return "structural";
    case Severity::violation: return "violation";
    case Severity::truncation: return "truncation";
    case Severity::warning: return "warning";
  }
  return "?";
}

const char* to_string(CheckMode m) noexcept {
  switch (m) {
    case CheckMode::exhaustive: return "exhaustive";
    case CheckMode::basis: return "basis";
    case CheckMode::sampled: return "sampled";
    case CheckMode::skipped: return "skipped";
  }
  return "?";
}

void ValidationReport::add(Severity severity, std::string clause, std::string message,
                           std::vector<std::string> witnesses) {
  auto& n = per_clause_[clause];
  if (++n > kPerClauseCap) {
    ++suppressed_;
    return;
  }
  findings_.push_back({severity, std::move(clause), std::move(message), std::move(witnesses)});
}

void ValidationReport::note(std::string clause, CheckMode mode, std::size_t cases, std::string detail) {
  notes_.push_back({std::move(clause), mode, cases, std::move(detail)});
}

void ValidationReport::merge(const ValidationReport& other) {
  for (const auto& f : other.findings_) add(f.severity, f.clause, f.message, f.witnesses);
  suppressed_ += other.suppressed_;
  notes_.insert(notes_.end(), other.notes_.begin(), other.notes_.end());
}

bool ValidationReport::ok() const noexcept {
  return count(Severity::structural) == 0 && count(Severity::violation) == 0;
}

bool ValidationReport::truncated() const noexcept { return count(Severity::truncation) > 0; }

std::size_t ValidationReport::count(Severity s) const noexcept {
  std::size_t n = 0;
  for (const auto& f : findings_) n += f.severity == s;
  return n;
}

const Finding* ValidationReport::first(const std::string& prefix) const {
  for (const auto& f : findings_)
    if (f.clause.rfind(prefix, 0) == 0) return &f;
  return nullptr;
}

bool ValidationReport::mentions(const std::string& needle) const {
  for (const auto& f : findings_) {
    if (f.message.find(needle) != std::string::npos) return true;
    for (const auto& w : f.witnesses)
      if (w.find(needle) != std::string::npos) return true;
  }
  return false;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os << count(Severity::structural) << " structural, " << count(Severity::violation) << " violations, "
     << count(Severity::truncation) << " truncations";
  if (suppressed_) os << " (" << suppressed_ << " suppressed)";
  return os.str();
}

}  // namespace fibred
