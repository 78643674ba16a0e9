#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace fibred {

enum class Severity {
  structural,  // malformed data, distinct from law violations
  violation,   // a law or axiom fails
  truncation,  // result needed something outside the universe
  warning,
};

const char* to_string(Severity s) noexcept;

struct Finding {
  Severity severity = Severity::violation;
  std::string clause;
  std::string message;
  std::vector<std::string> witnesses;

  friend bool operator==(const Finding&, const Finding&) = default;
};

/// How a quantified clause was discharged.
enum class CheckMode { exhaustive, basis, sampled, skipped };

const char* to_string(CheckMode m) noexcept;

struct ClauseNote {
  std::string clause;
  CheckMode mode = CheckMode::exhaustive;
  std::size_t cases = 0;
  std::string detail;

  friend bool operator==(const ClauseNote&, const ClauseNote&) = default;
};

/// Fail-slow accumulator. Checks never throw on law violations; they record
/// every witness (up to a per-clause cap, with the overflow counted).
class ValidationReport {
 public:
  static constexpr std::size_t kPerClauseCap = 64;

  void add(Severity severity, std::string clause, std::string message,
           std::vector<std::string> witnesses = {});
  void note(std::string clause, CheckMode mode, std::size_t cases, std::string detail = {});
  void merge(const ValidationReport& other);

  bool ok() const noexcept;
  bool truncated() const noexcept;
  std::size_t count(Severity s) const noexcept;
  std::size_t suppressed() const noexcept { return suppressed_; }

  const std::vector<Finding>& findings() const noexcept { return findings_; }
  const std::vector<ClauseNote>& notes() const noexcept { return notes_; }

  /// First finding whose clause starts with `prefix`, if any.
  const Finding* first(const std::string& prefix) const;
  bool mentions(const std::string& needle) const;

  std::string summary() const;

 private:
  std::vector<Finding> findings_;
  std::vector<ClauseNote> notes_;
  std::map<std::string, std::size_t> per_clause_;
  std::size_t suppressed_ = 0;
};

}  // namespace fibred
