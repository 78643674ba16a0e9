#pragma once

#include <stdexcept>
#include <string>

namespace fibred {

// Malformed input: dangling identifiers, missing table entries, ill-typed data.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An operation needed an object or morphism outside the enumerated universe.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The fibre backend cannot perform the requested construction.
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace fibred
