#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsg {

enum class ErrorKind {
  Syntax,
  UnknownIdentifier,
  Domain,
  RetractDiverged,
  DegenerateNormal,
  DegenerateCritical,
  EulerViolation,
  ProfileInvalid,
  TraceStalled,
  NotStable,
  NoSingularSet,
  IndefiniteBoundary,
  TypeTwoDetected,
  FeatureTooClose,
  Schema,
  NotHorizontal,
  NotVertical,
  UnresolvedTie,
  AssumptionViolated,
  InvalidArgument,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Parse failure at a byte offset of the input text.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::vector<std::string> expected, const std::string& detail);

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

class UnknownIdentifier : public Error {
 public:
  UnknownIdentifier(std::size_t offset, const std::string& name);

  std::size_t offset() const noexcept { return offset_; }
  const std::string& name() const noexcept { return name_; }

 private:
  std::size_t offset_;
  std::string name_;
};

// JSON document does not match the graphic/report schema. `pointer` is a JSON pointer.
class SchemaError : public Error {
 public:
  SchemaError(std::string pointer, const std::string& detail);

  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace rsg
