#include "rsg/error.hpp"

#include <utility>

namespace rsg {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "SyntaxError";
    case ErrorKind::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::RetractDiverged: return "RetractDiverged";
    case ErrorKind::DegenerateNormal: return "DegenerateNormal";
    case ErrorKind::DegenerateCritical: return "DegenerateCritical";
    case ErrorKind::EulerViolation: return "EulerViolation";
    case ErrorKind::ProfileInvalid: return "ProfileInvalid";
    case ErrorKind::TraceStalled: return "TraceStalled";
    case ErrorKind::NotStable: return "NotStable";
    case ErrorKind::NoSingularSet: return "NoSingularSet";
    case ErrorKind::IndefiniteBoundary: return "IndefiniteBoundary";
    case ErrorKind::TypeTwoDetected: return "TypeTwoDetected";
    case ErrorKind::FeatureTooClose: return "FeatureTooClose";
    case ErrorKind::Schema: return "SchemaError";
    case ErrorKind::NotHorizontal: return "NotHorizontal";
    case ErrorKind::NotVertical: return "NotVertical";
    case ErrorKind::UnresolvedTie: return "UnresolvedTie";
    case ErrorKind::AssumptionViolated: return "AssumptionViolated";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

namespace {
std::string describe_expected(std::size_t offset, const std::vector<std::string>& expected,
                              const std::string& detail) {
  std::string msg = "at byte " + std::to_string(offset) + ": " + detail;
  if (!expected.empty()) {
    msg += " (expected one of:";
    for (const auto& e : expected) msg += " " + e;
    msg += ")";
  }
  return msg;
}
}  // namespace

SyntaxError::SyntaxError(std::size_t offset, std::vector<std::string> expected,
                         const std::string& detail)
    : Error(ErrorKind::Syntax, describe_expected(offset, expected, detail)),
      offset_(offset),
      expected_(std::move(expected)) {}

UnknownIdentifier::UnknownIdentifier(std::size_t offset, const std::string& name)
    : Error(ErrorKind::UnknownIdentifier,
            "at byte " + std::to_string(offset) + ": unknown identifier '" + name + "'"),
      offset_(offset),
      name_(name) {}

SchemaError::SchemaError(std::string pointer, const std::string& detail)
    : Error(ErrorKind::Schema, (pointer.empty() ? std::string("/") : pointer) + ": " + detail),
      pointer_(std::move(pointer)) {}

}  // namespace rsg
