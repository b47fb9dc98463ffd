#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hmx {

enum class ErrorKind {
  InvalidSequence,
  NoLift,
  NonGenericArrangement,
  NonUnimodularFlat,
  CompletionBlowup,
  NonMonicRelation,
  DegreeOverflow,
  NotCentral,
  IllTypedMap,
  NoSpanningForest,
  NotComposable,
  NotAdjacent,
  SideUnspecified,
  FunctorialityFailure,
  NonTransverseCut,
  StepFailure,
  ParseError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Report-valued result of a validation pass; one line per failed invariant.
struct ValidationReport {
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
  void fail(std::string msg) { failures.push_back(std::move(msg)); }
};

}  // namespace hmx
