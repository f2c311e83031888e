#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include "rmpe/trace.hpp"

namespace rmpe {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mismatched dimensions or too few iterates.
struct StructuralError : Error {
  using Error::Error;
};

struct RankDeficientError : Error {
  RankDeficientError(const std::string& what, long pivot) : Error(what), pivot(pivot) {}
  long pivot;
};

struct DegenerateSystemError : Error {
  using Error::Error;
};

struct NumericalBreakdownError : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

struct InvalidConfigError : Error {
  using Error::Error;
};

struct SolverError : Error {
  SolverError(const std::string& what, double residual) : Error(what), residual(residual) {}
  double residual;
};

struct EstimationError : Error {
  using Error::Error;
};

struct AllCandidatesInvalidError : Error {
  using Error::Error;
};

struct DivergedError : Error {
  DivergedError(const std::string& what, ConvergenceTrace partial)
      : Error(what), partial(std::move(partial)) {}
  ConvergenceTrace partial;
};

struct ParseError : Error {
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

struct ReferenceNotConvergedError : Error {
  ReferenceNotConvergedError(const std::string& what, double grad_norm)
      : Error(what), grad_norm(grad_norm) {}
  double grad_norm;
};

}  // namespace rmpe
