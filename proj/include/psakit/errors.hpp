#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace psakit {

/**
 * Base class for every failure the library raises deliberately.
 *
 * Each error carries a stable machine-readable code string alongside the
 * human-readable message. The CLI maps codes to its error JSON verbatim, so
 * codes are part of the public contract and never change spelling.
 *
 * Verdicts are not errors: "no isomorphism exists", "not effectively
 * related" and "no binary valuation exists" are ordinary return values.
 */
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

/// Operand shapes are incompatible, dims do not factor, or a cap such as
/// max_dim is exceeded.
struct DimensionError : Error {
  explicit DimensionError(const std::string& what)
      : Error("dimension_error", what) {}
};

/// A numerical routine failed to converge or produced non-finite values.
struct NumericalError : Error {
  explicit NumericalError(const std::string& what)
      : Error("numerical_error", what) {}
};

/// An operator offered as a power is not a projector within tolerance.
struct InvalidPowerError : Error {
  InvalidPowerError(std::size_t index, double defect, const std::string& what)
      : Error("invalid_power", what), index(index), defect(defect) {}

  std::size_t index;  // position in the caller's projector list
  double defect;      // ||P^2 - P||_F or hermiticity defect, whichever tripped
};

/// A basis offered to the graph generator is not orthonormal or not square.
struct InvalidBasisError : Error {
  explicit InvalidBasisError(const std::string& what)
      : Error("invalid_basis", what) {}
};

/// Clique enumeration exceeded the configured cap.
struct CombinatorialBlowupError : Error {
  CombinatorialBlowupError(std::size_t cap, const std::string& what)
      : Error("combinatorial_blowup", what), cap(cap) {}

  std::size_t cap;
};

/// The power graph does not span the operator space, so no density matrix
/// can be reconstructed from a valuation on it.
struct NotTomographicallyCompleteError : Error {
  NotTomographicallyCompleteError(int rank, int needed, const std::string& what)
      : Error("not_tomographically_complete", what), rank(rank), needed(needed) {}

  int rank;    // achieved row rank of the reconstruction system
  int needed;  // d^2
};

/// The valuation admits no density matrix: residual too large, or the
/// reconstructed operator is not PSD / trace-1 within tolerance.
struct InconsistentPSAError : Error {
  explicit InconsistentPSAError(const std::string& what)
      : Error("inconsistent_psa", what) {}
};

/// The valuation search exhausted its node-expansion budget.
struct SearchBudgetError : Error {
  SearchBudgetError(unsigned long long budget, const std::string& what)
      : Error("search_budget_exceeded", what), budget(budget) {}

  unsigned long long budget;
};

/// A context that must resolve the identity does not (or no such context
/// exists where at least one is required).
struct NonExhaustiveContextError : Error {
  explicit NonExhaustiveContextError(const std::string& what)
      : Error("non_exhaustive_context", what) {}
};

/// A state vector or density matrix fails its defining checks.
struct InvalidStateError : Error {
  explicit InvalidStateError(const std::string& what)
      : Error("invalid_state", what) {}
};

/// The scenario JSON is structurally wrong: missing field, wrong type,
/// unknown enumerator. `field` is a dotted path into the document.
struct SchemaError : Error {
  SchemaError(std::string field, const std::string& reason)
      : Error("schema_error", field + ": " + reason), field(std::move(field)) {}

  std::string field;
};

/// The scenario JSON is well-formed but semantically inconsistent
/// (state fails validation, matching is not a bijection, ...).
struct ValidationError : Error {
  explicit ValidationError(const std::string& what)
      : Error("validation_error", what) {}
};

}
