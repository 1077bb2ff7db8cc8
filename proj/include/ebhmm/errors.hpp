#ifndef EBHMM_ERRORS_HPP
#define EBHMM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ebhmm {

// Error taxonomy shared by all modules. Each class carries a stable name and
// a distinct process exit code so the CLI can report machine-readable errors.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, int exit_code, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)), exit_code_(exit_code) {}
  const std::string& kind() const { return kind_; }
  int exit_code() const { return exit_code_; }

 private:
  std::string kind_;
  int exit_code_;
};

// Malformed input file (bad CSV/JSON syntax, bad cell) with a row/column locus.
struct FormatError : Error {
  explicit FormatError(const std::string& what) : Error("format", 2, what) {}
};

// Structurally valid input that violates a domain invariant (unsorted visits, ...).
struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error("validation", 3, what) {}
};

// Inconsistent schema across rows or files.
struct SchemaError : Error {
  explicit SchemaError(const std::string& what) : Error("schema", 4, what) {}
};

// A caller broke an operation precondition.
struct ArgumentError : Error {
  explicit ArgumentError(const std::string& what) : Error("argument", 5, what) {}
};

// Mixture or model fitting could not proceed (insufficient data, ...).
struct FitError : Error {
  explicit FitError(const std::string& what) : Error("fit", 6, what) {}
};

// Numerical degeneracy (all-zero emission row, non-monotone EM trace, ...).
struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error("numerical", 7, what) {}
};

// A stochastic matrix with no real logarithm was asked for a fractional power.
struct EmbeddingError : Error {
  explicit EmbeddingError(const std::string& what) : Error("embedding", 8, what) {}
};

// Timeline construction hit an infinite internal sojourn.
struct TimelineError : Error {
  explicit TimelineError(const std::string& what) : Error("timeline", 9, what) {}
};

// Evaluation task is undefined on the given data (no eligible subjects, ...).
struct EvalError : Error {
  explicit EvalError(const std::string& what) : Error("evaluation", 10, what) {}
};

// Filesystem failure.
struct IoError : Error {
  explicit IoError(const std::string& what) : Error("io", 11, what) {}
};

}  // namespace ebhmm

#endif
