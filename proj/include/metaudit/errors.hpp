#pragma once

#include <stdexcept>
#include <string>

namespace metaudit {

// Base class for all metaudit errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A scalar argument lies outside the domain of the requested function
// (non-finite input, probability outside (0,1), ...).
class DomainError : public Error {
public:
  using Error::Error;
};

// The input file or table violates the schema or a record invariant.
// Messages name the file, column or row, and the rule that failed.
class InputError : public Error {
public:
  using Error::Error;
};

// The data is structurally valid but an analysis cannot proceed:
// insufficient points, degenerate regressor, empty plot geometry.
class AnalysisError : public Error {
public:
  using Error::Error;
};

} // namespace metaudit
