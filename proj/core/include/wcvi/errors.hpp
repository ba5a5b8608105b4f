#pragma once

#include <stdexcept>
#include <string>

namespace wcvi {

// Base for everything thrown on purpose by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller passed something structurally wrong (bad length, bad enum, bad range).
struct InvalidInputError : Error {
  using Error::Error;
};

// A primitive was evaluated outside its mathematical domain, or produced a
// non-finite value.  Carries the primitive name so failures deep inside a
// graph are attributable.
struct DomainError : Error {
  std::string primitive;
  long node = -1;
  DomainError(std::string prim, const std::string& msg, long node_index = -1)
      : Error(prim + ": " + msg +
              (node_index >= 0 ? " (node " + std::to_string(node_index) + ")" : "")),
        primitive(std::move(prim)),
        node(node_index) {}
};

// Query outside the support of a grid density.
struct SupportError : Error {
  using Error::Error;
};

// An operation that exists only for some configuration (e.g. asking the
// independence copula for a correlation matrix).
struct NotApplicableError : Error {
  using Error::Error;
};

// Runtime numerical failure with attached diagnostics (non-finite ELBO,
// degenerate density, diverged fit).
struct NumericalError : Error {
  std::string diagnostics;
  NumericalError(const std::string& msg, std::string diag = "")
      : Error(diag.empty() ? msg : msg + "\n" + diag), diagnostics(std::move(diag)) {}
};

}  // namespace wcvi
