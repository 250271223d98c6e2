#pragma once

#include <stdexcept>
#include <string>

namespace elicit {

/// Base class for all library errors. Subclasses carry no extra state; the
/// type itself is the diagnostic category and the message the detail.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid construction parameter (quantile/expectile level outside (0,1), ...).
struct InvalidSpec : Error {
  using Error::Error;
};

/// functional_interval could not bracket a sign change: the mean
/// identification function is identically zero on an unbounded set.
struct DegenerateInterval : Error {
  using Error::Error;
};

/// Evaluation point outside a tabulated generator's range.
struct OutOfRange : Error {
  using Error::Error;
};

/// Tabulated generator fails the convexity check (second differences < -1e-10).
struct NonConvex : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

/// Malformed input file or config; message names the offending row/column/key.
struct ParseError : Error {
  using Error::Error;
};

/// NaN or infinity where a finite value is required; message carries the row.
struct NonFiniteValue : Error {
  using Error::Error;
};

struct EmptyInput : Error {
  using Error::Error;
};

/// Murphy curves from different (functional, observations) identities compared.
struct FingerprintMismatch : Error {
  using Error::Error;
};

/// Multistart search box is empty after intersecting declared bounds.
struct NoFeasibleStart : Error {
  using Error::Error;
};

/// Too few observations for the requested bin count.
struct WidthError : Error {
  using Error::Error;
};

/// Root scan resolution insufficient to classify a candidate root.
struct WindowTooCoarse : Error {
  using Error::Error;
};

/// Objective derivative requested at b = 0 where the formula has a case split.
struct ZeroSlope : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace elicit
