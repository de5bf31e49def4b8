// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the intrinsic project.

#pragma once

#include <stdexcept>
#include <string>

namespace intrinsic {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Tensor shapes are incompatible for the requested operation.
struct ShapeError : Error {
    using Error::Error;
};

/// A solver or operation parameter violates its invariants.
struct ParamError : Error {
    using Error::Error;
};

/// Reading or writing a file failed.
struct IoError : Error {
    using Error::Error;
};

/// A file decoded correctly but has an unsupported layout or bit depth.
struct FormatError : Error {
    using Error::Error;
};

/// A structured text file (JSON, config) could not be parsed.
struct ParseError : Error {
    using Error::Error;
};

/// Parsed data references entities that do not exist or carries
/// out-of-domain values.
struct IntegrityError : Error {
    using Error::Error;
};

/// A metric is undefined on the given input (e.g. zero total weight).
struct EvalError : Error {
    using Error::Error;
};

/// A solver produced a non-finite intermediate value.
struct NumericalError : Error {
    using Error::Error;
};

}  // namespace intrinsic
