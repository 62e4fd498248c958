// Copyright 2026 The hi-metrology Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Exception hierarchy shared by every module of the library.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace him {

/// Base class of all library errors.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed arguments: index outside a cap box, mismatched shapes, bad
/// configuration values.
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

/// The photon-subtraction step annihilated the state (zero norm).
class DegenerateState : public Error {
  public:
    using Error::Error;
};

/// A quantity that must be real/non-negative came out otherwise beyond
/// tolerance.
class NumericalConsistency : public Error {
  public:
    using Error::Error;
};

/// The requested closed form does not cover this configuration and the
/// caller must use the Fock-space simulator instead (lossy Kerr homodyne).
class RoutedToOracle : public Error {
  public:
    using Error::Error;
};

/// Fock truncation too small for the requested state.
class CutoffError : public Error {
  public:
    CutoffError(const std::string &what, int suggested)
        : Error(what + " (suggested cutoff " + std::to_string(suggested) + ")"),
          suggested_cutoff(suggested) {}
    int suggested_cutoff;
};

/// dX/dphi vanishes so the error-propagation formula is undefined.
class UndefinedSensitivity : public Error {
  public:
    using Error::Error;
};

/// No valid grid point during an optimal-phase search.
class SearchError : public Error {
  public:
    using Error::Error;
};

/// The closed-form stationary point of the lossy Kerr bound has a singular
/// denominator.
class SingularOptimization : public Error {
  public:
    SingularOptimization(const std::string &what, double a_, double b_,
                         double c_, double d_, double e_)
        : Error(what), a(a_), b(b_), c(c_), d(d_), e(e_) {}
    double a, b, c, d, e;
};

} // namespace him
