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

#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "errors.hpp"

namespace him {

/// Phase-shifter kind: exp(i phi n) or exp(i phi n^2).
enum class Scheme { Linear = 1, Kerr = 2 };

inline int exponent(Scheme s) { return static_cast<int>(s); }

inline Scheme scheme_from_int(int k) {
    if (k == 1) {
        return Scheme::Linear;
    }
    if (k == 2) {
        return Scheme::Kerr;
    }
    throw InvalidArgument("scheme exponent must be 1 or 2, got " +
                          std::to_string(k));
}

/// Physical parameters of the hybrid interferometer.
///
/// Input |alpha>_a |0>_b, two-mode squeezer with xi = g e^{i theta},
/// subtraction a^m b^n, optional loss on mode a (transmissivity eta) ahead of
/// the phase shifter, 50:50 beam splitter, homodyne on output mode a.
struct InterferometerConfig {
    double alpha_mag = 2.0;
    double theta_alpha = 0.0;
    double g = 1.0;
    double theta = 0.0;
    Scheme scheme = Scheme::Linear;
    int m = 0;
    int n = 0;
    double phi = 0.0;
    double eta = 1.0;

    [[nodiscard]] std::complex<double> alpha() const {
        return std::polar(alpha_mag, theta_alpha);
    }

    [[nodiscard]] bool lossless() const { return eta == 1.0; }

    void validate() const {
        if (!(alpha_mag >= 0.0) || !std::isfinite(alpha_mag)) {
            throw InvalidArgument("alpha must be a finite non-negative number");
        }
        if (!(g >= 0.0) || !std::isfinite(g)) {
            throw InvalidArgument("g must be a finite non-negative number");
        }
        if (m < 0 || n < 0) {
            throw InvalidArgument("subtraction orders must be non-negative");
        }
        if (!(eta > 0.0 && eta <= 1.0)) {
            throw InvalidArgument("eta must lie in (0, 1]");
        }
        if (!std::isfinite(phi) || !std::isfinite(theta) ||
            !std::isfinite(theta_alpha)) {
            throw InvalidArgument("phases must be finite");
        }
        (void)scheme_from_int(exponent(scheme));
    }

    [[nodiscard]] InterferometerConfig with_phi(double p) const {
        auto c = *this;
        c.phi = p;
        return c;
    }
    [[nodiscard]] InterferometerConfig with_eta(double e) const {
        auto c = *this;
        c.eta = e;
        return c;
    }
    [[nodiscard]] InterferometerConfig with_scheme(Scheme s) const {
        auto c = *this;
        c.scheme = s;
        return c;
    }

    friend bool operator==(const InterferometerConfig &,
                           const InterferometerConfig &) = default;
};

inline std::string describe(const InterferometerConfig &c) {
    return "alpha=" + std::to_string(c.alpha_mag) +
           " theta_alpha=" + std::to_string(c.theta_alpha) +
           " g=" + std::to_string(c.g) + " theta=" + std::to_string(c.theta) +
           " k=" + std::to_string(exponent(c.scheme)) +
           " m=" + std::to_string(c.m) + " n=" + std::to_string(c.n) +
           " phi=" + std::to_string(c.phi) + " eta=" + std::to_string(c.eta);
}

} // namespace him
