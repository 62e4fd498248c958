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
 * Metrological figures of merit: homodyne phase sensitivity, optimal working
 * point, ideal and lossy quantum Fisher information, and the scaling limits.
 */

#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "fock.hpp"
#include "interferometer.hpp"

namespace him {

/// Which engine produced a number.
enum class Source { GeneratingFunction, Oracle };

inline const char *to_string(Source s) {
    return s == Source::GeneratingFunction ? "generating-function" : "oracle";
}

/// Error-propagation phase sensitivity at one working point.
struct SensitivityResult {
    double phi = 0.0;
    double delta_phi = 0.0; ///< sqrt(var_x) / |slope|
    double mean_x = 0.0;
    double var_x = 0.0;
    double slope = 0.0; ///< d<X_a>/dphi
    Source source = Source::GeneratingFunction;
};

/// Below this |d<X_a>/dphi| the sensitivity is undefined.
inline constexpr double kMinSlope = 1e-12;

/// Richardson-extrapolated central difference of f at x with base step h.
template <class F> double richardson_derivative(F &&f, double x, double h) {
    const double d1 = (f(x + h) - f(x - h)) / (2 * h);
    const double h2 = h / 2;
    const double d2 = (f(x + h2) - f(x - h2)) / (2 * h2);
    return (4 * d2 - d1) / 3;
}

/// Default finite-difference step for Kerr slopes.
inline double kerr_slope_step(double phi) { return 1e-6 * std::max(1.0, std::abs(phi)); }

/// Phase-sensitivity evaluator for a fixed (alpha, g, m, n, k, eta); the phase
/// is the free variable. Picks the engine once:
/// linear scheme -> closed form with analytic slope; lossless Kerr -> closed
/// form with Richardson slope; lossy Kerr -> Fock-space oracle.
class SensitivityModel {
  public:
    explicit SensitivityModel(const InterferometerConfig &cfg,
                              const fock::CutoffPolicy &policy = {},
                              AssemblyOptions opts = {})
        : cfg_(cfg) {
        cfg.validate();
        if (cfg.scheme == Scheme::Linear) {
            engine_ = std::make_shared<LinearHomodyneModel>(cfg);
        } else if (cfg.lossless()) {
            engine_ = std::make_shared<KerrHomodyneModel>(cfg, opts);
        } else {
            engine_ = std::make_shared<fock::LossyHomodyneOracle>(cfg, policy);
        }
    }

    [[nodiscard]] Source source() const {
        return std::holds_alternative<std::shared_ptr<fock::LossyHomodyneOracle>>(engine_)
                   ? Source::Oracle
                   : Source::GeneratingFunction;
    }

    [[nodiscard]] HomodyneMoments moments(double phi) const {
        return std::visit([&](const auto &e) { return e->moments(phi); }, engine_);
    }

    [[nodiscard]] double mean(double phi) const {
        return std::visit(
            [&](const auto &e) -> double {
                using T = std::decay_t<decltype(*e)>;
                if constexpr (std::is_same_v<T, LinearHomodyneModel>) {
                    return e->moments(phi).mean;
                } else {
                    return e->mean(phi);
                }
            },
            engine_);
    }

    /// d<X_a>/dphi; h overrides the finite-difference step (ignored when the
    /// slope is analytic).
    [[nodiscard]] double slope(double phi, std::optional<double> h = std::nullopt) const {
        if (const auto *lin = std::get_if<std::shared_ptr<LinearHomodyneModel>>(&engine_)) {
            return (*lin)->slope(phi);
        }
        return richardson_derivative([&](double p) { return mean(p); }, phi,
                                     h.value_or(kerr_slope_step(phi)));
    }

    [[nodiscard]] SensitivityResult evaluate(double phi) const {
        SensitivityResult r;
        r.phi = phi;
        r.source = source();
        const auto mom = moments(phi);
        r.mean_x = mom.mean;
        r.var_x = mom.variance();
        if (r.var_x < 0.0) {
            if (r.var_x < -1e-9 * std::max(1.0, mom.second)) {
                throw NumericalConsistency("negative quadrature variance (" +
                                           describe(cfg_.with_phi(phi)) + ")");
            }
            r.var_x = 0.0;
        }
        r.slope = slope(phi);
        if (!(std::abs(r.slope) >= kMinSlope)) {
            throw UndefinedSensitivity("d<X_a>/dphi vanishes at phi=" + std::to_string(phi));
        }
        r.delta_phi = std::sqrt(r.var_x) / std::abs(r.slope);
        return r;
    }

    [[nodiscard]] const InterferometerConfig &config() const { return cfg_; }

  private:
    InterferometerConfig cfg_;
    std::variant<std::shared_ptr<LinearHomodyneModel>, std::shared_ptr<KerrHomodyneModel>,
                 std::shared_ptr<fock::LossyHomodyneOracle>>
        engine_;
};

/// Delta phi = sqrt(Var X_a) / |d<X_a>/dphi| at cfg.phi.
inline SensitivityResult phase_sensitivity(const InterferometerConfig &cfg,
                                           const fock::CutoffPolicy &policy = {}) {
    return SensitivityModel(cfg, policy).evaluate(cfg.phi);
}

/// Search interval for the working point.
struct PhaseWindow {
    double lo;
    double hi;
};

/// Scheme I avoids the stationary endpoints 0 and pi; Kerr optima sit at small phi.
inline PhaseWindow default_window(Scheme s) {
    return s == Scheme::Linear ? PhaseWindow{0.05, std::numbers::pi - 0.05}
                               : PhaseWindow{1e-4, 0.5};
}

inline int default_grid_points(Scheme s) { return s == Scheme::Linear ? 64 : 256; }

/// Relative change of Delta phi at which the golden-section refinement stops.
inline constexpr double kGoldenRelTol = 1e-10;

/// Coarse grid scan then golden-section refinement around the best grid point.
/// Ties go to the lowest phi.
inline SensitivityResult optimal_phase(const SensitivityModel &model, PhaseWindow window,
                                       int grid_points) {
    if (!(window.hi > window.lo) || !std::isfinite(window.lo) || !std::isfinite(window.hi)) {
        throw InvalidArgument("phase window must be a nonempty finite interval");
    }
    if (grid_points < 16) {
        throw InvalidArgument("optimal_phase needs at least 16 grid points");
    }
    auto dphi = [&](double p) {
        try {
            const double d = model.evaluate(p).delta_phi;
            return std::isfinite(d) ? d : std::numeric_limits<double>::infinity();
        } catch (const UndefinedSensitivity &) {
            return std::numeric_limits<double>::infinity();
        }
    };
    const double step = (window.hi - window.lo) / (grid_points - 1);
    int best = -1;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_points; ++i) {
        const double v = dphi(window.lo + step * i);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    if (best < 0) {
        throw SearchError("no grid point has a defined phase sensitivity");
    }
    double a = window.lo + step * std::max(0, best - 1);
    double b = window.lo + step * std::min(grid_points - 1, best + 1);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = dphi(x1), f2 = dphi(x2);
    for (int it = 0; it < 200; ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = dphi(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = dphi(x2);
        }
        const double fm = std::min(f1, f2);
        const bool flat = std::abs(f1 - f2) <= kGoldenRelTol * fm;
        const bool narrow = (b - a) <= 1e-12 * std::max(1.0, std::abs(a));
        if ((flat && (b - a) <= 1e-7 * std::max(1.0, std::abs(a))) || narrow) {
            break;
        }
    }
    double phi_star = f1 <= f2 ? x1 : x2;
    if (std::min(f1, f2) > best_val) {
        phi_star = window.lo + step * best;
    }
    return model.evaluate(phi_star);
}

inline SensitivityResult optimal_phase(const InterferometerConfig &cfg,
                                       std::optional<PhaseWindow> window = std::nullopt,
                                       std::optional<int> grid_points = std::nullopt,
                                       const fock::CutoffPolicy &policy = {}) {
    const SensitivityModel model(cfg, policy);
    return optimal_phase(model, window.value_or(default_window(cfg.scheme)),
                         grid_points.value_or(default_grid_points(cfg.scheme)));
}

/// Ideal quantum Fisher information of the pure pre-splitter state.
struct QfiResult {
    double F = 0.0;
    std::optional<double> f_surplus; ///< F2 - F1 for the Kerr scheme
};

/// F1 = 4 Var(n_a) (linear) or F2 = 4 Var(n_a^2) (Kerr).
inline QfiResult qfi_ideal(const InterferometerConfig &cfg) {
    const auto pm = photon_moments(cfg);
    const double f1 = 4.0 * pm.var_n();
    if (cfg.scheme == Scheme::Linear) {
        return {f1, std::nullopt};
    }
    const double f2 = 4.0 * pm.var_n2();
    return {f2, f2 - f1};
}

/// Quantum Cramer-Rao bound 1 / sqrt(F).
inline double qcrb(double F) {
    if (!(F > 0.0) || !std::isfinite(F)) {
        throw InvalidArgument("the quantum Fisher information must be positive");
    }
    return 1.0 / std::sqrt(F);
}

/// F_L1 = 4 F1 eta <n_a> / ((1 - eta) F1 + 4 eta <n_a>), moments before loss.
inline double qfi_lossy_linear(const PhotonMoments &pm, double eta) {
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw InvalidArgument("eta must lie in (0, 1]");
    }
    const double f1 = 4.0 * pm.var_n();
    const double x = 4.0 * eta * pm.n1;
    const double den = (1.0 - eta) * f1 + x;
    if (!(den > 0.0)) {
        throw DegenerateState("vacuum input: the lossy Fisher information is undefined");
    }
    // Written as F1 * x / den so that eta = 1 returns F1 bit for bit.
    return f1 * (x / den);
}

inline double qfi_lossy_linear(const InterferometerConfig &cfg) {
    if (cfg.scheme != Scheme::Linear) {
        throw InvalidArgument("qfi_lossy_linear needs the linear scheme");
    }
    cfg.validate();
    return qfi_lossy_linear(photon_moments(cfg), cfg.eta);
}

/// Second-order character of the lossy Kerr bound at the closed-form optimum.
enum class HessianSignature { Maximum, Minimum, Saddle, Degenerate };

inline const char *to_string(HessianSignature h) {
    switch (h) {
    case HessianSignature::Maximum:
        return "maximum";
    case HessianSignature::Minimum:
        return "minimum";
    case HessianSignature::Saddle:
        return "saddle";
    case HessianSignature::Degenerate:
        break;
    }
    return "degenerate";
}

/// Every intermediate of the variational lossy Kerr bound.
struct LossyQfiCoefficients {
    double mu1 = 0.0, mu2 = 0.0;
    std::array<double, 7> c{};     ///< c1..c7
    std::array<double, 6> cap_c{}; ///< C1..C6
    std::array<double, 4> a_aux{}; ///< a1..a4
    std::array<std::array<double, 6>, 5> b_rows{};
    std::array<double, 6> h{}; ///< (Var n^2, <n^3>, <n^2>, <n>, <n^2><n>, <n>^2)
    double a = 0, b = 0, cs = 0, d = 0, e = 0;
    double F = 0.0; ///< F_L2 at (mu1, mu2)
};

namespace detail {

inline std::array<double, 6> moment_vector(const PhotonMoments &pm) {
    return {pm.var_n2(), pm.n3, pm.n2, pm.n1, pm.n2 * pm.n1, pm.n1 * pm.n1};
}

/// c1..c7 and C1..C6 at (mu1, mu2, eta).
inline void fill_coefficients(LossyQfiCoefficients &k, double eta) {
    const double m1 = k.mu1, m2 = k.mu2;
    auto &c = k.c;
    c[0] = 1 + 2 * m1 - m2;
    c[1] = m1 - m2;
    c[2] = 1 + 2 * (3 * m1 - 2 * m2) + (2 * m1 - m2) * (4 * m1 - 3 * m2);
    c[3] = 7 * m2 - 6 * m1 + 24 * m1 * m2 - 14 * m1 * m1 - 9 * m2 * m2;
    c[4] = m2 * c[0] - 2 * c[1] * c[1];
    c[5] = 9 + 40 * m1 - 22 * m2 + 44 * m1 * m1 - 48 * m1 * m2 + 13 * m2 * m2;
    c[6] = 7 + 40 * m1 - 26 * m2 + 52 * m1 * m1 - 64 * m1 * m2 + 19 * m2 * m2;
    const double e = eta, e2 = e * e, e3 = e2 * e, c1s = c[0] * c[0];
    auto &C = k.cap_c;
    C[0] = c[0] * e2 - 2 * c[1] * e - m2;
    C[1] = 2 * e * (3 * c1s * e3 - 3 * c[2] * e2 - c[3] * e + c[4]);
    C[2] = e * (11 * c1s * e3 - 2 * c[5] * e2 + c[6] * e - 4 * c[0] * c[1]);
    C[3] = e * (6 * e3 - 12 * e2 + 7 * e - 1) * c1s;
    C[4] = 2 * e * (1 - e) * c[0] * C[0];
    C[5] = e2 * (1 - e) * (1 - e) * c1s;
}

inline double fl2_from(const LossyQfiCoefficients &k) {
    const auto &C = k.cap_c;
    const auto &h = k.h;
    return 4.0 * (C[0] * C[0] * h[0] - C[1] * h[1] + C[2] * h[2] - C[3] * h[3] -
                  C[4] * h[4] - C[5] * h[5]);
}

} // namespace detail

/// Lossy Kerr bound F_L2 at arbitrary variational parameters.
inline LossyQfiCoefficients lossy_kerr_bound(const PhotonMoments &pm, double eta, double mu1,
                                             double mu2) {
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw InvalidArgument("eta must lie in (0, 1]");
    }
    LossyQfiCoefficients k;
    k.mu1 = mu1;
    k.mu2 = mu2;
    k.h = detail::moment_vector(pm);
    detail::fill_coefficients(k, eta);
    k.F = detail::fl2_from(k);
    return k;
}

/// Closed-form stationary point of F_L2 in (mu1, mu2) and all intermediates.
inline LossyQfiCoefficients mu_optimal(const PhotonMoments &pm, double eta) {
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw InvalidArgument("eta must lie in (0, 1]");
    }
    LossyQfiCoefficients k;
    k.h = detail::moment_vector(pm);
    const double e = eta;
    const double a1 = e - 1, a2 = 6 * e * e - 6 * e + 1, a3 = 11 * e * e - 11 * e + 2,
                 a4 = 2 * e - 1;
    k.a_aux = {a1, a2, a3, a4};
    k.b_rows[0] = {e * a1, -a2, a3, -a2, 2 * e * a1, -e * a1};
    k.b_rows[1] = {a1 * a1, -3 * a1 * a4, a3 - a4, -a2, a1 * a4, -e * a1};
    k.b_rows[2] = {e * e, -3 * e * a4, a3 + a4, -a2, e * a4, -e * a1};
    k.b_rows[3] = {a1 * a1 * a1, -6 * e * a1 * a1, e * (a3 - 2 * a4), -e * a2,
                   2 * e * a1 * a1, -e * e * a1};
    k.b_rows[4] = {e * a1, -a2, a3, -a2, e * e + a1 * a1, -e * a1};
    auto dot = [&](const std::array<double, 6> &row) {
        double s = 0.0;
        for (int i = 0; i < 6; ++i) {
            s += row[i] * k.h[i];
        }
        return s;
    };
    k.a = 2 * dot(k.b_rows[0]);
    k.b = dot(k.b_rows[1]);
    k.cs = dot(k.b_rows[2]);
    k.d = dot(k.b_rows[3]);
    k.e = e * dot(k.b_rows[4]);
    const double ad = k.a * k.d, bb = 2 * e * k.b * k.b;
    const double den = ad - bb;
    const double scale = std::max(std::abs(ad), std::abs(bb));
    if (!(scale > 0.0) || std::abs(den) <= 1e-12 * scale) {
        throw SingularOptimization("singular denominator ad - 2 eta b^2 in the lossy Kerr optimum",
                                   k.a, k.b, k.cs, k.d, k.e);
    }
    k.mu1 = (k.b * k.e - k.cs * k.d) / den;
    k.mu2 = (k.a * k.e - 2 * e * k.b * k.cs) / den;
    detail::fill_coefficients(k, eta);
    k.F = detail::fl2_from(k);
    return k;
}

/// Central-difference gradient of F_L2 in (mu1, mu2). F_L2 is quadratic in mu,
/// so central differences are exact up to roundoff.
inline std::array<double, 2> lossy_kerr_gradient(const PhotonMoments &pm, double eta,
                                                 double mu1, double mu2) {
    const double h1 = 1e-3 * std::max(1.0, std::abs(mu1));
    const double h2 = 1e-3 * std::max(1.0, std::abs(mu2));
    auto f = [&](double x, double y) { return lossy_kerr_bound(pm, eta, x, y).F; };
    return {(f(mu1 + h1, mu2) - f(mu1 - h1, mu2)) / (2 * h1),
            (f(mu1, mu2 + h2) - f(mu1, mu2 - h2)) / (2 * h2)};
}

/// Hessian signature of F_L2 at (mu1, mu2), reported as a diagnostic.
inline HessianSignature lossy_kerr_hessian(const PhotonMoments &pm, double eta, double mu1,
                                           double mu2) {
    const double h1 = 1e-2 * std::max(1.0, std::abs(mu1));
    const double h2 = 1e-2 * std::max(1.0, std::abs(mu2));
    auto f = [&](double x, double y) { return lossy_kerr_bound(pm, eta, x, y).F; };
    const double f0 = f(mu1, mu2);
    const double hxx = (f(mu1 + h1, mu2) - 2 * f0 + f(mu1 - h1, mu2)) / (h1 * h1);
    const double hyy = (f(mu1, mu2 + h2) - 2 * f0 + f(mu1, mu2 - h2)) / (h2 * h2);
    const double hxy = (f(mu1 + h1, mu2 + h2) - f(mu1 + h1, mu2 - h2) - f(mu1 - h1, mu2 + h2) +
                        f(mu1 - h1, mu2 - h2)) /
                       (4 * h1 * h2);
    const double det = hxx * hyy - hxy * hxy;
    const double scale = std::max({hxx * hxx, hyy * hyy, hxy * hxy});
    if (std::abs(det) <= 1e-10 * scale || scale == 0.0) {
        return HessianSignature::Degenerate;
    }
    if (det < 0) {
        return HessianSignature::Saddle;
    }
    return hxx < 0 ? HessianSignature::Maximum : HessianSignature::Minimum;
}

/// F_L2 at the closed-form optimum, moments from the pre-loss state.
inline double qfi_lossy_kerr(const InterferometerConfig &cfg) {
    if (cfg.scheme != Scheme::Kerr) {
        throw InvalidArgument("qfi_lossy_kerr needs the Kerr scheme");
    }
    cfg.validate();
    return mu_optimal(photon_moments(cfg), cfg.eta).F;
}

/// Lossy QFI for either scheme (F_L1 or F_L2).
inline double qfi_lossy(const InterferometerConfig &cfg) {
    return cfg.scheme == Scheme::Linear ? qfi_lossy_linear(cfg) : qfi_lossy_kerr(cfg);
}

/// Standard, Heisenberg, sub-Heisenberg and super-Heisenberg scalings in N.
struct QuantumLimits {
    double sql, hl, sub_hl, shl;
};

inline QuantumLimits quantum_limits(double N) {
    if (!(N > 0.0) || !std::isfinite(N)) {
        throw InvalidArgument("the mean photon number must be positive");
    }
    return {1.0 / std::sqrt(N), 1.0 / N, 1.0 / (N * std::sqrt(N)), 1.0 / (N * N)};
}

} // namespace him
