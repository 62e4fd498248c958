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
 * Phase sensitivity, optimal working point, ideal and lossy quantum Fisher
 * information, and the scaling limits.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "hi_metrology/fock.hpp"
#include "hi_metrology/metrology.hpp"

namespace {

using him::InterferometerConfig;
using him::Scheme;

InterferometerConfig make(double alpha, double g, int mn, Scheme s = Scheme::Linear,
                          double phi = 0.0, double eta = 1.0) {
    InterferometerConfig c;
    c.alpha_mag = alpha;
    c.g = g;
    c.m = c.n = mn;
    c.scheme = s;
    c.phi = phi;
    c.eta = eta;
    return c;
}

him::PhotonMoments coherent_moments(double x) {
    him::PhotonMoments pm;
    pm.n1 = x;
    pm.n2 = x * x + x;
    pm.n3 = x * x * x + 3 * x * x + x;
    pm.n4 = x * x * x * x + 6 * x * x * x + 7 * x * x + x;
    return pm;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace

// --- phase sensitivity -----------------------------------------------------

TEST(PhaseSensitivity, CoherentClosedForm) {
    // <X> = alpha cos(phi), Var X = 1/2 after the 50:50 splitter.
    for (double phi : {0.4, std::numbers::pi / 2, 2.5}) {
        const auto r = him::phase_sensitivity(make(2, 0, 0, Scheme::Linear, phi));
        EXPECT_NEAR(r.delta_phi, 1.0 / (std::numbers::sqrt2 * 2.0 * std::sin(phi)), 1e-12);
        EXPECT_NEAR(r.var_x, 0.5, 1e-12);
        EXPECT_NEAR(r.slope, -2.0 * std::sin(phi), 1e-12);
        EXPECT_EQ(r.source, him::Source::GeneratingFunction);
    }
}

TEST(PhaseSensitivity, DefinitionHoldsExactly) {
    const auto r = him::phase_sensitivity(make(2, 1, 1, Scheme::Kerr, 0.02));
    EXPECT_EQ(r.delta_phi, std::sqrt(r.var_x) / std::abs(r.slope));
    EXPECT_GE(r.var_x, 0.0);
}

TEST(PhaseSensitivity, LinearSchemeNearPaperValue) {
    const auto r = him::phase_sensitivity(make(2, 1, 3, Scheme::Linear, 1.6));
    EXPECT_NEAR(r.delta_phi, 0.06, 0.3 * 0.06);
}

TEST(PhaseSensitivity, StationaryPointIsUndefined) {
    EXPECT_THROW((void)him::phase_sensitivity(make(2, 0, 0, Scheme::Linear, 0.0)),
                 him::UndefinedSensitivity);
}

TEST(PhaseSensitivity, LossyKerrUsesOracle) {
    const auto cfg = make(1, 0.5, 1, Scheme::Kerr, 0.05, 0.8);
    const auto r = him::phase_sensitivity(cfg);
    EXPECT_EQ(r.source, him::Source::Oracle);
    // Same numbers from an independent finite difference of the full pipeline.
    const double h = 1e-5;
    const auto o = him::fock::pipeline(cfg);
    const double slope = (him::fock::pipeline(cfg.with_phi(cfg.phi + h)).mean_x -
                          him::fock::pipeline(cfg.with_phi(cfg.phi - h)).mean_x) /
                         (2 * h);
    EXPECT_LT(rel(r.var_x, o.second_x - o.mean_x * o.mean_x), 1e-6);
    EXPECT_LT(rel(r.slope, slope), 1e-5);
}

TEST(PhaseSensitivity, LossyLinearMatchesOracle) {
    const auto cfg = make(1, 0.5, 1, Scheme::Linear, 1.2, 0.6);
    const auto r = him::phase_sensitivity(cfg);
    EXPECT_EQ(r.source, him::Source::GeneratingFunction);
    const auto o = him::fock::pipeline(cfg);
    EXPECT_LT(rel(r.var_x, o.second_x - o.mean_x * o.mean_x), 1e-6);
}

TEST(KerrSlope, RichardsonAgreesWithFivePointStencilAndStepHalving) {
    for (int mn : {0, 2}) {
        const auto cfg = make(2, 1, mn, Scheme::Kerr, 0.013);
        const him::SensitivityModel model(cfg);
        const double phi = cfg.phi;
        const double h = 1e-4;
        auto f = [&](double p) { return model.mean(p); };
        const double stencil =
            (-f(phi + 2 * h) + 8 * f(phi + h) - 8 * f(phi - h) + f(phi - 2 * h)) / (12 * h);
        const double s = model.slope(phi);
        const double s_half = model.slope(phi, him::kerr_slope_step(phi) / 2);
        EXPECT_LT(rel(s, stencil), 1e-6) << mn;
        EXPECT_LT(rel(s, s_half), 1e-6) << mn;
    }
}

TEST(LinearSlope, AnalyticAgreesWithFivePointStencil) {
    const him::SensitivityModel model(make(2, 1, 1, Scheme::Linear));
    const double phi = 1.1, h = 1e-3;
    auto f = [&](double p) { return model.mean(p); };
    const double stencil =
        (-f(phi + 2 * h) + 8 * f(phi + h) - 8 * f(phi - h) + f(phi - 2 * h)) / (12 * h);
    EXPECT_LT(rel(model.slope(phi), stencil), 1e-9);
}

// --- optimal phase ---------------------------------------------------------

TEST(OptimalPhase, CoherentOptimumAtQuarterTurn) {
    const auto r = him::optimal_phase(make(2, 0, 0));
    EXPECT_NEAR(r.phi, std::numbers::pi / 2, 1e-4);
    EXPECT_NEAR(r.delta_phi, 1.0 / (std::numbers::sqrt2 * 2.0), 1e-9);
}

TEST(OptimalPhase, LinearSchemeNearQuarterTurn) {
    const auto r = him::optimal_phase(make(2, 1, 3, Scheme::Linear));
    EXPECT_NEAR(r.phi, 1.6, 0.1);
}

TEST(OptimalPhase, KerrOptimumAtSmallPhase) {
    const auto r = him::optimal_phase(make(2, 1, 3, Scheme::Kerr));
    EXPECT_GE(r.phi, 0.008);
    EXPECT_LE(r.phi, 0.020);
    // Regression values.
    EXPECT_NEAR(r.phi, 0.012867731, 1e-6);
    EXPECT_NEAR(r.delta_phi, 0.003307759, 1e-8);
}

TEST(OptimalPhase, RefinementBeatsEveryGridPoint) {
    const auto cfg = make(1.5, 0.8, 1, Scheme::Kerr);
    const him::SensitivityModel model(cfg);
    const auto w = him::default_window(Scheme::Kerr);
    const auto r = him::optimal_phase(model, w, 64);
    for (int i = 0; i < 64; ++i) {
        const double p = w.lo + (w.hi - w.lo) * i / 63.0;
        try {
            EXPECT_LE(r.delta_phi, model.evaluate(p).delta_phi * (1 + 1e-12));
        } catch (const him::UndefinedSensitivity &) {
        }
    }
}

TEST(OptimalPhase, RejectsBadArguments) {
    const him::SensitivityModel model(make(2, 0, 0));
    EXPECT_THROW((void)him::optimal_phase(model, {0.1, 1.0}, 15), him::InvalidArgument);
    EXPECT_THROW((void)him::optimal_phase(model, {1.0, 1.0}, 32), him::InvalidArgument);
}

TEST(OptimalPhase, AllGridPointsStationaryIsSearchError) {
    // The vacuum carries no phase information: the slope vanishes everywhere.
    const him::SensitivityModel model(make(0, 0, 0));
    EXPECT_THROW((void)him::optimal_phase(model, {0.1, 1.0}, 16), him::SearchError);
}

// --- ideal QFI and QCRB ----------------------------------------------------

TEST(Qfi, CoherentLinear) {
    const auto q = him::qfi_ideal(make(2, 0, 0, Scheme::Linear));
    EXPECT_NEAR(q.F, 16.0, 1e-10);
    EXPECT_FALSE(q.f_surplus.has_value());
}

TEST(Qfi, CoherentKerr) {
    const auto q = him::qfi_ideal(make(2, 0, 0, Scheme::Kerr));
    EXPECT_NEAR(q.F, 1424.0, 1e-8);
    ASSERT_TRUE(q.f_surplus.has_value());
    EXPECT_NEAR(*q.f_surplus, 1424.0 - 16.0, 1e-8);
}

TEST(Qfi, VacuumIsZero) {
    EXPECT_EQ(him::qfi_ideal(make(0, 0, 0, Scheme::Linear)).F, 0.0);
    EXPECT_EQ(him::qfi_ideal(make(0, 0, 0, Scheme::Kerr)).F, 0.0);
}

TEST(Qcrb, Arithmetic) {
    EXPECT_DOUBLE_EQ(him::qcrb(16.0), 0.25);
    EXPECT_NEAR(him::qcrb(1424.0), 0.0265, 1e-4);
    EXPECT_THROW((void)him::qcrb(0.0), him::InvalidArgument);
    EXPECT_THROW((void)him::qcrb(-1.0), him::InvalidArgument);
}

// --- lossy QFI -------------------------------------------------------------

TEST(LossyLinear, ReducesToIdealAtUnitTransmissivity) {
    EXPECT_EQ(him::qfi_lossy_linear(make(2, 0, 0, Scheme::Linear, 0, 1.0)), 16.0);
    const auto cfg = make(2, 1, 2, Scheme::Linear, 0, 1.0);
    EXPECT_EQ(him::qfi_lossy_linear(cfg), him::qfi_ideal(cfg).F);
}

TEST(LossyLinear, HalfTransmissivityCoherent) {
    EXPECT_NEAR(him::qfi_lossy_linear(make(2, 0, 0, Scheme::Linear, 0, 0.5)), 8.0, 1e-12);
}

TEST(LossyLinear, VanishesWithTransmissivity) {
    EXPECT_LT(him::qfi_lossy_linear(make(2, 1, 1, Scheme::Linear, 0, 1e-9)), 1e-6);
}

TEST(LossyLinear, RejectsKerrScheme) {
    EXPECT_THROW((void)him::qfi_lossy_linear(make(2, 0, 0, Scheme::Kerr, 0, 0.5)),
                 him::InvalidArgument);
}

TEST(LossyKerr, UnitTransmissivityCoefficientIdentities) {
    const auto pm = coherent_moments(4.0);
    for (auto [mu1, mu2] : {std::pair{0.0, 0.0}, std::pair{1.3, -2.0}, std::pair{-0.4, 5.0}}) {
        const auto k = him::lossy_kerr_bound(pm, 1.0, mu1, mu2);
        EXPECT_NEAR(k.cap_c[0], 1.0, 1e-12);
        EXPECT_NEAR(k.cap_c[3], 0.0, 1e-12);
        EXPECT_NEAR(k.cap_c[4], 0.0, 1e-12);
        EXPECT_NEAR(k.cap_c[5], 0.0, 1e-12);
    }
}

TEST(LossyKerr, OptimumIsStationary) {
    const auto pm = coherent_moments(4.0);
    for (double eta : {0.2, 0.5, 0.8, 1.0}) {
        const auto k = him::mu_optimal(pm, eta);
        EXPECT_TRUE(std::isfinite(k.mu1) && std::isfinite(k.mu2));
        const auto grad = him::lossy_kerr_gradient(pm, eta, k.mu1, k.mu2);
        EXPECT_LE(std::abs(grad[0]), 1e-6 * std::abs(k.F)) << eta;
        EXPECT_LE(std::abs(grad[1]), 1e-6 * std::abs(k.F)) << eta;
        // The curvature is a diagnostic only; it must be computable.
        (void)him::lossy_kerr_hessian(pm, eta, k.mu1, k.mu2);
    }
}

TEST(LossyKerr, CoherentRegressionAtHalfTransmissivity) {
    const auto k = him::mu_optimal(coherent_moments(4.0), 0.5);
    EXPECT_NEAR(k.F, 109.8947368, 1e-6);
    EXPECT_NEAR(k.mu1, 0.7631578947, 1e-9);
    EXPECT_NEAR(k.mu2, -0.5263157895, 1e-9);
}

TEST(LossyKerr, ReducesToIdealAtUnitTransmissivity) {
    EXPECT_LT(rel(him::mu_optimal(coherent_moments(4.0), 1.0).F, 1424.0), 1e-9);
    EXPECT_LT(rel(him::qfi_lossy_kerr(make(2, 0, 0, Scheme::Kerr, 0, 1.0)), 1424.0), 1e-9);
    const auto cfg = make(2, 1, 1, Scheme::Kerr, 0, 1.0);
    EXPECT_LT(rel(him::qfi_lossy_kerr(cfg), him::qfi_ideal(cfg).F), 1e-9);
}

TEST(LossyKerr, VacuumIsSingular) {
    EXPECT_THROW((void)him::mu_optimal(him::PhotonMoments{}, 0.5), him::SingularOptimization);
}

TEST(LossyKerr, SqueezedRegressionAndMonotonicity) {
    const auto cfg = make(2, 1, 0, Scheme::Kerr);
    EXPECT_NEAR(him::qfi_lossy_kerr(cfg.with_eta(0.8)), 11652.2386620732, 1e-6);
    double prev = 0.0;
    for (double eta : {0.2, 0.4, 0.6, 0.8, 1.0}) {
        const double F = him::qfi_lossy_kerr(cfg.with_eta(eta));
        EXPECT_GE(F, prev) << eta;
        EXPECT_LE(F, him::qfi_ideal(cfg).F * (1 + 1e-12));
        prev = F;
    }
}

// --- limits ----------------------------------------------------------------

TEST(QuantumLimits, Arithmetic) {
    const auto a = him::quantum_limits(4.0);
    EXPECT_DOUBLE_EQ(a.sql, 0.5);
    EXPECT_DOUBLE_EQ(a.hl, 0.25);
    EXPECT_DOUBLE_EQ(a.sub_hl, 0.125);
    EXPECT_DOUBLE_EQ(a.shl, 0.0625);
    const auto b = him::quantum_limits(1.0);
    EXPECT_EQ(b.sql, 1.0);
    EXPECT_EQ(b.hl, 1.0);
    EXPECT_EQ(b.sub_hl, 1.0);
    EXPECT_EQ(b.shl, 1.0);
    const auto c = him::quantum_limits(17.811);
    EXPECT_NEAR(c.sql, 0.2370, 1e-4);
    EXPECT_NEAR(c.hl, 0.05615, 1e-5);
    EXPECT_NEAR(c.sub_hl, 0.013303549948679, 1e-13);
    EXPECT_NEAR(c.shl, 0.0031522698828721, 1e-14);
    EXPECT_THROW((void)him::quantum_limits(0.0), him::InvalidArgument);
}

// --- qualitative properties on a coarse grid -------------------------------

TEST(Properties, HomodyneIsBoundedByQcrb) {
    for (double a : {1.0, 2.0}) {
        for (double g : {0.5, 1.0}) {
            for (int mn : {0, 1}) {
                for (auto s : {Scheme::Linear, Scheme::Kerr}) {
                    const auto cfg = make(a, g, mn, s);
                    const double d = him::optimal_phase(cfg).delta_phi;
                    EXPECT_GE(d, him::qcrb(him::qfi_ideal(cfg).F) - 1e-9) << him::describe(cfg);
                }
            }
        }
    }
}

TEST(Properties, KerrDominatesLinear) {
    for (double a : {1.0, 2.0}) {
        for (double g : {0.5, 1.0}) {
            for (int mn : {0, 1}) {
                const auto lin = make(a, g, mn, Scheme::Linear);
                const auto kerr = make(a, g, mn, Scheme::Kerr);
                EXPECT_LT(him::optimal_phase(kerr).delta_phi, him::optimal_phase(lin).delta_phi);
                const auto q = him::qfi_ideal(kerr);
                EXPECT_GT(q.F, him::qfi_ideal(lin).F);
                EXPECT_GT(*q.f_surplus, 0.0);
            }
        }
    }
}

TEST(Properties, SensitivityImprovesWithAmplitude) {
    for (auto s : {Scheme::Linear, Scheme::Kerr}) {
        double prev = INFINITY;
        for (double a : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) {
            const double d = him::optimal_phase(make(a, 1, 1, s)).delta_phi;
            EXPECT_LE(d, prev) << a;
            prev = d;
        }
    }
}

TEST(Properties, FisherInformationGrowsWithGain) {
    for (auto s : {Scheme::Linear, Scheme::Kerr}) {
        for (int mn : {0, 2}) {
            double prev = 0.0;
            for (double g : {0.0, 0.3, 0.6, 0.9, 1.2, 1.5}) {
                if (g == 0.0 && mn > 0) {
                    continue;
                }
                const double F = him::qfi_ideal(make(2, g, mn, s)).F;
                EXPECT_GE(F, prev) << g;
                prev = F;
            }
        }
    }
}

TEST(Properties, SubtractionImprovesSensitivity) {
    for (auto s : {Scheme::Linear, Scheme::Kerr}) {
        double prev = INFINITY;
        for (int mn = 0; mn <= 3; ++mn) {
            const double d = him::optimal_phase(make(2, 1, mn, s)).delta_phi;
            EXPECT_LE(d, prev) << mn;
            prev = d;
        }
    }
}

TEST(Properties, LossyBoundsImproveWithTransmissivity) {
    for (auto s : {Scheme::Linear, Scheme::Kerr}) {
        for (int mn : {0, 1}) {
            double prev = 0.0;
            for (double eta = 0.1; eta <= 1.0 + 1e-12; eta += 0.1) {
                const double F = him::qfi_lossy(make(2, 1, mn, s, 0, std::min(eta, 1.0)));
                EXPECT_GE(F, prev) << eta;
                prev = F;
            }
        }
    }
}
