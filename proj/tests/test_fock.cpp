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
 * Fock-space simulator: each pipeline stage on hand-checkable states, the
 * beam-splitter shell unitarity, loss branches and cutoff convergence.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "hi_metrology/fock.hpp"
#include "hi_metrology/interferometer.hpp"

namespace {

namespace fock = him::fock;
using fock::Observable;
using fock::TwoModeState;
using cplx = std::complex<double>;
using namespace std::complex_literals;

TwoModeState basis(int ca, int cb, int j, int k) {
    TwoModeState s(ca, cb);
    s.at(j, k) = 1.0;
    return s;
}

him::InterferometerConfig make(double alpha, double g, int mn, him::Scheme s, double phi,
                               double eta = 1.0) {
    him::InterferometerConfig c;
    c.alpha_mag = alpha;
    c.g = g;
    c.m = c.n = mn;
    c.scheme = s;
    c.phi = phi;
    c.eta = eta;
    return c;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

} // namespace

TEST(PrepareInput, VacuumForZeroAmplitude) {
    const auto s = fock::prepare_input(0.0, 8, 8);
    EXPECT_EQ(s.at(0, 0), cplx(1.0));
    EXPECT_DOUBLE_EQ(s.norm2(), 1.0);
}

TEST(PrepareInput, CoherentStateNormAndMean) {
    const auto s = fock::prepare_input(2.0, 30, 4);
    EXPECT_NEAR(s.norm2(), 1.0, 1e-12);
    EXPECT_NEAR(fock::measure(s, Observable::Na1), 4.0, 1e-10);
    for (int j = 0; j <= 30; ++j) {
        for (int k = 1; k <= 4; ++k) {
            EXPECT_EQ(s.at(j, k), cplx(0.0));
        }
    }
}

TEST(PrepareInput, HeavyTailSuggestsCutoff) {
    try {
        (void)fock::prepare_input(2.0, 5, 5);
        FAIL() << "expected a cutoff error";
    } catch (const him::CutoffError &e) {
        EXPECT_GT(e.suggested_cutoff, 5);
        EXPECT_NO_THROW((void)fock::prepare_input(2.0, e.suggested_cutoff, 2));
    }
}

TEST(Opa, ZeroGainIsIdentity) {
    const auto s = fock::prepare_input(1.5, 30, 30);
    const auto t = fock::apply_opa(s, 0.0, 0.0);
    for (std::size_t i = 0; i < s.amps.size(); ++i) {
        EXPECT_LT(std::abs(s.amps[i] - t.amps[i]), 1e-15);
    }
}

TEST(Opa, SqueezedVacuumPhotonNumber) {
    const auto s = fock::apply_opa(fock::prepare_input(0.0, 80, 80), 1.0, 0.0);
    EXPECT_NEAR(s.norm2(), 1.0, 1e-12);
    EXPECT_NEAR(fock::measure(s, Observable::Na1), std::sinh(1.0) * std::sinh(1.0), 1e-10);
    EXPECT_NEAR(fock::measure(s, Observable::Na1), 1.3811, 1e-4);
}

TEST(Opa, SqueezedCoherentTotalPhotonNumber) {
    const auto s = fock::apply_opa(fock::prepare_input(2.0, 120, 120), 1.0, 0.0);
    EXPECT_NEAR(s.norm2(), 1.0, 1e-12);
    const double N = fock::measure(s, Observable::Ntotal);
    EXPECT_NEAR(N, 17.811, 1e-3);
    EXPECT_LT(rel(N, him::mean_photon_number(make(2, 1, 0, him::Scheme::Linear, 0))), 1e-10);
}

TEST(Opa, LeakageIsReported) {
    EXPECT_THROW((void)fock::apply_opa(fock::prepare_input(0.0, 10, 10), 1.0, 0.0),
                 him::CutoffError);
}

TEST(Subtract, ZeroOrdersAreIdentity) {
    const auto s = fock::prepare_input(1.0, 20, 3);
    const auto t = fock::subtract_photons(s, 0, 0);
    EXPECT_EQ(s.amps, t.amps);
    EXPECT_DOUBLE_EQ(t.norm_weight, 1.0);
}

TEST(Subtract, SinglePhotonToVacuum) {
    const auto t = fock::subtract_photons(basis(3, 3, 1, 0), 1, 0);
    EXPECT_EQ(t.at(0, 0), cplx(1.0));
    EXPECT_DOUBLE_EQ(t.norm_weight, 1.0);
}

TEST(Subtract, NormRatioIsGeneratingFunctionNorm) {
    const auto cfg = make(2, 1, 1, him::Scheme::Linear, 0);
    const auto opa = fock::apply_opa(fock::prepare_input(2.0, 160, 160), 1.0, 0.0);
    const auto t = fock::subtract_photons(opa, 1, 1);
    EXPECT_LT(std::abs(t.norm_weight / him::q_value(cfg, 0, 0, 0, 0).real() - 1.0), 1e-6);
}

TEST(Subtract, AnnihilatedStateIsDegenerate) {
    EXPECT_THROW((void)fock::subtract_photons(basis(3, 3, 0, 0), 1, 0), him::DegenerateState);
}

TEST(Phase, ZeroIsIdentity) {
    const auto s = fock::prepare_input(1.0, 20, 2);
    EXPECT_EQ(fock::apply_phase(s, 0.0, 1).amps, s.amps);
    EXPECT_EQ(fock::apply_phase(s, 0.0, 2).amps, s.amps);
}

TEST(Phase, LinearPiFlipsOnePhoton) {
    const auto t = fock::apply_phase(basis(2, 1, 1, 0), std::numbers::pi, 1);
    EXPECT_LT(std::abs(t.at(1, 0) + 1.0), 1e-15);
}

TEST(Phase, KerrQuarterPiOnTwoPhotons) {
    const auto t = fock::apply_phase(basis(3, 1, 2, 0), std::numbers::pi / 4, 2);
    EXPECT_LT(std::abs(t.at(2, 0) + 1.0), 1e-15);
}

TEST(Phase, PreservesNorm) {
    const auto s = fock::apply_opa(fock::prepare_input(1.0, 60, 60), 0.5, 0.0);
    EXPECT_NEAR(fock::apply_phase(s, 0.7, 2).norm2(), s.norm2(), 1e-12);
}

TEST(BeamSplitter, VacuumStaysVacuum) {
    const auto t = fock::apply_bs(basis(4, 4, 0, 0));
    EXPECT_LT(std::abs(t.at(0, 0) - 1.0), 1e-15);
    EXPECT_NEAR(t.norm2(), 1.0, 1e-15);
}

TEST(BeamSplitter, SinglePhoton) {
    const auto t = fock::apply_bs(basis(4, 4, 1, 0));
    EXPECT_LT(std::abs(t.at(1, 0) - 1.0 / std::numbers::sqrt2), 1e-14);
    EXPECT_LT(std::abs(t.at(0, 1) + 1i / std::numbers::sqrt2), 1e-14);
}

TEST(BeamSplitter, HongOuMandel) {
    const auto t = fock::apply_bs(basis(4, 4, 1, 1));
    EXPECT_LT(std::abs(t.at(1, 1)), 1e-14);
    EXPECT_NEAR(std::norm(t.at(2, 0)) + std::norm(t.at(0, 2)), 1.0, 1e-14);
}

TEST(BeamSplitter, ShellMatricesAreUnitary) {
    for (int shell : {0, 1, 2, 5, 20, 80, 200, 300}) {
        const auto m = fock::bs_shell_matrix(shell);
        EXPECT_LT(fock::unitarity_defect(m, shell), fock::kUnitarityTol) << shell;
    }
}

TEST(BeamSplitter, PreservesNormOfSqueezedState) {
    const auto s = fock::apply_opa(fock::prepare_input(2.0, 120, 120), 1.0, 0.0);
    const auto t = fock::apply_bs(s, true);
    EXPECT_NEAR(t.norm2(), s.norm2(), 1e-12);
}

TEST(Loss, UnitTransmissivityIsSingleBranch) {
    const auto e = fock::apply_loss(fock::prepare_input(1.0, 20, 2), 1.0);
    ASSERT_EQ(e.branches.size(), 1U);
    EXPECT_DOUBLE_EQ(e.branches[0].weight, 1.0);
    EXPECT_NEAR(e.trace(), 1.0, 1e-12);
}

TEST(Loss, SinglePhotonBinomial) {
    const auto e = fock::apply_loss(basis(2, 2, 1, 0), 0.6);
    ASSERT_EQ(e.branches.size(), 2U);
    EXPECT_NEAR(e.branches[0].weight, 0.6, 1e-15);
    EXPECT_NEAR(std::abs(e.branches[0].state.at(1, 0)), 1.0, 1e-15);
    EXPECT_NEAR(e.branches[1].weight, 0.4, 1e-15);
    EXPECT_NEAR(std::abs(e.branches[1].state.at(0, 0)), 1.0, 1e-15);
}

TEST(Loss, CoherentMeanIsAttenuated) {
    const auto e = fock::apply_loss(fock::prepare_input(2.0, 40, 2), 0.7);
    EXPECT_NEAR(e.trace(), 1.0, 1e-12);
    EXPECT_NEAR(fock::measure(e, Observable::Na1), 0.7 * 4.0, 1e-10);
}

TEST(Loss, TracePreservedOnSqueezedState) {
    const auto s = fock::apply_opa(fock::prepare_input(1.0, 60, 60), 0.5, 0.0);
    EXPECT_NEAR(fock::apply_loss(s, 0.35).trace(), 1.0, 1e-12);
}

TEST(Loss, CommutesWithLinearPhaseOnModeAMoments) {
    const auto s = fock::subtract_photons(
        fock::apply_opa(fock::prepare_input(1.0, 60, 60), 0.5, 0.0), 1, 1);
    const double eta = 0.6, phi = 0.9;
    const auto before = fock::apply_loss(fock::apply_phase(s, phi, 1), eta);
    const auto after = fock::apply_phase(fock::apply_loss(s, eta), phi, 1);
    for (auto o : {Observable::Xa, Observable::Xa2, Observable::Na1, Observable::Na2}) {
        EXPECT_NEAR(fock::measure(before, o), fock::measure(after, o), 1e-10);
    }
    // <a> scales with sqrt(eta), so does <X_a>.
    const auto ideal = fock::apply_phase(s, phi, 1);
    EXPECT_NEAR(fock::measure(before, Observable::Xa),
                std::sqrt(eta) * fock::measure(ideal, Observable::Xa), 1e-10);
}

TEST(Measure, VacuumQuadrature) {
    const auto v = basis(4, 4, 0, 0);
    EXPECT_NEAR(fock::measure(v, Observable::Xa2), 0.5, 1e-15);
    EXPECT_NEAR(fock::measure(v, Observable::Xa), 0.0, 1e-15);
}

TEST(Measure, CoherentPhotonNumber) {
    EXPECT_NEAR(fock::measure(fock::prepare_input(2.0, 40, 1), Observable::Na1), 4.0, 1e-10);
}

TEST(Pipeline, KerrSubtractedMatchesGeneratingFunction) {
    const auto cfg = make(2, 1, 1, him::Scheme::Kerr, 0.013);
    const auto o = fock::pipeline(cfg);
    const auto h = him::homodyne_moments(cfg);
    EXPECT_LT(rel(o.mean_x, h.mean), 1e-6);
    EXPECT_LT(rel(o.second_x, h.second), 1e-6);
    EXPECT_LT(rel(o.lambda2, him::normalization(cfg)), 1e-6);
    EXPECT_LT(rel(o.mean_photons, him::mean_photon_number(cfg)), 1e-6);
}

TEST(Pipeline, CoherentSensitivityIngredients) {
    // Coherent state, linear phase at pi/2: <X> = alpha cos(phi), Var X = 1/2,
    // so Delta phi = 1 / (sqrt(2) alpha sin(phi)).
    const double phi = std::numbers::pi / 2, h = 1e-4;
    const auto cfg = make(2, 0, 0, him::Scheme::Linear, phi);
    const auto o = fock::pipeline(cfg);
    const double var = o.second_x - o.mean_x * o.mean_x;
    const double slope = (fock::pipeline(make(2, 0, 0, him::Scheme::Linear, phi + h)).mean_x -
                          fock::pipeline(make(2, 0, 0, him::Scheme::Linear, phi - h)).mean_x) /
                         (2 * h);
    EXPECT_NEAR(var, 0.5, 1e-10);
    EXPECT_NEAR(std::sqrt(var) / std::abs(slope), 1.0 / (std::numbers::sqrt2 * 2.0), 1e-7);
}

TEST(Pipeline, ContinuousInTransmissivity) {
    const auto a = fock::pipeline(make(1, 0.5, 1, him::Scheme::Kerr, 0.3, 1.0));
    const auto b = fock::pipeline(make(1, 0.5, 1, him::Scheme::Kerr, 0.3, 0.999999));
    EXPECT_NEAR(a.mean_x, b.mean_x, 1e-4);
    EXPECT_NEAR(a.second_x, b.second_x, 1e-4);
    EXPECT_NEAR(a.n1, b.n1, 1e-4);
}

TEST(Pipeline, DoublingTheCutoffChangesNothing) {
    const auto cfg = make(2, 1, 1, him::Scheme::Linear, 1.2);
    const auto o = fock::pipeline(cfg);
    const auto d = fock::detail::run_once(cfg, 2 * o.cutoff, fock::BsRoute::Exact);
    EXPECT_LT(rel(d.mean_x, o.mean_x), 1e-8);
    EXPECT_LT(rel(d.second_x, o.second_x), 1e-8);
    EXPECT_LT(rel(d.n4, o.n4), 1e-8);
    EXPECT_LT(rel(d.lambda2, o.lambda2), 1e-8);
}

TEST(Pipeline, ExactAndHeisenbergRoutesAgreeWithLoss) {
    for (auto scheme : {him::Scheme::Linear, him::Scheme::Kerr}) {
        const auto cfg = make(1, 0.5, 1, scheme, 0.4, 0.7);
        const auto exact = fock::detail::run_once(cfg, 60, fock::BsRoute::Exact);
        const auto heis = fock::detail::run_once(cfg, 60, fock::BsRoute::Heisenberg);
        EXPECT_LT(rel(exact.mean_x, heis.mean_x), 1e-10);
        EXPECT_LT(rel(exact.second_x, heis.second_x), 1e-10);
    }
}

TEST(Pipeline, LossyLinearMatchesScaledGeneratingFunction) {
    const auto cfg = make(1, 0.5, 1, him::Scheme::Linear, 1.2, 0.6);
    const auto o = fock::pipeline(cfg);
    const auto h = him::homodyne_moments(cfg);
    EXPECT_LT(rel(o.mean_x, h.mean), 1e-6);
    EXPECT_LT(rel(o.second_x, h.second), 1e-6);
}

TEST(LossyHomodyneOracle, AgreesWithPipelineAtSeveralPhases) {
    const auto cfg = make(1, 0.5, 1, him::Scheme::Kerr, 0.0, 0.7);
    const fock::LossyHomodyneOracle oracle(cfg);
    for (double phi : {0.013, 0.2, 1.1}) {
        fock::CutoffPolicy fixed;
        fixed.fixed_cutoff = oracle.cutoff();
        const auto o = fock::pipeline(cfg.with_phi(phi), fixed);
        const auto h = oracle.moments(phi);
        EXPECT_LT(rel(h.mean, o.mean_x), 1e-10) << phi;
        EXPECT_LT(rel(h.second, o.second_x), 1e-10) << phi;
    }
}
