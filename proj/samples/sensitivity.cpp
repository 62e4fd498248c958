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
 * Usage sample: optimal homodyne sensitivity, QFI bound and photon budget for
 * both phase-shifter kinds with three photons subtracted from each mode.
 */

#include <cstdio>

#include "hi_metrology/hi_metrology.hpp"

int main() {
    him::InterferometerConfig cfg;
    cfg.alpha_mag = 2.0;
    cfg.g = 1.0;
    cfg.m = 3;
    cfg.n = 3;

    const double n_total = him::mean_photon_number(cfg);
    const auto limits = him::quantum_limits(n_total);
    std::printf("N = %.6g  (SQL %.4g, HL %.4g, sub-HL %.4g, SHL %.4g)\n", n_total, limits.sql,
                limits.hl, limits.sub_hl, limits.shl);

    for (auto scheme : {him::Scheme::Linear, him::Scheme::Kerr}) {
        const auto c = cfg.with_scheme(scheme);
        const auto best = him::optimal_phase(c);
        const auto qfi = him::qfi_ideal(c);
        std::printf("k=%d  phi* = %.6g rad  dphi* = %.6g  QCRB = %.6g\n", him::exponent(scheme),
                    best.phi, best.delta_phi, him::qcrb(qfi.F));
    }

    // Internal loss on mode a ahead of the phase shifter.
    for (double eta : {0.9, 0.7, 0.5}) {
        const auto lossy = cfg.with_scheme(him::Scheme::Kerr).with_eta(eta).with_phi(0.013);
        const auto s = him::phase_sensitivity(lossy);
        std::printf("eta=%.1f  Kerr dphi(0.013) = %.6g [%s]  lossy QCRB = %.6g\n", eta,
                    s.delta_phi, him::to_string(s.source), him::qcrb(him::qfi_lossy_kerr(lossy)));
    }
    return 0;
}
