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
 * Equivalence suite: closed-form moments against the Fock-space simulator on
 * a grid of configurations.
 *
 * Each configuration compares the unnormalized normally ordered moments Q,
 * the Kerr moments D (Kerr scheme), lambda^2, N, the photon-number moments and
 * the output homodyne moments. Oracle values are taken at a cutoff where a
 * doubling changes none of them by more than the policy tolerance. Lossless
 * configurations push the state through the beam-splitter shell matrices;
 * lossy ones evaluate the output mode a_out = (a - i b)/sqrt(2) on every
 * Kraus branch. Lossy Kerr homodyne moments have no closed form and are
 * skipped. A closed-form homodyne moment with an imaginary residue counts as
 * a failed comparison (deviation nan).
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "fock.hpp"
#include "interferometer.hpp"
#include "tables.hpp"

namespace him::cli {

enum class Preset { Quick, Full };

inline Preset parse_preset(const std::string &s) {
    if (s == "quick") {
        return Preset::Quick;
    }
    if (s == "full") {
        return Preset::Full;
    }
    throw InvalidArgument("unknown preset '" + s + "' (expected quick or full)");
}

/// Validation grid: alpha in {1, 2}, g in {0.5, 1}, k in {1, 2},
/// phi in {0.013, 1.6}; quick uses m = n in {0, 1}, eta in {1, 0.7}; full adds
/// m = n in {2, 3} and eta = 0.4.
inline std::vector<InterferometerConfig> preset_grid(Preset p) {
    std::vector<int> orders{0, 1};
    std::vector<double> etas{1.0, 0.7};
    if (p == Preset::Full) {
        orders = {0, 1, 2, 3};
        etas = {1.0, 0.7, 0.4};
    }
    std::vector<InterferometerConfig> grid;
    for (double a : {1.0, 2.0}) {
        for (double g : {0.5, 1.0}) {
            for (int mn : orders) {
                for (int k : {1, 2}) {
                    for (double phi : {0.013, 1.6}) {
                        for (double eta : etas) {
                            InterferometerConfig c;
                            c.alpha_mag = a;
                            c.g = g;
                            c.m = c.n = mn;
                            c.scheme = scheme_from_int(k);
                            c.phi = phi;
                            c.eta = eta;
                            grid.push_back(c);
                        }
                    }
                }
            }
        }
    }
    return grid;
}

/// Named values of one configuration, closed form or oracle.
using Sample = std::map<std::string, std::complex<double>>;

namespace detail {

inline const std::vector<std::array<int, 4>> &q_orders() {
    static const std::vector<std::array<int, 4>> orders = [] {
        std::vector<std::array<int, 4>> o;
        for (int x1 = 0; x1 <= 2; ++x1) {
            for (int y1 = 0; y1 <= 2; ++y1) {
                for (int x2 = 0; x2 <= 2; ++x2) {
                    for (int y2 = 0; y2 <= 2; ++y2) {
                        if (x1 + y1 + x2 + y2 <= 2) {
                            o.push_back({x1, y1, x2, y2});
                        }
                    }
                }
            }
        }
        o.push_back({1, 1, 1, 1});
        o.push_back({2, 2, 0, 0});
        o.push_back({3, 3, 0, 0});
        o.push_back({4, 4, 0, 0});
        return o;
    }();
    return orders;
}

inline const std::vector<std::array<int, 3>> &d_orders() {
    static const std::vector<std::array<int, 3>> orders = {
        {1, 0, 0}, {1, 0, 1}, {1, 1, 0}, {2, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 2, 0}, {0, 0, 2}};
    return orders;
}

inline std::string q_name(const std::array<int, 4> &o) {
    return "Q" + std::to_string(o[0]) + std::to_string(o[1]) + std::to_string(o[2]) +
           std::to_string(o[3]);
}

inline std::string d_name(const std::array<int, 3> &o) {
    return "D" + std::to_string(o[0]) + std::to_string(o[1]) + std::to_string(o[2]);
}

inline bool homodyne_has_closed_form(const InterferometerConfig &c) {
    return c.scheme == Scheme::Linear || c.lossless();
}

} // namespace detail

/// Closed-form side of the comparison.
inline Sample closed_form_sample(const InterferometerConfig &cfg, AssemblyOptions opts = {}) {
    Sample s;
    const QMomentTable<double> q(cfg, 4, 4, 2, 2);
    for (const auto &o : detail::q_orders()) {
        s[detail::q_name(o)] = q(o[0], o[1], o[2], o[3]);
    }
    if (cfg.scheme == Scheme::Kerr) {
        for (const auto &o : detail::d_orders()) {
            s[detail::d_name(o)] = d_value(cfg, o[0], o[1], o[2]);
        }
    }
    s["lambda2"] = normalization(cfg);
    s["N"] = mean_photon_number(cfg);
    const auto pm = photon_moments(cfg);
    s["n1"] = pm.n1;
    s["n2"] = pm.n2;
    s["n3"] = pm.n3;
    s["n4"] = pm.n4;
    if (detail::homodyne_has_closed_form(cfg)) {
        try {
            const auto h = homodyne_moments(cfg, opts);
            s["mean_x"] = h.mean;
            s["second_x"] = h.second;
        } catch (const NumericalConsistency &) {
            // A non-Hermitian assembly is a failed comparison, not an abort.
            const double nan = std::numeric_limits<double>::quiet_NaN();
            s["mean_x"] = s["second_x"] = nan;
        }
    }
    return s;
}

/// Oracle side at one cutoff.
inline Sample oracle_sample_at(const InterferometerConfig &cfg, int cutoff) {
    Sample s;
    const auto post = fock::post_subtraction_state(cfg, cutoff);
    for (const auto &o : detail::q_orders()) {
        s[detail::q_name(o)] = fock::normal_moment(post, o[0], o[1], o[2], o[3]);
    }
    if (cfg.scheme == Scheme::Kerr) {
        for (const auto &o : detail::d_orders()) {
            s[detail::d_name(o)] = fock::kerr_moment(post, cfg.phi, o[0], o[1], o[2]);
        }
    }
    s["lambda2"] = 1.0 / post.norm_weight;
    s["N"] = fock::measure(post, fock::Observable::Ntotal);
    s["n1"] = fock::measure(post, fock::Observable::Na1);
    s["n2"] = fock::measure(post, fock::Observable::Na2);
    s["n3"] = fock::measure(post, fock::Observable::Na3);
    s["n4"] = fock::measure(post, fock::Observable::Na4);
    if (detail::homodyne_has_closed_form(cfg)) {
        const int k = exponent(cfg.scheme);
        if (cfg.lossless()) {
            const auto out = fock::apply_bs(fock::apply_phase(post, cfg.phi, k));
            s["mean_x"] = fock::measure(out, fock::Observable::Xa);
            s["second_x"] = fock::measure(out, fock::Observable::Xa2);
        } else {
            fock::PhaseResolvedMoments prm(cutoff, k);
            fock::for_each_loss_branch(post, cfg.eta, [&](const fock::TwoModeState &b, double w) {
                prm.accumulate(b, w);
            });
            const auto h = prm.homodyne(cfg.phi);
            s["mean_x"] = h.mean;
            s["second_x"] = h.second;
        }
    }
    return s;
}

/// Relative deviation with a unit floor on the reference magnitude.
inline double relative_deviation(std::complex<double> value, std::complex<double> reference) {
    return std::abs(value - reference) / std::max(std::abs(reference), 1.0);
}

/// Oracle side at a converged cutoff.
inline Sample oracle_sample(const InterferometerConfig &cfg, const fock::CutoffPolicy &policy = {}) {
    return fock::detail::converge(
        policy, fock::default_cutoff(cfg), [&](int c) { return oracle_sample_at(cfg, c); },
        [&](const Sample &a, const Sample &b) {
            for (const auto &[k, v] : b) {
                if (relative_deviation(a.at(k), v) > policy.rel_tol) {
                    return false;
                }
            }
            return true;
        });
}

struct QuantityReport {
    std::string name;
    double max_deviation = 0.0;
    std::string worst_config;
};

struct ValidationReport {
    std::size_t configs = 0;
    double tolerance = 1e-6;
    std::vector<QuantityReport> quantities; ///< one per quantity, in name order
    std::vector<std::string> failures;      ///< "quantity @ config: deviation"

    [[nodiscard]] bool passed() const { return failures.empty(); }

    [[nodiscard]] std::string to_text() const {
        std::ostringstream os;
        os << "configurations: " << configs << "\n";
        os << "tolerance (relative, unit floor): " << format_double(tolerance) << "\n";
        for (const auto &q : quantities) {
            os << "  " << q.name << "  max deviation " << format_double(q.max_deviation);
            if (!q.worst_config.empty()) {
                os << "  at " << q.worst_config;
            }
            os << "\n";
        }
        if (failures.empty()) {
            os << "PASS\n";
        } else {
            os << "FAIL (" << failures.size() << " comparisons above tolerance)\n";
            for (const auto &f : failures) {
                os << "  " << f << "\n";
            }
        }
        return os.str();
    }
};

/// Compares closed forms with the oracle on every configuration of the grid.
inline ValidationReport run_validation(const std::vector<InterferometerConfig> &grid,
                                       AssemblyOptions opts = {}, double tolerance = 1e-6,
                                       const fock::CutoffPolicy &policy = {}) {
    struct Result {
        Sample closed, oracle;
    };
    std::vector<Result> results(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        results[i].closed = closed_form_sample(grid[i], opts);
        results[i].oracle = oracle_sample(grid[i], policy);
    });

    ValidationReport rep;
    rep.configs = grid.size();
    rep.tolerance = tolerance;
    std::map<std::string, QuantityReport> by_name;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (const auto &[name, value] : results[i].closed) {
            const auto it = results[i].oracle.find(name);
            if (it == results[i].oracle.end()) {
                continue;
            }
            const double dev = relative_deviation(value, it->second);
            auto &q = by_name[name];
            q.name = name;
            if (!(dev <= q.max_deviation) || q.worst_config.empty()) {
                q.max_deviation = std::isnan(dev) ? std::numeric_limits<double>::infinity()
                                                  : std::max(q.max_deviation, dev);
                q.worst_config = describe(grid[i]);
            }
            if (!(dev <= tolerance)) {
                rep.failures.push_back(name + " @ " + describe(grid[i]) + ": " + format_double(dev));
            }
        }
    }
    for (auto &[name, q] : by_name) {
        rep.quantities.push_back(q);
    }
    return rep;
}

inline ValidationReport run_validation(Preset p, AssemblyOptions opts = {}, double tolerance = 1e-6,
                                       const fock::CutoffPolicy &policy = {}) {
    return run_validation(preset_grid(p), opts, tolerance, policy);
}

} // namespace him::cli
