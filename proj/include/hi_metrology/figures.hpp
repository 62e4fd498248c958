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
 * Figure data sets and one-parameter scans, emitted as CSV tables.
 *
 * Figures use alpha = 2, g = 1 unless the figure sweeps them, and draw one
 * curve per subtraction order m = n in {0, 1, 2, 3}. Points where a quantity is
 * undefined (annihilated state, stationary slope, singular optimum) are left
 * empty.
 */

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "interferometer.hpp"
#include "metrology.hpp"
#include "run_config.hpp"
#include "tables.hpp"

namespace him::cli {

/// Value for one cell, or nothing where the quantity is undefined.
template <class F> std::optional<double> guarded(F &&f) {
    try {
        return f();
    } catch (const DegenerateState &) {
    } catch (const UndefinedSensitivity &) {
    } catch (const SearchError &) {
    } catch (const SingularOptimization &) {
    }
    return std::nullopt;
}

/// Static description of a figure: its x axis and column set.
struct FigureSpec {
    std::string id;
    std::string x_key; ///< parameter swept along the x axis
    double x_lo;
    double x_hi;
    int x_count;
    std::vector<std::string> columns; ///< excluding the x column
    bool per_order = true;           ///< one curve per m = n (else m, n are free)
    std::string description;
};

inline std::vector<std::string> order_columns(const std::vector<std::string> &prefixes) {
    std::vector<std::string> cols;
    for (const auto &p : prefixes) {
        for (int j = 0; j <= 3; ++j) {
            cols.push_back(p + "_mn" + std::to_string(j));
        }
    }
    return cols;
}

inline const std::vector<FigureSpec> &figure_specs() {
    static const std::vector<FigureSpec> specs = [] {
        std::vector<FigureSpec> s;
        const double pi = std::numbers::pi;
        s.push_back({"fig2a", "phi", 0.02, pi - 0.02, 157, order_columns({"dphi"}), true,
                     "homodyne phase sensitivity versus phi, linear phase shifter"});
        s.push_back({"fig2b", "phi", 0.001, 0.1, 100, order_columns({"dphi"}), true,
                     "homodyne phase sensitivity versus phi, Kerr phase shifter"});
        s.push_back({"fig3a", "alpha", 0.5, 3.0, 26, order_columns({"dphi1", "dphi2"}), true,
                     "optimal phase sensitivity versus alpha (g = 1), both schemes"});
        s.push_back({"fig3b", "g", 0.1, 1.5, 29, order_columns({"dphi1", "dphi2"}), true,
                     "optimal phase sensitivity versus g (alpha = 2), both schemes"});
        s.push_back({"fig4a", "g", 0.0, 1.5, 31, order_columns({"N"}), true,
                     "mean photon number before the beam splitter versus g"});
        s.push_back({"fig4b", "alpha", 0.0, 3.0, 31, order_columns({"N"}), true,
                     "mean photon number before the beam splitter versus alpha"});
        s.push_back({"fig5", "alpha", 0.5, 3.0, 26,
                     {"N", "dphi1", "qcrb1", "dphi2", "qcrb2"}, false,
                     "optimal phase sensitivity and QCRB against N (alpha swept at g = 1)"});
        std::vector<std::string> lim;
        for (int j = 0; j <= 3; ++j) {
            for (const char *p : {"dphi", "N", "sql", "hl", "sub_hl", "shl"}) {
                lim.push_back(std::string(p) + "_mn" + std::to_string(j));
            }
        }
        s.push_back({"fig6a", "alpha", 0.5, 3.0, 26, lim, true,
                     "optimal phase sensitivity and scaling limits, linear phase shifter"});
        s.push_back({"fig6b", "alpha", 0.5, 3.0, 26, lim, true,
                     "optimal phase sensitivity and scaling limits, Kerr phase shifter"});
        s.push_back({"fig8", "eta", 0.1, 1.0, 19, order_columns({"dphi1", "dphi2"}), true,
                     "phase sensitivity versus transmissivity at phi1 = 1.6, phi2 = 0.013"});
        s.push_back({"fig8x", "eta", 0.1, 1.0, 19,
                     order_columns({"phi1", "dphi1", "phi2", "dphi2"}), true,
                     "extension: phase re-optimized at each transmissivity"});
        s.push_back({"fig9a", "g", 0.0, 1.5, 31, order_columns({"F"}), true,
                     "ideal QFI versus g, linear phase shifter"});
        s.push_back({"fig9b", "g", 0.0, 1.5, 31, order_columns({"F"}), true,
                     "ideal QFI versus g, Kerr phase shifter"});
        s.push_back({"fig10a", "g", 0.0, 1.5, 31, order_columns({"qcrb1", "qcrb2"}), true,
                     "ideal QCRB versus g, both schemes"});
        s.push_back({"fig10b", "alpha", 0.0, 3.0, 31, order_columns({"qcrb1", "qcrb2"}), true,
                     "ideal QCRB versus alpha, both schemes"});
        s.push_back({"fig11", "eta", 0.1, 1.0, 19, order_columns({"qcrbl1", "qcrbl2"}), true,
                     "lossy QCRB versus transmissivity, both schemes"});
        return s;
    }();
    return specs;
}

inline const FigureSpec &figure_spec(const std::string &id) {
    for (const auto &s : figure_specs()) {
        if (s.id == id) {
            return s;
        }
    }
    throw InvalidArgument("unknown figure id '" + id + "'");
}

/// Header row of a figure (x column first).
inline std::vector<std::string> figure_header(const std::string &id) {
    const auto &s = figure_spec(id);
    std::vector<std::string> h{s.x_key};
    h.insert(h.end(), s.columns.begin(), s.columns.end());
    return h;
}

namespace detail {

/// One curve: the value of every column group at a single (x, m = n) point.
using CellFn = std::function<std::vector<std::optional<double>>(const InterferometerConfig &)>;

inline std::optional<double> optimal_dphi(const InterferometerConfig &cfg,
                                          const fock::CutoffPolicy &policy,
                                          std::optional<int> grid) {
    return guarded([&] { return optimal_phase(cfg, std::nullopt, grid, policy).delta_phi; });
}

} // namespace detail

/// Builds the data table of a figure.
inline Table run_figure(const std::string &id, const Overrides &ov = {}) {
    const FigureSpec &spec = figure_spec(id);
    if (ov.has(spec.x_key)) {
        throw InvalidArgument("'" + spec.x_key + "' is the x axis of " + id +
                              "; use x_lo, x_hi, x_count instead");
    }
    if (spec.per_order && (ov.has("m") || ov.has("n"))) {
        throw InvalidArgument(id + " draws one curve per m = n; m and n cannot be overridden");
    }
    if (ov.has("k")) {
        throw InvalidArgument(id + " fixes the phase-shifter kind per column");
    }
    InterferometerConfig base;
    base.alpha_mag = 2.0;
    base.g = 1.0;
    ov.apply(base);
    const auto policy = ov.policy();
    const std::optional<int> grid =
        ov.get("grid_points") ? std::optional<int>(static_cast<int>(*ov.get("grid_points")))
                              : std::nullopt;
    const double phi1 = ov.get_or("phi1", 1.6);
    const double phi2 = ov.get_or("phi2", 0.013);
    const auto xs = linspace(ov.get_or("x_lo", spec.x_lo), ov.get_or("x_hi", spec.x_hi),
                             static_cast<int>(ov.get_or("x_count", spec.x_count)));

    const std::vector<int> orders =
        spec.per_order ? std::vector<int>{0, 1, 2, 3} : std::vector<int>{-1};
    const auto lin = Scheme::Linear, kerr = Scheme::Kerr;

    // Per-curve evaluation; returns the column group values in spec order.
    detail::CellFn cell;
    if (id == "fig2a" || id == "fig2b") {
        const Scheme sch = id == "fig2a" ? lin : kerr;
        // The sensitivity model depends on phi only through evaluate(); build
        // it once per curve.
        auto models = std::make_shared<std::map<int, std::shared_ptr<SensitivityModel>>>();
        for (int j : orders) {
            auto c = base.with_scheme(sch);
            c.m = c.n = j;
            (*models)[j] = std::make_shared<SensitivityModel>(c, policy);
        }
        cell = [models](const InterferometerConfig &c) -> std::vector<std::optional<double>> {
            const auto &m = *models->at(c.m);
            return {guarded([&] { return m.evaluate(c.phi).delta_phi; })};
        };
    } else if (id == "fig3a" || id == "fig3b") {
        cell = [&](const InterferometerConfig &c) -> std::vector<std::optional<double>> {
            return {detail::optimal_dphi(c.with_scheme(lin), policy, grid),
                    detail::optimal_dphi(c.with_scheme(kerr), policy, grid)};
        };
    } else if (id == "fig4a" || id == "fig4b") {
        cell = [](const InterferometerConfig &c) -> std::vector<std::optional<double>> {
            return {guarded([&] { return mean_photon_number(c); })};
        };
    } else if (id == "fig5") {
        cell = [&](const InterferometerConfig &c) -> std::vector<std::optional<double>> {
            auto q = [&](Scheme s) {
                return guarded([&] { return qcrb(qfi_ideal(c.with_scheme(s)).F); });
            };
            return {guarded([&] { return mean_photon_number(c); }),
                    detail::optimal_dphi(c.with_scheme(lin), policy, grid), q(lin),
                    detail::optimal_dphi(c.with_scheme(kerr), policy, grid), q(kerr)};
        };
    } else if (id == "fig6a" || id == "fig6b") {
        const Scheme sch = id == "fig6a" ? lin : kerr;
        cell = [&, sch](const InterferometerConfig &c) -> std::vector<std::optional<double>> {
            const auto n = guarded([&] { return mean_photon_number(c); });
            std::vector<std::optional<double>> out{
                detail::optimal_dphi(c.with_scheme(sch), policy, grid), n};
            if (n && *n > 0) {
                const auto l = quantum_limits(*n);
                out.insert(out.end(), {l.sql, l.hl, l.sub_hl, l.shl});
            } else {
                out.insert(out.end(), 4, std::nullopt);
            }
            return out;
        };
    } else if (id == "fig8") {
        cell = [&](const InterferometerConfig &c) -> std::vector<std::optional<double>> {
            return {guarded([&] {
                        return phase_sensitivity(c.with_scheme(lin).with_phi(phi1), policy)
                            .delta_phi;
                    }),
                    guarded([&] {
                        return phase_sensitivity(c.with_scheme(kerr).with_phi(phi2), policy)
                            .delta_phi;
                    })};
        };
    } else if (id == "fig8x") {
        cell = [&](const InterferometerConfig &c) -> std::vector<std::optional<double>> {
            std::vector<std::optional<double>> out;
            for (Scheme s : {lin, kerr}) {
                try {
                    const auto r = optimal_phase(c.with_scheme(s), std::nullopt, grid, policy);
                    out.push_back(r.phi);
                    out.push_back(r.delta_phi);
                } catch (const DegenerateState &) {
                    out.insert(out.end(), 2, std::nullopt);
                } catch (const SearchError &) {
                    out.insert(out.end(), 2, std::nullopt);
                }
            }
            return out;
        };
    } else if (id == "fig9a" || id == "fig9b") {
        const Scheme sch = id == "fig9a" ? lin : kerr;
        cell = [sch](const InterferometerConfig &c) -> std::vector<std::optional<double>> {
            return {guarded([&] { return qfi_ideal(c.with_scheme(sch)).F; })};
        };
    } else if (id == "fig10a" || id == "fig10b") {
        cell = [&](const InterferometerConfig &c) -> std::vector<std::optional<double>> {
            auto q = [&](Scheme s) {
                return guarded([&] { return qcrb(qfi_ideal(c.with_scheme(s)).F); });
            };
            return {q(lin), q(kerr)};
        };
    } else if (id == "fig11") {
        cell = [&](const InterferometerConfig &c) -> std::vector<std::optional<double>> {
            auto q = [&](Scheme s) {
                return guarded([&] { return qcrb(qfi_lossy(c.with_scheme(s))); });
            };
            return {q(lin), q(kerr)};
        };
    } else {
        throw InvalidArgument("unknown figure id '" + id + "'");
    }

    // Column groups: per_order figures interleave as group-major over orders
    // (e.g. dphi1_mn0..3 then dphi2_mn0..3), except fig6 which is order-major.
    const bool order_major = id == "fig6a" || id == "fig6b";
    const std::size_t tasks = xs.size() * orders.size();
    std::vector<std::vector<std::optional<double>>> results(tasks);
    parallel_for(tasks, [&](std::size_t t) {
        const std::size_t xi = t / orders.size(), oi = t % orders.size();
        InterferometerConfig c = base;
        apply_sweep_value(c, spec.x_key, xs[xi]);
        if (orders[oi] >= 0) {
            c.m = c.n = orders[oi];
        }
        results[t] = cell(c);
    });

    Table table;
    table.header = figure_header(id);
    for (std::size_t xi = 0; xi < xs.size(); ++xi) {
        std::vector<std::string> row{format_double(xs[xi])};
        const std::size_t groups = results[xi * orders.size()].size();
        if (order_major) {
            for (std::size_t oi = 0; oi < orders.size(); ++oi) {
                for (std::size_t gi = 0; gi < groups; ++gi) {
                    row.push_back(format_cell(results[xi * orders.size() + oi][gi]));
                }
            }
        } else {
            for (std::size_t gi = 0; gi < groups; ++gi) {
                for (std::size_t oi = 0; oi < orders.size(); ++oi) {
                    row.push_back(format_cell(results[xi * orders.size() + oi][gi]));
                }
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

/// Derived quantities a scan can fill in.
enum class Metric { Sensitivity, OptimalPhase, Qfi, Qcrb, LossyQfi, N, Limits };

inline Metric parse_metric(const std::string &s) {
    static const std::map<std::string, Metric> names = {
        {"sensitivity", Metric::Sensitivity}, {"optimal_phase", Metric::OptimalPhase},
        {"qfi", Metric::Qfi},                 {"qcrb", Metric::Qcrb},
        {"lossy_qfi", Metric::LossyQfi},      {"N", Metric::N},
        {"limits", Metric::Limits}};
    const auto it = names.find(s);
    if (it == names.end()) {
        throw InvalidArgument("unknown metric '" + s + "'");
    }
    return it->second;
}

/// Column layout of scan output: every config field, then every derived output.
inline const std::vector<std::string> &scan_header() {
    static const std::vector<std::string> h = {
        "alpha", "theta_alpha", "g",   "theta", "k",  "m",      "n",   "phi",
        "eta",   "delta_phi",   "phi_opt", "N", "F",  "qcrb",   "sql", "hl",
        "sub_hl", "shl",        "source"};
    return h;
}

/// One scan row; absent outputs become empty cells.
struct ScanRecord {
    InterferometerConfig cfg;
    std::optional<double> delta_phi, phi_opt, N, F, qcrb, sql, hl, sub_hl, shl;
    std::optional<Source> source;

    [[nodiscard]] std::vector<std::string> cells() const {
        return {format_double(cfg.alpha_mag),
                format_double(cfg.theta_alpha),
                format_double(cfg.g),
                format_double(cfg.theta),
                std::to_string(exponent(cfg.scheme)),
                std::to_string(cfg.m),
                std::to_string(cfg.n),
                format_double(cfg.phi),
                format_double(cfg.eta),
                format_cell(delta_phi),
                format_cell(phi_opt),
                format_cell(N),
                format_cell(F),
                format_cell(qcrb),
                format_cell(sql),
                format_cell(hl),
                format_cell(sub_hl),
                format_cell(shl),
                source ? std::string(to_string(*source)) : std::string{}};
    }
};

inline ScanRecord evaluate_record(const InterferometerConfig &cfg, const std::vector<Metric> &metrics,
                                  const fock::CutoffPolicy &policy, std::optional<int> grid) {
    ScanRecord r;
    r.cfg = cfg;
    auto has = [&](Metric m) { return std::find(metrics.begin(), metrics.end(), m) != metrics.end(); };
    if (has(Metric::Sensitivity)) {
        try {
            const auto s = phase_sensitivity(cfg, policy);
            r.delta_phi = s.delta_phi;
            r.source = s.source;
        } catch (const DegenerateState &) {
        } catch (const UndefinedSensitivity &) {
        }
    }
    if (has(Metric::OptimalPhase)) {
        try {
            const auto s = optimal_phase(cfg, std::nullopt, grid, policy);
            r.delta_phi = s.delta_phi;
            r.phi_opt = s.phi;
            r.source = s.source;
        } catch (const DegenerateState &) {
        } catch (const SearchError &) {
        }
    }
    if (has(Metric::Qfi) || has(Metric::Qcrb)) {
        r.F = guarded([&] { return qfi_ideal(cfg).F; });
    }
    if (has(Metric::LossyQfi)) {
        r.F = guarded([&] { return qfi_lossy(cfg); });
    }
    if (has(Metric::Qcrb) || has(Metric::LossyQfi)) {
        if (r.F && *r.F > 0) {
            r.qcrb = qcrb(*r.F);
        }
    }
    if (has(Metric::N) || has(Metric::Limits)) {
        r.N = guarded([&] { return mean_photon_number(cfg); });
    }
    if (has(Metric::Limits) && r.N && *r.N > 0) {
        const auto l = quantum_limits(*r.N);
        r.sql = l.sql, r.hl = l.hl, r.sub_hl = l.sub_hl, r.shl = l.shl;
    }
    return r;
}

/// One-parameter scan; exactly one swept key, metrics chosen by the caller.
inline Table run_scan(const Sweep &sweep, const std::vector<Metric> &metrics, const Overrides &ov = {}) {
    if (metrics.empty()) {
        throw InvalidArgument("select at least one metric");
    }
    auto has = [&](Metric m) { return std::find(metrics.begin(), metrics.end(), m) != metrics.end(); };
    if (has(Metric::Sensitivity) && has(Metric::OptimalPhase)) {
        throw InvalidArgument("sensitivity and optimal_phase both fill delta_phi; pick one");
    }
    if (has(Metric::Qfi) && has(Metric::LossyQfi)) {
        throw InvalidArgument("qfi and lossy_qfi both fill F; pick one");
    }
    if (ov.has(sweep.key)) {
        throw InvalidArgument("'" + sweep.key + "' is both swept and fixed");
    }
    InterferometerConfig base;
    ov.apply(base);
    const auto policy = ov.policy();
    const std::optional<int> grid =
        ov.get("grid_points") ? std::optional<int>(static_cast<int>(*ov.get("grid_points")))
                              : std::nullopt;
    const auto xs = linspace(sweep.lo, sweep.hi, sweep.count);
    std::vector<ScanRecord> records(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) {
        InterferometerConfig c = base;
        apply_sweep_value(c, sweep.key, xs[i]);
        c.validate();
        records[i] = evaluate_record(c, metrics, policy, grid);
    });
    Table t;
    t.header = scan_header();
    for (const auto &r : records) {
        t.rows.push_back(r.cells());
    }
    return t;
}

} // namespace him::cli
