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
 * hi-metrology command-line front end.
 *
 *   hi-metrology figure <id> [--out PATH] [--config FILE] [--set key=value ...]
 *   hi-metrology scan --sweep key=lo:hi:count --metric M [--metric M ...] [--set ...]
 *   hi-metrology validate [--preset quick|full]
 *
 * Exit codes: 0 success, 1 usage error, 2 validation failure,
 * 3 numerical-consistency error.
 */

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "hi_metrology/hi_metrology.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

/// Shared override options: --config, --set and one --<key> flag per known key.
struct OverrideOptions {
    std::string config_file;
    std::vector<std::string> assignments;
    std::map<std::string, std::string> shortcuts;

    void attach(CLI::App &app) {
        app.add_option("--config", config_file, "flat key = value parameter file");
        app.add_option("--set", assignments, "parameter override key=value (repeatable)");
        for (const auto &k : him::cli::known_keys()) {
            app.add_option("--" + k, shortcuts[k], "override " + k);
        }
    }

    [[nodiscard]] him::cli::Overrides build() const {
        him::cli::Overrides o;
        if (!config_file.empty()) {
            o = him::cli::load_config_file(config_file);
        }
        for (const auto &a : assignments) {
            o.set_assignment(a);
        }
        for (const auto &[k, v] : shortcuts) {
            if (!v.empty()) {
                o.set(k, him::cli::parse_number(k, v));
            }
        }
        return o;
    }
};

void write_output(const std::string &text, const std::string &path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw him::InvalidArgument("cannot write " + path);
    }
    f << text;
    if (!f) {
        throw him::InvalidArgument("failed writing " + path);
    }
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Phase-estimation figures of merit for a hybrid SU(1,1)/Mach-Zehnder "
                 "interferometer with photon subtraction"};
    app.require_subcommand(1);

    auto *figure = app.add_subcommand("figure", "write the CSV data of a figure");
    std::string figure_id, out_path;
    OverrideOptions figure_ov;
    figure->add_option("id", figure_id, "figure id")->required();
    figure->add_option("--out", out_path, "output CSV path (stdout when omitted)");
    figure_ov.attach(*figure);

    auto *list = app.add_subcommand("list", "list the figure ids and their columns");

    auto *scan = app.add_subcommand("scan", "one-parameter scan");
    std::string sweep_spec, scan_out;
    std::vector<std::string> metrics;
    OverrideOptions scan_ov;
    scan->add_option("--sweep", sweep_spec, "swept parameter key=lo:hi:count")->required();
    scan->add_option("--metric", metrics,
                     "sensitivity | optimal_phase | qfi | qcrb | lossy_qfi | N | limits")
        ->required();
    scan->add_option("--out", scan_out, "output CSV path (stdout when omitted)");
    scan_ov.attach(*scan);

    auto *validate = app.add_subcommand("validate", "closed forms versus the Fock-space simulator");
    std::string preset = "quick";
    double tolerance = 1e-6;
    bool tamper = false;
    validate->add_option("--preset", preset, "quick | full")->capture_default_str();
    validate->add_option("--tolerance", tolerance, "maximum relative deviation")
        ->capture_default_str();
    validate->add_flag("--tamper-kerr-sign", tamper,
                       "flip the sign of the i D_{mn,0,0,1} term (negative control)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*list) {
            for (const auto &s : him::cli::figure_specs()) {
                std::cout << s.id << "  " << s.description << "\n    ";
                const auto h = him::cli::figure_header(s.id);
                for (std::size_t i = 0; i < h.size(); ++i) {
                    std::cout << (i ? "," : "") << h[i];
                }
                std::cout << "\n";
            }
            return kExitOk;
        }
        if (*figure) {
            const auto table = him::cli::run_figure(figure_id, figure_ov.build());
            write_output(table.to_csv(), out_path);
            return kExitOk;
        }
        if (*scan) {
            std::vector<him::cli::Metric> ms;
            for (const auto &m : metrics) {
                ms.push_back(him::cli::parse_metric(m));
            }
            const auto table =
                him::cli::run_scan(him::cli::parse_sweep(sweep_spec), ms, scan_ov.build());
            write_output(table.to_csv(), scan_out);
            return kExitOk;
        }
        if (*validate) {
            him::AssemblyOptions opts;
            if (tamper) {
                opts.kerr_b_sign = +1;
            }
            const auto report =
                him::cli::run_validation(him::cli::parse_preset(preset), opts, tolerance);
            std::cout << report.to_text();
            return report.passed() ? kExitOk : kExitValidation;
        }
    } catch (const him::NumericalConsistency &e) {
        std::cerr << "numerical-consistency error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const him::InvalidArgument &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const him::Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}
