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
 * Run configuration for the command-line drivers: named overrides, the flat
 * `key = value` config file format, and sweep specifications.
 */

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "fock.hpp"

namespace him::cli {

/// Every key accepted by --set, the --<key> shortcuts and config files.
inline const std::vector<std::string> &known_keys() {
    static const std::vector<std::string> keys = {
        "alpha", "theta_alpha", "g",      "theta",  "k",          "m",
        "n",     "phi",         "eta",    "phi1",   "phi2",       "cutoff",
        "rel_tol", "x_lo",      "x_hi",   "x_count", "grid_points"};
    return keys;
}

inline bool is_known_key(const std::string &k) {
    const auto &keys = known_keys();
    return std::find(keys.begin(), keys.end(), k) != keys.end();
}

inline bool is_integer_key(const std::string &k) {
    return k == "k" || k == "m" || k == "n" || k == "cutoff" || k == "x_count" ||
           k == "grid_points";
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_number(const std::string &key, const std::string &text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
        throw InvalidArgument("value of '" + key + "' is not a finite number: '" + text + "'");
    }
    if (is_integer_key(key) && v != std::floor(v)) {
        throw InvalidArgument("value of '" + key + "' must be an integer");
    }
    return v;
}

/// Explicit parameter overrides, validated against known_keys().
class Overrides {
  public:
    void set(const std::string &key, double value) {
        if (!is_known_key(key)) {
            throw InvalidArgument("unknown parameter '" + key + "'");
        }
        if (is_integer_key(key) && value != std::floor(value)) {
            throw InvalidArgument("value of '" + key + "' must be an integer");
        }
        values_[key] = value;
    }

    /// "key=value".
    void set_assignment(const std::string &assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos) {
            throw InvalidArgument("expected key=value, got '" + assignment + "'");
        }
        const std::string key = trim(std::string_view(assignment).substr(0, eq));
        set(key, parse_number(key, assignment.substr(eq + 1)));
    }

    [[nodiscard]] bool has(const std::string &key) const { return values_.count(key) != 0; }
    [[nodiscard]] std::optional<double> get(const std::string &key) const {
        const auto it = values_.find(key);
        return it == values_.end() ? std::nullopt : std::optional<double>(it->second);
    }
    [[nodiscard]] double get_or(const std::string &key, double fallback) const {
        return get(key).value_or(fallback);
    }
    [[nodiscard]] const std::map<std::string, double> &values() const { return values_; }

    /// Copies the physical keys onto a configuration.
    void apply(InterferometerConfig &cfg) const {
        for (const auto &[k, v] : values_) {
            if (k == "alpha") {
                cfg.alpha_mag = v;
            } else if (k == "theta_alpha") {
                cfg.theta_alpha = v;
            } else if (k == "g") {
                cfg.g = v;
            } else if (k == "theta") {
                cfg.theta = v;
            } else if (k == "k") {
                cfg.scheme = scheme_from_int(static_cast<int>(v));
            } else if (k == "m") {
                cfg.m = static_cast<int>(v);
            } else if (k == "n") {
                cfg.n = static_cast<int>(v);
            } else if (k == "phi") {
                cfg.phi = v;
            } else if (k == "eta") {
                cfg.eta = v;
            }
        }
    }

    /// Oracle truncation policy from cutoff / rel_tol.
    [[nodiscard]] fock::CutoffPolicy policy() const {
        fock::CutoffPolicy p;
        if (auto c = get("cutoff")) {
            if (*c < 1) {
                throw InvalidArgument("cutoff must be positive");
            }
            p.fixed_cutoff = static_cast<int>(*c);
        }
        if (auto t = get("rel_tol")) {
            if (!(*t > 0)) {
                throw InvalidArgument("rel_tol must be positive");
            }
            p.rel_tol = *t;
        }
        return p;
    }

  private:
    std::map<std::string, double> values_;
};

/// Reads a flat config file: one `key = value` per line, `#` starts a comment.
inline Overrides parse_config_text(const std::string &text) {
    Overrides o;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        if (trim(line).empty()) {
            continue;
        }
        try {
            o.set_assignment(line);
        } catch (const InvalidArgument &e) {
            throw InvalidArgument("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return o;
}

inline Overrides load_config_file(const std::string &path) {
    std::ifstream f(path);
    if (!f) {
        throw InvalidArgument("cannot read config file " + path);
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

/// A one-parameter sweep `key=lo:hi:count`.
struct Sweep {
    std::string key;
    double lo = 0.0;
    double hi = 0.0;
    int count = 1;
};

inline const std::set<std::string> &sweepable_keys() {
    static const std::set<std::string> keys = {"alpha", "theta_alpha", "g", "theta",
                                               "phi",   "eta",         "m", "n"};
    return keys;
}

inline Sweep parse_sweep(const std::string &spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) {
        throw InvalidArgument("sweep must look like key=lo:hi:count");
    }
    Sweep s;
    s.key = trim(std::string_view(spec).substr(0, eq));
    if (!sweepable_keys().count(s.key)) {
        throw InvalidArgument("parameter '" + s.key + "' cannot be swept");
    }
    std::vector<std::string> parts;
    std::string rest = spec.substr(eq + 1), item;
    std::istringstream in(rest);
    while (std::getline(in, item, ':')) {
        parts.push_back(item);
    }
    if (parts.size() != 3) {
        throw InvalidArgument("sweep must look like key=lo:hi:count");
    }
    s.lo = parse_number(s.key, parts[0]);
    s.hi = parse_number(s.key, parts[1]);
    const double c = parse_number("x_count", parts[2]);
    if (c < 1) {
        throw InvalidArgument("sweep count must be at least 1");
    }
    if (!(s.hi >= s.lo)) {
        throw InvalidArgument("sweep upper bound is below the lower bound");
    }
    s.count = static_cast<int>(c);
    if ((s.key == "m" || s.key == "n") && s.count > 1) {
        const double step = (s.hi - s.lo) / (s.count - 1);
        if (step != std::floor(step) || s.lo < 0) {
            throw InvalidArgument("integer sweeps need non-negative integer grid points");
        }
    }
    return s;
}

/// Sets the swept key on a configuration.
inline void apply_sweep_value(InterferometerConfig &cfg, const std::string &key, double v) {
    Overrides o;
    o.set(key, key == "m" || key == "n" ? std::round(v) : v);
    o.apply(cfg);
}

} // namespace him::cli
