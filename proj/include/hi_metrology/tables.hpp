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
 * Plumbing shared by the figure, scan and validation drivers: CSV tables with
 * shortest round-trip numbers, uniform grids and a small worker pool.
 */

#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

#include "errors.hpp"

namespace him::cli {

/// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{}) {
        throw Error("could not format a number");
    }
    return {buf, res.ptr};
}

/// Empty string for absent values.
inline std::string format_cell(const std::optional<double> &v) {
    return v ? format_double(*v) : std::string{};
}

/// Header plus rows of preformatted cells.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::string to_csv() const {
        std::string out;
        auto line = [&](const std::vector<std::string> &cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) {
                    out += ',';
                }
                out += cells[i];
            }
            out += '\n';
        };
        line(header);
        for (const auto &r : rows) {
            line(r);
        }
        return out;
    }

    [[nodiscard]] std::size_t column(const std::string &name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw InvalidArgument("no column named " + name);
        }
        return static_cast<std::size_t>(it - header.begin());
    }
};

/// count points from lo to hi inclusive; a single point sits at lo.
inline std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 1) {
        throw InvalidArgument("grid count must be at least 1");
    }
    if (!(hi >= lo)) {
        throw InvalidArgument("grid upper bound must not be below the lower bound");
    }
    std::vector<double> xs(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        xs[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    }
    return xs;
}

/// Worker count: hardware concurrency, capped by HIM_THREADS when set.
inline unsigned worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char *env = std::getenv("HIM_THREADS")) {
        unsigned cap = 0;
        const std::string s(env);
        const auto res = std::from_chars(s.data(), s.data() + s.size(), cap);
        if (res.ec == std::errc{} && res.ptr == s.data() + s.size() && cap > 0) {
            n = std::min(n, cap);
        }
    }
    return n;
}

/// Runs fn(i) for i in [0, count) on the worker pool. Each index writes only
/// its own output slot, so results do not depend on scheduling. The first
/// exception (lowest index) is rethrown after all workers finish.
template <class F> void parallel_for(std::size_t count, F &&fn) {
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(worker_count(), std::max<std::size_t>(count, 1)));
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) {
                return;
            }
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
        for (auto &t : pool) {
            t.join();
        }
    }
    for (const auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace him::cli
