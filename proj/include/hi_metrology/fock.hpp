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
 * Truncated two-mode Fock-space simulator of the interferometer.
 *
 * Every optical element is applied directly to amplitude arrays, without any
 * generating function, so this module serves as an independent reference for
 * the closed-form moments. Loss is represented exactly by its Kraus branches.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "interferometer.hpp"

namespace him::fock {

using cplx = std::complex<double>;

/// Amplitudes psi[j][k] of |j>_a |k>_b with 0 <= j <= cutoff_a, 0 <= k <= cutoff_b.
///
/// norm_weight accumulates the squared-norm ratios of non-unitary steps
/// (photon subtraction), so 1 / norm_weight is the normalization lambda^2 of
/// a normalized input.
struct TwoModeState {
    int cutoff_a = 0;
    int cutoff_b = 0;
    std::vector<cplx> amps;
    double norm_weight = 1.0;

    TwoModeState() = default;
    TwoModeState(int ca, int cb)
        : cutoff_a(ca), cutoff_b(cb),
          amps(static_cast<std::size_t>(ca + 1) * static_cast<std::size_t>(cb + 1)) {
        if (ca < 0 || cb < 0) {
            throw InvalidArgument("cutoffs must be non-negative");
        }
    }

    [[nodiscard]] int dim_b() const { return cutoff_b + 1; }
    cplx &at(int j, int k) { return amps[static_cast<std::size_t>(j) * dim_b() + k]; }
    [[nodiscard]] cplx at(int j, int k) const {
        return amps[static_cast<std::size_t>(j) * dim_b() + k];
    }

    [[nodiscard]] double norm2() const {
        double s = 0.0;
        for (const auto &z : amps) {
            s += std::norm(z);
        }
        return s;
    }
};

/// Mixed state sum_l weight_l |psi_l><psi_l| with normalized branches.
struct KrausEnsemble {
    struct Branch {
        TwoModeState state;
        double weight;
    };
    std::vector<Branch> branches;

    [[nodiscard]] double trace() const {
        double t = 0.0;
        for (const auto &b : branches) {
            t += b.weight * b.state.norm2();
        }
        return t;
    }
};

/// Tolerance on the probability in the top two Fock layers after squeezing.
inline constexpr double kLeakageTol = 1e-10;

namespace detail {

inline double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

/// sqrt(j! / (j - p)!) for small p.
inline double ladder(int j, int p) {
    double f = 1.0;
    for (int i = 0; i < p; ++i) {
        f *= std::sqrt(static_cast<double>(j - i));
    }
    return f;
}

/// Probability weight of the two highest layers of either mode.
inline double edge_weight(const TwoModeState &s) {
    double w = 0.0;
    for (int j = 0; j <= s.cutoff_a; ++j) {
        for (int k = 0; k <= s.cutoff_b; ++k) {
            if (j >= s.cutoff_a - 1 || k >= s.cutoff_b - 1) {
                w += std::norm(s.at(j, k));
            }
        }
    }
    return w;
}

} // namespace detail

/// Coherent state |alpha> in mode a, vacuum in mode b.
inline TwoModeState prepare_input(cplx alpha, int cutoff_a, int cutoff_b) {
    TwoModeState s(cutoff_a, cutoff_b);
    const double r = std::abs(alpha);
    const double ph = std::arg(alpha);
    const double r2 = r * r;
    double kept = 0.0;
    for (int j = 0; j <= cutoff_a; ++j) {
        double logmag = -0.5 * r2 - 0.5 * detail::log_factorial(j);
        if (j > 0) {
            if (r == 0.0) {
                break;
            }
            logmag += j * std::log(r);
        }
        s.at(j, 0) = std::polar(std::exp(logmag), j * ph);
        kept += std::norm(s.at(j, 0));
    }
    if (1.0 - kept > 1e-12) {
        int suggested = cutoff_a;
        double acc = kept;
        // Extend the Poisson sum until the tail is small enough.
        double logp = (cutoff_a > 0 && r > 0)
                          ? -r2 + 2 * cutoff_a * std::log(r) - detail::log_factorial(cutoff_a)
                          : -r2;
        while (1.0 - acc > 1e-12 && suggested < 100000) {
            ++suggested;
            logp += 2 * std::log(r) - std::log(static_cast<double>(suggested));
            acc += std::exp(logp);
        }
        throw CutoffError("coherent-state tail exceeds 1e-12 at cutoff " +
                              std::to_string(cutoff_a),
                          suggested);
    }
    return s;
}

/// exp(c a b): out[j][k] = sum_p c^p / p! sqrt((j+p)!(k+p)!/(j! k!)) in[j+p][k+p].
inline TwoModeState apply_ab_series(const TwoModeState &in, cplx c) {
    TwoModeState out(in.cutoff_a, in.cutoff_b);
    out.norm_weight = in.norm_weight;
    for (int j = 0; j <= in.cutoff_a; ++j) {
        for (int k = 0; k <= in.cutoff_b; ++k) {
            const int pmax = std::min(in.cutoff_a - j, in.cutoff_b - k);
            cplx coef = 1.0, acc = in.at(j, k);
            for (int p = 1; p <= pmax; ++p) {
                coef *= c / static_cast<double>(p) *
                        std::sqrt(static_cast<double>(j + p) * (k + p));
                acc += coef * in.at(j + p, k + p);
            }
            out.at(j, k) = acc;
        }
    }
    return out;
}

/// exp(c a^dag b^dag): out[j][k] = sum_p c^p / p! sqrt(j! k! / ((j-p)!(k-p)!)) in[j-p][k-p].
inline TwoModeState apply_adbd_series(const TwoModeState &in, cplx c) {
    TwoModeState out(in.cutoff_a, in.cutoff_b);
    out.norm_weight = in.norm_weight;
    for (int j = 0; j <= in.cutoff_a; ++j) {
        for (int k = 0; k <= in.cutoff_b; ++k) {
            const int pmax = std::min(j, k);
            cplx coef = 1.0, acc = in.at(j, k);
            for (int p = 1; p <= pmax; ++p) {
                coef *= c / static_cast<double>(p) *
                        std::sqrt(static_cast<double>(j - p + 1) * (k - p + 1));
                acc += coef * in.at(j - p, k - p);
            }
            out.at(j, k) = acc;
        }
    }
    return out;
}

/// Two-mode squeezer S(xi) = exp(xi^* a b - xi a^dag b^dag), xi = g e^{i theta},
/// in its disentangled form
/// exp(-e^{i theta} tanh g a^dag b^dag) cosh g^{-(n_a + n_b + 1)} exp(e^{-i theta} tanh g a b).
inline TwoModeState apply_opa(const TwoModeState &in, double g, double theta) {
    if (!(g >= 0.0) || !std::isfinite(g)) {
        throw InvalidArgument("g must be a finite non-negative number");
    }
    const double th = std::tanh(g);
    const double lch = std::log(std::cosh(g));
    TwoModeState s = apply_ab_series(in, std::polar(th, -theta));
    for (int j = 0; j <= s.cutoff_a; ++j) {
        for (int k = 0; k <= s.cutoff_b; ++k) {
            s.at(j, k) *= std::exp(-(j + k + 1) * lch);
        }
    }
    s = apply_adbd_series(s, -std::polar(th, theta));
    const double total = s.norm2();
    if (detail::edge_weight(s) > kLeakageTol * total) {
        throw CutoffError("squeezed state leaks into the top Fock layers at cutoff " +
                              std::to_string(std::min(s.cutoff_a, s.cutoff_b)),
                          2 * std::max(s.cutoff_a, s.cutoff_b));
    }
    return s;
}

/// a^m b^n without renormalization; norm_weight picks up the squared-norm ratio.
inline TwoModeState subtract_photons(const TwoModeState &in, int m, int n) {
    if (m < 0 || n < 0) {
        throw InvalidArgument("subtraction orders must be non-negative");
    }
    TwoModeState out(in.cutoff_a, in.cutoff_b);
    for (int j = 0; j + m <= in.cutoff_a; ++j) {
        for (int k = 0; k + n <= in.cutoff_b; ++k) {
            const double f = 0.5 * (detail::log_factorial(j + m) - detail::log_factorial(j) +
                                    detail::log_factorial(k + n) - detail::log_factorial(k));
            out.at(j, k) = std::exp(f) * in.at(j + m, k + n);
        }
    }
    const double before = in.norm2();
    const double after = out.norm2();
    if (!(after > 0.0)) {
        throw DegenerateState("photon subtraction annihilates the state");
    }
    out.norm_weight = in.norm_weight * after / before;
    return out;
}

/// exp(i phi n_a^k) on mode a.
inline TwoModeState apply_phase(const TwoModeState &in, double phi, int k) {
    (void)scheme_from_int(k);
    TwoModeState out = in;
    for (int j = 0; j <= in.cutoff_a; ++j) {
        const double jj = k == 1 ? j : static_cast<double>(j) * j;
        const cplx f = std::polar(1.0, phi * jj);
        for (int b = 0; b <= in.cutoff_b; ++b) {
            out.at(j, b) *= f;
        }
    }
    return out;
}

inline KrausEnsemble apply_phase(const KrausEnsemble &in, double phi, int k) {
    KrausEnsemble out;
    out.branches.reserve(in.branches.size());
    for (const auto &b : in.branches) {
        out.branches.push_back({apply_phase(b.state, phi, k), b.weight});
    }
    return out;
}

namespace detail {

/// J_0(x), ..., J_kmax(x) by Miller's backward recurrence, normalized with
/// J_0 + 2 sum J_{2k} = 1.
inline std::vector<double> bessel_j_sequence(double x, int kmax) {
    const int start = kmax + 20 + static_cast<int>(std::sqrt(40.0 * (kmax + 1)));
    std::vector<double> j(static_cast<std::size_t>(start) + 2, 0.0);
    j[start + 1] = 0.0;
    j[start] = 1e-300;
    for (int k = start; k >= 1; --k) {
        j[k - 1] = 2.0 * k / x * j[k] - j[k + 1];
        if (std::abs(j[k - 1]) > 1e250) {
            for (int q = k - 1; q <= start; ++q) {
                j[q] *= 1e-250;
            }
        }
    }
    double norm = j[0];
    for (int k = 2; k <= start; k += 2) {
        norm += 2.0 * j[k];
    }
    j.resize(static_cast<std::size_t>(kmax) + 1);
    for (auto &v : j) {
        v /= norm;
    }
    return j;
}

} // namespace detail

/// Applies the 50:50 beam splitter to the amplitudes v[j] of |j, N-j>.
///
/// The splitter is U = exp(-i pi/4 (a^dag b + b^dag a)), which maps
/// a^dag -> (a^dag - i b^dag)/sqrt(2) and b^dag -> (b^dag - i a^dag)/sqrt(2).
/// It conserves N; on the shell the generator H has the exact spectrum
/// {-N, -N+2, ..., N}, so exp(-i (pi N / 4) H/N) is expanded in Chebyshev
/// polynomials of H/N with Bessel coefficients, which is unconditionally stable.
inline std::vector<cplx> bs_shell_apply(const std::vector<cplx> &v, int shell) {
    const int n = shell;
    if (static_cast<int>(v.size()) != n + 1) {
        throw InvalidArgument("shell vector has the wrong length");
    }
    if (n == 0) {
        return v;
    }
    std::vector<double> up(n + 1), down(n + 1); // couplings j -> j+1, j -> j-1
    for (int j = 0; j <= n; ++j) {
        up[j] = std::sqrt(static_cast<double>(j + 1) * (n - j)) / n;
        down[j] = std::sqrt(static_cast<double>(j) * (n - j + 1)) / n;
    }
    auto apply_x = [&](const std::vector<cplx> &in, std::vector<cplx> &out) {
        for (int j = 0; j <= n; ++j) {
            cplx acc{};
            if (j >= 1) {
                acc += down[j] * in[j - 1];
            }
            if (j + 1 <= n) {
                acc += up[j] * in[j + 1];
            }
            out[j] = acc;
        }
    };
    const double tau = std::numbers::pi * n / 4.0;
    const int kmax = static_cast<int>(std::ceil(tau + 12.0 * std::cbrt(tau) + 30.0));
    const auto bj = detail::bessel_j_sequence(tau, kmax);

    std::vector<cplx> t_prev = v, t_cur(n + 1), t_next(n + 1), out(n + 1);
    apply_x(t_prev, t_cur);
    const cplx mi{0.0, -1.0};
    cplx phase = mi;
    for (int j = 0; j <= n; ++j) {
        out[j] = bj[0] * t_prev[j] + 2.0 * bj[1] * phase * t_cur[j];
    }
    for (int k = 2; k <= kmax; ++k) {
        apply_x(t_cur, t_next);
        phase *= mi;
        const cplx coef = 2.0 * bj[k] * phase;
        for (int j = 0; j <= n; ++j) {
            t_next[j] = 2.0 * t_next[j] - t_prev[j];
            out[j] += coef * t_next[j];
        }
        std::swap(t_prev, t_cur);
        std::swap(t_cur, t_next);
    }
    return out;
}

/// The (N+1)x(N+1) beam-splitter block <j', N-j'| U |j, N-j>, row-major.
inline std::vector<cplx> bs_shell_matrix(int shell) {
    if (shell < 0) {
        throw InvalidArgument("shell must be non-negative");
    }
    const int d = shell + 1;
    std::vector<cplx> mat(static_cast<std::size_t>(d) * d);
    for (int col = 0; col < d; ++col) {
        std::vector<cplx> e(d);
        e[col] = 1.0;
        const auto c = bs_shell_apply(e, shell);
        for (int row = 0; row < d; ++row) {
            mat[static_cast<std::size_t>(row) * d + col] = c[row];
        }
    }
    return mat;
}

/// max |U^dag U - I| of a shell block.
inline double unitarity_defect(const std::vector<cplx> &mat, int shell) {
    const int d = shell + 1;
    double worst = 0.0;
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
            cplx s{};
            for (int p = 0; p < d; ++p) {
                s += std::conj(mat[static_cast<std::size_t>(p) * d + a]) *
                     mat[static_cast<std::size_t>(p) * d + b];
            }
            worst = std::max(worst, std::abs(s - (a == b ? cplx{1.0} : cplx{})));
        }
    }
    return worst;
}

/// Unitarity tolerance of the beam splitter (checked through norm preservation).
inline constexpr double kUnitarityTol = 1e-12;

/// Beam splitter on a pure state; the output has cutoffs (ca + cb, ca + cb).
/// Shells whose squared norm is below this fraction of the total are passed
/// over (their contribution is far below double precision).
inline constexpr double kNegligibleShell = 1e-32;

inline TwoModeState apply_bs(const TwoModeState &in, bool check_unitarity = false) {
    const int ca = in.cutoff_a, cb = in.cutoff_b;
    TwoModeState out(ca + cb, ca + cb);
    out.norm_weight = in.norm_weight;
    const double total = in.norm2();
    for (int n = 0; n <= ca + cb; ++n) {
        const int jlo = std::max(0, n - cb), jhi = std::min(n, ca);
        std::vector<cplx> v(n + 1);
        double shell_norm = 0.0;
        for (int j = jlo; j <= jhi; ++j) {
            v[j] = in.at(j, n - j);
            shell_norm += std::norm(v[j]);
        }
        if (shell_norm == 0.0 || (!check_unitarity && shell_norm < kNegligibleShell * total)) {
            for (int j = jlo; j <= jhi; ++j) {
                // Keep the (negligible) amplitudes in place of the rotation.
                out.at(j, n - j) = v[j];
            }
            continue;
        }
        const auto w = bs_shell_apply(v, n);
        if (check_unitarity) {
            double a = 0.0, b = 0.0;
            for (int j = 0; j <= n; ++j) {
                a += std::norm(v[j]);
                b += std::norm(w[j]);
            }
            if (std::abs(a - b) > kUnitarityTol * std::max(a, 1e-300)) {
                throw NumericalConsistency("beam splitter is not unitary on shell " +
                                           std::to_string(n));
            }
        }
        for (int p = 0; p <= n; ++p) {
            out.at(p, n - p) = w[p];
        }
    }
    return out;
}

inline KrausEnsemble apply_bs(const KrausEnsemble &in, bool check_unitarity = false) {
    KrausEnsemble out;
    for (const auto &b : in.branches) {
        out.branches.push_back({apply_bs(b.state, check_unitarity), b.weight});
    }
    return out;
}

/// Pure loss on mode a with transmissivity eta, as Kraus branches
/// K_l = sum_j sqrt(C(j, l)) eta^{(j-l)/2} (1-eta)^{l/2} |j-l><j|.
/// Branches are normalized; weights sum to one.
inline KrausEnsemble apply_loss(const TwoModeState &in, double eta) {
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw InvalidArgument("eta must lie in (0, 1]");
    }
    KrausEnsemble out;
    const double total = in.norm2();
    if (!(total > 0.0)) {
        throw DegenerateState("cannot apply loss to a zero state");
    }
    if (eta == 1.0) {
        TwoModeState s = in;
        for (auto &z : s.amps) {
            z /= std::sqrt(total);
        }
        out.branches.push_back({std::move(s), 1.0});
        return out;
    }
    const double le = std::log(eta), l1e = std::log1p(-eta);
    for (int l = 0; l <= in.cutoff_a; ++l) {
        TwoModeState s(in.cutoff_a, in.cutoff_b);
        s.norm_weight = in.norm_weight;
        for (int j = l; j <= in.cutoff_a; ++j) {
            const double lf = 0.5 * (detail::log_factorial(j) - detail::log_factorial(l) -
                                     detail::log_factorial(j - l) + (j - l) * le + l * l1e);
            const double f = std::exp(lf);
            for (int k = 0; k <= in.cutoff_b; ++k) {
                s.at(j - l, k) = f * in.at(j, k);
            }
        }
        const double w = s.norm2();
        if (w <= 0.0) {
            continue;
        }
        for (auto &z : s.amps) {
            z /= std::sqrt(w);
        }
        out.branches.push_back({std::move(s), w / total});
    }
    if (out.trace() > 1.0 + 1e-9) {
        throw NumericalConsistency("Kraus ensemble trace exceeds one");
    }
    return out;
}

/// Observables on the output (or any) two-mode state, all for mode a unless
/// stated otherwise.
enum class Observable { Na1, Na2, Na3, Na4, Xa, Xa2, Ntotal };

/// Unnormalized <a^dag^x1 a^y1 b^dag^x2 b^y2>.
inline cplx normal_moment(const TwoModeState &s, int x1, int y1, int x2, int y2) {
    // a^y1 b^y2 |j, k> ~ |j - y1, k - y2>, which must match a^x1 b^x2 |j', k'>.
    cplx acc{};
    for (int j = y1; j <= s.cutoff_a; ++j) {
        const int jp = j - y1 + x1;
        if (jp > s.cutoff_a) {
            continue;
        }
        const double fa = detail::ladder(j, y1) * detail::ladder(jp, x1);
        for (int k = y2; k <= s.cutoff_b; ++k) {
            const int kp = k - y2 + x2;
            if (kp > s.cutoff_b) {
                continue;
            }
            const cplx v = s.at(j, k);
            if (v == cplx{}) {
                continue;
            }
            acc += std::conj(s.at(jp, kp)) * v * (fa * detail::ladder(k, y2) * detail::ladder(kp, x2));
        }
    }
    return acc;
}

/// Unnormalized <e^{2 i t phi n_a} a^t b^dag^q b^s>.
inline cplx kerr_moment(const TwoModeState &s, double phi, int t, int q, int sb) {
    // <psi| e^{2 i t phi n} O |psi>: the bra index is j - t after O acts.
    cplx acc{};
    for (int j = t; j <= s.cutoff_a; ++j) {
        const int jp = j - t;
        const cplx rot = std::polar(1.0, 2.0 * t * phi * jp) * detail::ladder(j, t);
        for (int k = sb; k <= s.cutoff_b; ++k) {
            const int kp = k - sb + q;
            if (kp > s.cutoff_b) {
                continue;
            }
            const cplx v = s.at(j, k);
            if (v == cplx{}) {
                continue;
            }
            acc += std::conj(s.at(jp, kp)) * rot * v * (detail::ladder(k, sb) * detail::ladder(kp, q));
        }
    }
    return acc;
}

/// Normalized expectation value on a pure state.
inline double measure(const TwoModeState &s, Observable o) {
    const double nn = s.norm2();
    if (!(nn > 0.0)) {
        throw DegenerateState("cannot measure a zero state");
    }
    double acc = 0.0;
    switch (o) {
    case Observable::Na1:
    case Observable::Na2:
    case Observable::Na3:
    case Observable::Na4: {
        const int p = static_cast<int>(o) - static_cast<int>(Observable::Na1) + 1;
        for (int j = 0; j <= s.cutoff_a; ++j) {
            double w = 0.0;
            for (int k = 0; k <= s.cutoff_b; ++k) {
                w += std::norm(s.at(j, k));
            }
            acc += w * std::pow(static_cast<double>(j), p);
        }
        return acc / nn;
    }
    case Observable::Ntotal:
        for (int j = 0; j <= s.cutoff_a; ++j) {
            for (int k = 0; k <= s.cutoff_b; ++k) {
                acc += std::norm(s.at(j, k)) * (j + k);
            }
        }
        return acc / nn;
    case Observable::Xa: {
        const cplx a = normal_moment(s, 0, 1, 0, 0) / nn;
        return std::numbers::sqrt2 * a.real();
    }
    case Observable::Xa2: {
        const cplx a2 = normal_moment(s, 0, 2, 0, 0) / nn;
        const cplx n = normal_moment(s, 1, 1, 0, 0) / nn;
        return a2.real() + checked_real(n, "<n_a>") + 0.5;
    }
    }
    throw InvalidArgument("unknown observable");
}

/// Weighted expectation value over the Kraus branches.
inline double measure(const KrausEnsemble &e, Observable o) {
    double acc = 0.0;
    for (const auto &b : e.branches) {
        acc += b.weight * measure(b.state, o);
    }
    return acc;
}

/// Where the oracle evaluates the beam splitter.
enum class BsRoute {
    Exact,      ///< shell matrices in the Schroedinger picture
    Heisenberg, ///< a_out = (a - i b)/sqrt(2) evaluated on the pre-splitter state
};

/// Oracle truncation policy. fixed_cutoff > 0 pins the cutoff; otherwise the
/// default estimate is doubled until every reported quantity changes by less
/// than rel_tol.
struct CutoffPolicy {
    int fixed_cutoff = 0;
    double rel_tol = 1e-8;
    int max_cutoff = 640;
    BsRoute route = BsRoute::Exact;
};

/// Everything the oracle reports for one configuration.
struct OracleMoments {
    double mean_x = 0.0;   ///< <X_a> on the output
    double second_x = 0.0; ///< <X_a^2> on the output
    double n1 = 0, n2 = 0, n3 = 0, n4 = 0; ///< pre-splitter n_a moments (before loss)
    double mean_photons = 0.0; ///< <n_a + n_b> before loss
    double lambda2 = 1.0;
    int cutoff = 0;
};

/// ceil((|alpha|^2 + 2 sinh^2 g + 3 sqrt(|alpha|^2 + 2 sinh^2 g + 1) + m + n) * 1.5) + 10.
inline int default_cutoff(const InterferometerConfig &cfg) {
    const double s2 = std::sinh(cfg.g) * std::sinh(cfg.g);
    const double mean = cfg.alpha_mag * cfg.alpha_mag + 2.0 * s2;
    return static_cast<int>(std::ceil((mean + 3.0 * std::sqrt(mean + 1.0) + cfg.m + cfg.n) * 1.5)) +
           10;
}

/// Input, squeezer and subtraction at a single cutoff (both modes).
inline TwoModeState post_subtraction_state(const InterferometerConfig &cfg, int cutoff) {
    cfg.validate();
    auto s = prepare_input(cfg.alpha(), cutoff, cutoff);
    s = apply_opa(s, cfg.g, cfg.theta);
    return subtract_photons(s, cfg.m, cfg.n);
}

/// Loss branches of a state, generated one at a time so that large cutoffs
/// never hold the full ensemble in memory. fn(normalized branch, weight).
template <class F> void for_each_loss_branch(const TwoModeState &in, double eta, F &&fn) {
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw InvalidArgument("eta must lie in (0, 1]");
    }
    const double total = in.norm2();
    if (!(total > 0.0)) {
        throw DegenerateState("cannot apply loss to a zero state");
    }
    const double le = std::log(eta);
    const double l1e = eta == 1.0 ? -INFINITY : std::log1p(-eta);
    const int lmax = eta == 1.0 ? 0 : in.cutoff_a;
    for (int l = 0; l <= lmax; ++l) {
        TwoModeState s(in.cutoff_a, in.cutoff_b);
        s.norm_weight = in.norm_weight;
        for (int j = l; j <= in.cutoff_a; ++j) {
            const double lf =
                0.5 * (detail::log_factorial(j) - detail::log_factorial(l) -
                       detail::log_factorial(j - l) + (j - l) * le + (l == 0 ? 0.0 : l * l1e));
            const double f = std::exp(lf);
            for (int k = 0; k <= in.cutoff_b; ++k) {
                s.at(j - l, k) = f * in.at(j, k);
            }
        }
        const double w = s.norm2();
        if (w <= kNegligibleShell * total) {
            continue;
        }
        const double inv = 1.0 / std::sqrt(w);
        for (auto &z : s.amps) {
            z *= inv;
        }
        fn(s, w / total);
    }
}

/// Moments of a mixed pre-splitter state resolved by the mode-a Fock index,
/// so that the output homodyne moments for a phase exp(i phi n_a^k) cost O(cutoff).
///
/// With f(j) = j^k, a phase multiplies psi[j][.] by e^{i phi f(j)}; every
/// moment that changes the mode-a index by d picks up e^{i phi (f(j) - f(j-d))}
/// term by term.
class PhaseResolvedMoments {
  public:
    PhaseResolvedMoments() = default;
    PhaseResolvedMoments(int cutoff_a, int k)
        : k_(k), a1_(cutoff_a + 1), a2_(cutoff_a + 1), ab_(cutoff_a + 1), adb_(cutoff_a + 1) {
        (void)scheme_from_int(k);
    }

    /// Adds weight * (moments of the normalized state s).
    void accumulate(const TwoModeState &s, double weight) {
        const double w = weight / s.norm2();
        for (int j = 0; j <= s.cutoff_a; ++j) {
            const double sj = std::sqrt(static_cast<double>(j));
            const double sj1 = std::sqrt(static_cast<double>(j + 1));
            const double sjj = std::sqrt(static_cast<double>(j) * (j - 1));
            cplx a1{}, a2{}, ab{}, adb{}, b1{}, b2{};
            double na = 0.0, nb = 0.0;
            for (int k = 0; k <= s.cutoff_b; ++k) {
                const cplx v = s.at(j, k);
                const double sk = std::sqrt(static_cast<double>(k));
                na += j * std::norm(v);
                nb += k * std::norm(v);
                if (j >= 1) {
                    a1 += std::conj(s.at(j - 1, k)) * sj * v;
                }
                if (j >= 2) {
                    a2 += std::conj(s.at(j - 2, k)) * sjj * v;
                }
                if (k >= 1) {
                    b1 += std::conj(s.at(j, k - 1)) * sk * v;
                    if (j >= 1) {
                        ab += std::conj(s.at(j - 1, k - 1)) * sj * sk * v;
                    }
                    if (j + 1 <= s.cutoff_a) {
                        adb += std::conj(s.at(j + 1, k - 1)) * sj1 * sk * v;
                    }
                }
                if (k >= 2) {
                    b2 += std::conj(s.at(j, k - 2)) * std::sqrt(static_cast<double>(k) * (k - 1)) * v;
                }
            }
            a1_[j] += w * a1;
            a2_[j] += w * a2;
            ab_[j] += w * ab;
            adb_[j] += w * adb;
            b1_ += w * b1;
            b2_ += w * b2;
            na_ += w * na;
            nb_ += w * nb;
        }
    }

    /// <X_a>, <X_a^2> on the output mode a_out = (a - i b)/sqrt(2).
    [[nodiscard]] HomodyneMoments homodyne(double phi) const {
        using namespace std::complex_literals;
        auto f = [&](int j) { return k_ == 1 ? double(j) : double(j) * j; };
        auto ph = [&](int j, int d) { return std::polar(1.0, phi * (f(j) - f(j - d))); };
        cplx a{}, aa{}, ab{}, adb{};
        for (int j = 0; j < static_cast<int>(a1_.size()); ++j) {
            if (j >= 1) {
                a += a1_[j] * ph(j, 1);
                ab += ab_[j] * ph(j, 1);
            }
            if (j >= 2) {
                aa += a2_[j] * ph(j, 2);
            }
            adb += adb_[j] * ph(j, -1);
        }
        const cplx aout = (a - 1i * b1_) / std::numbers::sqrt2;
        const cplx aout2 = 0.5 * (aa - 2.0i * ab - b2_);
        const cplx nout = 0.5 * (na_ + nb_ - 1i * adb + 1i * std::conj(adb));
        return {std::numbers::sqrt2 * aout.real(),
                aout2.real() + checked_real(nout, "<n_out>") + 0.5};
    }

  private:
    int k_ = 1;
    std::vector<cplx> a1_, a2_, ab_, adb_;
    cplx b1_{}, b2_{};
    double na_ = 0.0, nb_ = 0.0;
};

namespace detail {

inline OracleMoments run_once(const InterferometerConfig &cfg, int cutoff, BsRoute route) {
    OracleMoments r;
    r.cutoff = cutoff;
    const auto post = post_subtraction_state(cfg, cutoff);
    r.lambda2 = 1.0 / post.norm_weight;
    r.n1 = measure(post, Observable::Na1);
    r.n2 = measure(post, Observable::Na2);
    r.n3 = measure(post, Observable::Na3);
    r.n4 = measure(post, Observable::Na4);
    r.mean_photons = measure(post, Observable::Ntotal);

    const int k = exponent(cfg.scheme);
    if (route == BsRoute::Heisenberg) {
        PhaseResolvedMoments prm(cutoff, k);
        for_each_loss_branch(post, cfg.eta,
                             [&](const TwoModeState &b, double w) { prm.accumulate(b, w); });
        const auto h = prm.homodyne(cfg.phi);
        r.mean_x = h.mean;
        r.second_x = h.second;
        return r;
    }
    for_each_loss_branch(post, cfg.eta, [&](const TwoModeState &b, double w) {
        const auto out = apply_bs(apply_phase(b, cfg.phi, k));
        r.mean_x += w * measure(out, Observable::Xa);
        r.second_x += w * measure(out, Observable::Xa2);
    });
    return r;
}

inline bool close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1.0});
}

inline bool agree(const OracleMoments &a, const OracleMoments &b, double tol) {
    return close(a.mean_x, b.mean_x, tol) && close(a.second_x, b.second_x, tol) &&
           close(a.n1, b.n1, tol) && close(a.n2, b.n2, tol) && close(a.n3, b.n3, tol) &&
           close(a.n4, b.n4, tol) && close(a.mean_photons, b.mean_photons, tol) &&
           close(a.lambda2, b.lambda2, tol);
}

/// Runs f(cutoff) under the doubling policy and returns the converged result.
template <class F, class Agree>
auto converge(const CutoffPolicy &policy, int start, F &&f, Agree &&same) {
    if (policy.fixed_cutoff > 0) {
        return f(policy.fixed_cutoff);
    }
    int c = start;
    decltype(f(c)) prev;
    for (;;) {
        try {
            prev = f(c);
            break;
        } catch (const CutoffError &e) {
            c = std::max(2 * c, e.suggested_cutoff);
            if (c > policy.max_cutoff) {
                throw;
            }
        }
    }
    for (;;) {
        const int next = 2 * c;
        if (next > policy.max_cutoff) {
            throw CutoffError("oracle did not converge below the maximum cutoff", next);
        }
        auto cur = f(next);
        if (same(prev, cur)) {
            return cur;
        }
        prev = std::move(cur);
        c = next;
    }
}

} // namespace detail

/// Full Fock-space evaluation of the interferometer.
inline OracleMoments pipeline(const InterferometerConfig &cfg, const CutoffPolicy &policy = {}) {
    cfg.validate();
    return detail::converge(
        policy, default_cutoff(cfg),
        [&](int c) { return detail::run_once(cfg, c, policy.route); },
        [&](const OracleMoments &a, const OracleMoments &b) {
            return detail::agree(a, b, policy.rel_tol);
        });
}

/// Lossy homodyne moments for many phases. The post-loss mixture is reduced
/// once to phase-resolved moments; each phase then costs O(cutoff).
class LossyHomodyneOracle {
  public:
    explicit LossyHomodyneOracle(const InterferometerConfig &cfg, const CutoffPolicy &policy = {})
        : cfg_(cfg) {
        cfg.validate();
        const int k = exponent(cfg.scheme);
        auto build = [&](int c) {
            PhaseResolvedMoments prm(c, k);
            for_each_loss_branch(post_subtraction_state(cfg, c), cfg.eta,
                                 [&](const TwoModeState &b, double w) { prm.accumulate(b, w); });
            return std::make_pair(c, prm);
        };
        auto same = [&](const auto &a, const auto &b) {
            const auto pa = a.second.homodyne(cfg.phi), pb = b.second.homodyne(cfg.phi);
            return detail::close(pa.mean, pb.mean, policy.rel_tol) &&
                   detail::close(pa.second, pb.second, policy.rel_tol);
        };
        auto res = detail::converge(policy, default_cutoff(cfg), build, same);
        cutoff_ = res.first;
        moments_ = std::move(res.second);
    }

    [[nodiscard]] HomodyneMoments moments(double phi) const { return moments_.homodyne(phi); }
    [[nodiscard]] double mean(double phi) const { return moments(phi).mean; }
    [[nodiscard]] const InterferometerConfig &config() const { return cfg_; }
    [[nodiscard]] int cutoff() const { return cutoff_; }

  private:
    InterferometerConfig cfg_;
    int cutoff_ = 0;
    PhaseResolvedMoments moments_;
};

} // namespace him::fock
