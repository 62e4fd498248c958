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
 * Closed-form moments of the hybrid interferometer obtained by
 * differentiating exponential generating functions.
 *
 * Two kernels are provided.
 *
 * The Q kernel w4 over (l1, ..., l8) generates every normally ordered moment
 * <a^dag^x1 a^y1 b^dag^x2 b^y2> of the unnormalized post-subtraction state
 * a^m b^n S(xi)|alpha, 0>. The variables play the roles
 *
 *     l1, l5 -> a^dag      l2, l7 -> a      l3, l6 -> b^dag      l4, l8 -> b
 *
 * so Q_{mn,x1,y1,x2,y2} is the derivative of exp(w4) with orders
 * (m, y1, n, y2, x1, x2, m, n) on (l1, ..., l8).
 *
 * The D kernel g5 over (t1, tau1, t2, tau2, x1, x2, x3) generates the Kerr
 * moments <a^dag^m b^dag^n exp(2 i t phi n_a) a^t b^dag^q b^s a^m b^n> with
 * orders (m, n, m, n, t, q, s), multiplied by the scalar prefactor
 * 1 / (1 - (e^{2 i t phi} - 1) sinh^2 g).
 */

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "jet.hpp"

namespace him {

/// Imaginary parts below this (relative to 1 + |real part|) are roundoff.
inline constexpr double kImagResidueTol = 1e-9;

inline double checked_real(std::complex<double> z, const char *what) {
    if (std::abs(z.imag()) > kImagResidueTol * (1.0 + std::abs(z.real()))) {
        throw NumericalConsistency(std::string(what) +
                                   " has a non-negligible imaginary part (" +
                                   std::to_string(z.imag()) + ")");
    }
    return z.real();
}

namespace kernels {

template <class Real> struct OpaCoefficients {
    using C = std::complex<Real>;
    Real ch, sh, sh2;
    C alpha, alpha_c;
    C e_minus; // e^{-i theta}
    C e_plus;  // e^{+i theta}

    explicit OpaCoefficients(const InterferometerConfig &cfg)
        : ch(std::cosh(static_cast<Real>(cfg.g))),
          sh(std::sinh(static_cast<Real>(cfg.g))), sh2(sh * sh),
          alpha(std::polar(static_cast<Real>(cfg.alpha_mag),
                           static_cast<Real>(cfg.theta_alpha))),
          alpha_c(std::conj(alpha)),
          e_minus(std::polar(Real{1}, -static_cast<Real>(cfg.theta))),
          e_plus(std::polar(Real{1}, static_cast<Real>(cfg.theta))) {}
};

/// w4 = w1 alpha + w2 alpha^* + w3 over the eight lambda variables.
template <class Real = double>
jet::TruncatedPolynomial<std::complex<Real>>
q_kernel(const InterferometerConfig &cfg, const std::array<int, 8> &caps) {
    using C = std::complex<Real>;
    using Poly = jet::TruncatedPolynomial<C>;
    const std::vector<int> box(caps.begin(), caps.end());
    const OpaCoefficients<Real> k(cfg);
    auto var = [&](std::size_t i) { return Poly::variable(box, i); };

    const Poly s = var(0) + var(4); // a^dag
    const Poly r = var(1) + var(6); // a
    const Poly u = var(2) + var(5); // b^dag
    const Poly v = var(3) + var(7); // b

    const Poly w1 = r * C{k.ch} - u * (k.e_minus * k.sh);
    const Poly w2 = s * C{k.ch} - v * (k.e_plus * k.sh);
    const Poly w3 = (s * C{k.sh}) * (r * C{k.sh} - u * (k.e_minus * k.ch)) -
                    (v * (k.e_plus * k.sh)) * w1;
    return w1 * k.alpha + w2 * k.alpha_c + w3;
}

/// Pieces of the Kerr generating function for a given power t of a.
template <class Real = double> struct DKernel {
    jet::TruncatedPolynomial<std::complex<Real>> g5; ///< variable part only
    std::complex<Real> constant;  ///< g5 at the origin
    std::complex<Real> prefactor; ///< 1 / (1 - (e^{2 i t phi} - 1) sinh^2 g)
};

/// g5 = g1 + g2 + g3 + g4 with auxiliaries d1..d4.
///
/// The second term of the g3 numerator carries d4, i.e.
/// g3 = (d1 + d4 (e^{2 i t phi} - 1) cosh g)(d2 + d3) / (1 - (e^{2 i t phi} - 1) sinh^2 g).
template <class Real = double>
DKernel<Real> d_kernel(const InterferometerConfig &cfg, int t,
                       const std::array<int, 7> &caps) {
    using C = std::complex<Real>;
    using Poly = jet::TruncatedPolynomial<C>;
    const std::vector<int> box(caps.begin(), caps.end());
    const OpaCoefficients<Real> k(cfg);
    auto var = [&](std::size_t i) { return Poly::variable(box, i); };
    const Poly t1 = var(0), tau1 = var(1), t2 = var(2), tau2 = var(3);
    const Poly x1 = var(4), x2 = var(5), x3 = var(6);

    const C c = std::polar(Real{1}, static_cast<Real>(2 * t) *
                                        static_cast<Real>(cfg.phi)) -
                C{1};
    const C denom = C{1} - c * k.sh2;
    if (std::abs(denom) < Real{1e-300}) {
        throw NumericalConsistency("Kerr prefactor denominator vanishes");
    }
    const C pre = C{1} / denom;
    const Real sinh2g = std::sinh(Real{2} * static_cast<Real>(cfg.g));

    const Poly d1 = (t1 + x1) * (c * k.sh2);
    const Poly d2 = t2 * C{k.sh2} + k.alpha * k.ch;
    const Poly d3 = (x3 + tau1) * (C{Real{-0.5} * sinh2g} * k.e_plus);
    const Poly d4 = (x2 + tau2) * (-k.sh * k.e_minus) + k.alpha_c;

    const Poly g1 = (t1 * t2 + x1 * t2 + (x2 + tau2) * (x3 + tau1)) * C{k.sh2};
    const Poly g2 = (t1 + x1) * (k.alpha * k.ch) + C{-std::norm(k.alpha)};
    const Poly g3 = ((d1 + d4 * (c * k.ch)) * (d2 + d3)) * pre;
    const Poly g4 = d3 * (t1 + x1 + k.alpha_c / k.ch) + d4 * (t2 * C{k.ch} + k.alpha);

    DKernel<Real> out{g1 + g2 + g3 + g4, C{}, pre};
    out.constant = out.g5.constant_term();
    out.g5.set_coeff(jet::MultiIndex(std::vector<int>(7, 0)), C{});
    return out;
}

} // namespace kernels

/// All Q_{mn,x1,y1,x2,y2} with x1 <= max_x1 etc. from a single exponential.
template <class Real = double> class QMomentTable {
  public:
    using C = std::complex<Real>;

    QMomentTable(const InterferometerConfig &cfg, int max_x1, int max_y1,
                 int max_x2, int max_y2)
        : m_(cfg.m), n_(cfg.n), max_{max_x1, max_y1, max_x2, max_y2} {
        cfg.validate();
        for (int x : max_) {
            if (x < 0) {
                throw InvalidArgument("moment orders must be non-negative");
            }
        }
        const std::array<int, 8> caps{m_,      max_y1, n_, max_y2,
                                      max_x1, max_x2, m_, n_};
        table_ = kernels::q_kernel<Real>(cfg, caps).exp();
    }

    [[nodiscard]] C operator()(int x1, int y1, int x2, int y2) const {
        if (x1 > max_[0] || y1 > max_[1] || x2 > max_[2] || y2 > max_[3]) {
            throw InvalidArgument("moment order outside the table");
        }
        return table_.derivative(jet::MultiIndex{m_, y1, n_, y2, x1, x2, m_, n_});
    }

  private:
    int m_, n_;
    std::array<int, 4> max_;
    jet::TruncatedPolynomial<C> table_;
};

/// D_{mn,t,q,s} for one t and all q <= max_q, s <= max_s at the config's phi.
template <class Real = double> class KerrMomentTable {
  public:
    using C = std::complex<Real>;

    KerrMomentTable(const InterferometerConfig &cfg, int t, int max_q, int max_s)
        : m_(cfg.m), n_(cfg.n), t_(t), max_q_(max_q), max_s_(max_s) {
        cfg.validate();
        if (t < 0 || max_q < 0 || max_s < 0) {
            throw InvalidArgument("moment orders must be non-negative");
        }
        const std::array<int, 7> caps{m_, n_, m_, n_, t, max_q, max_s};
        auto kern = kernels::d_kernel<Real>(cfg, t, caps);
        table_ = kern.g5.exp();
        scale_ = kern.prefactor * std::exp(kern.constant);
    }

    [[nodiscard]] C operator()(int q, int s) const {
        if (q > max_q_ || s > max_s_) {
            throw InvalidArgument("moment order outside the table");
        }
        return scale_ *
               table_.derivative(jet::MultiIndex{m_, n_, m_, n_, t_, q, s});
    }

  private:
    int m_, n_, t_, max_q_, max_s_;
    jet::TruncatedPolynomial<C> table_;
    C scale_;
};

/// Unnormalized <a^dag^x1 a^y1 b^dag^x2 b^y2> on a^m b^n S(xi)|alpha,0>.
template <class Real = double>
std::complex<Real> q_value(const InterferometerConfig &cfg, int x1, int y1,
                           int x2, int y2) {
    return QMomentTable<Real>(cfg, x1, y1, x2, y2)(x1, y1, x2, y2);
}

/// Unnormalized Kerr moment D_{mn,t,q,s}; conjugated for the D^dag terms.
template <class Real = double>
std::complex<Real> d_value(const InterferometerConfig &cfg, int t, int q,
                           int s, bool conjugated = false) {
    if (cfg.scheme != Scheme::Kerr) {
        throw InvalidArgument("d_value is defined for the Kerr scheme only");
    }
    const auto v = KerrMomentTable<Real>(cfg, t, q, s)(q, s);
    return conjugated ? std::conj(v) : v;
}

/// lambda^2 = 1 / Q_{mn,0,0,0,0}.
inline double normalization(const InterferometerConfig &cfg) {
    const auto q0 = q_value(cfg, 0, 0, 0, 0);
    if (!(std::abs(q0) > 1e-300)) {
        throw DegenerateState("photon subtraction annihilates the state (" +
                              describe(cfg) + ")");
    }
    const double re = checked_real(q0, "Q_{mn,0,0,0,0}");
    if (re <= 0.0) {
        throw DegenerateState("non-positive state norm after subtraction");
    }
    return 1.0 / re;
}

/// <X_a> and <X_a^2> with X_a = (a + a^dag) / sqrt(2) on the output mode.
struct HomodyneMoments {
    double mean = 0.0;
    double second = 0.0;
    [[nodiscard]] double variance() const { return second - mean * mean; }
};

/// Photon-number moments of mode a on the normalized pre-beam-splitter state.
struct PhotonMoments {
    double n1 = 0.0, n2 = 0.0, n3 = 0.0, n4 = 0.0;
    double lambda2 = 1.0;
    [[nodiscard]] double var_n() const { return n2 - n1 * n1; }
    [[nodiscard]] double var_n2() const { return n4 - n2 * n2; }
};

/// Knobs for assembling the homodyne moments.
struct AssemblyOptions {
    /// Sign in front of i D_{mn,0,0,1} in <a + a^dag> for the Kerr scheme.
    /// -1 agrees with the Fock-space simulation; +1 reproduces the printed
    /// form and is kept only as a negative control.
    int kerr_b_sign = -1;
};

/// Scheme I: all Q moments needed for <X_a>, <X_a^2> are phi independent, so
/// they are computed once and the phase enters through explicit factors.
class LinearHomodyneModel {
  public:
    explicit LinearHomodyneModel(const InterferometerConfig &cfg)
        : cfg_(cfg), table_(cfg, 2, 2, 2, 2) {
        lambda2_ = normalization(cfg);
        const double se = std::sqrt(cfg.eta);
        // Loss ahead of a linear phase shifter scales normally ordered
        // mode-a moments by eta^{(x1 + y1) / 2}.
        auto q = [&](int x1, int y1, int x2, int y2) {
            return table_(x1, y1, x2, y2) * std::pow(se, x1 + y1);
        };
        q1000_ = q(1, 0, 0, 0), q0100_ = q(0, 1, 0, 0);
        q0010_ = q(0, 0, 1, 0), q0001_ = q(0, 0, 0, 1);
        q2000_ = q(2, 0, 0, 0), q0200_ = q(0, 2, 0, 0);
        q0020_ = q(0, 0, 2, 0), q0002_ = q(0, 0, 0, 2);
        q1010_ = q(1, 0, 1, 0), q0101_ = q(0, 1, 0, 1);
        q1001_ = q(1, 0, 0, 1), q0110_ = q(0, 1, 1, 0);
        q1100_ = q(1, 1, 0, 0), q0011_ = q(0, 0, 1, 1);
        q0000_ = q(0, 0, 0, 0);
    }

    /// <a + a^dag> on the output mode.
    [[nodiscard]] std::complex<double> quad_sum(double phi) const {
        using namespace std::complex_literals;
        const auto em = std::polar(1.0, -phi), ep = std::polar(1.0, phi);
        return lambda2_ / std::numbers::sqrt2 *
               (em * q1000_ + 1i * q0010_ + ep * q0100_ - 1i * q0001_);
    }

    /// <(a + a^dag)^2> on the output mode.
    [[nodiscard]] std::complex<double> quad_sum_sq(double phi) const {
        using namespace std::complex_literals;
        const auto em = std::polar(1.0, -phi), ep = std::polar(1.0, phi);
        const auto em2 = std::polar(1.0, -2 * phi), ep2 = std::polar(1.0, 2 * phi);
        return lambda2_ *
               (0.5 * em2 * q2000_ - 0.5 * q0020_ + 1i * em * q1010_ +
                0.5 * ep2 * q0200_ - 0.5 * q0002_ - 1i * ep * q0101_ + q1100_ -
                1i * em * q1001_ + 1i * ep * q0110_ + q0011_ + q0000_);
    }

    [[nodiscard]] HomodyneMoments moments(double phi) const {
        return {checked_real(quad_sum(phi), "<X_a>") / std::numbers::sqrt2,
                checked_real(quad_sum_sq(phi), "<X_a^2>") / 2.0};
    }

    /// d<X_a>/dphi from the explicit e^{+-i phi} factors.
    [[nodiscard]] double slope(double phi) const {
        using namespace std::complex_literals;
        const auto em = std::polar(1.0, -phi), ep = std::polar(1.0, phi);
        const auto d = lambda2_ / std::numbers::sqrt2 *
                       (-1i * em * q1000_ + 1i * ep * q0100_);
        return checked_real(d, "d<X_a>/dphi") / std::numbers::sqrt2;
    }

    [[nodiscard]] double lambda2() const { return lambda2_; }
    [[nodiscard]] const InterferometerConfig &config() const { return cfg_; }

  private:
    InterferometerConfig cfg_;
    QMomentTable<double> table_;
    double lambda2_ = 1.0;
    std::complex<double> q1000_, q0100_, q0010_, q0001_, q2000_, q0200_,
        q0020_, q0002_, q1010_, q0101_, q1001_, q0110_, q1100_, q0011_,
        q0000_;
};

/// Scheme II: the phi-independent pieces (t = 0 moments, lambda^2) are cached;
/// the t = 1, 2 Kerr moments are rebuilt for every phase.
class KerrHomodyneModel {
  public:
    explicit KerrHomodyneModel(const InterferometerConfig &cfg,
                               AssemblyOptions opts = {})
        : cfg_(cfg), opts_(opts) {
        if (cfg.scheme != Scheme::Kerr) {
            throw InvalidArgument("KerrHomodyneModel needs the Kerr scheme");
        }
        if (!cfg.lossless()) {
            throw RoutedToOracle(
                "lossy Kerr homodyne moments are evaluated by the Fock-space "
                "simulator");
        }
        lambda2_ = normalization(cfg);
        const KerrMomentTable<double> t0(cfg.with_phi(0.0), 0, 2, 2);
        d010_ = t0(1, 0), d001_ = t0(0, 1), d020_ = t0(2, 0), d002_ = t0(0, 2);
        const QMomentTable<double> q(cfg, 1, 1, 1, 1);
        q1100_ = q(1, 1, 0, 0), q0011_ = q(0, 0, 1, 1), q0000_ = q(0, 0, 0, 0);
    }

    [[nodiscard]] std::complex<double> quad_sum(double phi) const {
        using namespace std::complex_literals;
        const KerrMomentTable<double> t1(cfg_.with_phi(phi), 1, 0, 0);
        const auto d100 = t1(0, 0);
        const auto em = std::polar(1.0, -phi), ep = std::polar(1.0, phi);
        return lambda2_ / std::numbers::sqrt2 *
               (em * std::conj(d100) + 1i * d010_ + ep * d100 +
                static_cast<double>(opts_.kerr_b_sign) * 1i * d001_);
    }

    [[nodiscard]] std::complex<double> quad_sum_sq(double phi) const {
        using namespace std::complex_literals;
        const auto c = cfg_.with_phi(phi);
        const KerrMomentTable<double> t1(c, 1, 1, 1);
        const KerrMomentTable<double> t2(c, 2, 0, 0);
        const auto d200 = t2(0, 0), d101 = t1(0, 1), d110 = t1(1, 0);
        const auto em = std::polar(1.0, -phi), ep = std::polar(1.0, phi);
        const auto em4 = std::polar(1.0, -4 * phi), ep4 = std::polar(1.0, 4 * phi);
        return lambda2_ *
               (0.5 * em4 * std::conj(d200) + 1i * em * std::conj(d101) -
                0.5 * d020_ + 0.5 * ep4 * d200 - 1i * ep * d101 - 0.5 * d002_ +
                q1100_ - 1i * em * std::conj(d110) + 1i * ep * d110 + q0011_ +
                q0000_);
    }

    [[nodiscard]] double mean(double phi) const {
        return checked_real(quad_sum(phi), "<X_a>") / std::numbers::sqrt2;
    }

    [[nodiscard]] HomodyneMoments moments(double phi) const {
        return {mean(phi), checked_real(quad_sum_sq(phi), "<X_a^2>") / 2.0};
    }

    [[nodiscard]] double lambda2() const { return lambda2_; }
    [[nodiscard]] const InterferometerConfig &config() const { return cfg_; }

  private:
    InterferometerConfig cfg_;
    AssemblyOptions opts_;
    double lambda2_ = 1.0;
    std::complex<double> d010_, d001_, d020_, d002_, q1100_, q0011_, q0000_;
};

/// <X_a>, <X_a^2> after the beam splitter.
///
/// Lossy Kerr configurations throw RoutedToOracle; use the Fock-space
/// simulator for those.
inline HomodyneMoments homodyne_moments(const InterferometerConfig &cfg,
                                        AssemblyOptions opts = {}) {
    cfg.validate();
    if (cfg.scheme == Scheme::Linear) {
        return LinearHomodyneModel(cfg).moments(cfg.phi);
    }
    return KerrHomodyneModel(cfg, opts).moments(cfg.phi);
}

/// n_a moments of the pre-beam-splitter state; independent of phi and eta.
inline PhotonMoments photon_moments(const InterferometerConfig &cfg) {
    cfg.validate();
    const QMomentTable<double> t(cfg, 4, 4, 0, 0);
    const auto q0 = t(0, 0, 0, 0);
    if (!(std::abs(q0) > 1e-300)) {
        throw DegenerateState("photon subtraction annihilates the state (" +
                              describe(cfg) + ")");
    }
    const double l2 = 1.0 / checked_real(q0, "Q_{mn,0,0,0,0}");
    std::array<double, 5> fm{};
    for (int j = 1; j <= 4; ++j) {
        fm[j] = l2 * checked_real(t(j, j, 0, 0), "factorial moment");
    }
    PhotonMoments pm;
    pm.lambda2 = l2;
    pm.n1 = fm[1];
    pm.n2 = fm[2] + fm[1];
    pm.n3 = fm[3] + 3 * fm[2] + fm[1];
    pm.n4 = fm[4] + 6 * fm[3] + 7 * fm[2] + fm[1];

    const double tol = 1e-9;
    if (pm.n1 < -tol * (1 + pm.n2) || pm.var_n() < -tol * (1 + pm.n2) ||
        pm.var_n2() < -tol * (1 + pm.n4)) {
        throw NumericalConsistency("photon-number moments violate positivity (" +
                                   describe(cfg) + ")");
    }
    return pm;
}

/// N = lambda^2 (Q_{mn,1,1,0,0} + Q_{mn,0,0,1,1}).
inline double mean_photon_number(const InterferometerConfig &cfg) {
    cfg.validate();
    const QMomentTable<double> t(cfg, 1, 1, 1, 1);
    const auto q0 = t(0, 0, 0, 0);
    if (!(std::abs(q0) > 1e-300)) {
        throw DegenerateState("photon subtraction annihilates the state (" +
                              describe(cfg) + ")");
    }
    const double l2 = 1.0 / checked_real(q0, "Q_{mn,0,0,0,0}");
    return l2 * checked_real(t(1, 1, 0, 0) + t(0, 0, 1, 1), "N");
}

} // namespace him
