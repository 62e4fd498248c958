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
 * Dense multivariate truncated power series ("jets") with complex
 * coefficients.
 *
 * A polynomial over V variables carries a per-variable degree cap; every
 * monomial with some exponent above its cap is discarded. Inside the cap box
 * addition, multiplication and exponentiation are exact, which is what makes
 * mixed partial derivatives of exponential generating functions at the origin
 * available as plain coefficient lookups:
 *
 *     d^{k_1 + ... + k_V} f / dx_1^{k_1} ... dx_V^{k_V} (0)
 *         = coeff[k_1, ..., k_V] * k_1! * ... * k_V!
 *
 * Storage is row-major over the box prod(caps[i] + 1); a variable with cap 0
 * contributes a factor of one to the storage size.
 */

#pragma once

#include <algorithm>
#include <array>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace him::jet {

/// Differentiation orders, one entry per variable.
struct MultiIndex {
    std::vector<int> orders;

    MultiIndex() = default;
    MultiIndex(std::initializer_list<int> init) : orders(init) {}
    explicit MultiIndex(std::vector<int> v) : orders(std::move(v)) {}

    [[nodiscard]] std::size_t size() const { return orders.size(); }
    int operator[](std::size_t i) const { return orders[i]; }
    friend bool operator==(const MultiIndex &, const MultiIndex &) = default;
};

namespace detail {

inline constexpr int kMaxExactFactorial = 34;

__extension__ using uint128 = unsigned __int128;

/// n! for n <= 34, held exactly in 128 bits.
inline constexpr auto exact_factorials = [] {
    std::array<uint128, kMaxExactFactorial + 1> f{};
    f[0] = 1;
    for (int n = 1; n <= kMaxExactFactorial; ++n) {
        f[n] = f[n - 1] * static_cast<uint128>(n);
    }
    return f;
}();

template <class Real> Real factorial(int n) {
    if (n < 0 || n > kMaxExactFactorial) {
        throw InvalidArgument("factorial order " + std::to_string(n) +
                              " outside the exact table");
    }
    return static_cast<Real>(exact_factorials[static_cast<std::size_t>(n)]);
}

} // namespace detail

template <class Complex = std::complex<double>> class TruncatedPolynomial {
  public:
    using complex_type = Complex;
    using real_type = typename Complex::value_type;

    TruncatedPolynomial() = default;

    /// Zero polynomial over the given cap box.
    explicit TruncatedPolynomial(std::vector<int> caps) : caps_(std::move(caps)) {
        for (int c : caps_) {
            if (c < 0) {
                throw InvalidArgument("negative degree cap");
            }
        }
        strides_.assign(caps_.size(), 1);
        std::size_t total = 1;
        for (std::size_t i = caps_.size(); i-- > 0;) {
            strides_[i] = total;
            total *= static_cast<std::size_t>(caps_[i]) + 1;
        }
        coeffs_.assign(total, Complex{});
    }

    /// Polynomial with exactly the listed coefficients (repeated indices add).
    static TruncatedPolynomial
    build(std::vector<int> caps,
          std::span<const std::pair<MultiIndex, Complex>> terms) {
        TruncatedPolynomial p(std::move(caps));
        for (const auto &[idx, value] : terms) {
            p.coeffs_[p.flat_index(idx)] += value;
        }
        return p;
    }

    static TruncatedPolynomial
    build(std::vector<int> caps,
          std::initializer_list<std::pair<MultiIndex, Complex>> terms) {
        return build(std::move(caps),
                     std::span<const std::pair<MultiIndex, Complex>>(
                         terms.begin(), terms.size()));
    }

    static TruncatedPolynomial constant(std::vector<int> caps, Complex value) {
        TruncatedPolynomial p(std::move(caps));
        p.coeffs_[0] = value;
        return p;
    }

    /// The monomial x_i; the zero polynomial when caps[i] == 0.
    static TruncatedPolynomial variable(std::vector<int> caps, std::size_t i) {
        TruncatedPolynomial p(std::move(caps));
        if (i >= p.caps_.size()) {
            throw InvalidArgument("variable index out of range");
        }
        if (p.caps_[i] > 0) {
            p.coeffs_[p.strides_[i]] = Complex{1};
        }
        return p;
    }

    [[nodiscard]] std::size_t var_count() const { return caps_.size(); }
    [[nodiscard]] const std::vector<int> &caps() const { return caps_; }
    [[nodiscard]] std::span<const Complex> coeffs() const { return coeffs_; }
    [[nodiscard]] std::size_t size() const { return coeffs_.size(); }

    [[nodiscard]] bool in_box(const MultiIndex &idx) const {
        if (idx.size() != caps_.size()) {
            return false;
        }
        for (std::size_t i = 0; i < caps_.size(); ++i) {
            if (idx[i] < 0 || idx[i] > caps_[i]) {
                return false;
            }
        }
        return true;
    }

    [[nodiscard]] std::size_t flat_index(const MultiIndex &idx) const {
        if (!in_box(idx)) {
            throw InvalidArgument("multi-index outside the cap box");
        }
        std::size_t flat = 0;
        for (std::size_t i = 0; i < caps_.size(); ++i) {
            flat += static_cast<std::size_t>(idx[i]) * strides_[i];
        }
        return flat;
    }

    [[nodiscard]] Complex coeff(const MultiIndex &idx) const {
        return coeffs_[flat_index(idx)];
    }
    void set_coeff(const MultiIndex &idx, Complex value) {
        coeffs_[flat_index(idx)] = value;
    }
    [[nodiscard]] Complex constant_term() const { return coeffs_.at(0); }

    TruncatedPolynomial &operator+=(const TruncatedPolynomial &o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            coeffs_[i] += o.coeffs_[i];
        }
        return *this;
    }
    TruncatedPolynomial &operator-=(const TruncatedPolynomial &o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            coeffs_[i] -= o.coeffs_[i];
        }
        return *this;
    }
    TruncatedPolynomial &operator+=(Complex c) {
        coeffs_.at(0) += c;
        return *this;
    }
    TruncatedPolynomial &operator*=(Complex c) {
        for (auto &x : coeffs_) {
            x *= c;
        }
        return *this;
    }

    friend TruncatedPolynomial operator+(TruncatedPolynomial a,
                                         const TruncatedPolynomial &b) {
        return a += b;
    }
    friend TruncatedPolynomial operator-(TruncatedPolynomial a,
                                         const TruncatedPolynomial &b) {
        return a -= b;
    }
    friend TruncatedPolynomial operator+(TruncatedPolynomial a, Complex c) {
        return a += c;
    }
    friend TruncatedPolynomial operator*(TruncatedPolynomial a, Complex c) {
        return a *= c;
    }
    friend TruncatedPolynomial operator*(Complex c, TruncatedPolynomial a) {
        return a *= c;
    }
    friend TruncatedPolynomial operator*(const TruncatedPolynomial &a,
                                         const TruncatedPolynomial &b) {
        return multiply(a, b);
    }

    /// Truncated product. Only nonzero coefficients are visited, so a dense
    /// operand times a low-degree kernel costs size() * nnz(kernel).
    static TruncatedPolynomial multiply(const TruncatedPolynomial &a,
                                        const TruncatedPolynomial &b) {
        a.require_same_shape(b);
        const auto na = a.nonzeros();
        const auto nb = b.nonzeros();
        TruncatedPolynomial out(a.caps_);
        const std::size_t v = a.caps_.size();
        for (const auto &ea : na) {
            for (const auto &eb : nb) {
                bool inside = true;
                for (std::size_t i = 0; i < v; ++i) {
                    if (ea.digits[i] + eb.digits[i] > a.caps_[i]) {
                        inside = false;
                        break;
                    }
                }
                if (inside) {
                    out.coeffs_[ea.flat + eb.flat] += ea.value * eb.value;
                }
            }
        }
        return out;
    }

    /// exp(p) for p with zero constant term, summed to order sum(caps).
    [[nodiscard]] TruncatedPolynomial exp() const {
        if (coeffs_.at(0) != Complex{}) {
            throw InvalidArgument(
                "exp requires a zero constant term; factor it out first");
        }
        const int order = std::accumulate(caps_.begin(), caps_.end(), 0);
        TruncatedPolynomial result = constant(caps_, Complex{1});
        TruncatedPolynomial term = result;
        for (int j = 1; j <= order; ++j) {
            term = multiply(term, *this);
            term *= Complex{real_type{1} / static_cast<real_type>(j)};
            if (term.is_zero()) {
                break;
            }
            result += term;
        }
        return result;
    }

    /// Mixed partial derivative at the origin.
    [[nodiscard]] Complex derivative(const MultiIndex &orders) const {
        real_type scale{1};
        for (std::size_t i = 0; i < orders.size(); ++i) {
            scale *= detail::factorial<real_type>(orders[i]);
        }
        return coeff(orders) * scale;
    }

    /// Evaluate at a point, for finite-difference checks.
    [[nodiscard]] Complex evaluate(std::span<const Complex> point) const {
        if (point.size() != caps_.size()) {
            throw InvalidArgument("evaluation point has wrong dimension");
        }
        Complex total{};
        std::vector<int> digits(caps_.size(), 0);
        for (std::size_t flat = 0; flat < coeffs_.size(); ++flat) {
            decode(flat, digits);
            if (coeffs_[flat] == Complex{}) {
                continue;
            }
            Complex mono = coeffs_[flat];
            for (std::size_t i = 0; i < digits.size(); ++i) {
                for (int k = 0; k < digits[i]; ++k) {
                    mono *= point[i];
                }
            }
            total += mono;
        }
        return total;
    }

    [[nodiscard]] bool is_zero() const {
        return std::all_of(coeffs_.begin(), coeffs_.end(),
                           [](const Complex &c) { return c == Complex{}; });
    }

    /// Same coefficients re-embedded in a larger (or equal) cap box.
    [[nodiscard]] TruncatedPolynomial extended(std::vector<int> caps) const {
        if (caps.size() != caps_.size()) {
            throw InvalidArgument("cap extension changes the variable count");
        }
        for (std::size_t i = 0; i < caps.size(); ++i) {
            if (caps[i] < caps_[i]) {
                throw InvalidArgument("cap extension must not shrink a cap");
            }
        }
        TruncatedPolynomial out(std::move(caps));
        std::vector<int> digits(caps_.size(), 0);
        for (std::size_t flat = 0; flat < coeffs_.size(); ++flat) {
            decode(flat, digits);
            std::size_t dst = 0;
            for (std::size_t i = 0; i < digits.size(); ++i) {
                dst += static_cast<std::size_t>(digits[i]) * out.strides_[i];
            }
            out.coeffs_[dst] = coeffs_[flat];
        }
        return out;
    }

  private:
    struct Entry {
        std::size_t flat;
        std::vector<int> digits;
        Complex value;
    };

    void decode(std::size_t flat, std::vector<int> &digits) const {
        for (std::size_t i = 0; i < caps_.size(); ++i) {
            digits[i] = static_cast<int>(flat / strides_[i]);
            flat %= strides_[i];
        }
    }

    [[nodiscard]] std::vector<Entry> nonzeros() const {
        std::vector<Entry> out;
        std::vector<int> digits(caps_.size(), 0);
        for (std::size_t flat = 0; flat < coeffs_.size(); ++flat) {
            if (coeffs_[flat] == Complex{}) {
                continue;
            }
            decode(flat, digits);
            out.push_back({flat, digits, coeffs_[flat]});
        }
        return out;
    }

    void require_same_shape(const TruncatedPolynomial &o) const {
        if (caps_ != o.caps_) {
            throw InvalidArgument("polynomials have different variables or caps");
        }
    }

    std::vector<int> caps_;
    std::vector<std::size_t> strides_;
    std::vector<Complex> coeffs_;
};

using Polynomial = TruncatedPolynomial<std::complex<double>>;
using PolynomialExt = TruncatedPolynomial<std::complex<long double>>;

} // namespace him::jet
