#pragma once

// Truncated eigenbasis representation of V -> H -> V*. Coordinate i of a
// StateVector is the coefficient against the i-th eigenvector of A, so the
// H norm is Euclidean and the V / V* norms are diagonal reweightings.

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spdelab/errors.hpp"

namespace spdelab {

inline constexpr double kBallSlack = 1e-12;

class Spectrum {
public:
    explicit Spectrum(std::vector<double> eigenvalues) : eigenvalues_(std::move(eigenvalues)) {
        if (eigenvalues_.empty()) throw Error("Spectrum: need at least one eigenvalue");
        for (std::size_t i = 0; i < eigenvalues_.size(); ++i) {
            const double v = eigenvalues_[i];
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw Error("Spectrum: eigenvalue " + std::to_string(i + 1) + " is not a positive finite number");
            }
            if (i > 0 && v < eigenvalues_[i - 1]) {
                throw Error("Spectrum: eigenvalues must be non-decreasing (index " + std::to_string(i + 1) + ")");
            }
        }
    }

    // lambda_i = scale * i^exponent, i = 1..M.
    static Spectrum power_law(std::size_t size, double scale, double exponent) {
        std::vector<double> ev(size);
        for (std::size_t i = 0; i < size; ++i) ev[i] = scale * std::pow(static_cast<double>(i + 1), exponent);
        return Spectrum(std::move(ev));
    }

    std::size_t size() const noexcept { return eigenvalues_.size(); }
    double operator[](std::size_t i) const { return eigenvalues_[i]; }
    // One-based, as in lambda_{N+1}.
    double lambda(std::size_t one_based) const { return eigenvalues_.at(one_based - 1); }
    std::span<const double> values() const noexcept { return eigenvalues_; }

private:
    std::vector<double> eigenvalues_;
};

class StateVector {
public:
    StateVector() = default;
    explicit StateVector(std::size_t size) : coeffs_(size, 0.0) {}
    explicit StateVector(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}
    StateVector(std::initializer_list<double> coeffs) : coeffs_(coeffs) {}

    static StateVector unit(std::size_t size, std::size_t index, double scale = 1.0) {
        StateVector v(size);
        v.coeffs_.at(index) = scale;
        return v;
    }

    std::size_t size() const noexcept { return coeffs_.size(); }
    double& operator[](std::size_t i) { return coeffs_[i]; }
    double operator[](std::size_t i) const { return coeffs_[i]; }
    std::span<double> coeffs() noexcept { return coeffs_; }
    std::span<const double> coeffs() const noexcept { return coeffs_; }
    auto begin() noexcept { return coeffs_.begin(); }
    auto end() noexcept { return coeffs_.end(); }
    auto begin() const noexcept { return coeffs_.begin(); }
    auto end() const noexcept { return coeffs_.end(); }

    bool all_finite() const {
        for (double v : coeffs_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    void set_zero() {
        for (double& v : coeffs_) v = 0.0;
    }

    StateVector& operator+=(const StateVector& o) {
        require_same_size(size(), o.size(), "StateVector +=");
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
        return *this;
    }
    StateVector& operator-=(const StateVector& o) {
        require_same_size(size(), o.size(), "StateVector -=");
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
        return *this;
    }
    StateVector& operator*=(double s) {
        for (double& v : coeffs_) v *= s;
        return *this;
    }

    friend StateVector operator+(StateVector a, const StateVector& b) { return a += b; }
    friend StateVector operator-(StateVector a, const StateVector& b) { return a -= b; }
    friend StateVector operator*(double s, StateVector a) { return a *= s; }
    friend StateVector operator-(StateVector a) { return a *= -1.0; }
    friend bool operator==(const StateVector&, const StateVector&) = default;

private:
    std::vector<double> coeffs_;
};

inline double inner(const StateVector& a, const StateVector& b) {
    require_same_size(a.size(), b.size(), "inner");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double norm_h_squared(const StateVector& x) {
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return acc;
}

inline double norm_h(const StateVector& x) { return std::sqrt(norm_h_squared(x)); }

inline double norm_v_squared(const StateVector& x, const Spectrum& s) {
    require_same_size(x.size(), s.size(), "norm_v");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += s[i] * x[i] * x[i];
    return acc;
}

inline double norm_v(const StateVector& x, const Spectrum& s) { return std::sqrt(norm_v_squared(x, s)); }

inline double norm_v_star(const StateVector& x, const Spectrum& s) {
    require_same_size(x.size(), s.size(), "norm_v_star");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * x[i] / s[i];
    return std::sqrt(acc);
}

// Keeps the first n coordinates (pi_N), zeroes the rest.
inline StateVector project_modes(const StateVector& x, std::size_t n) {
    if (n > x.size()) {
        throw DimensionError("project_modes: N=" + std::to_string(n) + " exceeds M=" + std::to_string(x.size()));
    }
    StateVector out(x.size());
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i];
    return out;
}

// A state in the closed unit ball D of H (up to kBallSlack).
class BallState {
public:
    explicit BallState(StateVector inner) : inner_(std::move(inner)) {
        if (!inner_.all_finite()) throw Error("BallState: non-finite coefficient");
        const double n = norm_h(inner_);
        if (n > 1.0 + kBallSlack) {
            throw Error("BallState: norm " + std::to_string(n) + " exceeds the unit ball");
        }
    }

    static BallState zero(std::size_t size) { return BallState(StateVector(size)); }

    const StateVector& vec() const noexcept { return inner_; }
    std::size_t size() const noexcept { return inner_.size(); }
    double operator[](std::size_t i) const { return inner_[i]; }

    friend bool operator==(const BallState&, const BallState&) = default;

private:
    StateVector inner_;
};

struct BallProjection {
    BallState state;
    StateVector correction;  // projected - x
};

// Projects x onto D in place and writes projected - x into correction.
// Returns false (correction zeroed) for interior points. Hot-loop form of
// project_ball; both must stay bit-identical.
inline bool project_ball_in_place(StateVector& x, StateVector& correction) {
    const double n = norm_h(x);
    if (n <= 1.0) {
        correction.set_zero();
        return false;
    }
    const double inv = 1.0 / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double p = x[i] * inv;
        correction[i] = p - x[i];
        x[i] = p;
    }
    return true;
}

// Radial projection onto D: x / max(1, |x|_H).
inline BallProjection project_ball(const StateVector& x) {
    StateVector projected = x;
    StateVector correction(x.size());
    project_ball_in_place(projected, correction);
    return {BallState(std::move(projected)), std::move(correction)};
}

}  // namespace spdelab
