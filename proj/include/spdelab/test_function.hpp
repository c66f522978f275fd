#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "spdelab/errors.hpp"
#include "spdelab/spectral_space.hpp"

namespace spdelab {

// Strictly positive, log-Lipschitz observables on D.
class TestFunction {
public:
    enum class Kind { exponential_linear, constant, clipped_linear };

    // f(x) = exp(c <v, x>)
    static TestFunction exponential_linear(StateVector direction, double scale) {
        return TestFunction(Kind::exponential_linear, std::move(direction), scale);
    }
    // f(x) = c, c > 0
    static TestFunction constant(double value, std::size_t size) {
        if (!(value > 0.0)) throw Error("TestFunction::constant: value must be positive");
        return TestFunction(Kind::constant, StateVector(size), value);
    }
    // f(x) = 1 + clamp(c <v, x>, -1/2, 1/2)
    static TestFunction clipped_linear(StateVector direction, double scale) {
        return TestFunction(Kind::clipped_linear, std::move(direction), scale);
    }

    Kind kind() const noexcept { return kind_; }
    const StateVector& direction() const noexcept { return direction_; }
    double scale() const noexcept { return scale_; }

    double value(const StateVector& x) const {
        switch (kind_) {
            case Kind::exponential_linear: return std::exp(scale_ * inner(direction_, x));
            case Kind::constant: return scale_;
            case Kind::clipped_linear: return 1.0 + std::clamp(scale_ * inner(direction_, x), -0.5, 0.5);
        }
        return 0.0;
    }

    double log_value(const StateVector& x) const {
        if (kind_ == Kind::exponential_linear) return scale_ * inner(direction_, x);
        return std::log(value(x));
    }

    // Upper bound of |grad log f| over D; exact for the exponential-linear kind.
    double grad_log_sup() const {
        switch (kind_) {
            case Kind::exponential_linear: return std::abs(scale_) * norm_h(direction_);
            case Kind::constant: return 0.0;
            case Kind::clipped_linear: return 2.0 * std::abs(scale_) * norm_h(direction_);
        }
        return 0.0;
    }

    // Upper bound of |grad f| over D.
    double grad_sup() const {
        const double g = std::abs(scale_) * norm_h(direction_);
        switch (kind_) {
            case Kind::exponential_linear: return g * std::exp(g);
            case Kind::constant: return 0.0;
            case Kind::clipped_linear: return g;
        }
        return 0.0;
    }

    std::string descriptor() const {
        std::ostringstream os;
        os.precision(17);
        switch (kind_) {
            case Kind::exponential_linear: os << "exp_linear(c=" << scale_; break;
            case Kind::constant: os << "constant(c=" << scale_ << ")"; return os.str();
            case Kind::clipped_linear: os << "clipped_linear(c=" << scale_; break;
        }
        os << ",v=[";
        bool first = true;
        for (std::size_t i = 0; i < direction_.size(); ++i) {
            if (direction_[i] == 0.0) continue;
            os << (first ? "" : ",") << (i + 1) << ":" << direction_[i];
            first = false;
        }
        os << "])";
        return os.str();
    }

private:
    TestFunction(Kind kind, StateVector direction, double scale)
        : kind_(kind), direction_(std::move(direction)), scale_(scale) {
        if (!std::isfinite(scale_) || !direction_.all_finite()) throw Error("TestFunction: non-finite parameter");
    }

    Kind kind_;
    StateVector direction_;
    double scale_;
};

}  // namespace spdelab
