#pragma once

// Galerkin truncation of the stochastic Navier-Stokes nonlinearity on the
// torus T^d = [0, 2pi)^d with dissipation A = nu (1 - Laplacian)^theta.
//
// Basis: real divergence-free Fourier modes sqrt(2) cos(k.x) e and
// sqrt(2) sin(k.x) e, one pair per wavevector representative k (first
// nonzero component positive) and polarization e orthogonal to k. The
// measure is normalised to total mass one so the basis is orthonormal.
// Retained wavevectors: 0 < max_j |k_j| <= cutoff - 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "spdelab/errors.hpp"
#include "spdelab/models.hpp"
#include "spdelab/spectral_space.hpp"

namespace spdelab {

using Wavevector = std::array<int, 3>;

struct FourierMode {
    Wavevector k{};            // unused trailing components are zero
    int polarization = 0;      // 0 .. d-2
    bool sine = false;         // cos mode first
    Wavevector direction_int{};  // integer vector orthogonal to k
    std::array<double, 3> direction{};
    int k_squared = 0;
};

class FourierBasis {
public:
    FourierBasis(int d, int cutoff, double nu, double theta) : d_(d), kmax_(cutoff - 1), nu_(nu), theta_(theta) {
        if (d < 2 || d > 3) {
            throw HypothesisError("Navier-Stokes model needs d in {2, 3}: on T^1 no nonzero divergence-free mode exists");
        }
        if (cutoff < 2) throw Error("Navier-Stokes model: mode cutoff must be >= 2");
        side_ = 2 * kmax_ + 1;
        box_size_ = 1;
        for (int j = 0; j < d_; ++j) box_size_ *= static_cast<std::size_t>(side_);
        enumerate_modes();
        build_triads();
    }

    int dimension() const noexcept { return d_; }
    std::size_t size() const noexcept { return modes_.size(); }
    const std::vector<FourierMode>& modes() const noexcept { return modes_; }

    std::vector<double> eigenvalues() const {
        std::vector<double> ev(modes_.size());
        for (std::size_t i = 0; i < modes_.size(); ++i) {
            ev[i] = nu_ * std::pow(1.0 + modes_[i].k_squared, theta_);
        }
        return ev;
    }

    // out = truncated Leray projection of (u . grad) v
    void apply_bilinear(const StateVector& u, const StateVector& v, StateVector& out) const {
        const std::vector<Cplx> uh = to_complex(u);
        const std::vector<Cplx> vh = to_complex(v);
        std::vector<Cplx> wh(reps_.size() * 3, Cplx{});
        for (const Triad& t : b_triads_) {
            // i (u(p) . q) v(q)
            Cplx dot{};
            for (int j = 0; j < d_; ++j) dot += uh[t.p * 3 + j] * static_cast<double>(t.q[j]);
            const Cplx coef = Cplx(0.0, 1.0) * dot;
            for (int j = 0; j < d_; ++j) wh[t.out * 3 + j] += coef * vh[t.q_idx * 3 + j];
        }
        to_real(wh, out);
    }

    // out = g with <B(u, v), z> = <u, g> for every retained u.
    void apply_adjoint_first(const StateVector& v, const StateVector& z, StateVector& out) const {
        const std::vector<Cplx> vh = to_complex(v);
        const std::vector<Cplx> zh = to_complex(z);
        std::vector<Cplx> gh(reps_.size() * 3, Cplx{});
        for (const Triad& t : adj_triads_) {
            // -i q (conj v(q) . z(p + q))
            Cplx dot{};
            for (int j = 0; j < d_; ++j) dot += std::conj(vh[t.q_idx * 3 + j]) * zh[t.p * 3 + j];
            const Cplx coef = Cplx(0.0, -1.0) * dot;
            for (int j = 0; j < d_; ++j) gh[t.out * 3 + j] += coef * static_cast<double>(t.q[j]);
        }
        to_real(gh, out);
    }

private:
    using Cplx = std::complex<double>;

    struct Triad {
        std::size_t out;    // representative slot receiving the term
        std::size_t p;      // box index of the first-argument wavevector (or of p+q for the adjoint)
        std::size_t q_idx;  // box index of q
        Wavevector q;
    };

    bool in_box(const Wavevector& k) const {
        for (int j = 0; j < d_; ++j) {
            if (std::abs(k[j]) > kmax_) return false;
        }
        return true;
    }

    static bool is_zero(const Wavevector& k) { return k[0] == 0 && k[1] == 0 && k[2] == 0; }

    std::size_t box_index(const Wavevector& k) const {
        std::size_t idx = 0;
        for (int j = 0; j < d_; ++j) idx = idx * static_cast<std::size_t>(side_) + static_cast<std::size_t>(k[j] + kmax_);
        return idx;
    }

    Wavevector box_vector(std::size_t idx) const {
        Wavevector k{};
        for (int j = d_ - 1; j >= 0; --j) {
            k[j] = static_cast<int>(idx % static_cast<std::size_t>(side_)) - kmax_;
            idx /= static_cast<std::size_t>(side_);
        }
        return k;
    }

    static bool is_representative(const Wavevector& k) {
        for (int c : k) {
            if (c != 0) return c > 0;
        }
        return false;
    }

    static Wavevector cross(const Wavevector& a, const Wavevector& b) {
        return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
    }

    std::vector<Wavevector> polarizations(const Wavevector& k) const {
        if (d_ == 2) return {Wavevector{-k[1], k[0], 0}};
        int axis = 0;
        for (int j = 1; j < 3; ++j) {
            if (std::abs(k[j]) < std::abs(k[axis])) axis = j;
        }
        Wavevector a{};
        a[axis] = 1;
        const Wavevector e1 = cross(k, a);
        const Wavevector e2 = cross(k, e1);
        return {e1, e2};
    }

    void enumerate_modes() {
        for (std::size_t idx = 0; idx < box_size_; ++idx) {
            const Wavevector k = box_vector(idx);
            if (is_zero(k) || !is_representative(k)) continue;
            const auto pols = polarizations(k);
            for (int p = 0; p < static_cast<int>(pols.size()); ++p) {
                for (bool sine : {false, true}) {
                    FourierMode mode;
                    mode.k = k;
                    mode.polarization = p;
                    mode.sine = sine;
                    mode.direction_int = pols[p];
                    double n2 = 0.0;
                    for (int c : pols[p]) n2 += static_cast<double>(c) * c;
                    const double n = std::sqrt(n2);
                    for (int j = 0; j < 3; ++j) mode.direction[j] = pols[p][j] / n;
                    mode.k_squared = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                    modes_.push_back(mode);
                }
            }
        }
        std::sort(modes_.begin(), modes_.end(), [](const FourierMode& a, const FourierMode& b) {
            return std::tie(a.k_squared, a.k, a.polarization, a.sine) <
                   std::tie(b.k_squared, b.k, b.polarization, b.sine);
        });
        mode_rep_.resize(modes_.size());
        for (std::size_t i = 0; i < modes_.size(); ++i) {
            const std::size_t bi = box_index(modes_[i].k);
            auto it = std::find(reps_.begin(), reps_.end(), bi);
            if (it == reps_.end()) {
                reps_.push_back(bi);
                it = reps_.end() - 1;
            }
            mode_rep_[i] = static_cast<std::size_t>(it - reps_.begin());
        }
    }

    void build_triads() {
        std::vector<std::ptrdiff_t> rep_of_box(box_size_, -1);
        for (std::size_t r = 0; r < reps_.size(); ++r) rep_of_box[reps_[r]] = static_cast<std::ptrdiff_t>(r);
        for (std::size_t r = 0; r < reps_.size(); ++r) {
            const Wavevector k = box_vector(reps_[r]);
            for (std::size_t qi = 0; qi < box_size_; ++qi) {
                const Wavevector q = box_vector(qi);
                if (is_zero(q)) continue;
                // B: p + q = k with k a representative.
                const Wavevector p{k[0] - q[0], k[1] - q[1], k[2] - q[2]};
                if (!is_zero(p) && in_box(p)) b_triads_.push_back({r, box_index(p), qi, q});
                // Adjoint: p is the representative, p + q must be retained.
                const Wavevector s{k[0] + q[0], k[1] + q[1], k[2] + q[2]};
                if (!is_zero(s) && in_box(s)) adj_triads_.push_back({r, box_index(s), qi, q});
            }
        }
    }

    // Complex Fourier coefficients over the whole box, 3 slots per wavevector.
    std::vector<Cplx> to_complex(const StateVector& x) const {
        require_same_size(x.size(), modes_.size(), "FourierBasis");
        std::vector<Cplx> out(box_size_ * 3, Cplx{});
        constexpr double h = std::numbers::sqrt2 / 2.0;
        for (std::size_t i = 0; i < modes_.size(); ++i) {
            const FourierMode& m = modes_[i];
            const Cplx amp = m.sine ? Cplx(0.0, -h * x[i]) : Cplx(h * x[i], 0.0);
            const std::size_t pos = reps_[mode_rep_[i]];
            Wavevector neg{-m.k[0], -m.k[1], -m.k[2]};
            const std::size_t negpos = box_index(neg);
            for (int j = 0; j < d_; ++j) {
                out[pos * 3 + j] += amp * m.direction[j];
                out[negpos * 3 + j] += std::conj(amp) * m.direction[j];
            }
        }
        return out;
    }

    void to_real(const std::vector<Cplx>& rep_coeffs, StateVector& out) const {
        for (std::size_t i = 0; i < modes_.size(); ++i) {
            const FourierMode& m = modes_[i];
            Cplx c{};
            for (int j = 0; j < d_; ++j) c += rep_coeffs[mode_rep_[i] * 3 + j] * m.direction[j];
            out[i] = m.sine ? -std::numbers::sqrt2 * c.imag() : std::numbers::sqrt2 * c.real();
        }
    }

    int d_;
    int kmax_;
    double nu_;
    double theta_;
    int side_ = 0;
    std::size_t box_size_ = 0;
    std::vector<FourierMode> modes_;
    std::vector<std::size_t> reps_;      // box index per representative
    std::vector<std::size_t> mode_rep_;  // representative slot per mode
    std::vector<Triad> b_triads_;
    std::vector<Triad> adj_triads_;
};

inline double navier_stokes_theta_threshold(int d) { return std::max(1.0, (d + 2) / 4.0); }

struct NavierStokesOptions {
    std::optional<double> K_B_override;
    std::optional<double> K_bar_override;
    std::size_t K_B_samples = 32;
    std::uint64_t K_B_seed = 0x4e53;
};

inline ModelSpec make_navier_stokes_model(int d, int cutoff, double nu, double theta, std::size_t noise_rank,
                                          std::vector<double> sigma_diag, const NavierStokesOptions& opts = {}) {
    if (!(nu > 0.0) || !(theta > 0.0)) throw Error("Navier-Stokes model: nu and theta must be positive");
    if (d >= 1 && d <= 3 && theta < navier_stokes_theta_threshold(d)) {
        std::ostringstream msg;
        msg << "theta below 1∨(d+2)/4: theta=" << theta << " < " << navier_stokes_theta_threshold(d)
            << " for d=" << d;
        throw HypothesisError(msg.str());
    }
    if (d < 1 || d > 3) throw HypothesisError("Navier-Stokes model: d must be 1, 2 or 3");
    auto basis = std::make_shared<const FourierBasis>(d, cutoff, nu, theta);
    ModelSpec m{.kind = "navier_stokes", .spectrum = Spectrum(basis->eigenvalues()), .noise_rank = noise_rank};
    m.fourier = basis;
    m.bilinear = [basis](const StateVector& u, const StateVector& v, StateVector& out) {
        basis->apply_bilinear(u, v, out);
    };
    m.bilinear_adjoint = [basis](const StateVector& v, const StateVector& z, StateVector& out) {
        basis->apply_adjoint_first(v, z, out);
    };
    m.sigma_diag = std::move(sigma_diag);
    detail::install_diagonal_sigma(m);
    m.constants.K_b = 0.0;
    m.constants.b0_vstar = 0.0;
    m.constants.nu = nu;
    m.constants.theta = theta;
    m.constants.d = d;
    if (opts.K_B_override) {
        m.constants.K_B = *opts.K_B_override;
    } else {
        m.constants.K_B = estimate_K_B(m, opts.K_B_samples, opts.K_B_seed);
        m.constants.K_B_empirical = true;
    }
    if (opts.K_bar_override) {
        m.constants.K_bar = *opts.K_bar_override;
    } else {
        m.constants.K_bar = estimate_K_bar(m, std::max<std::size_t>(opts.K_B_samples, 256), opts.K_B_seed);
        m.constants.K_bar_empirical = true;
    }
    return m;
}

}  // namespace spdelab
