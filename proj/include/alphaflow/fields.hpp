// Truncated Fourier vorticity fields on the ball 0 < ||k|| <= R and the
// quadratic dynamics: the bilinear right-hand side of the filtered Euler
// system, the steady single-mode state, the stream-function relation, and the
// finite-difference validation that the analytic linearization at the steady
// state is the true Jacobian.

#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "alphaflow/lattice.hpp"

namespace alphaflow {

// Fourier modes of a zero-mean vorticity: k != 0, ||k|| <= radius.  Physical
// fields keep the reality symmetry omega_{-k} = conj(omega_k) on every set();
// test fields may opt out by constructing with physical = false.
struct VorticityField {
    double radius = 0.0;
    bool physical = true;
    std::map<Vec2, std::complex<double>> modes;

    VorticityField() = default;
    explicit VorticityField(double R, bool enforce_reality = true)
        : radius(R), physical(enforce_reality) {
        if (!(R > 0.0)) throw std::invalid_argument("VorticityField: radius must be positive");
    }

    bool in_ball(const Vec2& k) const noexcept {
        return !is_zero(k) && static_cast<double>(norm2(k)) <= radius * radius;
    }

    std::complex<double> at(const Vec2& k) const {
        const auto it = modes.find(k);
        return it == modes.end() ? std::complex<double>(0.0, 0.0) : it->second;
    }

    void set(const Vec2& k, std::complex<double> value) {
        if (is_zero(k))
            throw std::invalid_argument("VorticityField: the mean mode k = 0 is excluded");
        if (!in_ball(k))
            throw std::invalid_argument("VorticityField: mode outside the truncation ball");
        modes[k] = value;
        if (physical) modes[neg(k)] = std::conj(value);
    }

    double norm() const noexcept {
        double s = 0.0;
        for (const auto& [k, v] : modes) s += std::norm(v);
        return std::sqrt(s);
    }

    double reality_defect() const {
        double worst = 0.0;
        for (const auto& [k, v] : modes)
            worst = std::max(worst, std::abs(at(neg(k)) - std::conj(v)));
        return worst;
    }
};

namespace detail {

inline std::vector<Vec2> ball_modes(double R) {
    std::vector<Vec2> out;
    const auto bound = static_cast<long long>(std::floor(R));
    for (long long k1 = -bound; k1 <= bound; ++k1)
        for (long long k2 = -bound; k2 <= bound; ++k2)
            if (const Vec2 k{k1, k2}; !is_zero(k) && static_cast<double>(norm2(k)) <= R * R)
                out.push_back(k);
    return out;
}

} // namespace detail

// The unidirectional steady state: a single conjugate mode pair at +-p.
inline VorticityField steady_state(const FlowParams& params, double R) {
    params.validate();
    if (static_cast<double>(norm2(params.p)) > R * R)
        throw std::invalid_argument("steady_state: truncation ball does not contain p");
    VorticityField field(R, true);
    field.set(params.p, params.gamma / 2.0);
    return field;
}

// Galerkin right-hand side: (d omega / dt)_k = sum_q beta(k - q, q)
// omega_{k-q} omega_q over stored pairs, for each stored k.  Pairs whose
// partner leaves the ball are dropped, which keeps the steady state exact.
inline VorticityField nonlinear_rhs(const VorticityField& field, double alpha) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("nonlinear_rhs: alpha must be >= 0");
    VorticityField out(field.radius, field.physical);
    for (const auto& [k, unused] : field.modes) {
        std::complex<double> sum(0.0, 0.0);
        for (const auto& [q, omega_q] : field.modes) {
            const Vec2 m = sub(k, q);
            if (is_zero(m)) continue;
            const auto it = field.modes.find(m);
            if (it == field.modes.end()) continue;
            sum += beta(m, q, alpha) * it->second * omega_q;
        }
        out.modes[k] = sum;
    }
    return out;
}

// Stream-function coefficients phi_k = omega_k / (||k||^2 (1 + alpha^2 ||k||^2)).
inline VorticityField stream_coeffs(const VorticityField& field, double alpha) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("stream_coeffs: alpha must be >= 0");
    VorticityField out(field.radius, field.physical);
    for (const auto& [k, v] : field.modes)
        out.modes[k] = v / alpha_weight(norm2(k), alpha);
    return out;
}

// Analytic linearization of the right-hand side at the steady state: only the
// +-p modes of the base state couple, so
//   (L eta)_k = Gamma beta(p, k-p) eta_{k-p} + conj(Gamma) beta(-p, k+p) eta_{k+p}
// with each term dropped when its source mode leaves the ball.
inline VorticityField linearized_rhs(const FlowParams& params, const VorticityField& eta) {
    params.validate();
    VorticityField out(eta.radius, eta.physical);
    for (const auto& [k, unused] : eta.modes) {
        std::complex<double> sum(0.0, 0.0);
        const Vec2 km = sub(k, params.p), kp = add(k, params.p);
        if (!is_zero(km) && eta.in_ball(km))
            sum += params.gamma * beta(params.p, km, params.alpha) * eta.at(km);
        if (!is_zero(kp) && eta.in_ball(kp))
            sum += std::conj(params.gamma) * beta(neg(params.p), kp, params.alpha) * eta.at(kp);
        out.modes[k] = sum;
    }
    return out;
}

// base + factor * delta on the union of stored modes.
inline VorticityField add_scaled(const VorticityField& base, const VorticityField& delta,
                                 std::complex<double> factor) {
    if (base.radius != delta.radius)
        throw std::invalid_argument("add_scaled: truncation radii differ");
    VorticityField out(base.radius, base.physical && delta.physical);
    out.modes = base.modes;
    for (const auto& [k, v] : delta.modes) out.modes[k] += factor * v;
    return out;
}

// Centered finite-difference validation of the linearization: for `trials`
// random reality-symmetric unit perturbations eta on the full ball, compare
// (rhs(w0 + eps eta) - rhs(w0 - eps eta)) / (2 eps) against linearized_rhs.
// The right-hand side is exactly quadratic, so the centered difference has no
// truncation error and the returned maximal relative discrepancy is pure
// rounding amplified by 1/eps.
inline double linearization_check(const FlowParams& params, double R, double eps,
                                  int trials, unsigned long long seed = 20260818ULL) {
    params.validate();
    if (!(eps >= 1e-8 && eps <= 1e-4))
        throw std::invalid_argument("linearization_check: eps must lie in [1e-8, 1e-4]");
    if (trials < 1) throw std::invalid_argument("linearization_check: trials must be >= 1");

    const VorticityField base = steady_state(params, R);
    const std::vector<Vec2> ball = detail::ball_modes(R);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;

    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        VorticityField eta(R, true);
        for (const Vec2& k : ball) {
            if (k[0] < 0 || (k[0] == 0 && k[1] < 0)) continue; // mirror fills the rest
            eta.set(k, {gauss(rng), gauss(rng)});
        }
        const double scale = eta.norm();
        for (auto& [k, v] : eta.modes) v /= scale;

        const VorticityField plus = nonlinear_rhs(add_scaled(base, eta, eps), params.alpha);
        const VorticityField minus = nonlinear_rhs(add_scaled(base, eta, -eps), params.alpha);
        const VorticityField analytic = linearized_rhs(params, eta);

        double err2 = 0.0, ref2 = 0.0;
        for (const Vec2& k : ball) {
            const std::complex<double> fd = (plus.at(k) - minus.at(k)) / (2.0 * eps);
            err2 += std::norm(fd - analytic.at(k));
            ref2 += std::norm(analytic.at(k));
        }
        worst = std::max(worst, ref2 > 0.0 ? std::sqrt(err2 / ref2) : std::sqrt(err2));
    }
    return worst;
}

} // namespace alphaflow
