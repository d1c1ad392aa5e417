// Dense truncated realizations of the orbit operators, used as ground truth:
// zero-Dirichlet windows of the two-term recurrence operator L, its
// self-adjoint-plus-skew companion M, and the full 2D operator over a Fourier
// ball.  Dense spectra, eigenpair residuals, symmetry checks, essential-band
// data, and RK4 time propagation live here.
//
// Unit convention: 1D windows are assembled from the normalized coefficients
// rho_n (amplitude c scaled out), so their spectra are in normalized units
// and band_radius = 2.  The 2D assembly keeps physical entries; each of its
// orbit blocks equals the signed amplitude c times a normalized window
// section.  essential_band reports the physical band radius 2|c|.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "alphaflow/lattice.hpp"

namespace alphaflow {

enum class OperatorKind { L_form, M_form, L2D_form };

struct TruncatedOperator {
    OperatorKind kind = OperatorKind::L_form;
    long long n_lo = 0, n_hi = 0; // 1D forms: row i corresponds to index n_lo + i
    Eigen::MatrixXd entries;
    std::optional<Orbit> orbit;  // set for 1D forms built from an orbit
    FlowParams params;           // set for the 2D form
    double ball_radius = 0.0;    // 2D form: modes satisfy ||k|| <= ball_radius
    std::vector<Vec2> modes;     // 2D form: row order
    double band_radius = 2.0;    // essential band in the matrix's own units

    long long dim() const noexcept { return entries.rows(); }
    long long half_window() const noexcept { return (n_hi - n_lo) / 2; }
    long long row_of(long long n) const { return n - n_lo; }
};

struct SpectrumReport {
    std::vector<std::complex<double>> eigenvalues;
    double max_real_part = 0.0;
    double band_radius = 0.0;
    double symmetry_defect = 0.0;
};

struct PropagationResult {
    double growth_rate = 0.0;
    std::vector<double> times;
    std::vector<double> log_norms;
};

namespace detail {

inline void check_window(long long n_lo, long long n_hi) {
    if (n_hi < n_lo) throw std::invalid_argument("window: n_hi must be >= n_lo");
    if (n_hi - n_lo + 1 > 100000) throw std::invalid_argument("window: too large");
}

} // namespace detail

// (L w)_n = rho_{n-1} w_{n-1} - rho_{n+1} w_{n+1}, zero outside the window.
template <class Rho>
inline TruncatedOperator assemble_L_window_with(Rho rho, long long n_lo, long long n_hi) {
    detail::check_window(n_lo, n_hi);
    const long long d = n_hi - n_lo + 1;
    TruncatedOperator op;
    op.kind = OperatorKind::L_form;
    op.n_lo = n_lo;
    op.n_hi = n_hi;
    op.entries = Eigen::MatrixXd::Zero(d, d);
    for (long long n = n_lo; n <= n_hi; ++n) {
        if (n - 1 >= n_lo) op.entries(n - n_lo, n - 1 - n_lo) = rho(n - 1);
        if (n + 1 <= n_hi) op.entries(n - n_lo, n + 1 - n_lo) = -rho(n + 1);
    }
    return op;
}

template <class Rho>
inline TruncatedOperator assemble_L_with(Rho rho, long long N) {
    if (N < 2) throw std::invalid_argument("assemble_L: N must be >= 2");
    return assemble_L_window_with(rho, -N, N);
}

inline TruncatedOperator assemble_L_window(const Orbit& orbit, long long n_lo, long long n_hi) {
    auto op = assemble_L_window_with(
        [&orbit](long long n) { return rho_at(orbit.params, orbit.q_hat, n); }, n_lo, n_hi);
    op.orbit = orbit;
    return op;
}

inline TruncatedOperator assemble_L(const Orbit& orbit, long long N) {
    if (N < 2) throw std::invalid_argument("assemble_L: N must be >= 2");
    return assemble_L_window(orbit, -N, N);
}

// M = diag(delta) (S - S*) diag(delta) with delta_n^2 = rho_n, stored as a
// real matrix: an adjacent-pair product delta_{n-1} delta_n that is real
// contributes the skew pair (+a, -a); a purely imaginary product contributes
// the symmetric pair (+|r|, +|r|).  A unit diagonal similarity maps the
// complex M onto exactly this matrix, so spectra coincide.
template <class Rho>
inline TruncatedOperator assemble_M_window_with(Rho rho, long long n_lo, long long n_hi) {
    detail::check_window(n_lo, n_hi);
    const long long d = n_hi - n_lo + 1;
    TruncatedOperator op;
    op.kind = OperatorKind::M_form;
    op.n_lo = n_lo;
    op.n_hi = n_hi;
    op.entries = Eigen::MatrixXd::Zero(d, d);
    for (long long n = n_lo + 1; n <= n_hi; ++n) {
        const double prod = rho(n - 1) * rho(n); // (delta_{n-1} delta_n)^2
        const double mag = std::sqrt(std::abs(prod));
        const long long i = n - n_lo;
        if (prod >= 0.0) {
            // real product; both coefficients negative flips its sign, which a
            // diag(+-1) similarity removes -- keep the magnitude, skew layout
            op.entries(i, i - 1) = mag;
            op.entries(i - 1, i) = -mag;
        } else {
            op.entries(i, i - 1) = mag;
            op.entries(i - 1, i) = mag;
        }
    }
    return op;
}

inline TruncatedOperator assemble_M(const Orbit& orbit, long long N) {
    if (N < 2) throw std::invalid_argument("assemble_M: N must be >= 2");
    auto op = assemble_M_window_with(
        [&orbit](long long n) { return rho_at(orbit.params, orbit.q_hat, n); }, -N, N);
    op.orbit = orbit;
    return op;
}

// Matrix-free application of the window truncation of L.
template <class Rho>
inline std::vector<double> apply_L_with(Rho rho, const std::vector<double>& w, long long n_lo) {
    const long long d = static_cast<long long>(w.size());
    std::vector<double> out(w.size(), 0.0);
    for (long long i = 0; i < d; ++i) {
        const long long n = n_lo + i;
        double v = 0.0;
        if (i - 1 >= 0) v += rho(n - 1) * w[static_cast<size_t>(i - 1)];
        if (i + 1 < d) v -= rho(n + 1) * w[static_cast<size_t>(i + 1)];
        out[static_cast<size_t>(i)] = v;
    }
    return out;
}

inline std::vector<double> apply_L(const Orbit& orbit, const std::vector<double>& w,
                                   long long n_lo) {
    return apply_L_with([&orbit](long long n) { return rho_at(orbit.params, orbit.q_hat, n); },
                        w, n_lo);
}

// All eigenvalues of the dense truncation, with the symmetry diagnostics.
// symmetry_defect is the largest distance from any eigenvalue's image under
// lambda -> -lambda or lambda -> conj(lambda) to the eigenvalue set.
inline SpectrumReport dense_spectrum(const TruncatedOperator& op) {
    if (op.dim() > 4001)
        throw std::invalid_argument("dense_spectrum: truncation larger than the cost guard");
    Eigen::EigenSolver<Eigen::MatrixXd> solver(op.entries);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("dense_spectrum: eigensolver failed to converge");

    SpectrumReport report;
    report.band_radius = op.band_radius;
    const auto& ev = solver.eigenvalues();
    report.eigenvalues.reserve(static_cast<size_t>(ev.size()));
    double max_re = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        report.eigenvalues.push_back(ev[i]);
        max_re = std::max(max_re, ev[i].real());
    }
    report.max_real_part = max_re;

    double defect = 0.0;
    for (const auto& lambda : report.eigenvalues) {
        for (const auto image : {-lambda, std::conj(lambda)}) {
            double nearest = std::numeric_limits<double>::infinity();
            for (const auto& mu : report.eigenvalues)
                nearest = std::min(nearest, std::abs(mu - image));
            defect = std::max(defect, nearest);
        }
    }
    report.symmetry_defect = defect;
    return report;
}

// Relative residual || (L w - lambda w) restricted to interior rows ||_2 / ||w||_2.
// The two boundary rows are excluded: they see the zero-Dirichlet cut, not
// the operator.
inline double residual(double lambda, const std::vector<double>& w, long long n_lo,
                       const Orbit& orbit) {
    if (w.size() < 3) throw std::invalid_argument("residual: window must hold >= 3 entries");
    double norm2_w = 0.0;
    for (double v : w) norm2_w += v * v;
    if (norm2_w == 0.0) throw std::invalid_argument("residual: zero vector");
    const std::vector<double> lw = apply_L(orbit, w, n_lo);
    double err2 = 0.0;
    for (size_t i = 1; i + 1 < w.size(); ++i) {
        const double r = lw[i] - lambda * w[i];
        err2 += r * r;
    }
    return std::sqrt(err2 / norm2_w);
}

// Physical essential-spectrum band radius 2|c|: the truncation-independent
// segment i[-2|c|, 2|c|] that the non-isolated spectrum fills.
inline double essential_band(const Orbit& orbit) {
    return 2.0 * normalization_constant(orbit.params, orbit.q_hat);
}

// Max-norm of J L J + L with J = diag((-1)^n).  L has entries only on
// |n - m| = 1, where the conjugation flips the sign, so this is exactly zero;
// any nonzero value indicates an assembly bug.
inline double j_conjugation_check(const Orbit& orbit, long long N) {
    const TruncatedOperator op = assemble_L(orbit, N);
    double worst = 0.0;
    for (long long i = 0; i < op.dim(); ++i) {
        for (long long j = 0; j < op.dim(); ++j) {
            const long long n = op.n_lo + i, m = op.n_lo + j;
            const double sign = ((n + m) % 2 == 0) ? 1.0 : -1.0;
            worst = std::max(worst, std::abs(sign * op.entries(i, j) + op.entries(i, j)));
        }
    }
    return worst;
}

// Classical RK4 for w' = L w on the window, with overflow renormalization.
// growth_rate is the least-squares slope of log||w(t)||.
template <class Rho>
inline PropagationResult propagate_with(Rho rho, std::vector<double> w, long long n_lo,
                                        double t_final, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("propagate: dt must be positive");
    if (!(t_final >= 10.0 * dt))
        throw std::invalid_argument("propagate: t_final must cover at least 10 steps");
    double norm0 = 0.0;
    for (double v : w) norm0 += v * v;
    if (norm0 == 0.0) throw std::invalid_argument("propagate: zero initial vector");

    const size_t d = w.size();
    const auto norm_of = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };

    PropagationResult result;
    double log_shift = 0.0;
    result.times.push_back(0.0);
    result.log_norms.push_back(std::log(norm_of(w)));

    const long long steps = static_cast<long long>(std::ceil(t_final / dt - 1e-12));
    std::vector<double> k1, k2, k3, k4, tmp(d);
    for (long long s = 1; s <= steps; ++s) {
        k1 = apply_L_with(rho, w, n_lo);
        for (size_t i = 0; i < d; ++i) tmp[i] = w[i] + 0.5 * dt * k1[i];
        k2 = apply_L_with(rho, tmp, n_lo);
        for (size_t i = 0; i < d; ++i) tmp[i] = w[i] + 0.5 * dt * k2[i];
        k3 = apply_L_with(rho, tmp, n_lo);
        for (size_t i = 0; i < d; ++i) tmp[i] = w[i] + dt * k3[i];
        k4 = apply_L_with(rho, tmp, n_lo);
        for (size_t i = 0; i < d; ++i)
            w[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

        double nw = norm_of(w);
        if (nw > 1e100 || nw < 1e-100) {
            log_shift += std::log(nw);
            for (size_t i = 0; i < d; ++i) w[i] /= nw;
            nw = 1.0;
        }
        result.times.push_back(static_cast<double>(s) * dt);
        result.log_norms.push_back(std::log(nw) + log_shift);
    }

    // least-squares slope of log-norm against time
    const size_t m = result.times.size();
    double mean_t = 0.0, mean_y = 0.0;
    for (size_t i = 0; i < m; ++i) {
        mean_t += result.times[i];
        mean_y += result.log_norms[i];
    }
    mean_t /= static_cast<double>(m);
    mean_y /= static_cast<double>(m);
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < m; ++i) {
        const double ti = result.times[i] - mean_t;
        num += ti * (result.log_norms[i] - mean_y);
        den += ti * ti;
    }
    result.growth_rate = num / den;
    return result;
}

inline PropagationResult propagate(const Orbit& orbit, std::vector<double> w, long long n_lo,
                                   double t_final, double dt) {
    return propagate_with(
        [&orbit](long long n) { return rho_at(orbit.params, orbit.q_hat, n); }, std::move(w),
        n_lo, t_final, dt);
}

// Dense 2D truncation over the Fourier ball 0 < ||k|| <= R, lexicographic
// modes, physical entries: (k, k-p) holds beta(p, k-p) Gamma and (k, k+p)
// holds -beta(p, k+p) Gamma.
inline TruncatedOperator assemble_L2D(const FlowParams& params, double R) {
    params.validate();
    if (!params.gamma_is_real())
        throw std::invalid_argument("assemble_L2D: real representation needs real Gamma");
    const double p_norm = std::sqrt(static_cast<double>(norm2(params.p)));
    if (R < p_norm + 2.0)
        throw std::invalid_argument("assemble_L2D: ball radius must be at least ||p|| + 2");
    const auto bound = static_cast<long long>(std::floor(R));
    const double r2 = R * R;

    TruncatedOperator op;
    op.kind = OperatorKind::L2D_form;
    op.params = params;
    op.ball_radius = R;
    for (long long k1 = -bound; k1 <= bound; ++k1) {
        for (long long k2 = -bound; k2 <= bound; ++k2) {
            const Vec2 k{k1, k2};
            if (!is_zero(k) && static_cast<double>(norm2(k)) <= r2) op.modes.push_back(k);
        }
    }

    const double gamma = params.gamma.real();
    const long long d = static_cast<long long>(op.modes.size());
    std::map<Vec2, long long> index;
    for (long long i = 0; i < d; ++i) index[op.modes[static_cast<size_t>(i)]] = i;

    op.entries = Eigen::MatrixXd::Zero(d, d);
    double max_c = 0.0;
    for (long long i = 0; i < d; ++i) {
        const Vec2 k = op.modes[static_cast<size_t>(i)];
        const Vec2 km = sub(k, params.p), kp = add(k, params.p);
        if (!is_zero(km)) {
            const auto it = index.find(km);
            if (it != index.end()) op.entries(i, it->second) = beta(params.p, km, params.alpha) * gamma;
        }
        if (!is_zero(kp)) {
            const auto it = index.find(kp);
            if (it != index.end()) op.entries(i, it->second) = -beta(params.p, kp, params.alpha) * gamma;
        }
        if (wedge(params.p, k) != 0)
            max_c = std::max(max_c, normalization_constant(params, k));
    }
    op.band_radius = 2.0 * max_c;
    return op;
}

// Orbit block of the 2D truncation: the modes of one orbit that fall in the
// ball, with their contiguous index range.
struct OrbitBlock {
    Orbit orbit;
    long long n_lo = 0, n_hi = 0;
    std::vector<long long> mode_rows; // rows of assemble_L2D, ordered by n
};

// Partition the 2D modes into orbit blocks plus the uncoupled modes on the
// p-line (whose rows and columns are identically zero).
inline std::pair<std::vector<OrbitBlock>, std::vector<long long>> orbit_blocks(
    const TruncatedOperator& op) {
    if (op.kind != OperatorKind::L2D_form)
        throw std::invalid_argument("orbit_blocks: expected a 2D truncation");
    std::map<Vec2, std::vector<std::pair<long long, long long>>> groups; // q_hat -> (n, row)
    std::vector<long long> collinear;
    for (long long i = 0; i < static_cast<long long>(op.modes.size()); ++i) {
        const Vec2 k = op.modes[static_cast<size_t>(i)];
        if (wedge(op.params.p, k) == 0) {
            collinear.push_back(i);
            continue;
        }
        const Orbit orbit = minimize_orbit(op.params, k);
        groups[orbit.q_hat].push_back({-orbit.n_max, i}); // k = q_hat - n_max * p
    }
    std::vector<OrbitBlock> blocks;
    for (auto& [q_hat, members] : groups) {
        std::sort(members.begin(), members.end());
        OrbitBlock block;
        block.orbit = minimize_orbit(op.params, q_hat);
        block.n_lo = members.front().first;
        block.n_hi = members.back().first;
        for (const auto& [n, row] : members) block.mode_rows.push_back(row);
        blocks.push_back(std::move(block));
    }
    return {std::move(blocks), std::move(collinear)};
}

// Largest magnitude of any 2D entry that couples different orbit blocks;
// exactly zero when the assembly respects the orbit decomposition.
inline double block_defect(const TruncatedOperator& op) {
    const auto [blocks, collinear] = orbit_blocks(op);
    std::vector<long long> owner(op.modes.size(), -1);
    for (size_t b = 0; b < blocks.size(); ++b)
        for (long long row : blocks[b].mode_rows) owner[static_cast<size_t>(row)] = static_cast<long long>(b);
    double worst = 0.0;
    for (long long i = 0; i < op.dim(); ++i)
        for (long long j = 0; j < op.dim(); ++j)
            if (op.entries(i, j) != 0.0 && owner[static_cast<size_t>(i)] != owner[static_cast<size_t>(j)])
                worst = std::max(worst, std::abs(op.entries(i, j)));
    return worst;
}

} // namespace alphaflow
