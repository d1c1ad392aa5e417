// Class-specific dispersion equations for the orbit operator: evaluate the
// dispersion function D(lambda), locate its positive root, reconstruct the
// eigenvector window from the one-sided tail sequences, and verify the sign
// pattern and exponential decay the construction guarantees.
//
// The dispersion function, on normalized coefficients, is
//   interior class:        D = lambda/rho_0 + f(lambda) + g(lambda)
//   upper boundary class:  D = lambda/rho_0 + g(lambda)   (f side truncates)
//   lower boundary class:  D = lambda/rho_0 + f(lambda)   (g side truncates)
// with f, g the one-sided continued fractions.  D is positive near zero
// (f, g -> 1) and eventually negative (rho_0 < 0), so a positive root exists.

#pragma once

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "alphaflow/contfrac.hpp"
#include "alphaflow/lattice.hpp"
#include "alphaflow/oracle.hpp"

namespace alphaflow {

struct DispersionInterval {
    double lo = 0.0, hi = 0.0;
    double mid() const noexcept { return 0.5 * (lo + hi); }
    double width() const noexcept { return hi - lo; }
};

class BracketFailureError : public std::runtime_error {
  public:
    explicit BracketFailureError(const std::string& what) : std::runtime_error(what) {}
};

class InconsistentRootError : public std::runtime_error {
  public:
    explicit InconsistentRootError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require_dispersion_class(const Orbit& orbit, const char* who) {
    if (!is_type_I(orbit.klass))
        throw std::invalid_argument(std::string(who) +
                                    ": dispersion equation requires a type-I orbit, got class " +
                                    to_string(orbit.klass));
}

} // namespace detail

// Enclosure of D(lambda).  When a continued fraction cannot reach tol within
// max_depth (the small-lambda regime), its best bracket is used instead, so
// the returned interval is always valid -- just wider than requested.
inline DispersionInterval dispersion_interval(double lambda, const Orbit& orbit,
                                              double tol = 1e-12, int max_depth = 10000) {
    detail::require_dispersion_class(orbit, "dispersion_interval");
    if (!(lambda > 0.0))
        throw std::invalid_argument("dispersion_interval: lambda must be positive");
    const double head = lambda / rho_at(orbit.params, orbit.q_hat, 0);
    DispersionInterval out{head, head};
    const auto accumulate = [&out](auto&& call) {
        try {
            const CFResult r = call();
            out.lo += r.lower;
            out.hi += r.upper;
        } catch (const NonConvergenceError& e) {
            out.lo += e.lower;
            out.hi += e.upper;
        }
    };
    if (orbit.klass != OrbitClass::TypeIPlus)
        accumulate([&] { return f_of_lambda(lambda, orbit, tol, max_depth); });
    if (orbit.klass != OrbitClass::TypeIMinus)
        accumulate([&] { return g_of_lambda(lambda, orbit, tol, max_depth); });
    return out;
}

// Point value of D(lambda).  Unlike the interval form, continued-fraction
// failures (non-convergence within max_depth, invalid coefficients)
// propagate to the caller.
inline double dispersion_value(double lambda, const Orbit& orbit, double tol = 1e-12,
                               int max_depth = 10000) {
    detail::require_dispersion_class(orbit, "dispersion_value");
    if (!(lambda > 0.0))
        throw std::invalid_argument("dispersion_value: lambda must be positive");
    double value = lambda / rho_at(orbit.params, orbit.q_hat, 0);
    if (orbit.klass != OrbitClass::TypeIPlus)
        value += f_of_lambda(lambda, orbit, tol, max_depth).value;
    if (orbit.klass != OrbitClass::TypeIMinus)
        value += g_of_lambda(lambda, orbit, tol, max_depth).value;
    return value;
}

namespace detail {

inline int interval_sign(const DispersionInterval& v) noexcept {
    if (v.lo > 0.0) return 1;
    if (v.hi < 0.0) return -1;
    return 0;
}

// Bisect a sign-change bracket (D(lo) > 0 > D(hi)) to the requested width,
// then polish with a few secant steps; returns the point with smallest |D|.
template <class Eval>
inline double refine_root(double lo, double hi, double tol, Eval eval) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break; // bracket at floating-point resolution
        const int s = interval_sign(eval(mid));
        if (s > 0) {
            lo = mid;
        } else if (s < 0) {
            hi = mid;
        } else {
            return mid; // enclosure straddles zero: mid is a root to evaluation accuracy
        }
    }
    double x0 = lo, x1 = hi;
    double f0 = eval(x0).mid(), f1 = eval(x1).mid();
    double best_x = std::abs(f0) < std::abs(f1) ? x0 : x1;
    double best_f = std::min(std::abs(f0), std::abs(f1));
    for (int step = 0; step < 5; ++step) {
        if (f1 == f0) break;
        const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if (!(x2 > 0.0) || !std::isfinite(x2)) break;
        const double f2 = eval(x2).mid();
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        if (std::abs(f2) < best_f) {
            best_f = std::abs(f2);
            best_x = x2;
        }
    }
    return best_x;
}

} // namespace detail

// Positive root of the dispersion equation.  The bracket starts at 1e-8
// (D > 0 near zero) and doubles the upper end from 1 until D < 0, which the
// lambda/rho_0 term guarantees; bisection to width tol, then secant polish.
inline double find_root(const Orbit& orbit, double tol = 1e-12) {
    detail::require_dispersion_class(orbit, "find_root");
    if (!(tol > 0.0)) throw std::invalid_argument("find_root: tol must be positive");
    const double cf_tol = std::max(1e-15, 1e-3 * tol);
    const auto eval = [&](double x) { return dispersion_interval(x, orbit, cf_tol); };

    double lo = 1e-8;
    const DispersionInterval at_lo = eval(lo);
    if (detail::interval_sign(at_lo) <= 0)
        throw BracketFailureError(
            "find_root: dispersion value not positive at lambda = 1e-8, enclosure [" +
            std::to_string(at_lo.lo) + ", " + std::to_string(at_lo.hi) + "]");

    double hi = 1.0;
    DispersionInterval at_hi = eval(hi);
    while (detail::interval_sign(at_hi) >= 0) {
        if (detail::interval_sign(at_hi) > 0) lo = hi; // tighten the positive end
        hi *= 2.0;
        if (hi > 1e9)
            throw BracketFailureError(
                "find_root: no sign change found up to lambda = 1e9 for orbit class " +
                std::string(to_string(orbit.klass)));
        at_hi = eval(hi);
    }
    return detail::refine_root(lo, hi, tol, eval);
}

// All sign-change roots of D on a logarithmic grid over [1e-6, 1e4] with 2000
// nodes.  Completeness is not claimed: a root is reported for every adjacent
// pair of certainly-signed nodes whose signs differ.
inline std::vector<double> find_roots_scan(const Orbit& orbit, double tol = 1e-9,
                                           int max_depth = 3000) {
    detail::require_dispersion_class(orbit, "find_roots_scan");
    if (!(tol > 0.0)) throw std::invalid_argument("find_roots_scan: tol must be positive");
    const double cf_tol = std::max(1e-15, 1e-3 * tol);
    const auto eval = [&](double x) { return dispersion_interval(x, orbit, cf_tol, max_depth); };

    std::vector<double> roots;
    constexpr int nodes = 2000;
    double prev_x = 0.0;
    int prev_sign = 0;
    for (int i = 0; i < nodes; ++i) {
        const double x = std::pow(10.0, -6.0 + 10.0 * i / (nodes - 1.0));
        const int s = detail::interval_sign(eval(x));
        if (s == 0) continue; // undecidable node; neighbors still flank any crossing
        if (prev_sign != 0 && s != prev_sign) {
            // refine_root expects a positive-to-negative bracket; flip the
            // enclosure when the crossing runs the other way
            const bool downward = prev_sign > 0;
            const auto oriented = [&](double t) {
                const DispersionInterval v = eval(t);
                return downward ? v : DispersionInterval{-v.hi, -v.lo};
            };
            roots.push_back(detail::refine_root(prev_x, x, tol, oriented));
        }
        prev_x = x;
        prev_sign = s;
    }
    return roots;
}

// Eigenvector window built from the one-sided tail sequences.
struct Eigenpair {
    double lambda_star = 0.0;
    long long n_lo = 0, n_hi = 0; // window bounds; w[i] corresponds to n = n_lo + i
    std::vector<double> w;
    std::vector<double> z; // z_n = rho_n w_n away from the boundary exception
    double residual = 0.0;
    double decay_rate = 0.0;
    OrbitClass klass = OrbitClass::TypeI0;

    double w_at(long long n) const {
        if (n < n_lo || n > n_hi) throw std::out_of_range("Eigenpair: index outside window");
        return w[static_cast<size_t>(n - n_lo)];
    }
    double z_at(long long n) const {
        if (n < n_lo || n > n_hi) throw std::out_of_range("Eigenpair: index outside window");
        return z[static_cast<size_t>(n - n_lo)];
    }
};

struct DecayFit {
    double rate = 0.0;          // fitted q in |w_n| <= C q^|n|
    double log_prefactor = 0.0; // fitted log C
    double r_squared = 1.0;
};

// Least-squares fit of log|w_n| against |n| over entries with |n| >= 2,
// skipping exact zeros and underflowed magnitudes.
inline DecayFit fit_decay(const std::vector<double>& w, long long n_lo) {
    std::vector<double> xs, ys;
    for (size_t i = 0; i < w.size(); ++i) {
        const long long n = n_lo + static_cast<long long>(i);
        if (std::llabs(n) < 2) continue;
        const double mag = std::abs(w[i]);
        if (mag < 1e-300) continue;
        xs.push_back(static_cast<double>(std::llabs(n)));
        ys.push_back(std::log(mag));
    }
    DecayFit fit;
    if (xs.size() < 2) {
        fit.rate = 0.0;
        return fit;
    }
    double mean_x = 0.0, mean_y = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= static_cast<double>(xs.size());
    mean_y /= static_cast<double>(xs.size());
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
        sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
        syy += (ys[i] - mean_y) * (ys[i] - mean_y);
    }
    const double slope = sxy / sxx;
    fit.rate = std::exp(slope);
    fit.log_prefactor = mean_y - slope * mean_x;
    fit.r_squared = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

namespace detail {

// Assemble z and w on [-N, N] for a root lambda of the class equation.
inline Eigenpair build_window(double lambda, const Orbit& orbit, long long N, double cf_tol) {
    const auto rho = [&orbit](long long k) { return rho_at(orbit.params, orbit.q_hat, k); };
    const size_t dim = static_cast<size_t>(2 * N + 1);
    const auto idx = [N](long long n) { return static_cast<size_t>(n + N); };

    Eigenpair pair;
    pair.lambda_star = lambda;
    pair.n_lo = -N;
    pair.n_hi = N;
    pair.klass = orbit.klass;
    pair.z.assign(dim, 0.0);
    pair.w.assign(dim, 0.0);
    pair.z[idx(0)] = 1.0;
    pair.w[idx(0)] = 1.0 / rho(0);

    if (orbit.klass == OrbitClass::TypeIPlus) {
        pair.w[idx(1)] = 1.0 / lambda; // z vanishes for n >= 1; the special site
    } else {
        // anchor the tail sequence far out, then recur downward (contractive)
        std::vector<double> u(static_cast<size_t>(N + 1), 0.0);
        u[static_cast<size_t>(N)] = u1(N, lambda, orbit, cf_tol).value;
        for (long long n = N - 1; n >= 1; --n)
            u[static_cast<size_t>(n)] = lambda / rho(n) + 1.0 / u[static_cast<size_t>(n + 1)];
        for (long long n = 1; n <= N; ++n) {
            pair.z[idx(n)] = pair.z[idx(n - 1)] / u[static_cast<size_t>(n)];
            pair.w[idx(n)] = pair.z[idx(n)] / rho(n);
        }
    }

    if (orbit.klass == OrbitClass::TypeIMinus) {
        pair.w[idx(-1)] = -1.0 / lambda; // z vanishes for n <= -1; the special site
    } else {
        // u2 recurs upward from the far anchor (likewise contractive)
        std::vector<double> u(static_cast<size_t>(N + 1), 0.0); // u[i] = u2(-N + i)
        u[0] = u2(-N, lambda, orbit, cf_tol).value;
        for (long long n = -N; n <= -1; ++n)
            u[static_cast<size_t>(n + N + 1)] =
                1.0 / (u[static_cast<size_t>(n + N)] - lambda / rho(n));
        for (long long n = -1; n >= -N; --n) {
            pair.z[idx(n)] = pair.z[idx(n + 1)] * u[static_cast<size_t>(n + N + 1)];
            pair.w[idx(n)] = pair.z[idx(n)] / rho(n);
        }
    }
    return pair;
}

} // namespace detail

// Reconstruct the eigenvector for a dispersion root.  N <= 0 selects the
// automatic window: start at 200 and double until both window-end magnitudes
// drop below 1e-14 of the peak.  The result is sign-normalized (w_1 > 0 when
// significant, else w_{-1} < 0) and scaled to max |w_n| = 1.
inline Eigenpair build_eigenvector(double lambda_star, const Orbit& orbit, long long N = 0,
                                   double tol = 1e-12) {
    detail::require_dispersion_class(orbit, "build_eigenvector");
    if (!(lambda_star > 0.0))
        throw std::invalid_argument("build_eigenvector: lambda_star must be positive");
    if (N > 0 && N < 2) throw std::invalid_argument("build_eigenvector: window needs N >= 2");
    if (!(tol > 0.0)) throw std::invalid_argument("build_eigenvector: tol must be positive");

    const DispersionInterval d = dispersion_interval(lambda_star, orbit, tol);
    const double gap = std::max(std::abs(d.lo), std::abs(d.hi));
    if (gap > 10.0 * tol)
        throw InconsistentRootError(
            "build_eigenvector: |D(lambda)| may reach " + std::to_string(gap) +
            ", exceeding 10 * tol -- lambda does not solve the dispersion equation");

    const double cf_tol = std::max(1e-15, 1e-2 * tol);
    const bool auto_window = (N <= 0);
    long long size = auto_window ? 200 : N;
    for (;;) {
        Eigenpair pair = detail::build_window(lambda_star, orbit, size, cf_tol);

        // global sign, then peak normalization
        double anchor = pair.w_at(1);
        bool flip = false;
        if (std::abs(anchor) >= 1e-300) {
            flip = anchor < 0.0;
        } else {
            flip = pair.w_at(-1) > 0.0;
        }
        double peak = 0.0;
        for (double v : pair.w) peak = std::max(peak, std::abs(v));
        if (peak == 0.0)
            throw InconsistentRootError("build_eigenvector: window collapsed to zero");
        const double scale = (flip ? -1.0 : 1.0) / peak;
        for (auto& v : pair.w) v *= scale;
        for (auto& v : pair.z) v *= scale;

        const bool tails_resolved =
            std::abs(pair.w.front()) < 1e-14 && std::abs(pair.w.back()) < 1e-14;
        if (!auto_window || tails_resolved) {
            pair.residual = residual(lambda_star, pair.w, pair.n_lo, orbit);
            const DecayFit fit = fit_decay(pair.w, pair.n_lo);
            pair.decay_rate = fit.rate;
            if (!(pair.decay_rate < 1.0))
                throw InconsistentRootError(
                    "build_eigenvector: window does not decay (fitted rate " +
                    std::to_string(pair.decay_rate) + ")");
            return pair;
        }
        if (size >= 102400)
            throw std::runtime_error(
                "build_eigenvector: automatic window growth did not terminate");
        size *= 2;
    }
}

// True iff w (or -w) matches the class sign pattern on the whole window.
// Entries with magnitude below 1e-300 carry no sign information and are
// ignored; positions the pattern requires to vanish must stay below that
// floor.  An all-insignificant window never matches.
inline bool verify_sign_pattern(const Eigenpair& pair) {
    if (!is_type_I(pair.klass)) return false;
    if (pair.w.size() != static_cast<size_t>(pair.n_hi - pair.n_lo + 1)) return false;
    const auto expected = [&pair](long long n) -> int {
        switch (pair.klass) {
            case OrbitClass::TypeI0:
                if (n > 0) return +1;
                if (n == 0) return -1;
                return (std::llabs(n) % 2 == 0) ? +1 : -1;
            case OrbitClass::TypeIPlus:
                if (n > 1) return 0;
                if (n == 1) return +1;
                if (n == 0) return -1;
                return (std::llabs(n) % 2 == 0) ? +1 : -1;
            case OrbitClass::TypeIMinus:
                if (n > 0) return +1;
                if (n == 0 || n == -1) return -1;
                return 0;
            default:
                return 0;
        }
    };
    int global = 0;
    for (long long n = pair.n_lo; n <= pair.n_hi; ++n) {
        const double v = pair.w[static_cast<size_t>(n - pair.n_lo)];
        const int e = expected(n);
        if (std::abs(v) < 1e-300) continue;
        if (e == 0) return false;
        const int agreement = ((v > 0.0) == (e > 0)) ? 1 : -1;
        if (global == 0) global = agreement;
        else if (agreement != global) return false;
    }
    return global != 0;
}

} // namespace alphaflow
