// Bracketed continued-fraction evaluation.
//
// Fractions here take the "all partial numerators one" form
//   [d1, d2, d3, ...] = 1 / (d1 + 1 / (d2 + 1 / (d3 + ...)))
// with positive partial denominators d_k = x * c_k, where the coefficient
// stream satisfies c_k -> 1.  Even-depth convergents increase and odd-depth
// convergents decrease toward the value, so every evaluation carries a
// rigorous two-sided bracket.  When the stream additionally certifies its
// tail deviation sup_{k>m} |c_k - 1|, the periodic-fraction envelope pins the
// unresolved tail value and collapses the bracket at small x, where plain
// convergents close only like exp(-k x).
//
// On top of the generic evaluator sit the orbit fractions used by the
// dispersion equation: f and g (the two coefficient tails of a lattice
// orbit) and the ratio sequences u1, u2 from which eigenvector entries are
// rebuilt.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "alphaflow/lattice.hpp"

namespace alphaflow {

// Finite fraction [a1, ..., ak] by backward recurrence.
inline double eval_finite(const std::vector<double>& partials) {
    if (partials.empty()) throw std::invalid_argument("eval_finite: empty fraction");
    double tail = 0.0;
    for (size_t i = partials.size(); i-- > 0;) {
        const double denom = partials[i] + tail;
        if (denom == 0.0)
            throw std::domain_error("eval_finite: zero denominator at depth " +
                                    std::to_string(i + 1));
        tail = 1.0 / denom;
    }
    return tail;
}

// Limit of the constant fraction [x, x, x, ...]; the positive root of
// G (G + x) = 1, written in the cancellation-free form.
inline double G_inf(double x) {
    if (!(x >= 0.0)) throw std::domain_error("G_inf: x must be nonnegative");
    return 1.0 / (std::sqrt(0.25 * x * x + 1.0) + 0.5 * x);
}

// Limit of the two-periodic fraction [a, b, a, b, ...]; the positive root of
// a F^2 + a b F - b = 0.
inline double F_closed(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("F_closed: arguments must be positive");
    const double r = b / a;
    return r / (std::sqrt(0.25 * b * b + r) + 0.5 * b);
}

// Two-sided bounds for any fraction [x c1, x c2, ...] whose coefficients stay
// within [1-delta, 1+delta]: the extreme values are reached by the
// two-periodic fractions that alternate the coefficient bounds.
inline std::pair<double, double> envelope(double x, double delta) {
    if (!(x > 0.0)) throw std::domain_error("envelope: x must be positive");
    if (!(delta > 0.0) || !(delta < 1.0))
        throw std::domain_error("envelope: delta must lie in (0,1)");
    return {F_closed(x * (1.0 + delta), x * (1.0 - delta)),
            F_closed(x * (1.0 - delta), x * (1.0 + delta))};
}

// Partial-denominator coefficients for the bracketing evaluator.
//
//   at(k)          coefficient c_k for k >= 1; must be positive.
//   tail_delta(m)  optional certificate: sup_{k > m} |c_k - 1|.  Enables the
//                  envelope tail clamp.  Builders below supply it only when
//                  the deviation sequence is provably non-increasing.
//   monotone_from  first index from which |c_k - 1| is declared
//                  non-increasing; the evaluator cross-checks the declaration
//                  on every prefix it consumes.
struct CoefficientStream {
    std::function<double(int)> at;
    std::function<double(int)> tail_delta;
    int monotone_from = std::numeric_limits<int>::max();
};

inline CoefficientStream constant_stream(double c = 1.0) {
    CoefficientStream s;
    s.at = [c](int) { return c; };
    s.tail_delta = [c](int) { return std::abs(c - 1.0); };
    s.monotone_from = 1;
    return s;
}

// Stream c_k = 1 / rho(base + step * k).  Callers must pick (base, step) so
// that |1/rho - 1| is non-increasing along the tail; orbit coefficient tails
// have this property because the point norms grow monotonically away from
// the canonical representative.
template <class Rho>
inline CoefficientStream reciprocal_tail_stream(Rho rho, long long base, long long step) {
    CoefficientStream s;
    s.at = [rho, base, step](int k) {
        const long long index = base + step * static_cast<long long>(k);
        const double r = rho(index);
        if (r == 0.0)
            throw std::domain_error("coefficient stream: rho vanishes at orbit index " +
                                    std::to_string(index));
        return 1.0 / r;
    };
    s.tail_delta = [rho, base, step](int m) {
        const double r = rho(base + step * static_cast<long long>(m + 1));
        if (!(r > 0.0)) return std::numeric_limits<double>::infinity();
        return std::abs(1.0 / r - 1.0);
    };
    s.monotone_from = 1;
    return s;
}

struct CFResult {
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    int depth = 0;
    bool converged = false;
};

class NonConvergenceError : public std::runtime_error {
  public:
    NonConvergenceError(double lower_, double upper_, int depth_, double tol_)
        : std::runtime_error(format(lower_, upper_, depth_, tol_)),
          lower(lower_),
          upper(upper_),
          depth(depth_) {}

    double lower;
    double upper;
    int depth;

  private:
    static std::string format(double lower_, double upper_, int depth_, double tol_) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "continued fraction bracket [" << lower_ << ", " << upper_ << "] is wider than "
            << tol_ << " after " << depth_ << " terms";
        return msg.str();
    }
};

// Bracketed value of [x c1, x c2, ...] by the forward convergent recurrence.
// Stops once the running bracket (even/odd convergents intersected with the
// envelope tail clamp, when available) is no wider than tol; throws
// NonConvergenceError with the bracket reached otherwise.
inline CFResult G(double x, const CoefficientStream& stream, double tol = 1e-12,
                  int max_depth = 10000) {
    if (!(x > 0.0)) throw std::domain_error("G: x must be positive");
    if (!(tol > 0.0)) throw std::domain_error("G: tolerance must be positive");
    if (!stream.at) throw std::invalid_argument("G: stream has no coefficient callback");

    double num_prev = 1.0, num = 0.0; // convergent numerators at depth k-1, k
    double den_prev = 0.0, den = 1.0; // convergent denominators
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    double prev_dev = std::numeric_limits<double>::infinity();

    for (int k = 1; k <= max_depth; ++k) {
        const double ck = stream.at(k);
        if (!(ck > 0.0))
            throw std::domain_error("G: non-positive coefficient at index " + std::to_string(k));
        if (k >= stream.monotone_from) {
            const double dev = std::abs(ck - 1.0);
            if (k > stream.monotone_from && dev > prev_dev * (1.0 + 1e-12) + 1e-15)
                throw std::logic_error(
                    "G: coefficient deviations increase inside the declared-monotone tail at "
                    "index " +
                    std::to_string(k));
            prev_dev = dev;
        }

        const double dk = x * ck;
        const double num_next = dk * num + num_prev;
        const double den_next = dk * den + den_prev;
        num_prev = num;
        num = num_next;
        den_prev = den;
        den = den_next;
        if (std::abs(num) > 1e150 || std::abs(den) > 1e150) {
            num_prev *= 1e-150;
            num *= 1e-150;
            den_prev *= 1e-150;
            den *= 1e-150;
        }

        const double convergent = num / den;
        if (k % 2 == 0)
            lower = std::max(lower, convergent);
        else
            upper = std::min(upper, convergent);

        if (stream.tail_delta) {
            const double delta = stream.tail_delta(k);
            if (delta >= 0.0 && delta < 1.0) {
                // replace the unevaluated tail t = [x c_{k+1}, ...] by its
                // envelope bracket; the value is a Mobius image of t
                const double t_lo =
                    delta == 0.0 ? G_inf(x) : F_closed(x * (1.0 + delta), x * (1.0 - delta));
                const double t_hi =
                    delta == 0.0 ? t_lo : F_closed(x * (1.0 - delta), x * (1.0 + delta));
                const double at_lo = (num + t_lo * num_prev) / (den + t_lo * den_prev);
                const double at_hi = (num + t_hi * num_prev) / (den + t_hi * den_prev);
                lower = std::max(lower, std::min(at_lo, at_hi));
                upper = std::min(upper, std::max(at_lo, at_hi));
            }
        }

        if (upper - lower <= tol) {
            CFResult r;
            r.lower = lower;
            r.upper = upper;
            r.value = 0.5 * (lower + upper);
            r.depth = k;
            r.converged = true;
            return r;
        }
    }
    throw NonConvergenceError(lower, upper, max_depth, tol);
}

namespace detail {

inline std::function<double(long long)> orbit_rho(const Orbit& orbit) {
    return [params = orbit.params, q = orbit.q_hat](long long n) { return rho_at(params, q, n); };
}

} // namespace detail

// Forward coefficient tail f(lambda) = [lambda/rho_1, lambda/rho_2, ...].
inline CFResult f_of_lambda(double lambda, const Orbit& orbit, double tol = 1e-12,
                            int max_depth = 10000) {
    if (!(lambda > 0.0)) throw std::domain_error("f_of_lambda: lambda must be positive");
    if (orbit.klass == OrbitClass::TypeIPlus)
        throw std::domain_error("f_of_lambda: rho[1] vanishes for this orbit, f is undefined");
    return G(lambda, reciprocal_tail_stream(detail::orbit_rho(orbit), 0, +1), tol, max_depth);
}

// Backward coefficient tail g(lambda) = [lambda/rho_-1, lambda/rho_-2, ...].
inline CFResult g_of_lambda(double lambda, const Orbit& orbit, double tol = 1e-12,
                            int max_depth = 10000) {
    if (!(lambda > 0.0)) throw std::domain_error("g_of_lambda: lambda must be positive");
    if (orbit.klass == OrbitClass::TypeIMinus)
        throw std::domain_error("g_of_lambda: rho[-1] vanishes for this orbit, g is undefined");
    return G(lambda, reciprocal_tail_stream(detail::orbit_rho(orbit), 0, -1), tol, max_depth);
}

// Ratio sequence from the right: u1(n) = lambda/rho_n + [lambda/rho_{n+1}, ...]
// for n >= 0.  Satisfies u1(n) = lambda/rho_n + 1/u1(n+1).
template <class Rho>
inline CFResult u1_with(Rho rho, long long n, double lambda, double tol = 1e-12,
                        int max_depth = 10000) {
    if (n < 0) throw std::domain_error("u1: index must be >= 0");
    const double rho_n = rho(n);
    if (rho_n == 0.0)
        throw std::domain_error("u1: rho vanishes at index " + std::to_string(n));
    CFResult r = G(lambda, reciprocal_tail_stream(rho, n, +1), tol, max_depth);
    const double head = lambda / rho_n;
    r.value += head;
    r.lower += head;
    r.upper += head;
    return r;
}

// Ratio sequence from the left: u2(n) = -[lambda/rho_{n-1}, lambda/rho_{n-2}, ...]
// for n <= 0.  Satisfies u2(n+1) = 1/(u2(n) - lambda/rho_n).
template <class Rho>
inline CFResult u2_with(Rho rho, long long n, double lambda, double tol = 1e-12,
                        int max_depth = 10000) {
    if (n > 0) throw std::domain_error("u2: index must be <= 0");
    const CFResult tail = G(lambda, reciprocal_tail_stream(rho, n, -1), tol, max_depth);
    CFResult r;
    r.value = -tail.value;
    r.lower = -tail.upper;
    r.upper = -tail.lower;
    r.depth = tail.depth;
    r.converged = tail.converged;
    return r;
}

inline CFResult u1(long long n, double lambda, const Orbit& orbit, double tol = 1e-12,
                   int max_depth = 10000) {
    if (!(lambda > 0.0)) throw std::domain_error("u1: lambda must be positive");
    if (orbit.klass == OrbitClass::TypeIPlus)
        throw std::domain_error("u1: rho[1] vanishes for this orbit, u1 is undefined");
    return u1_with(detail::orbit_rho(orbit), n, lambda, tol, max_depth);
}

inline CFResult u2(long long n, double lambda, const Orbit& orbit, double tol = 1e-12,
                   int max_depth = 10000) {
    if (!(lambda > 0.0)) throw std::domain_error("u2: lambda must be positive");
    if (orbit.klass == OrbitClass::TypeIMinus)
        throw std::domain_error("u2: rho[-1] vanishes for this orbit, u2 is undefined");
    return u2_with(detail::orbit_rho(orbit), n, lambda, tol, max_depth);
}

} // namespace alphaflow
