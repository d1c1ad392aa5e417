#pragma once

// Integer-lattice geometry for unidirectional flows on the 2-torus.
//
// A base mode p and an amplitude Gamma define a steady vorticity field whose
// linearization decouples over lattice orbits {q + n*p : n in Z}.  This header
// provides the exact-arithmetic orbit machinery: wedge products, interaction
// coefficients beta, orbit reduction to a canonical minimizer, classification
// by the number of orbit points strictly inside the disc of radius ||p||, and
// the normalized coefficient windows rho_n = 1 + gamma_n consumed by the
// dispersion and truncation modules.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace alphaflow {

using Vec2 = std::array<long long, 2>;

inline long long dot(const Vec2& a, const Vec2& b) noexcept {
    return a[0] * b[0] + a[1] * b[1];
}

inline long long norm2(const Vec2& v) noexcept { return dot(v, v); }

inline Vec2 add(const Vec2& a, const Vec2& b) noexcept { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 sub(const Vec2& a, const Vec2& b) noexcept { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 scale(long long s, const Vec2& v) noexcept { return {s * v[0], s * v[1]}; }
inline Vec2 neg(const Vec2& v) noexcept { return {-v[0], -v[1]}; }
inline bool is_zero(const Vec2& v) noexcept { return v[0] == 0 && v[1] == 0; }

// Signed area p1*q2 - q1*p2 (antisymmetric; zero iff p, q are collinear).
inline long long wedge(const Vec2& p, const Vec2& q) noexcept {
    return p[0] * q[1] - q[0] * p[1];
}

// Inverse symbol of the filtered Biot-Savart kernel: s * (1 + alpha^2 * s)
// evaluated at s = ||k||^2.  Strictly increasing in s for alpha >= 0.
inline double alpha_weight(long long k_norm2, double alpha) noexcept {
    const double s = static_cast<double>(k_norm2);
    return s * (1.0 + alpha * alpha * s);
}

// Mode-interaction coefficient of the vorticity convolution:
//   beta(p, q) = 1/2 * (1/w(q) - 1/w(p)) * (p wedge q),  w(k) = ||k||^2 (1 + alpha^2 ||k||^2),
// and zero when either argument vanishes.  Symmetric in (p, q); flips sign
// under negating one argument.
inline double beta(const Vec2& p, const Vec2& q, double alpha) noexcept {
    if (is_zero(p) || is_zero(q)) return 0.0;
    const double wp = alpha_weight(norm2(p), alpha);
    const double wq = alpha_weight(norm2(q), alpha);
    return 0.5 * (1.0 / wq - 1.0 / wp) * static_cast<double>(wedge(p, q));
}

struct FlowParams {
    Vec2 p{};                             // base wave vector, nonzero
    double alpha = 0.0;                   // filter length scale, >= 0
    std::complex<double> gamma{1.0, 0.0}; // mode amplitude, nonzero

    void validate() const {
        if (is_zero(p)) throw std::invalid_argument("FlowParams: base mode p must be nonzero");
        if (!(alpha >= 0.0)) throw std::invalid_argument("FlowParams: alpha must be >= 0");
        if (gamma == std::complex<double>(0.0, 0.0))
            throw std::invalid_argument("FlowParams: gamma must be nonzero");
    }

    bool gamma_is_real() const noexcept { return gamma.imag() == 0.0; }
};

// Orbit classes, by the number of orbit points strictly inside the open disc
// of radius ||p||: zero (Type0), one (TypeI*), or two (TypeII).  The single
// inside point of a type-I orbit is the minimizer q_hat; the subtype records
// whether a neighbor q_hat +/- p sits exactly on the circle ||k|| = ||p||.
enum class OrbitClass { Type0, TypeI0, TypeIPlus, TypeIMinus, TypeII };

inline const char* to_string(OrbitClass k) noexcept {
    switch (k) {
        case OrbitClass::Type0: return "0";
        case OrbitClass::TypeI0: return "I0";
        case OrbitClass::TypeIPlus: return "I+";
        case OrbitClass::TypeIMinus: return "I-";
        case OrbitClass::TypeII: return "II";
    }
    return "?";
}

inline bool is_type_I(OrbitClass k) noexcept {
    return k == OrbitClass::TypeI0 || k == OrbitClass::TypeIPlus || k == OrbitClass::TypeIMinus;
}

struct Orbit {
    FlowParams params;
    Vec2 q_hat{};      // canonical representative: minimal norm, ties -> largest n
    long long n_max = 0; // shift applied to the input q (q_hat = q + n_max * p)
    OrbitClass klass = OrbitClass::Type0;

    Vec2 point(long long n) const noexcept { return add(q_hat, scale(n, params.p)); }
};

// Canonical form produced by minimize_orbit: the +p neighbor is strictly
// longer, the -p neighbor at least as long (so a tied pair is represented by
// its later point).
inline bool is_canonical_representative(const Vec2& p, const Vec2& q_hat) noexcept {
    const long long n0 = norm2(q_hat);
    return norm2(add(q_hat, p)) > n0 && norm2(sub(q_hat, p)) >= n0;
}

// Classify an orbit by counting lattice points of {q_hat + n p} strictly
// inside the open disc of radius ||p||.  For a canonical representative only
// n in {-1, 0, +1} can lie inside (the squared norm is a convex quadratic in
// n with real vertex within 1/2 of zero), so the count uses exact integer
// comparisons on those three points.
inline OrbitClass classify(const FlowParams& params, const Vec2& q_hat) {
    params.validate();
    if (is_zero(q_hat)) throw std::invalid_argument("classify: orbit through the origin");
    if (!is_canonical_representative(params.p, q_hat))
        throw std::invalid_argument("classify: q_hat is not a canonical orbit minimizer");

    const long long p2 = norm2(params.p);
    const long long c0 = norm2(q_hat);
    const long long cp = norm2(add(q_hat, params.p));
    const long long cm = norm2(sub(q_hat, params.p));

    const int inside = (c0 < p2 ? 1 : 0) + (cp < p2 ? 1 : 0) + (cm < p2 ? 1 : 0);
    switch (inside) {
        case 0: return OrbitClass::Type0;
        case 1:
            // the single inside point is q_hat itself (its norm is minimal)
            if (cp == p2) return OrbitClass::TypeIPlus;
            if (cm == p2) return OrbitClass::TypeIMinus;
            return OrbitClass::TypeI0;
        case 2: return OrbitClass::TypeII;
        default:
            throw std::logic_error("classify: more than two orbit points inside the disc");
    }
}

// Reduce q to the canonical orbit representative.  Errors out when the orbit
// passes through the origin (q a multiple of p): that orbit carries no
// dynamics and has no well-defined coefficients.
inline Orbit minimize_orbit(const FlowParams& params, const Vec2& q) {
    params.validate();
    if (is_zero(q)) throw std::invalid_argument("minimize_orbit: q must be nonzero");
    if (wedge(params.p, q) == 0) {
        // collinear: reject exact multiples (orbit hits the origin)
        const long long px = params.p[0], py = params.p[1];
        const long long num = (px != 0) ? q[0] : q[1];
        const long long den = (px != 0) ? px : py;
        if (num % den == 0) {
            const long long n = num / den;
            if (q[0] == n * px && q[1] == n * py)
                throw std::invalid_argument("minimize_orbit: orbit passes through the origin");
        }
    }

    // ||q + n p||^2 is strictly convex in n; the integer minimizer lies within
    // one of the real vertex.  Scan a safe window around it.
    const double t_star = -static_cast<double>(dot(q, params.p)) / static_cast<double>(norm2(params.p));
    const long long n_center = llround(t_star);
    long long best_n = n_center - 2;
    long long best_norm = norm2(add(q, scale(best_n, params.p)));
    for (long long n = n_center - 1; n <= n_center + 2; ++n) {
        const long long cand = norm2(add(q, scale(n, params.p)));
        if (cand < best_norm || (cand == best_norm && n > best_n)) {
            best_norm = cand;
            best_n = n;
        }
    }

    Orbit orbit;
    orbit.params = params;
    orbit.q_hat = add(q, scale(best_n, params.p));
    orbit.n_max = best_n;
    orbit.klass = classify(params, orbit.q_hat);
    return orbit;
}

// Normalized coefficient at orbit index n:
//   rho_n = 1 + gamma_n,  gamma_n = -w(p) / w(q_hat + n p),
// where w is alpha_weight of the squared norm.  rho_n is exactly 0 when
// ||q_hat + n p|| = ||p|| and negative exactly when the point lies strictly
// inside the disc.  Independent of Gamma.
inline double rho_at(const FlowParams& params, const Vec2& q_hat, long long n) {
    const long long qn2 = norm2(add(q_hat, scale(n, params.p)));
    if (qn2 == 0) throw std::invalid_argument("rho_at: orbit passes through the origin");
    if (qn2 == norm2(params.p)) return 0.0; // exact boundary point
    return 1.0 - alpha_weight(norm2(params.p), params.alpha) / alpha_weight(qn2, params.alpha);
}

struct CoefficientWindow {
    long long n_lo = 0, n_hi = 0;   // inclusive index range
    std::vector<double> rho;        // rho[n - n_lo]
    std::vector<double> gamma;      // gamma[n - n_lo] = rho - 1
    double c = 0.0;                 // amplitude normalization (signed for real Gamma)

    bool contains(long long n) const noexcept { return n >= n_lo && n <= n_hi; }
    double rho_at(long long n) const {
        if (!contains(n)) throw std::out_of_range("CoefficientWindow: index outside window");
        return rho[static_cast<size_t>(n - n_lo)];
    }
    double gamma_at(long long n) const {
        if (!contains(n)) throw std::out_of_range("CoefficientWindow: index outside window");
        return gamma[static_cast<size_t>(n - n_lo)];
    }
    long long size() const noexcept { return n_hi - n_lo + 1; }
};

// Amplitude normalization |c| = |Gamma (q wedge p)| / (2 w(p)).  Orbit
// invariant: wedge(q + n p, p) = wedge(q, p).
inline double normalization_constant(const FlowParams& params, const Vec2& q) {
    params.validate();
    return std::abs(params.gamma) * std::abs(static_cast<double>(wedge(q, params.p))) /
           (2.0 * alpha_weight(norm2(params.p), params.alpha));
}

// Normalized coefficient window over [n_lo, n_hi].  The stored c is the
// signed scale for real Gamma (the physical orbit operator is c times the
// normalized one); for complex Gamma its magnitude is stored.
inline CoefficientWindow coefficients(const FlowParams& params, const Orbit& orbit,
                                      long long n_lo, long long n_hi) {
    params.validate();
    if (n_lo > n_hi) throw std::invalid_argument("coefficients: empty window");
    if (wedge(params.p, orbit.q_hat) == 0)
        throw std::invalid_argument("coefficients: orbit collinear with p carries no dynamics");

    CoefficientWindow win;
    win.n_lo = n_lo;
    win.n_hi = n_hi;
    win.rho.reserve(static_cast<size_t>(n_hi - n_lo + 1));
    win.gamma.reserve(static_cast<size_t>(n_hi - n_lo + 1));
    for (long long n = n_lo; n <= n_hi; ++n) {
        const double r = rho_at(params, orbit.q_hat, n);
        win.rho.push_back(r);
        win.gamma.push_back(r - 1.0);
    }
    const double denom = 2.0 * alpha_weight(norm2(params.p), params.alpha);
    const double w = static_cast<double>(wedge(orbit.q_hat, params.p));
    win.c = params.gamma_is_real() ? params.gamma.real() * w / denom
                                   : std::abs(params.gamma) * std::abs(w) / denom;
    return win;
}

namespace detail {
// Deterministic scan order for candidate q: by (||q||^2, q1, q2).
struct QOrder {
    bool operator()(const Vec2& a, const Vec2& b) const noexcept {
        const long long na = norm2(a), nb = norm2(b);
        if (na != nb) return na < nb;
        if (a[0] != b[0]) return a[0] < b[0];
        return a[1] < b[1];
    }
};
} // namespace detail

// First type-I orbit representative in the deterministic (||q||^2, q1, q2)
// order over integer q strictly inside the disc ||q|| < ||p|| (collinear q
// excluded).  A type-I orbit meets the open disc exactly in its minimizer, so
// scanning the disc finds every type-I orbit.
inline std::optional<Orbit> find_typeI(const FlowParams& params) {
    params.validate();
    const long long p2 = norm2(params.p);
    const long long r = static_cast<long long>(std::floor(std::sqrt(static_cast<double>(p2)))) + 1;

    std::vector<Vec2> candidates;
    for (long long x = -r; x <= r; ++x)
        for (long long y = -r; y <= r; ++y) {
            const Vec2 q{x, y};
            if (is_zero(q) || norm2(q) >= p2 || wedge(params.p, q) == 0) continue;
            candidates.push_back(q);
        }
    std::sort(candidates.begin(), candidates.end(), detail::QOrder{});

    for (const Vec2& q : candidates) {
        Orbit orbit = minimize_orbit(params, q);
        if (is_type_I(orbit.klass)) return orbit;
    }
    return std::nullopt;
}

// All distinct orbit representatives with ||q_hat||^2 <= r2max, in the
// deterministic order.  Collinear orbits are skipped unless requested (their
// orbit operator vanishes identically).
inline std::vector<Orbit> orbit_representatives(const FlowParams& params, long long r2max,
                                                bool include_collinear = false) {
    params.validate();
    std::set<Vec2, detail::QOrder> seen;
    std::vector<Orbit> reps;
    const long long r = static_cast<long long>(std::floor(std::sqrt(static_cast<double>(r2max)))) + 1;
    std::vector<Vec2> candidates;
    for (long long x = -r; x <= r; ++x)
        for (long long y = -r; y <= r; ++y) {
            const Vec2 q{x, y};
            if (is_zero(q) || norm2(q) > r2max) continue;
            candidates.push_back(q);
        }
    std::sort(candidates.begin(), candidates.end(), detail::QOrder{});

    for (const Vec2& q : candidates) {
        const bool collinear = wedge(params.p, q) == 0;
        if (collinear && !include_collinear) continue;
        Orbit orbit;
        try {
            orbit = minimize_orbit(params, q);
        } catch (const std::invalid_argument&) {
            continue; // orbit through the origin
        }
        if (norm2(orbit.q_hat) > r2max) continue;
        if (seen.insert(orbit.q_hat).second) reps.push_back(orbit);
    }
    return reps;
}

} // namespace alphaflow
