// Continued-fraction evaluation: finite backward evaluation, bracketed
// forward evaluation with the periodic-fraction envelope clamp, closed forms,
// and the orbit-coefficient fractions f, g, u1, u2 built on top of them.
// Closed-form targets are exact algebra; deep truncations serve as
// independent oracles for the bracketing evaluator.

#include <catch2/catch_amalgamated.hpp>

#include <alphaflow/contfrac.hpp>
#include <alphaflow/lattice.hpp>

#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <vector>

using namespace alphaflow;

namespace {

FlowParams make_params(long long p1, long long p2, double alpha = 0.0) {
    FlowParams params;
    params.p = {p1, p2};
    params.alpha = alpha;
    params.gamma = 1.0;
    return params;
}

Orbit make_orbit(long long p1, long long p2, long long q1, long long q2, double alpha = 0.0) {
    return minimize_orbit(make_params(p1, p2, alpha), {q1, q2});
}

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

} // namespace

TEST_CASE("eval_finite evaluates short fractions exactly") {
    CHECK(eval_finite({1.0}) == 1.0);
    CHECK(eval_finite({1.0, 1.0}) == 0.5);
    CHECK(eval_finite({1.0, 1.0, 1.0}) == Catch::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(eval_finite({2.0, 3.0}) == Catch::Approx(3.0 / 7.0).epsilon(1e-15));
}

TEST_CASE("eval_finite depth-20 twos reach sqrt(2)-1") {
    const std::vector<double> twos(20, 2.0);
    CHECK(std::abs(eval_finite(twos) - (std::sqrt(2.0) - 1.0)) < 1e-6);
}

TEST_CASE("eval_finite consecutive Fibonacci ratios from all-ones prefixes") {
    // [1,1,...,1] of length k is F_k / F_{k+1}
    std::vector<double> ones;
    double fib_prev = 1.0, fib = 1.0; // F_1, F_2
    for (int k = 1; k <= 25; ++k) {
        ones.push_back(1.0);
        CHECK(eval_finite(ones) == Catch::Approx(fib_prev / fib).epsilon(1e-14));
        const double next = fib + fib_prev;
        fib_prev = fib;
        fib = next;
    }
}

TEST_CASE("eval_finite rejects empty input and zero denominators") {
    CHECK_THROWS_AS(eval_finite({}), std::invalid_argument);
    // [1, -1]: the inner step yields -1, then 1 + (-1) = 0 at depth 1
    CHECK_THROWS_AS(eval_finite({1.0, -1.0}), std::domain_error);
    CHECK_THROWS_WITH(eval_finite({1.0, -1.0}),
                      Catch::Matchers::ContainsSubstring("depth 1"));
}

TEST_CASE("G_inf closed form") {
    CHECK(G_inf(0.0) == 1.0);
    CHECK(G_inf(1.5) == Catch::Approx(0.5).epsilon(1e-15));
    CHECK(G_inf(2.0) == Catch::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-15));

    SECTION("solves G(G + x) = 1 and decreases in x") {
        double prev = 2.0;
        for (double x : {1e-4, 0.01, 0.5, 1.0, 3.0, 10.0, 250.0}) {
            const double g = G_inf(x);
            CHECK(std::abs(g * (g + x) - 1.0) < 1e-14);
            CHECK(g < prev);
            CHECK(g > 0.0);
            prev = g;
        }
    }
}

TEST_CASE("F_closed periodic-fraction limit") {
    CHECK(F_closed(1.0, 1.0) == Catch::Approx(kGolden).margin(1e-12));

    SECTION("equal arguments reduce to the constant fraction") {
        for (double x : {0.5, 1.0, 2.0}) {
            CHECK(F_closed(x, x) == Catch::Approx(G_inf(x)).margin(1e-15));
        }
    }

    SECTION("agrees with a deep finite truncation of [a,b,a,b,...]") {
        std::vector<double> partials;
        for (int i = 0; i < 30; ++i) {
            partials.push_back(2.0);
            partials.push_back(3.0);
        }
        CHECK(std::abs(F_closed(2.0, 3.0) - eval_finite(partials)) < 1e-10);
    }

    SECTION("satisfies a F^2 + a b F - b = 0") {
        std::mt19937_64 rng(20250818u);
        std::uniform_real_distribution<double> dist(0.05, 20.0);
        for (int trial = 0; trial < 200; ++trial) {
            const double a = dist(rng), b = dist(rng);
            const double f = F_closed(a, b);
            const double residual = a * f * f + a * b * f - b;
            CHECK(std::abs(residual) < 1e-12 * (1.0 + a * b + b));
            CHECK(f > 0.0);
        }
    }
}

TEST_CASE("envelope brackets the constant-coefficient limit") {
    SECTION("tightens to G_inf as delta -> 0") {
        const auto [a, b] = envelope(1.0, 1e-9);
        CHECK(std::abs(a - G_inf(1.0)) < 1e-7);
        CHECK(std::abs(b - G_inf(1.0)) < 1e-7);
    }

    SECTION("ordering A <= G_inf <= B on a grid") {
        for (double x : {0.1, 1.0, 10.0}) {
            for (double delta : {0.1, 0.5, 0.9}) {
                const auto [a, b] = envelope(x, delta);
                CHECK(a <= b);
                CHECK(a <= G_inf(x));
                CHECK(G_inf(x) <= b);
                CHECK(a > 0.0);
            }
        }
    }

    SECTION("bounds any fraction whose coefficients stay within 1 +/- delta") {
        std::mt19937_64 rng(777u);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        for (double x : {0.3, 1.0, 4.0}) {
            for (double delta : {0.05, 0.3, 0.6}) {
                // frozen random coefficient table, no tail metadata: the
                // evaluator must bracket by plain even/odd convergents alone
                auto coeffs = std::make_shared<std::vector<double>>();
                for (int k = 0; k < 4000; ++k) coeffs->push_back(1.0 + delta * unit(rng));
                CoefficientStream stream;
                stream.at = [coeffs](int k) { return (*coeffs)[static_cast<size_t>(k - 1)]; };
                const CFResult r = G(x, stream, 1e-10, 4000);
                const auto [a, b] = envelope(x, delta);
                CHECK(r.value >= a - 1e-9);
                CHECK(r.value <= b + 1e-9);
            }
        }
    }

    SECTION("rejects delta outside (0,1)") {
        CHECK_THROWS_AS(envelope(1.0, 0.0), std::domain_error);
        CHECK_THROWS_AS(envelope(1.0, 1.0), std::domain_error);
        CHECK_THROWS_AS(envelope(1.0, -0.5), std::domain_error);
    }
}

TEST_CASE("G with constant coefficients matches the closed form") {
    const CoefficientStream ones = constant_stream(1.0);

    SECTION("exact value at x = 3/2") {
        const CFResult r = G(1.5, ones, 1e-12, 10000);
        CHECK(r.converged);
        CHECK(std::abs(r.value - 0.5) < 1e-13);
        CHECK(r.lower <= r.value);
        CHECK(r.value <= r.upper);
        CHECK(r.upper - r.lower <= 1e-12);
    }

    SECTION("log grid [1e-3, 1e3] within 2e-12 of G_inf") {
        for (int i = 0; i <= 60; ++i) {
            const double x = std::pow(10.0, -3.0 + 6.0 * i / 60.0);
            const CFResult r = G(x, ones, 1e-12, 10000);
            CHECK(r.converged);
            CHECK(std::abs(r.value - G_inf(x)) < 2e-12);
        }
    }

    SECTION("small-x limit via the tail clamp") {
        const CFResult r = G(1e-6, ones, 1e-4, 10000);
        CHECK(r.converged);
        CHECK(std::abs(r.value - 1.0) < 1e-3);
        // the plain bracket closes like exp(-k x); finite depth cannot reach
        // this tolerance without the envelope clamp
        CHECK(r.depth < 1000);
    }
}

TEST_CASE("G cross-checks against backward evaluation of its prefixes") {
    // a slowly varying positive stream without tail metadata
    CoefficientStream stream;
    stream.at = [](int k) { return 1.0 + 0.5 / (k + 1.0); };
    const double x = 1.3;

    const CFResult r = G(x, stream, 1e-12, 10000);
    CHECK(r.converged);

    // even prefixes increase, odd prefixes decrease, and both enclose G
    double even_best = 0.0, odd_best = std::numeric_limits<double>::infinity();
    std::vector<double> partials;
    for (int k = 1; k <= 25; ++k) {
        partials.push_back(x * stream.at(k));
        const double ck = eval_finite(partials);
        if (k % 2 == 0) {
            CHECK(ck > even_best);
            even_best = ck;
        } else {
            CHECK(ck < odd_best);
            odd_best = ck;
        }
        CHECK(even_best < odd_best);
        // every truncation bounds the true value, which lies in r's bracket
        if (k % 2 == 0) CHECK(ck <= r.upper + 1e-15);
        else CHECK(ck >= r.lower - 1e-15);
    }
    CHECK(r.value > even_best - 1e-12);
    CHECK(r.value < odd_best + 1e-12);
}

TEST_CASE("G failure modes") {
    SECTION("non-positive coefficient reported with its index") {
        CoefficientStream bad;
        bad.at = [](int k) { return k == 5 ? -1.0 : 1.0; };
        CHECK_THROWS_AS(G(1.0, bad, 1e-12, 100), std::domain_error);
        CHECK_THROWS_WITH(G(1.0, bad, 1e-12, 100),
                          Catch::Matchers::ContainsSubstring("5"));
    }

    SECTION("non-convergence reports the bracket reached") {
        CoefficientStream ones_no_tail;
        ones_no_tail.at = [](int) { return 1.0; };
        try {
            (void)G(1e-6, ones_no_tail, 1e-4, 2000);
            FAIL("expected a non-convergence error");
        } catch (const NonConvergenceError& e) {
            CHECK(e.depth == 2000);
            CHECK(e.lower < e.upper);
            // the true value still lies inside the reported bracket
            CHECK(e.lower <= G_inf(1e-6));
            CHECK(G_inf(1e-6) <= e.upper);
            CHECK(e.upper - e.lower > 1e-4);
        }
    }

    SECTION("declared-monotone tail metadata is checked") {
        CoefficientStream lying;
        lying.at = [](int k) { return k == 7 ? 1.5 : 1.0 + 1.0 / (10.0 + k); };
        lying.tail_delta = [](int) { return 0.2; };
        lying.monotone_from = 1;
        CHECK_THROWS_AS(G(1.0, lying, 1e-15, 100), std::logic_error);
    }

    SECTION("input validation") {
        CHECK_THROWS_AS(G(0.0, constant_stream(1.0), 1e-12, 100), std::domain_error);
        CHECK_THROWS_AS(G(-1.0, constant_stream(1.0), 1e-12, 100), std::domain_error);
        CHECK_THROWS_AS(G(1.0, constant_stream(1.0), 0.0, 100), std::domain_error);
    }
}

TEST_CASE("f and g on a strictly interior orbit") {
    const Orbit orbit = make_orbit(3, 1, -1, 2); // interior point, both branches defined
    REQUIRE(orbit.klass == OrbitClass::TypeI0);

    SECTION("deep backward truncation oracle at lambda = 1") {
        std::vector<double> partials;
        for (int k = 1; k <= 200; ++k) {
            partials.push_back(1.0 / rho_at(orbit.params, orbit.q_hat, k));
        }
        const CFResult f1 = f_of_lambda(1.0, orbit, 1e-12, 10000);
        CHECK(f1.converged);
        CHECK(std::abs(f1.value - eval_finite(partials)) < 1e-10);

        // first coefficient sanity: rho_1 = 3/13 for this orbit
        CHECK(partials[0] == Catch::Approx(13.0 / 3.0).epsilon(1e-15));
    }

    SECTION("g mirrors f through the opposite tail") {
        std::vector<double> partials;
        for (int k = 1; k <= 200; ++k) {
            partials.push_back(1.0 / rho_at(orbit.params, orbit.q_hat, -k));
        }
        const CFResult g1 = g_of_lambda(1.0, orbit, 1e-12, 10000);
        CHECK(g1.converged);
        CHECK(std::abs(g1.value - eval_finite(partials)) < 1e-10);
    }

    SECTION("limits: both tend to 1 at 0+ and to 0 at infinity") {
        const CFResult f_small = f_of_lambda(1e-6, orbit, 1e-4, 10000);
        const CFResult g_small = g_of_lambda(1e-6, orbit, 1e-4, 10000);
        CHECK(std::abs(f_small.value - 1.0) < 1e-3);
        CHECK(std::abs(g_small.value - 1.0) < 1e-3);

        const CFResult f_large = f_of_lambda(1e3, orbit, 1e-12, 10000);
        const CFResult g_large = g_of_lambda(1e3, orbit, 1e-12, 10000);
        CHECK(f_large.value > 0.0);
        CHECK(g_large.value > 0.0);
        CHECK(f_large.value < 2e-3);
        CHECK(g_large.value < 2e-3);
    }

    SECTION("positivity and bracket sanity across a lambda grid") {
        for (double lambda : {0.01, 0.1, 1.0, 10.0, 100.0}) {
            for (const CFResult& r : {f_of_lambda(lambda, orbit, 1e-12, 10000),
                                      g_of_lambda(lambda, orbit, 1e-12, 10000)}) {
                CHECK(r.converged);
                CHECK(r.value > 0.0);
                CHECK(r.lower <= r.value);
                CHECK(r.value <= r.upper);
                CHECK(r.upper - r.lower <= 1e-12);
            }
        }
    }

    SECTION("alpha > 0 changes the value but not the limits") {
        const Orbit reg = make_orbit(3, 1, -1, 2, 1.0);
        const CFResult f_small = f_of_lambda(1e-6, reg, 1e-4, 10000);
        CHECK(std::abs(f_small.value - 1.0) < 1e-3);
        const CFResult f1 = f_of_lambda(1.0, reg, 1e-12, 10000);
        const CFResult f1_euler = f_of_lambda(1.0, orbit, 1e-12, 10000);
        CHECK(f1.value != f1_euler.value);
    }
}

TEST_CASE("f and g honor the vanishing-coefficient branches") {
    const Orbit plus = make_orbit(3, 1, 0, -2); // +p neighbor sits on the circle
    REQUIRE(plus.klass == OrbitClass::TypeIPlus);
    CHECK_THROWS_AS(f_of_lambda(1.0, plus, 1e-12, 10000), std::domain_error);
    const CFResult g_plus = g_of_lambda(1.0, plus, 1e-12, 10000);
    CHECK(g_plus.converged);
    CHECK(g_plus.value > 0.0);

    const Orbit minus = make_orbit(3, 1, 2, -2); // -p neighbor sits on the circle
    REQUIRE(minus.klass == OrbitClass::TypeIMinus);
    CHECK_THROWS_AS(g_of_lambda(1.0, minus, 1e-12, 10000), std::domain_error);
    const CFResult f_minus = f_of_lambda(1.0, minus, 1e-12, 10000);
    CHECK(f_minus.converged);
    CHECK(f_minus.value > 0.0);

    // a two-inside orbit has a negative coefficient on the tail holding the
    // second interior point; here that is the backward tail ((-1,1) inside)
    const Orbit two = make_orbit(2, 0, 1, 1); // tied pair (1,1), (-1,1) both inside
    REQUIRE(two.klass == OrbitClass::TypeII);
    CHECK_THROWS_AS(g_of_lambda(1.0, two, 1e-12, 10000), std::domain_error);
    CHECK(f_of_lambda(1.0, two, 1e-12, 10000).value > 0.0);
}

TEST_CASE("u1 and u2 with a constant coefficient tail") {
    // rho == 1: u1(n) = x/2 + sqrt((x/2)^2 + 1) and u2(n) = x/2 - sqrt(...)
    const auto rho_one = [](long long) { return 1.0; };
    for (long long n : {0LL, 1LL, 5LL}) {
        const CFResult up = u1_with(rho_one, n, 1.5, 1e-12, 10000);
        CHECK(std::abs(up.value - 2.0) < 1e-12);
        const CFResult dn = u2_with(rho_one, -n, 1.5, 1e-12, 10000);
        CHECK(std::abs(dn.value - (-0.5)) < 1e-12);
    }
}

TEST_CASE("u1 and u2 on an interior orbit") {
    const Orbit orbit = make_orbit(3, 1, -1, 2);

    SECTION("edge identities against f and g") {
        for (double lambda : {0.1, 1.0, 10.0}) {
            const double rho0 = rho_at(orbit.params, orbit.q_hat, 0);
            const CFResult f_r = f_of_lambda(lambda, orbit, 1e-12, 10000);
            const CFResult g_r = g_of_lambda(lambda, orbit, 1e-12, 10000);
            const CFResult u1_0 = u1(0, lambda, orbit, 1e-12, 10000);
            const CFResult u2_0 = u2(0, lambda, orbit, 1e-12, 10000);
            CHECK(std::abs(u1_0.value - (lambda / rho0 + f_r.value)) < 1e-11);
            CHECK(std::abs(u2_0.value - (-g_r.value)) < 1e-11);
        }
    }

    SECTION("sign and magnitude bounds") {
        for (double lambda : {0.1, 1.0, 10.0}) {
            for (long long n = 1; n <= 5; ++n) {
                const CFResult up = u1(n, lambda, orbit, 1e-12, 10000);
                CHECK(up.value > 1.0); // exceeds 1: coefficient below 1 plus a positive tail
                const CFResult dn = u2(-n, lambda, orbit, 1e-12, 10000);
                CHECK(dn.value < 0.0);
                CHECK(std::abs(dn.value) < 1.0);
            }
        }
    }

    SECTION("far coefficients approach the constant-tail fixed point") {
        const double lambda = 1.0;
        const double u_inf = lambda / 2.0 + std::sqrt(lambda * lambda / 4.0 + 1.0);
        const CFResult far = u1(40, lambda, orbit, 1e-12, 10000);
        CHECK(std::abs(far.value - u_inf) < 5e-3);
        const CFResult far2 = u2(-40, lambda, orbit, 1e-12, 10000);
        CHECK(std::abs(far2.value + 1.0 / u_inf) < 5e-3);
    }

    SECTION("partial products of u1 grow geometrically") {
        const double lambda = 0.25;
        const double u_inf = lambda / 2.0 + std::sqrt(lambda * lambda / 4.0 + 1.0);
        const double q_prime = 0.5 * (1.0 + u_inf);
        double log_product = 0.0;
        for (long long n = 1; n <= 120; ++n) {
            const CFResult up = u1(n, lambda, orbit, 1e-10, 10000);
            CHECK(up.value > q_prime); // the crossing index is 1 for this orbit
            log_product += std::log(up.value);
            CHECK(log_product >= static_cast<double>(n) * std::log(q_prime) - 1e-9);
        }
    }
}
