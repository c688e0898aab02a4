#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "metriq/distmodel.hpp"
#include "metriq/prng.hpp"
#include "oracles.hpp"

using namespace metriq;

namespace {
// Table entries reused across the suite (the bundled reference fixture
// carries the full set; these two appear in many spot checks).
const ExpParams kJavaCodeSmells{1.123, 50.731};
const AGaussParams kJavaCyclomatic{155.228, 50.947, 40.902};
}  // namespace

TEST_CASE("erf matches the series oracle and stays odd and bounded") {
    SECTION("frozen reference points") {
        CHECK(metriq::erf(0.0) == 0.0);
        // value frozen from the Maclaurin oracle below
        CHECK(metriq::erf(1.0) == Catch::Approx(0.842700792949715).margin(1e-12));
        CHECK(metriq::erf(-1.0) == -metriq::erf(1.0));
        CHECK(static_cast<double>(oracles::erf_maclaurin(1.0L)) ==
              Catch::Approx(0.842700792949715).margin(1e-15));
    }

    SECTION("absolute error <= 1e-12 against the quadrature oracle on [-6, 6]") {
        for (int i = 0; i <= 1200; ++i) {
            double x = -6.0 + static_cast<double>(i) * 0.01;
            double want = static_cast<double>(oracles::erf_quadrature(x));
            INFO("x = " << x);
            CHECK(std::fabs(metriq::erf(x) - want) <= 1e-12);
        }
    }

    SECTION("series and continued-fraction branches agree against the Maclaurin oracle") {
        for (double x : {0.1, 0.5, 1.5, 2.5, 2.999, 3.0, 3.001, 3.3}) {
            CHECK(std::fabs(metriq::erf(x) - static_cast<double>(oracles::erf_maclaurin(x))) <= 1e-12);
        }
    }

    SECTION("odd exactly, strictly inside (-1, 1)") {
        SplitMix64 rng(11);
        for (int i = 0; i < 2000; ++i) {
            double x = (rng.next_double() - 0.5) * 40.0;
            CHECK(metriq::erf(-x) == -metriq::erf(x));
            CHECK(std::fabs(metriq::erf(x)) < 1.0);
        }
        CHECK(metriq::erf(1e3) < 1.0);
        CHECK(metriq::erf(1e308) < 1.0);
        CHECK(metriq::erf(-1e308) > -1.0);
    }

    SECTION("non-finite input is a domain error") {
        CHECK_THROWS_AS(metriq::erf(std::numeric_limits<double>::infinity()), numeric_error);
        CHECK_THROWS_AS(metriq::erf(std::numeric_limits<double>::quiet_NaN()), numeric_error);
    }
}

TEST_CASE("exp_pdf evaluates the shifted exponential density") {
    ExpParams p{1.0, 2.0};
    CHECK(exp_pdf(1.0, p) == 0.0);
    CHECK(exp_pdf(0.5, p) == 0.0);
    CHECK(exp_pdf(1.5, p) == Catch::Approx(2.0 * std::exp(-1.0)).margin(1e-15));

    SECTION("integrates to 1 over the support (quadrature oracle)") {
        const ExpParams q = kJavaCodeSmells;
        // start a hair above c: the density is discontinuous exactly there
        long double lo = q.c + 1e-12L;
        long double hi = q.c + 40.0L / q.lambda;
        long double mass = oracles::integrate(
            [&](long double x) { return static_cast<long double>(exp_pdf(static_cast<double>(x), q)); },
            lo, hi, 1e-10L);
        CHECK(static_cast<double>(mass) == Catch::Approx(1.0).margin(1e-6));
    }

    SECTION("errors") {
        CHECK_THROWS_AS(exp_pdf(-0.1, p), numeric_error);
        CHECK_THROWS_AS(exp_pdf(1.0, ExpParams{0.0, 0.0}), numeric_error);  // uninformative
    }
}

TEST_CASE("exp_score peaks at the threshold and decays exponentially") {
    SECTION("threshold branch scores 100") {
        CHECK(exp_score(0.5, kJavaCodeSmells) == 100.0);
        CHECK(exp_score(kJavaCodeSmells.c, kJavaCodeSmells) == 100.0);
    }
    SECTION("x = ln 2 halves the score for unit rate") {
        CHECK(exp_score(std::log(2.0), ExpParams{0.0, 1.0}) == Catch::Approx(50.0).margin(1e-9));
    }
    SECTION("one mean-life beyond the threshold scores 100/e") {
        double x = kJavaCodeSmells.c + 1.0 / kJavaCodeSmells.lambda;
        CHECK(exp_score(x, kJavaCodeSmells) == Catch::Approx(100.0 / std::exp(1.0)).margin(1e-3));
        CHECK(exp_score(x, kJavaCodeSmells) == Catch::Approx(36.7879).margin(1e-3));
    }
    SECTION("uninformative parameters score 100 everywhere") {
        ExpParams flat{0.0, 0.0};
        for (double x : {0.0, 0.5, 10.0, 1e6}) CHECK(exp_score(x, flat) == 100.0);
        ExpParams below_floor{0.0, 1e-10};
        CHECK(exp_score(1e9, below_floor) == 100.0);
    }
    SECTION("non-increasing in x, range [0, 100]") {
        SplitMix64 rng(23);
        for (int trial = 0; trial < 200; ++trial) {
            ExpParams p{rng.next_double() * 2.0, 0.1 + rng.next_double() * 100.0};
            double prev = 101.0;
            for (int i = 0; i <= 50; ++i) {
                double x = static_cast<double>(i) * 0.1;
                double s = exp_score(x, p);
                CHECK(s >= 0.0);
                CHECK(s <= 100.0);
                CHECK(s <= prev);
                prev = s;
            }
        }
    }
    SECTION("domain errors") {
        CHECK_THROWS_AS(exp_score(-1.0, kJavaCodeSmells), numeric_error);
        CHECK_THROWS_AS(exp_score(std::numeric_limits<double>::quiet_NaN(), kJavaCodeSmells),
                        numeric_error);
    }
}

TEST_CASE("agauss_pdf is a continuous piecewise Gaussian with shared amplitude") {
    SECTION("peak value, symmetric case") {
        AGaussParams p{10.0, 2.0, 2.0};
        double sqrt_two_pi = std::sqrt(2.0 * std::acos(-1.0));
        CHECK(agauss_pdf(10.0, p) == Catch::Approx(1.0 / (2.0 * sqrt_two_pi)).margin(1e-12));
        CHECK(agauss_pdf(10.0, p) == Catch::Approx(0.199471).margin(1e-6));
    }
    SECTION("both branches meet at the peak") {
        AGaussParams p = kJavaCyclomatic;
        double sqrt_two_pi = std::sqrt(2.0 * std::acos(-1.0));
        double amp = 2.0 / (sqrt_two_pi * (p.sigma1 + p.sigma2));
        CHECK(agauss_pdf(p.mu, p) == Catch::Approx(amp).margin(1e-15));
        double eps = 1e-9;
        CHECK(agauss_pdf(p.mu - eps, p) == Catch::Approx(agauss_pdf(p.mu + eps, p)).margin(1e-9));
    }
    SECTION("integrates to 1 over the real line (quadrature oracle)") {
        AGaussParams p = kJavaCyclomatic;
        long double lo = p.mu - 14.0L * p.sigma1;
        long double hi = p.mu + 14.0L * p.sigma2;
        long double mass = oracles::integrate(
            [&](long double x) {
                return static_cast<long double>(agauss_pdf(static_cast<double>(x), p));
            },
            lo, hi, 1e-10L);
        CHECK(static_cast<double>(mass) == Catch::Approx(1.0).margin(1e-6));
    }
    SECTION("non-finite x is rejected") {
        CHECK_THROWS_AS(agauss_pdf(std::numeric_limits<double>::infinity(), kJavaCyclomatic),
                        numeric_error);
    }
}

TEST_CASE("agauss_score peaks at mu and decays by side-specific z-score") {
    const AGaussParams p = kJavaCyclomatic;

    SECTION("peak scores exactly 100") {
        CHECK(agauss_score(p.mu, p) == 100.0);
    }
    SECTION("one sigma out on either side scores 100(1 - erf(1/sqrt 2))") {
        double want = 100.0 * (1.0 - static_cast<double>(oracles::erf_quadrature(
                                         1.0L / std::sqrt(2.0L))));
        CHECK(agauss_score(p.mu + p.sigma2, p) == Catch::Approx(want).margin(1e-9));
        CHECK(agauss_score(p.mu - p.sigma1, p) == Catch::Approx(want).margin(1e-9));
        CHECK(agauss_score(p.mu + p.sigma2, p) == Catch::Approx(31.7311).margin(1e-3));
        CHECK(agauss_score(p.mu - p.sigma1, p) == Catch::Approx(31.7311).margin(1e-3));
    }
    SECTION("mirror symmetry in side-scaled units") {
        for (double k : {0.1, 0.5, 1.0, 1.7, 2.5, 3.0}) {
            double left = p.mu - k * p.sigma1;
            if (left < 0.0) continue;
            CHECK(agauss_score(left, p) ==
                  Catch::Approx(agauss_score(p.mu + k * p.sigma2, p)).margin(1e-9));
        }
    }
    SECTION("unimodal: rising up to mu, falling after") {
        SplitMix64 rng(31);
        for (int trial = 0; trial < 100; ++trial) {
            AGaussParams q{5.0 + rng.next_double() * 100.0, 0.5 + rng.next_double() * 20.0,
                           0.5 + rng.next_double() * 20.0};
            double prev = -1.0;
            for (int i = 0; i <= 40; ++i) {
                double x = q.mu * static_cast<double>(i) / 40.0;
                double s = agauss_score(x, q);
                CHECK(s >= prev - 1e-12);
                CHECK(s >= 0.0);
                CHECK(s <= 100.0);
                prev = s;
            }
            prev = 101.0;
            for (int i = 0; i <= 40; ++i) {
                double x = q.mu + (3.0 * q.sigma2) * static_cast<double>(i) / 40.0;
                double s = agauss_score(x, q);
                CHECK(s <= prev + 1e-12);
                prev = s;
            }
        }
    }
    SECTION("clamped right width degrades to a step") {
        AGaussParams degenerate = AGaussParams{170.042, 33.546, 0.0}.clamped();
        CHECK(degenerate.sigma2 == SIGMA_FLOOR);
        CHECK(agauss_score(degenerate.mu, degenerate) == 100.0);
        double just_right = degenerate.mu + 0.001;
        double s = agauss_score(just_right, degenerate);
        CHECK(s >= 0.0);
        CHECK(s <= 1e-9);
        CHECK(std::isfinite(s));
        // left side keeps scoring normally
        CHECK(agauss_score(degenerate.mu - degenerate.sigma1, degenerate) ==
              Catch::Approx(31.7311).margin(1e-3));
    }
    SECTION("domain errors") {
        CHECK_THROWS_AS(agauss_score(-1.0, p), numeric_error);
        CHECK_THROWS_AS(agauss_score(std::numeric_limits<double>::infinity(), p), numeric_error);
    }
}

TEST_CASE("FittedParams dispatches by family and honors the uninformative flag") {
    FittedParams exp_fp(kJavaCodeSmells);
    CHECK(exp_fp.family() == Family::Exponential);
    CHECK(exp_fp.score(0.5) == 100.0);

    FittedParams gauss_fp(kJavaCyclomatic);
    CHECK(gauss_fp.family() == Family::AsymGauss);
    CHECK(gauss_fp.score(kJavaCyclomatic.mu) == 100.0);

    FittedParams flat(ExpParams{0.0, 0.0}, true);
    CHECK(flat.uninformative);
    CHECK(flat.score(1e9) == 100.0);

    // lambda below the floor is auto-flagged
    FittedParams tiny(ExpParams{0.0, 1e-12});
    CHECK(tiny.uninformative);
}
