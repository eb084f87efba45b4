#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "hydrostore/constitutive.hpp"
#include "hydrostore/errors.hpp"

using namespace hydrostore;

namespace {

HSpec tanh_spec() {
    HSpec s;
    s.family = HFamily::Tanh;
    return s;
}

}  // namespace

TEST_CASE("h_eval matches closed forms") {
    const HSpec spec;
    CHECK(h_eval(0.0, 0, spec) == 0.0);
    CHECK(h_eval(1.0, 1, spec) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(h_eval(1.0, 2, spec) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(h_eval(2.0, 0, spec) == doctest::Approx(std::atan(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(h_eval(1.0, 3, spec), DomainError);

    double sup = 0.0;
    for (int k = 0; k <= 2000; ++k) sup = std::max(sup, std::abs(h_eval(-1e6 + k * 1e3, 0, spec)));
    CHECK(sup <= std::numbers::pi / 2);

    const HSpec t = tanh_spec();
    CHECK(h_eval(0.7, 0, t) == doctest::Approx(std::tanh(0.7)));
    CHECK(h_eval(0.7, 1, t) == doctest::Approx(1.0 - std::tanh(0.7) * std::tanh(0.7)));
}

TEST_CASE("h derivatives agree with finite differences") {
    for (const HSpec& spec : {HSpec{}, tanh_spec()}) {
        for (double r : {-3.0, -0.4, 0.0, 0.9, 5.0}) {
            const double d = 1e-6;
            const double fd1 = (h_eval(r + d, 0, spec) - h_eval(r - d, 0, spec)) / (2 * d);
            const double fd2 = (h_eval(r + d, 1, spec) - h_eval(r - d, 1, spec)) / (2 * d);
            CHECK(h_eval(r, 1, spec) == doctest::Approx(fd1).epsilon(1e-8));
            CHECK(h_eval(r, 2, spec) == doctest::Approx(fd2).epsilon(1e-7));
        }
    }
}

TEST_CASE("verify_h_bounds certifies the default family and rejects a = 10") {
    const HCertificate ok = verify_h_bounds(HSpec{}, 1000);
    CHECK(ok.pass);
    CHECK(ok.violation_count == 0);
    CHECK(ok.sup_abs_r_d2h == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(ok.sup_r_dh == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(ok.min_jacobian >= 0.25);
    CHECK(ok.max_jacobian <= 4.0);

    HSpec big;
    big.scale = 10.0;
    const HCertificate bad = verify_h_bounds(big, 1000);
    CHECK_FALSE(bad.pass);
    CHECK(bad.min_jacobian < 0.25);
    REQUIRE_FALSE(bad.violations.empty());

    HSpec zero;
    zero.scale = 0.0;
    CHECK(verify_h_bounds(zero, 1000).pass);

    CHECK(verify_h_bounds(tanh_spec(), 1000).pass);
    CHECK_THROWS_AS(verify_h_bounds(HSpec{}, 999), DomainError);
}

TEST_CASE("psi examples") {
    const HSpec spec;
    CHECK(psi(3.25, 0.0, spec) == 3.25);
    CHECK(psi(1.0, 1.0, spec) == doctest::Approx(1.5 - std::numbers::pi / 4).epsilon(1e-15));
    CHECK(psi(1.0, 1.0, spec) == doctest::Approx(0.714602).epsilon(1e-6));
    CHECK(psi(0.0, 0.3, spec) == 0.0);
    CHECK_THROWS_AS(psi(1.0, 1.5, spec), DomainError);
    CHECK_THROWS_AS(psi(1.0, -0.1, spec), DomainError);
}

TEST_CASE("psi_inverse examples and edge cases") {
    const HSpec spec;
    CHECK(psi_inverse(-2.5, 0.0, spec) == doctest::Approx(-2.5).epsilon(1e-15));
    CHECK(psi_inverse(0.714602, 1.0, spec) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(std::abs(psi_inverse(0.0, 0.7, spec)) <= 1e-12);
    CHECK(std::abs(psi_inverse(1e6, 0.5, spec) - 1e6) < 1.0);
    CHECK_THROWS_AS(psi_inverse(1.0, 0.5, spec, 0.0), DomainError);
    CHECK_THROWS_AS(psi_inverse(std::numeric_limits<double>::quiet_NaN(), 0.5, spec), DomainError);
}

TEST_CASE("psi is monotone with difference quotients in [1/c_h, c_h]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> th(-50.0, 50.0), ch(0.0, 1.0);
    for (const HSpec& spec : {HSpec{}, tanh_spec()}) {
        for (int k = 0; k < 5000; ++k) {
            double a = th(rng), b = th(rng);
            if (a == b) continue;
            if (a > b) std::swap(a, b);
            const double c = ch(rng);
            const double q = (psi(b, c, spec) - psi(a, c, spec)) / (b - a);
            REQUIRE(q >= 1.0 / spec.c_h);
            REQUIRE(q <= spec.c_h);
            const double d = psi_dtheta(a, c, spec);
            REQUIRE(d >= 1.0 / spec.c_h);
            REQUIRE(d <= spec.c_h);
        }
    }
}

TEST_CASE("psi_inverse roundtrip") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> th(-100.0, 100.0), ch(0.0, 1.0);
    const HSpec spec;
    const double tol = 1e-12;
    for (int k = 0; k < 5000; ++k) {
        const double theta = th(rng), chi = ch(rng);
        const double back = psi_inverse(psi(theta, chi, spec), chi, spec, tol);
        REQUIRE(std::abs(back - theta) <= spec.c_h * tol * (1.0 + std::abs(theta)));
    }
}

TEST_CASE("psi_dchi matches a finite difference") {
    const HSpec spec;
    const double theta = 1.7, d = 1e-6;
    const double fd = (psi(theta, 0.5 + d, spec) - psi(theta, 0.5 - d, spec)) / (2 * d);
    CHECK(psi_dchi(theta, spec) == doctest::Approx(fd).epsilon(1e-8));
}

TEST_CASE("hatbeta") {
    CHECK(hatbeta(0.0).value() == 0.0);
    CHECK(std::abs(hatbeta(1.0).value() - (2 * std::log(2.0) - 1)) <= 1e-14);
    CHECK(hatbeta(1.0).value() == doctest::Approx(0.386294).epsilon(1e-6));
    CHECK_FALSE(hatbeta(1.5).is_finite());
    CHECK_FALSE(hatbeta(-1e-12).is_finite());
    CHECK_THROWS_AS(hatbeta(2.0).value(), DomainError);
    CHECK(hatbeta(2.0) == ExtendedReal::infinity());
}

TEST_CASE("hatbeta is convex, nonnegative and below r log 2") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 10000; ++k) {
        const double a = u(rng), b = u(rng), lam = u(rng);
        const double mid = lam * a + (1 - lam) * b;
        REQUIRE(hatbeta(mid).value() <= lam * hatbeta(a).value() + (1 - lam) * hatbeta(b).value() + 1e-15);
        REQUIRE(hatbeta(a).value() >= 0.0);
        REQUIRE(hatbeta(a).value() <= a * std::log(2.0) + 1e-16);
    }
}

TEST_CASE("r - log r >= (r + |log r|)/3 on log-spaced samples") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ex(-8.0, 8.0);
    for (int k = 0; k < 10000; ++k) {
        const double r = std::pow(10.0, ex(rng));
        REQUIRE(r - std::log(r) >= (r + std::abs(std::log(r))) / 3.0);
    }
}

TEST_CASE("beta_residual examples") {
    CHECK(beta_residual(0.5, std::log(1.5)) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(beta_residual(1.0, std::log(2.0) + 0.3) == 0.0);
    CHECK(beta_residual(0.0, 0.1) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(beta_residual(0.0, -5.0) == 0.0);
    CHECK(beta_residual(1.0, std::log(2.0) - 0.2) == doctest::Approx(0.2));
    CHECK(beta_residual(0.5, std::log(1.5) + 0.25) == doctest::Approx(0.25));
    CHECK(beta_residual(1.2, std::log(2.0)) == doctest::Approx(0.2));
}

TEST_CASE("split_beta decomposes xi") {
    const BetaValue v = split_beta(1.0, 2.0);
    CHECK(v.multiplier == doctest::Approx(2.0 - std::log(2.0)));
    CHECK(v.xi == v.multiplier + std::log1p(v.chi));
    CHECK_THROWS_AS(split_beta(1.1, 0.0), DomainError);
}

TEST_CASE("HSpec validation and family names") {
    HSpec s;
    s.c_h = 1.0;
    CHECK_THROWS_AS(validate(s), DomainError);
    s.c_h = 4.0;
    s.scale = -1.0;
    CHECK_THROWS_AS(validate(s), DomainError);
    CHECK(parse_h_family("tanh") == HFamily::Tanh);
    CHECK(to_string(HFamily::Atan) == "atan");
    CHECK_THROWS_AS(parse_h_family("sin"), ValidationError);
}
