#include <doctest.h>

#include <cmath>

#include "levyconj/expression.hpp"
#include "levyconj/numerics.hpp"

using namespace levyconj;

TEST_CASE("adaptive quadrature on smooth and kinked integrands") {
    auto e1 = integrate([](double x) { return std::exp(-x); }, 0.0, 20.0, 1e-12, 1e-12);
    CHECK(e1.converged);
    CHECK(std::abs(e1.value - (1.0 - std::exp(-20.0))) < 1e-12);

    auto e2 = integrate([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, 1e-12, 1e-12);
    CHECK(std::abs(e2.value - (0.5 * 0.09 + 0.5 * 0.49)) < 1e-11);

    // breakpoint at the kink keeps the estimate honest
    const double bp[] = {0.3};
    auto e3 = integrate([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, 1e-13, 1e-13,
                        100000, bp);
    CHECK(std::abs(e3.value - e2.value) < 1e-12);
}

TEST_CASE("complex quadrature handles oscillation") {
    // int_0^{2 pi} e^{i 5 x} dx = 0
    auto e = integrate_complex(
        [](double x) { return std::exp(std::complex<double>(0.0, 5.0 * x)); }, 0.0,
        2.0 * M_PI, 1e-12, 1e-12);
    CHECK(std::abs(e.value) < 1e-11);
}

TEST_CASE("improper integrals with slab expansion") {
    // int_0^inf e^{-x} dx = 1
    auto e1 = integrate_improper([](double x) { return std::exp(-x); }, 0.0, kInf, 1e-12, 1e-10);
    CHECK(e1.status == LimitStatus::converged);
    CHECK(std::abs(e1.value - 1.0) < 1e-9);
    // int_0^1 x^{-1/2} dx = 2
    auto e2 = integrate_improper([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-12,
                                 1e-10);
    CHECK(std::abs(e2.value - 2.0) < 1e-8);
    // divergent: int_1^inf dx/x
    auto e3 = integrate_improper([](double x) { return 1.0 / x; }, 1.0, kInf);
    CHECK(e3.status == LimitStatus::diverging);
}

TEST_CASE("gamma by Lanczos matches reference points") {
    CHECK(std::abs(gamma_fn(0.5) - std::sqrt(M_PI)) < 1e-13);
    CHECK(std::abs(gamma_fn(5.0) - 24.0) < 1e-11);
    CHECK(std::abs(gamma_fn(1.0) - 1.0) < 1e-14);
    CHECK(std::abs(log_gamma(10.5) - std::lgamma(10.5)) < 1e-11);
    // reflection: Gamma(-0.5) = -2 sqrt(pi)
    CHECK(std::abs(gamma_fn(-0.5) + 2.0 * std::sqrt(M_PI)) < 1e-12);
}

TEST_CASE("normal quantile inverts the cdf") {
    for (double p : {1e-10, 1e-4, 0.1, 0.5, 0.77, 1.0 - 1e-6}) {
        const double x = normal_quantile(p);
        CHECK(std::abs(normal_cdf(x) - p) < 1e-12 * std::max(1.0, std::abs(x)));
    }
    CHECK(normal_quantile(0.5) == 0.0);
}

TEST_CASE("Brent root finder") {
    auto r = find_root([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-14);
    CHECK(r.converged);
    CHECK(std::abs(r.root - std::sqrt(2.0)) < 1e-12);
    CHECK_THROWS_AS(find_root([](double x) { return x * x + 1.0; }, -1.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("limit classification") {
    // geometric approach: Aitken nails it
    std::vector<double> geo;
    for (int k = 1; k <= 7; ++k) geo.push_back(3.0 - 2.0 * std::pow(0.3, k));
    LimitResult r1 = classify_limit(geo, true, 1e-8);
    CHECK(r1.status == LimitStatus::converged);
    CHECK(std::abs(r1.value - 3.0) < 1e-9);

    // monotone explosion
    std::vector<double> grow;
    for (int k = 1; k <= 7; ++k) grow.push_back(std::pow(10.0, k));
    CHECK(classify_limit(grow, true).status == LimitStatus::diverging);

    // slow drift: inconclusive
    std::vector<double> drift;
    for (int k = 1; k <= 7; ++k) drift.push_back(std::sqrt(static_cast<double>(k)));
    CHECK(classify_limit(drift, false).status == LimitStatus::inconclusive);
}

TEST_CASE("expression grammar") {
    auto f = compile_expression("u^-1.5 * exp(-u)");
    CHECK(std::abs(f(2.0) - std::pow(2.0, -1.5) * std::exp(-2.0)) < 1e-15);
    auto g = compile_expression("u^-1.7*(1 + 0.5*sin(2*pi*log(u)/log(2)))");
    CHECK(std::abs(g(1.0) - 1.0) < 1e-15);
    CHECK(std::abs(g(2.0) - std::pow(2.0, -1.7)) < 1e-14);
    CHECK_THROWS_AS(compile_expression("u +"), std::invalid_argument);
    CHECK_THROWS_AS(compile_expression("frob(u)"), std::invalid_argument);
    // precedence: -u^2 is -(u^2); 2^-2 parses
    CHECK(compile_expression("-u^2")(3.0) == -9.0);
    CHECK(compile_expression("2^-2")(0.0) == 0.25);
}
