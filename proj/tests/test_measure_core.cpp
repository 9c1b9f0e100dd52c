#include <doctest.h>

#include <cmath>
#include <random>

#include "levyconj/measure_core.hpp"
#include "oracles.hpp"

using namespace levyconj;

namespace {

LevyMeasure one_ray_power(double c, double beta, double r_lo = 0.0, double r_hi = kInf,
                          double weight = 1.0) {
    PowerLawDensity pl{c, beta, r_lo, r_hi};
    return LevyMeasure{1, {LevyComponent{Direction({1.0}), weight, RadialPart{{}, pl}}}};
}

LevyMeasure symmetric_power(double c, double beta) {
    PowerLawDensity pl{c, beta, 0.0, kInf};
    return LevyMeasure{1,
                       {LevyComponent{Direction({1.0}), 1.0, RadialPart{{}, pl}},
                        LevyComponent{Direction({-1.0}), 1.0, RadialPart{{}, pl}}}};
}

}  // namespace

TEST_CASE("validate_measure on the catalog examples") {
    // oracle: int (r^2 ^ 1) = int_0^1 r^{2-b-1} + int_1^inf r^{-b-1}
    const double expect = oracles::power_law_moment(1.0, 0.5, 2.0, 0.0, 1.0) +
                          oracles::power_law_moment(1.0, 0.5, 0.0, 1.0, oracles::inf);
    CHECK(std::abs(expect - 8.0 / 3.0) < 1e-15);
    ValidationReport ok = validate_measure(one_ray_power(1.0, 0.5));
    REQUIRE(ok.ok);
    CHECK(std::abs(ok.components[0].square_one_integral - 8.0 / 3.0) < 1e-9);

    // beta >= 2 with support reaching 0 diverges
    ValidationReport bad = validate_measure(one_ray_power(1.0, 2.5, 0.0, 1.0));
    CHECK(!bad.ok);

    // atoms only
    LevyMeasure atoms{1, {LevyComponent{Direction({1.0}), 1.0, RadialPart{{{1.0, 2.0}}, {}}}}};
    ValidationReport rep = validate_measure(atoms);
    CHECK(rep.ok);
    CHECK(rep.components[0].square_one_integral == 2.0);

    // malformed: weight <= 0
    LevyMeasure neg{1, {LevyComponent{Direction({1.0}), -1.0, RadialPart{{{1.0, 2.0}}, {}}}}};
    CHECK(!validate_measure(neg).ok);
}

TEST_CASE("levy_integral examples") {
    // outer |x|^{1/2} against PowerLaw(1, 1.3, 1, inf): closed form 1/0.8
    LevyIntegral li =
        levy_integral(one_ray_power(1.0, 1.3, 1.0), abs_power_integrand(0.5), Region::outer);
    REQUIRE(li.kind == IntegralKind::finite);
    CHECK(std::abs(li.scalar() - 1.25) < 1e-9);

    // vector integrand on the sphere picks up the atom
    LevyMeasure atoms{1, {LevyComponent{Direction({1.0}), 1.0, RadialPart{{{1.0, 0.7}}, {}}}}};
    LevyIntegral sv = levy_integral(atoms, vector_integrand(1), Region::sphere);
    CHECK(sv.value[0] == 0.7);

    // divergence by exponent comparison (0.5 >= 0.3)
    LevyIntegral inf_case =
        levy_integral(one_ray_power(1.0, 0.3, 1.0), abs_power_integrand(0.5), Region::outer);
    CHECK(inf_case.kind == IntegralKind::infinite);

    // critical equality on an analytic tail is inconclusive
    AnalyticDensity ad;
    ad.eval = [](double r) { return std::pow(r, -1.5); };
    ad.r_lo = 1.0;
    ad.thetainf = 0.5;
    LevyMeasure mm{1, {LevyComponent{Direction({1.0}), 1.0, RadialPart{{}, ad}}}};
    CHECK(levy_integral(mm, abs_power_integrand(0.5), Region::outer).kind ==
          IntegralKind::inconclusive);
}

TEST_CASE("levy_integral agrees with closed-form power-law antiderivatives") {
    std::mt19937_64 rng(20260810);
    std::uniform_real_distribution<double> ub(0.1, 1.9), ue(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double beta = ub(rng);
        double p = ue(rng);
        // keep both regions convergent and away from critical equality
        if (std::abs(p - beta) < 0.05) p += 0.1;
        const double c = 0.3 + ub(rng);
        LevyMeasure nu = one_ray_power(c, beta);
        const double inner_expect = oracles::power_law_moment(c, beta, std::max(p, beta + 0.1),
                                                              0.0, 1.0);
        LevyIntegral inner =
            levy_integral(nu, abs_power_integrand(std::max(p, beta + 0.1)), Region::inner);
        REQUIRE(inner.kind == IntegralKind::finite);
        CHECK(std::abs(inner.scalar() - inner_expect) < 1e-10 * std::max(1.0, inner_expect));
        const double pout = std::min(p, beta - 0.1);
        const double outer_expect = oracles::power_law_moment(c, beta, pout, 1.0, oracles::inf);
        LevyIntegral outer = levy_integral(nu, abs_power_integrand(pout), Region::outer);
        REQUIRE(outer.kind == IntegralKind::finite);
        CHECK(std::abs(outer.scalar() - outer_expect) < 1e-10 * std::max(1.0, outer_expect));
    }
}

TEST_CASE("moment_report worked examples") {
    // Poisson with nu = 2 delta_1, gamma = 2: drift 0, mean 2
    Triplet pois = poisson_triplet(2.0, 2.0);
    MomentReport mr = moment_report(pois);
    REQUIRE(mr.has_drift);
    CHECK(std::abs((*mr.drift)[0]) < 1e-12);
    REQUIRE(mr.has_mean);
    CHECK(std::abs((*mr.mean)[0] - 2.0) < 1e-12);
    CHECK(mr.weak_mean.status == WeakMeanStatus::exists_absolutely);

    // symmetric beta = 1 power law: no mean, weak mean exists = 0
    Triplet sym = make_triplet(SymMatrix::zero(1), symmetric_power(1.0, 1.0), {0.0});
    MomentReport ms = moment_report(sym);
    CHECK(!ms.has_mean);
    CHECK((ms.weak_mean.status == WeakMeanStatus::exists ||
           ms.weak_mean.status == WeakMeanStatus::exists_absolutely));
    CHECK(std::abs(ms.weak_mean.value[0]) < 1e-10);

    // one-sided PowerLaw(1, 0.5, 1, inf): tail too heavy for a mean
    Triplet heavy = make_triplet(SymMatrix::zero(1), one_ray_power(1.0, 0.5, 1.0), {0.0});
    MomentReport mh = moment_report(heavy);
    CHECK(!mh.has_mean);
    CHECK(mh.weak_mean.status == WeakMeanStatus::none);
}

TEST_CASE("moment invariant: mean implies absolute weak mean and values agree") {
    AnalyticDensity ad;
    ad.expr = "u^-2.1*exp(-u/3)";
    ad.eval = [](double r) { return std::pow(r, -2.1) * std::exp(-r / 3.0); };
    ad.theta0 = 1.1;
    ad.thetainf = kInf;
    LevyMeasure nu{1, {LevyComponent{Direction({1.0}), 1.0, RadialPart{{}, ad}}}};
    Triplet t = make_triplet(SymMatrix::zero(1), nu, {0.4});
    MomentReport mr = moment_report(t);
    REQUIRE(mr.has_mean);
    CHECK(mr.weak_mean.status == WeakMeanStatus::exists_absolutely);
    CHECK(std::abs(mr.weak_mean.value[0] - (*mr.mean)[0]) < 1e-8);
}

TEST_CASE("convert_gamma worked examples and round trips") {
    Triplet pois = poisson_triplet(2.0, 2.0);
    Triplet drift_view = convert_gamma(pois, GammaRepresentation::drift);
    CHECK(std::abs(drift_view.gamma[0]) < 1e-12);
    Triplet mean_view = convert_gamma(pois, GammaRepresentation::mean);
    CHECK(std::abs(mean_view.gamma[0] - 2.0) < 1e-12);

    // nu = 0: gamma unchanged for every target
    Triplet point = dirac_triplet({0.7});
    for (auto target : {GammaRepresentation::cut1_sharp, GammaRepresentation::cut1_open,
                        GammaRepresentation::cut1_half, GammaRepresentation::rr,
                        GammaRepresentation::drift, GammaRepresentation::mean})
        CHECK(convert_gamma(point, target).gamma[0] == 0.7);

    // round trips through every available representation
    AnalyticDensity ad;
    ad.eval = [](double r) { return std::pow(r, -1.4) * std::exp(-r); };
    ad.theta0 = 0.4;
    ad.thetainf = kInf;
    LevyMeasure nu{1, {LevyComponent{Direction({1.0}), 1.0, RadialPart{{{1.0, 0.3}}, ad}}}};
    Triplet t = make_triplet(SymMatrix::zero(1), nu, {0.9});
    for (auto target : {GammaRepresentation::cut1_sharp, GammaRepresentation::cut1_open,
                        GammaRepresentation::cut1_half, GammaRepresentation::rr,
                        GammaRepresentation::drift, GammaRepresentation::mean}) {
        Triplet view = convert_gamma(t, target);
        // feed the converted gamma back through make_triplet
        Triplet back = make_triplet(view.gaussian, view.levy, view.gamma, target);
        CHECK(std::abs(back.gamma[0] - t.gamma[0]) < 1e-10);
    }

    // drift representation unavailable for an infinite inner-variation measure
    LevyMeasure heavy_inner{
        1, {LevyComponent{Direction({1.0}), 1.0, RadialPart{{}, PowerLawDensity{1.0, 1.5}}}}};
    Triplet th = make_triplet(SymMatrix::zero(1), heavy_inner, {0.0});
    CHECK_THROWS_AS(convert_gamma(th, GammaRepresentation::drift), RepresentationError);
}

TEST_CASE("dilate worked examples") {
    Triplet pois = poisson_triplet(2.0, 2.0);
    Triplet d2 = dilate(pois, 2.0);
    REQUIRE(d2.levy.components.size() == 1);
    CHECK(d2.levy.components[0].radial.atoms[0].r == 2.0);
    CHECK(d2.levy.components[0].radial.atoms[0].mass == 2.0);
    CHECK(std::abs(d2.gamma[0]) < 1e-12);  // 2*2 - 2*2

    // b = 1 is the identity
    Triplet d1 = dilate(pois, 1.0);
    CHECK(d1.gamma[0] == pois.gamma[0]);

    // delta_c dilates to delta_{bc}
    Triplet dc = dilate(dirac_triplet({0.3}), 4.0);
    CHECK(std::abs(dc.gamma[0] - 1.2) < 1e-15);

    // power law: support scaled, coefficient c b^beta
    Triplet t = make_triplet(SymMatrix::zero(1), one_ray_power(1.0, 0.5, 0.5, 2.0), {0.0});
    Triplet td = dilate(t, 2.0);
    const auto* pl = std::get_if<PowerLawDensity>(&td.levy.components[0].radial.density);
    REQUIRE(pl != nullptr);
    CHECK(std::abs(pl->coeff - std::pow(2.0, 0.5)) < 1e-15);
    CHECK(pl->r_lo == 1.0);
    CHECK(pl->r_hi == 4.0);
    // pushforward identity at a probe: density_b(u) = density(u/b)/b
    CHECK(std::abs(density_value(td.levy.components[0].radial.density, 1.6) -
                   density_value(t.levy.components[0].radial.density, 0.8) / 2.0) < 1e-14);

    CHECK_THROWS_AS(dilate(pois, -1.0), std::invalid_argument);
}

TEST_CASE("dilate composes multiplicatively") {
    AnalyticDensity ad;
    ad.eval = [](double r) { return std::pow(r, -1.2) * std::exp(-0.3 * r); };
    ad.theta0 = 0.2;
    ad.thetainf = kInf;
    LevyMeasure nu{1, {LevyComponent{Direction({1.0}), 1.0, RadialPart{{{0.5, 1.0}}, ad}}}};
    Triplet t = make_triplet(SymMatrix::identity(1), nu, {0.7});
    Triplet a = dilate(dilate(t, 1.7), 0.4);
    Triplet b = dilate(t, 1.7 * 0.4);
    CHECK(std::abs(a.gamma[0] - b.gamma[0]) < 1e-10);
    CHECK(std::abs(a.levy.components[0].radial.atoms[0].r -
                   b.levy.components[0].radial.atoms[0].r) < 1e-15);
    CHECK(std::abs(a.gaussian.at(0, 0) - b.gaussian.at(0, 0)) < 1e-14);
}

TEST_CASE("convolve and power are triplet arithmetic") {
    Triplet p2 = poisson_triplet(2.0, 2.0);
    Triplet p3 = poisson_triplet(3.0, 3.0);
    Triplet c = convolve(p2, p3);
    REQUIRE(c.levy.components.size() == 1);  // atoms at the same (xi, r) merge
    CHECK(c.levy.components[0].radial.atoms[0].mass * c.levy.components[0].weight == 5.0);
    CHECK(c.gamma[0] == 5.0);

    Triplet z = power(p2, 0.0);
    CHECK(z.levy.components.empty());
    CHECK(z.gamma[0] == 0.0);

    Triplet s = power(p2, 1.5);
    CHECK(s.levy.components[0].weight * s.levy.components[0].radial.atoms[0].mass == 3.0);
    CHECK(s.gamma[0] == 3.0);

    // commutative and associative on triplet data
    Triplet ab = convolve(p2, p3), ba = convolve(p3, p2);
    CHECK(ab.gamma[0] == ba.gamma[0]);
    Triplet abc1 = convolve(convolve(p2, p3), dirac_triplet({1.0}));
    Triplet abc2 = convolve(p2, convolve(p3, dirac_triplet({1.0})));
    CHECK(std::abs(abc1.gamma[0] - abc2.gamma[0]) < 1e-12);

    CHECK_THROWS_AS(convolve(p2, dirac_triplet({0.0, 0.0})), std::invalid_argument);
}

TEST_CASE("split_gaussian") {
    Triplet t = make_triplet(SymMatrix::identity(1), poisson_triplet(2.0, 2.0).levy, {2.0});
    auto [gauss, id0] = split_gaussian(t);
    CHECK(gauss.gaussian.at(0, 0) == 1.0);
    CHECK(gauss.levy.components.empty());
    CHECK(gauss.gamma[0] == 0.0);
    CHECK(id0.is_id0());
    CHECK(id0.gamma[0] == 2.0);
    Triplet back = convolve(gauss, id0);
    CHECK(back.gaussian.at(0, 0) == 1.0);
    CHECK(back.gamma[0] == 2.0);

    // pure Gaussian: location rides with the jump-free part
    Triplet g = make_triplet(SymMatrix::identity(2), LevyMeasure::zero(2), {0.5, -0.5});
    auto [g1, g0] = split_gaussian(g);
    CHECK(g1.gamma[0] == 0.0);
    CHECK(g0.gamma[1] == -0.5);
}

TEST_CASE("triplet construction validates inputs") {
    CHECK_THROWS_AS(make_triplet(SymMatrix::zero(2), LevyMeasure::zero(1), {0.0}),
                    std::invalid_argument);
    SymMatrix bad(1);
    bad.at(0, 0) = -1.0;
    CHECK_THROWS_AS(make_triplet(bad, LevyMeasure::zero(1), {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(Direction({0.5, 0.5}), std::invalid_argument);
}
