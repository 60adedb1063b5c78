#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>

#include "ym2/expectation.hpp"

using namespace ym2;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double bessel_i(int n, double x) { return boost::math::cyl_bessel_i(n, x); }

}  // namespace

TEST(WilsonExpectation, Examples) {
    const auto g = GroupSpec::su2();
    EXPECT_EQ(wilson_expectation(3.7, g.trivial(), 2.0), 1.0);
    // half kappa^2 area = 1, c_1 = 3
    EXPECT_NEAR(wilson_expectation(2.0, g.irrep({1}), 1.0), 2.0 * std::exp(-3.0), 4 * kEps);
    EXPECT_NEAR(wilson_expectation(2.0, g.irrep({1}), 1.0), 0.09957413673572789, 1e-16);
    for (int n = 0; n < 6; ++n) EXPECT_EQ(wilson_expectation(0.0, g.irrep({n}), 1.3), n + 1.0);
    EXPECT_NEAR(wilson_expectation(1e-300, g.irrep({4}), 1.0), 5.0, 1e-15);
}

TEST(WilsonExpectation, StrictlyDecreasing) {
    const auto g = GroupSpec::su2();
    for (int n = 1; n < 5; ++n) {
        EXPECT_GT(wilson_expectation(0.5, g.irrep({n}), 1.0), wilson_expectation(0.6, g.irrep({n}), 1.0));
        EXPECT_GT(wilson_expectation(0.5, g.irrep({n}), 1.0), wilson_expectation(0.5, g.irrep({n}), 1.1));
        EXPECT_GT(wilson_expectation(0.5, g.irrep({n}), 1.0) / (n + 1),
                  wilson_expectation(0.5, g.irrep({n + 1}), 1.0) / (n + 2));
    }
}

TEST(LoopNetwork, TwoDomainExample) {
    const auto g = GroupSpec::su2();
    const FlagWorldSpec w{{{"A", 1.0}, {"B", 2.0}}};
    const LoopNetworkSpec net{{{"A", {1}}, {"B", {1}}}, {0}};
    const double kappa = std::sqrt(2.0);
    // kappa^2 carries one rounding, amplified by the exponent 9
    const double expected = 2.0 * std::exp(-9.0);
    EXPECT_NEAR(loop_network_expectation(g, w, net, kappa), expected, 4 * kEps * (1 + 9) * expected);
}

TEST(LoopNetwork, SingleDomainEqualsWilson) {
    const auto g = GroupSpec::parse("su2*u1");
    const FlagWorldSpec w{{{"A", 0.8}}};
    for (const Label& l : {Label{1, 0}, Label{2, -1}, Label{3, 2}}) {
        const LoopNetworkSpec net{{{"A", l}}, l};
        const double expected = wilson_expectation(0.8, g.irrep(l), 1.1);
        EXPECT_NEAR(loop_network_expectation(g, w, net, 1.1), expected, 4 * kEps * expected);
    }
}

TEST(LoopNetwork, TrivialIsOne) {
    const auto g = GroupSpec::su2();
    const FlagWorldSpec w{{{"A", 1.0}, {"B", 2.0}}};
    EXPECT_EQ(loop_network_expectation(g, w, LoopNetworkSpec{{}, {0}}, 1.0), 1.0);
    EXPECT_EQ(loop_network_expectation(g, w, LoopNetworkSpec{{{"A", {0}}}, {0}}, 1.0), 1.0);
}

TEST(LoopNetwork, ZeroMultiplicityIsEMult) {
    const auto g = GroupSpec::su2();
    const FlagWorldSpec w{{{"A", 1.0}, {"B", 2.0}}};
    try {
        loop_network_expectation(g, w, LoopNetworkSpec{{{"A", {1}}, {"B", {1}}}, {1}}, 1.0);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.diagnostics()[0].code, ErrorCode::E_MULT);
    }
}

TEST(LoopNetwork, FactorizesOverDomains) {
    const auto g = GroupSpec::su2();
    const FlagWorldSpec w{{{"a", 0.3}, {"b", 1.7}, {"c", 0.9}}};
    const LoopNetworkSpec net{{{"a", {1}}, {"b", {2}}, {"c", {3}}}, {2}};
    const double kappa = 0.9;
    double independent = std::sqrt(3.0);
    for (const auto& d : w.domains) {
        const Irrep r = g.irrep(net.assignments.at(d.id));
        // single-flag factor: wilson_expectation / sqrt(d)
        independent *= wilson_expectation(d.area, r, kappa) / std::sqrt(static_cast<double>(r.dimension));
    }
    const double v = loop_network_expectation(g, w, net, kappa);
    EXPECT_GT(v, 0.0);
    EXPECT_NEAR(v, independent, 8 * kEps * v);
}

TEST(LoopNetwork, RefinementInvariance) {
    const auto g = GroupSpec::parse("su2*u1");
    const FlagWorldSpec w{{{"a", 0.3}, {"b", 1.7}}};
    const LoopNetworkSpec net{{{"a", {1, 1}}, {"b", {1, -1}}}, {2, 0}};
    const double parent = loop_network_expectation(g, w, net, 1.2);
    RandomStream rng(3);
    for (const auto& plan : {uniform_refinement(w, 7), random_refinement(w, 0.01, rng)}) {
        const double refined = loop_network_expectation(g, w, plan, net, 1.2);
        EXPECT_NEAR(refined, parent, 1e-13 * parent);
    }
}

TEST(PlaquetteRatio, TrivialIsOne) {
    const auto g = GroupSpec::parse("su2*u1");
    EXPECT_EQ(plaquette_ratio(g, 0.3, g.trivial(), 1.0, 64).value, 1.0);
}

TEST(PlaquetteRatio, MatchesBesselClosedForm) {
    // SU(2): I_{n+1}(beta)/I_1(beta); U(1): I_z(beta)/I_0(beta)
    const auto su2 = GroupSpec::su2();
    const auto u1 = GroupSpec::u1();
    for (double area : {0.02, 0.1, 0.5, 1.0, 4.0}) {
        const double beta = 1.0 / area;
        for (int n = 1; n <= 4; ++n) {
            const double expected = bessel_i(n + 1, beta) / bessel_i(1, beta);
            EXPECT_NEAR(plaquette_ratio(su2, area, su2.irrep({n}), 1.0, 128).value, expected, 1e-13);
            const double expected_u1 = bessel_i(n, beta) / bessel_i(0, beta);
            EXPECT_NEAR(plaquette_ratio(u1, area, u1.irrep({n}), 1.0, 128).value, expected_u1, 1e-13);
            EXPECT_NEAR(plaquette_ratio(u1, area, u1.irrep({-n}), 1.0, 128).value, expected_u1, 1e-13);
        }
    }
}

TEST(PlaquetteRatio, FactorizesOverProduct) {
    const auto g = GroupSpec::parse("su2*u1");
    const auto su2 = GroupSpec::su2();
    const auto u1 = GroupSpec::u1();
    const double v = plaquette_ratio(g, 0.3, g.irrep({2, 3}), 0.8, 96).value;
    const double a = plaquette_ratio(su2, 0.3, su2.irrep({2}), 0.8, 96).value;
    const double b = plaquette_ratio(u1, 0.3, u1.irrep({3}), 0.8, 96).value;
    EXPECT_NEAR(v, a * b, 4 * kEps);
}

TEST(PlaquetteRatio, LargeAreaApproachesHaar) {
    const auto g = GroupSpec::su2();
    EXPECT_LT(std::abs(plaquette_ratio(g, 1e6, g.irrep({1}), 1.0, 64).value), 1e-6);
    EXPECT_LT(std::abs(plaquette_ratio(g, 1e12, g.irrep({3}), 1.0, 64).value), 1e-11);
}

TEST(PlaquetteRatio, SmallAreaLogSlope) {
    // -log(ratio)/area -> kappa^2 c_1 / 2
    const auto g = GroupSpec::su2();
    const double kappa = 1.3;
    double prev = 1e9;
    for (double area : {1e-2, 1e-3, 1e-4, 1e-5}) {
        const double r = plaquette_ratio(g, area, g.irrep({1}), kappa, 128).value;
        const double dev = std::abs(-std::log(r) / area - 0.5 * kappa * kappa * 3.0);
        EXPECT_LT(dev, prev);
        prev = dev;
    }
    EXPECT_LT(prev, 1e-4);
}

TEST(PlaquetteRatio, NoOverflowAtTinyArea) {
    const auto g = GroupSpec::su2();
    const auto r = plaquette_ratio(g, 1e-9, g.irrep({1}), 1.0, 128);
    EXPECT_TRUE(std::isfinite(r.value));
    EXPECT_NEAR(r.value, 1.0, 1e-8);
    EXPECT_LT(r.quad_estimate, 1e-12);
}

TEST(PlaquetteRatio, Errors) {
    const auto g = GroupSpec::su2();
    EXPECT_THROW(plaquette_ratio(g, 0.0, g.irrep({1}), 1.0, 64), ParameterError);
    EXPECT_THROW(plaquette_ratio(g, 1.0, g.irrep({1}), 1.0, 1), ParameterError);
    EXPECT_THROW(plaquette_ratio(g, 1.0, Irrep{{1, 1}, 2, 3}, 1.0, 64), StructuralError);
}

TEST(RefinementLimit, TrivialIrrepExact) {
    const auto g = GroupSpec::su2();
    const FlagWorldSpec w{{{"A", 1.0}}};
    for (const auto& row : refinement_limit_experiment(g, w, g.trivial(), 1.0, {1, 4, 16})) {
        EXPECT_EQ(row.product, 1.0);
        EXPECT_EQ(row.target, 1.0);
        EXPECT_EQ(row.abs_error, 0.0);
    }
}

TEST(RefinementLimit, ConvergesToHeatKernel) {
    const auto g = GroupSpec::su2();
    for (double t : {0.25, 1.0}) {
        const FlagWorldSpec w{{{"A", 2.0 * t}}};
        for (int n = 1; n <= 3; ++n) {
            const auto rows = refinement_limit_experiment(g, w, g.irrep({n}), 1.0, {1, 256}, 128, 2);
            EXPECT_EQ(rows[0].target, std::exp(-t * n * (n + 2)));
            EXPECT_LT(rows[1].abs_error, rows[0].abs_error) << "t=" << t << " n=" << n;
            EXPECT_LT(rows[1].quad_estimate, 1e-10);
            EXPECT_EQ(rows[1].mesh, 2.0 * t / 256);
        }
    }
}

TEST(RefinementLimit, ProductMatchesBesselPower) {
    const auto g = GroupSpec::su2();
    const FlagWorldSpec w{{{"A", 1.0}}};
    const auto rows = refinement_limit_experiment(g, w, g.irrep({1}), 1.0, {1, 2, 8});
    for (const auto& r : rows) {
        const double beta = static_cast<double>(r.k);
        const double expected = std::pow(bessel_i(2, beta) / bessel_i(1, beta), r.k);
        EXPECT_NEAR(r.product, expected, 1e-13);
    }
}

TEST(RefinementLimit, ThreadCountIndependent) {
    const auto g = GroupSpec::su2();
    const FlagWorldSpec w{{{"A", 1.0}}};
    const auto a = refinement_limit_experiment(g, w, g.irrep({2}), 1.0, {1, 2, 4, 8, 16}, 64, 1);
    const auto b = refinement_limit_experiment(g, w, g.irrep({2}), 1.0, {1, 2, 4, 8, 16}, 64, 4);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].product, b[i].product);
    RandomStream rng(8);
    const auto plan = random_refinement(w, 1.0 / 64, rng);
    const auto& parts = plan.parts.at("A");
    EXPECT_EQ(plaquette_product(g, parts, g.irrep({1}), 1.0, 64, 1).value,
              plaquette_product(g, parts, g.irrep({1}), 1.0, 64, 3).value);
}

TEST(RefinementLimit, RandomRefinementAgrees) {
    const auto g = GroupSpec::su2();
    const FlagWorldSpec w{{{"A", 1.0}}};
    const auto uniform = refinement_limit_experiment(g, w, g.irrep({1}), 1.0, {64}).front();
    for (std::uint64_t seed : {1u, 2u}) {
        RandomStream rng(seed);
        const auto plan = random_refinement(w, 1.0 / 64, rng);
        const auto p = plaquette_product(g, plan.parts.at("A"), g.irrep({1}), 1.0, 128);
        EXPECT_NEAR(p.value, uniform.product, 1e-3);
        EXPECT_LT(std::abs(p.value - uniform.target), 2e-2);
    }
}

TEST(FourierIntegrate, Basics) {
    const auto g = GroupSpec::su2();
    const HeatKernelParams p{g, 0.7};
    EXPECT_EQ(fourier_integrate_ym(p, {{g.trivial(), 1.0}}).real(), 1.0);
    for (int n = 1; n < 4; ++n) {
        const double expected = wilson_expectation(1.4, g.irrep({n}), 1.0);
        EXPECT_NEAR(fourier_integrate_ym(p, {{g.irrep({n}), 1.0}}).real(), expected, 4 * kEps * expected);
    }
}

TEST(FourierIntegrate, AgreesWithDensityIntegral) {
    // f(theta) = cos^4(theta/2)-like smooth class function via its coefficients
    const auto g = GroupSpec::su2();
    ClassFunction f{[](const ClassPoint& p) { return std::complex<double>(std::exp(std::cos(p.coords[0]))); },
                    Smoothness::Analytic,
                    {}};
    std::vector<std::pair<Irrep, std::complex<double>>> coeffs;
    for (auto& r : irreps_up_to(g, 40)) {
        ClassFunction prod{[&](const ClassPoint& p) { return std::conj(character(g, r, p)) * f(p); },
                           Smoothness::Analytic,
                           {}};
        coeffs.emplace_back(r, haar_integrate(g, prod, 128));
    }
    for (double t : {0.05, 0.5, 2.0}) {
        const HeatKernelParams p{g, t};
        const auto direct = measure_of_class_set(p, f, 1e-13, 128);
        EXPECT_NEAR(fourier_integrate_ym(p, coeffs).real(), direct.value, 1e-11);
    }
}

TEST(Generalized, DeltaAndHaarCases) {
    const auto g = GroupSpec::su2();
    const Irrep base = g.irrep({1});
    const Domain dom{"A", 1.0};
    const GeneralizedTheory delta(g, base, table_law({{"A", 2.0}}));
    const GeneralizedTheory haar(g, base, table_law({{"A", 0.0}}));
    for (int n = 1; n <= 6; ++n) {
        EXPECT_EQ(generalized_expectation(delta, g.irrep({n}), dom), n + 1.0);
        EXPECT_EQ(generalized_expectation(haar, g.irrep({n}), dom), 0.0);
    }
    EXPECT_EQ(generalized_density_trichotomy(delta, dom, 1e-10).kind, MeasureClass::DELTA);
    EXPECT_EQ(generalized_density_trichotomy(haar, dom, 1e-10).kind, MeasureClass::HAAR);
    EXPECT_THROW(GeneralizedTheory(g, g.trivial(), table_law({})), ParameterError);
    const GeneralizedTheory bad(g, base, table_law({{"A", 2.5}}));
    EXPECT_THROW(generalized_expectation(bad, base, dom), ParameterError);
}

TEST(Generalized, YangMillsInstanceReproducesWilson) {
    const std::vector<std::pair<const char*, Label>> cases{{"su2", {1}}, {"u1", {1}}, {"su2*u1", {1, 0}}};
    for (const auto& [name, base_label] : cases) {
        const auto g = GroupSpec::parse(name);
        const double kappa = 0.9;
        const auto theory = yang_mills_theory(g, g.irrep(base_label), kappa);
        for (double area : {0.05, 0.7, 3.0}) {
            const Domain dom{"A", area};
            for (const auto& r : irreps_up_to(g, 6.0)) {
                const double expected = wilson_expectation(area, r, kappa);
                // relative rounding scales with the exponent
                const double tol = 4 * kEps * (1 + std::abs(std::log(expected))) * expected;
                EXPECT_NEAR(generalized_expectation(theory, r, dom), expected, tol)
                    << name << " " << format_label(r.label);
            }
        }
    }
}

TEST(Generalized, MiddleCaseEffectiveTime) {
    const auto g = GroupSpec::su2();
    const GeneralizedTheory theory(g, g.irrep({1}), table_law({{"A", 2.0 * std::exp(-3.0)}}));
    const auto tri = generalized_density_trichotomy(theory, {"A", 1.0}, 1e-12);
    ASSERT_EQ(tri.kind, MeasureClass::ABS_CONTINUOUS);
    EXPECT_NEAR(tri.effective_time, 1.0, 4 * kEps);
    const auto reference = build_density({g, 1.0}, 1e-12);
    ASSERT_EQ(tri.density->terms().size(), reference.terms().size());
    for (std::size_t i = 0; i < reference.terms().size(); ++i) {
        const double c = reference.terms()[i].coefficient;
        EXPECT_NEAR(tri.density->terms()[i].coefficient, c, 16 * kEps * c);
    }
}

TEST(Generalized, SigmaAndAreaLaws) {
    const auto g = GroupSpec::su2();
    const GeneralizedTheory by_area(g, g.irrep({1}), area_law(2.0, 1.5));
    const GeneralizedTheory by_sigma(g, g.irrep({1}), sigma_law(2.0, 1.5, {{"A", 0.4}}));
    const Domain dom{"A", 0.4};
    EXPECT_EQ(generalized_expectation(by_area, g.irrep({2}), dom), generalized_expectation(by_sigma, g.irrep({2}), dom));
    EXPECT_THROW(generalized_expectation(by_sigma, g.irrep({2}), Domain{"B", 1.0}), ParameterError);
    EXPECT_THROW(area_law(2.0, -1.0), ParameterError);
}

TEST(Generalized, RegularityWitnessBounded) {
    const auto g = GroupSpec::su2();
    const auto theory = yang_mills_theory(g, g.irrep({1}), 1.0);
    std::vector<Domain> doms;
    for (double a = 0.5; a > 1e-6; a /= 4) doms.push_back({"x", a});
    const auto ratios = regularity_witness(theory, doms, [](const Domain& d) { return d.area; });
    // (d_1 - d_1 e^{-3a/2}) / a increases to d_1 * 3/2
    for (std::size_t i = 1; i < ratios.size(); ++i) EXPECT_GE(ratios[i], ratios[i - 1]);
    EXPECT_LE(ratios.back(), 3.0);
    EXPECT_NEAR(ratios.back(), 3.0, 1e-4);
}
