#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ym2/heatkernel.hpp"

using namespace ym2;

namespace {

// Brute-force tail sum_{|v| > cutoff} d_v^2 e^{-t c_v}, summed far past the
// point where terms underflow.
double brute_tail(const GroupSpec& g, double t, double cutoff) {
    double sum = 0.0;
    const int limit = static_cast<int>(cutoff) + 2 + static_cast<int>(std::sqrt(800.0 / (g.c_minus() * t)));
    for (const auto& irrep : irreps_up_to(g, limit))
        if (label_norm(irrep.label) > cutoff)
            sum += static_cast<double>(irrep.dimension * irrep.dimension) * std::exp(-t * irrep.casimir);
    return sum;
}

ClassFunction theta_ball(double theta_max) {
    return {[theta_max](const ClassPoint& p) { return std::complex<double>(p.coords[0] < theta_max ? 1.0 : 0.0); },
            Smoothness::Measurable,
            {{theta_max}}};
}

double su2_ball_mass(double a) { return (a - std::sin(2 * a) / 2) / std::numbers::pi; }

}  // namespace

TEST(TailBound, DominatesBruteForceTails) {
    for (const auto& g : {GroupSpec::su2(), GroupSpec::u1()}) {
        for (double t : {0.05, 0.5, 5.0}) {
            for (double cutoff : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0}) {
                const double bound = tail_bound_series(g, t, cutoff);
                const double exact = brute_tail(g, t, cutoff);
                EXPECT_GE(bound, exact) << g.to_string() << " t=" << t << " cutoff=" << cutoff;
                EXPECT_TRUE(std::isfinite(bound));
            }
        }
    }
}

TEST(TailBound, DominatesOnProductGroups) {
    for (const auto& g : {GroupSpec::parse("su2*u1"), GroupSpec::parse("su2*su2")}) {
        for (double t : {0.2, 1.0})
            for (double cutoff : {1.0, 3.0, 6.0}) EXPECT_GE(tail_bound_series(g, t, cutoff), brute_tail(g, t, cutoff));
    }
}

TEST(TailBound, DecreasesAsCutoffDoubles) {
    for (const auto& g : {GroupSpec::su2(), GroupSpec::u1(), GroupSpec::parse("su2*u1")}) {
        double prev = tail_bound_series(g, 0.05, 2.0);
        for (double cutoff = 4.0; cutoff <= 64.0; cutoff *= 2) {
            const double b = tail_bound_series(g, 0.05, cutoff);
            EXPECT_LT(b, prev);
            prev = b;
        }
    }
}

TEST(TailBound, MonotoneInTime) {
    const auto g = GroupSpec::su2();
    EXPECT_GT(tail_bound_series(g, 0.1, 5.0), tail_bound_series(g, 0.2, 5.0));
}

TEST(TailBound, VanishesForInfiniteCutoff) {
    EXPECT_EQ(tail_bound_series(GroupSpec::u1(), 1.0, std::numeric_limits<double>::infinity()), 0.0);
    EXPECT_LT(tail_bound_series(GroupSpec::u1(), 1.0, 40.0), 1e-300);
}

TEST(TailBound, SU2HalfTimeCutoffTen) {
    // Direct sum over 10 < n <= 200 is 1.2773471268218163e-29.
    EXPECT_GE(tail_bound_series(GroupSpec::su2(), 0.5, 10.0), 1.2773471268218163e-29);
}

TEST(TailBound, RejectsInvalidArguments) {
    EXPECT_THROW(tail_bound_series(GroupSpec::su2(), 0.0, 5.0), ParameterError);
    EXPECT_THROW(tail_bound_series(GroupSpec::su2(), 1.0, 0.5), ParameterError);
}

TEST(BuildDensity, LongTimeKeepsFewIrreps) {
    const auto d = build_density({GroupSpec::su2(), 10.0}, 1e-12);
    EXPECT_LE(d.terms().size(), 4u);
    EXPECT_LE(d.tail_bound(), 1e-12);
    EXPECT_EQ(d.terms()[0].coefficient, 1.0);
    EXPECT_NEAR(d.terms()[1].coefficient, 2.0 * std::exp(-30.0), 1e-28);
    EXPECT_NEAR(d.evaluate(ClassPoint{{1.0}}), 1.0 + 2.0 * std::exp(-30.0) * su2_character(1, 1.0), 1e-15);
}

TEST(BuildDensity, VeryLongTimeIsUniform) {
    const auto d = build_density({GroupSpec::parse("su2*u1"), 60.0}, 1e-10);
    for (double theta : {0.0, 1.0, 3.0})
        for (double phi : {-3.0, 0.0, 2.0}) EXPECT_NEAR(d.evaluate(ClassPoint{{theta, phi}}), 1.0, 1e-12);
}

TEST(BuildDensity, IdentityValueMatchesPartialSums) {
    const auto d = build_density({GroupSpec::su2(), 0.1}, 1e-12);
    const auto e = density_eval(d, identity_point(d.group()));
    EXPECT_NEAR(e.value, 15.486183221081093, 1e-10 + e.error);
    EXPECT_LE(e.error, 1e-12);
}

TEST(BuildDensity, JacobiThetaOnU1) {
    const auto d = build_density({GroupSpec::u1(), 1.0}, 1e-12);
    EXPECT_NEAR(d.evaluate(ClassPoint{{0.0}}), 1.7726372048266523, 1e-12);
}

TEST(BuildDensity, CoefficientInvariants) {
    const auto d = build_density({GroupSpec::parse("su2*u1"), 0.3}, 1e-10);
    EXPECT_TRUE(d.terms().front().irrep.is_trivial());
    EXPECT_EQ(d.terms().front().coefficient, 1.0);
    std::map<std::int64_t, double> last_by_dim;
    for (const auto& term : d.terms()) {
        EXPECT_GT(term.coefficient, 0.0);
        auto it = last_by_dim.find(term.irrep.dimension);
        if (it != last_by_dim.end()) {
            EXPECT_LE(term.coefficient, it->second);
        }
        last_by_dim[term.irrep.dimension] = term.coefficient;
    }
}

TEST(BuildDensity, ErrorsAndCap) {
    EXPECT_THROW(build_density({GroupSpec::su2(), 0.0}, 1e-10), ParameterError);
    EXPECT_THROW(build_density({GroupSpec::su2(), 1.0}, 0.0), ParameterError);
    try {
        build_density({GroupSpec::su2(), 1e-4}, 1e-10, 50.0);
        FAIL() << "expected ResourceError";
    } catch (const ResourceError& e) {
        EXPECT_GT(e.needed(), 50.0);
    }
}

TEST(DensityEval, MaximumAtIdentity) {
    for (double t : {0.05, 0.5, 2.0}) {
        const auto d = build_density({GroupSpec::su2(), t}, 1e-12);
        const double at_e = d.evaluate(identity_point(d.group()));
        for (int j = 1; j <= 200; ++j) EXPECT_LE(d.evaluate(ClassPoint{{std::numbers::pi * j / 200}}), at_e);
    }
}

TEST(DensityEval, PositiveOnGridAtConvergence) {
    for (double t : {0.05, 0.2, 1.0, 10.0}) {
        const auto d = build_density({GroupSpec::su2(), t}, 1e-10);
        for (int j = 0; j <= 400; ++j) EXPECT_GE(d.evaluate(ClassPoint{{std::numbers::pi * j / 400}}), -d.tail_bound());
        const auto du = build_density({GroupSpec::u1(), t}, 1e-10);
        for (int j = 0; j < 400; ++j)
            EXPECT_GE(du.evaluate(ClassPoint{{-std::numbers::pi + 2 * std::numbers::pi * j / 400}}), -du.tail_bound());
    }
}

TEST(SupBound, DominatesIdentityValue) {
    for (const auto& g : {GroupSpec::su2(), GroupSpec::u1(), GroupSpec::parse("su2*u1")}) {
        for (double t : {0.05, 0.5, 3.0}) {
            const auto d = build_density({g, t}, 1e-12);
            EXPECT_GE(sup_bound({g, t}), d.evaluate(identity_point(g)) - d.tail_bound());
        }
    }
}

TEST(SupBound, LimitsAndScaling) {
    const auto g = GroupSpec::su2();
    EXPECT_NEAR(sup_bound({g, 1e16}), 1.0, 1e-6);
    EXPECT_LT(sup_bound({g, 1e10}), sup_bound({g, 1e8}));
    // Leading power t^{-dim G / 2}.
    const auto c = sup_bound_constants(g);
    ASSERT_EQ(c.size(), 3u);
    const double r1 = sup_bound({g, 1e-6}) * std::pow(1e-6, 1.5);
    const double r2 = sup_bound({g, 1e-8}) * std::pow(1e-8, 1.5);
    EXPECT_NEAR(r1 / c.back(), 1.0, 1e-2);
    EXPECT_NEAR(r2 / c.back(), 1.0, 1e-3);
    EXPECT_THROW(sup_bound({g, 0.0}), ParameterError);
}

TEST(Measure, NormalizationAcrossTimes) {
    ClassFunction one{[](const ClassPoint&) { return std::complex<double>(1.0); }, Smoothness::Analytic, {}};
    for (const auto& g : {GroupSpec::su2(), GroupSpec::u1()}) {
        for (double t : {0.05, 0.5, 5.0}) {
            const auto e = measure_of_class_set(HeatKernelParams{g, t}, one, 1e-12, 64);
            EXPECT_NEAR(e.value, 1.0, e.error + 1e-13);
        }
    }
}

TEST(Measure, ConcentratesAtIdentityForSmallTime) {
    const auto ball = theta_ball(0.5);
    double prev = 0.0;
    for (double t : {0.1, 0.03, 0.01, 0.003}) {
        const auto e = measure_of_class_set(HeatKernelParams{GroupSpec::su2(), t}, ball, 1e-12, 64);
        EXPECT_GT(e.value, prev);
        prev = e.value;
    }
    EXPECT_GT(prev, 1.0 - 1e-7);
}

TEST(Measure, LongTimeReproducesHaarMass) {
    const double a = 0.4;
    ClassFunction complement{[a](const ClassPoint& p) { return std::complex<double>(p.coords[0] >= a ? 1.0 : 0.0); },
                             Smoothness::Measurable,
                             {{a}}};
    const auto e = measure_of_class_set(HeatKernelParams{GroupSpec::su2(), 40.0}, complement, 1e-12, 64);
    EXPECT_NEAR(e.value, 1.0 - su2_ball_mass(a), 1e-12);
}

TEST(Measure, ProductSetFactorizes) {
    const auto g = GroupSpec::su2();
    ProductDensity pd({build_density({g, 0.1}, 1e-12), build_density({g, 0.4}, 1e-12)});
    const std::vector<ClassPoint> pts{ClassPoint{{0.3}}, ClassPoint{{1.2}}};
    EXPECT_EQ(pd.evaluate(pts), pd.components()[0].evaluate(pts[0]) * pd.components()[1].evaluate(pts[1]));
    const auto joint = measure_of_product_set(pd, {theta_ball(0.7), theta_ball(0.9)}, 64);
    const double m1 = measure_of_class_set(pd.components()[0], theta_ball(0.7), 64).value;
    const double m2 = measure_of_class_set(pd.components()[1], theta_ball(0.9), 64).value;
    EXPECT_NEAR(joint.value, m1 * m2, joint.error + 1e-14);
}

TEST(Semigroup, CoefficientsCompose) {
    const auto g = GroupSpec::parse("su2*u1");
    const double s = 0.3;
    const double t = 0.45;
    const auto ds = build_density({g, s}, 1e-12);
    const auto dt = build_density({g, t}, 1e-12);
    const auto dst = build_density({g, s + t}, 1e-12);
    auto coefficient_of = [](const TruncatedDensity& dens, const Label& label) {
        for (const auto& term : dens.terms())
            if (term.irrep.label == label) return term.coefficient;
        return 0.0;
    };
    for (const auto& term : dst.terms()) {
        const double d = static_cast<double>(term.irrep.dimension);
        // exp(-x) carries a relative rounding error of order x * eps.
        const double x = (s + t) * term.irrep.casimir;
        EXPECT_NEAR(coefficient_of(ds, term.irrep.label) * coefficient_of(dt, term.irrep.label) / d, term.coefficient,
                    4.0 * std::numeric_limits<double>::epsilon() * (1.0 + x) * term.coefficient);
    }
}

TEST(Semigroup, QuadratureConvolutionReproducesCoefficients) {
    // <chi_v, f_s * f_t> = <chi_v, f_s><chi_v, f_t> / d_v for class functions.
    const auto g = GroupSpec::su2();
    const auto ds = build_density({g, 0.2}, 1e-13);
    const auto dt = build_density({g, 0.35}, 1e-13);
    for (int n = 0; n <= 6; ++n) {
        const auto irrep = g.irrep({n});
        auto coefficient = [&](const TruncatedDensity& d) {
            ClassFunction f{[&](const ClassPoint& p) { return std::conj(character(g, irrep, p)) * d.evaluate(p); },
                            Smoothness::Analytic,
                            {}};
            return haar_integrate(g, f, resolving_order(d, 64)).real();
        };
        const double conv = coefficient(ds) * coefficient(dt) / irrep.dimension;
        EXPECT_NEAR(conv, irrep.dimension * std::exp(-0.55 * irrep.casimir), 1e-8);
    }
}

TEST(FourierIntegration, KnownCoefficients) {
    // f = 1 + 0.5 chi_1 + 0.25 chi_2: int f dmu_t = 1 + 0.5 * 2 e^{-3t} + 0.25 * 3 e^{-8t}.
    const auto g = GroupSpec::su2();
    const double t = 0.4;
    const auto d = build_density({g, t}, 1e-13);
    ClassFunction f{[&](const ClassPoint& p) {
                        return std::complex<double>(d.evaluate(p) * (1.0 + 0.5 * su2_character(1, p.coords[0]) +
                                                                     0.25 * su2_character(2, p.coords[0])));
                    },
                    Smoothness::Analytic,
                    {}};
    EXPECT_NEAR(haar_integrate(g, f, resolving_order(d, 64)).real(),
                1.0 + std::exp(-3 * t) + 0.75 * std::exp(-8 * t), 1e-12);
}

TEST(Sampler, LongTimeMatchesHaarClassDensity) {
    const auto d = build_density({GroupSpec::su2(), 50.0}, 1e-12);
    ClassSampler sampler(d);
    RandomStream rng(3);
    const int N = 100000;
    std::vector<double> xs(N);
    for (auto& x : xs) x = sampler(rng).coords[0];
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (int i = 0; i < N; ++i) {
        const double F = su2_ball_mass(xs[i]);
        ks = std::max({ks, std::abs(F - static_cast<double>(i) / N), std::abs(F - static_cast<double>(i + 1) / N)});
    }
    // 1% critical value of the Kolmogorov-Smirnov statistic.
    EXPECT_LT(ks, 1.63 / std::sqrt(static_cast<double>(N)));
}

TEST(Sampler, MeanCharacterMatchesExpectation) {
    const double t = 0.5;
    const auto d = build_density({GroupSpec::su2(), t}, 1e-12);
    ClassSampler sampler(d);
    RandomStream rng(12345);
    const int N = 1000000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int i = 0; i < N; ++i) {
        const double chi = 2.0 * std::cos(sampler(rng).coords[0]);
        sum += chi;
        sum2 += chi * chi;
    }
    const double mean = sum / N;
    const double sigma = std::sqrt((sum2 / N - mean * mean) / N);
    EXPECT_NEAR(mean, 2.0 * std::exp(-3.0 * t), 3.0 * sigma);
}

TEST(Sampler, SmallTimeConcentrates) {
    const auto d = build_density({GroupSpec::su2(), 1e-3}, 1e-10);
    ClassSampler sampler(d);
    RandomStream rng(9);
    int inside = 0;
    const int N = 20000;
    for (int i = 0; i < N; ++i) inside += sampler(rng).coords[0] < 0.3;
    EXPECT_GT(inside, N - 5);
}

TEST(Sampler, U1FactorAndDeterminism) {
    const auto d = build_density({GroupSpec::parse("su2*u1"), 0.7}, 1e-12);
    ClassSampler sampler(d);
    RandomStream a(42);
    RandomStream b(42);
    double mean_cos = 0.0;
    const int N = 200000;
    for (int i = 0; i < N; ++i) {
        const auto p = sampler(a);
        const auto q = sampler(b);
        ASSERT_EQ(p.coords, q.coords);
        ASSERT_GE(p.coords[1], -std::numbers::pi);
        ASSERT_LT(p.coords[1], std::numbers::pi);
        mean_cos += std::cos(p.coords[1]);
    }
    mean_cos /= N;
    // E[cos phi] = e^{-t}; sd of cos phi <= 1.
    EXPECT_NEAR(mean_cos, std::exp(-0.7), 3.0 / std::sqrt(static_cast<double>(N)));
}

TEST(Sampler, CdfTableIsMonotoneAndDumpable) {
    const auto d = build_density({GroupSpec::su2(), 0.2}, 1e-12);
    ClassSampler sampler(d, 1024);
    const auto& cdf = sampler.cdf(0);
    EXPECT_EQ(cdf.front(), 0.0);
    EXPECT_EQ(cdf.back(), 1.0);
    EXPECT_TRUE(std::is_sorted(cdf.begin(), cdf.end()));
    std::ostringstream os;
    sampler.write_cdf_csv(os, 0);
    EXPECT_EQ(os.str().substr(0, 10), "theta,cdf\n");
}

TEST(DensityCsv, HeaderAndTrailer) {
    const auto d = build_density({GroupSpec::su2(), 5.0}, 1e-12);
    std::ostringstream os;
    write_density_csv(os, d);
    const std::string s = os.str();
    EXPECT_EQ(s.substr(0, 26), "group,t,label,coefficient\n");
    EXPECT_NE(s.find("su2,5,0,1\n"), std::string::npos);
    EXPECT_NE(s.find("\ntail_bound,"), std::string::npos);
}
