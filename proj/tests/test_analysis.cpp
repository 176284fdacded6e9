#include <gtest/gtest.h>

#include <cmath>
#include <future>
#include <vector>

#include <lora_redundancy/analysis.hpp>

#include "oracles.hpp"

namespace lr = lora_redundancy;

namespace {

// Baseline network: SF10, 1-byte measurements every 30 s, three channels,
// gateway assumes uniform distances over [44, 57] m.
lr::ScenarioParams baseline(int n = 40, double m = 1.0) {
    lr::ScenarioParams sc;
    sc.sensor_count = n;
    sc.traffic.channel_count = 3;
    sc.fading = lr::FadingModel(m);
    sc.distances = lr::DistanceModel::uniform(44.0, 57.0);
    return sc;
}

// Single channel with the period chosen so that f(0) = duty exactly.
lr::ScenarioParams with_duty(int n, double duty, double m = 1.0) {
    lr::ScenarioParams sc;
    sc.sensor_count = n;
    sc.traffic.channel_count = 1;
    sc.traffic.period_s = lr::frame_duration(sc.radio, 1) / duty;
    sc.traffic.duty_limit = 1.0;
    sc.fading = lr::FadingModel(m);
    sc.distances = lr::DistanceModel::point(50.5);
    return sc;
}

} // namespace

TEST(InterfererRate, SingleSensorHasNoInterferers) { EXPECT_EQ(lr::interferer_rate(baseline(1), 0), 0.0); }

TEST(InterfererRate, DirectProduct) { EXPECT_NEAR(lr::interferer_rate(with_duty(101, 0.01), 0), 1.0, 1e-12); }

TEST(InterfererRate, BaselineAtEightRepeats) {
    // r = 8 carries 9 bytes: 18 payload symbols.
    const double duty = (4 * 8 + 17 + 4 * 18) / 4.0 * 0.008192 / 30.0;
    EXPECT_NEAR(lr::interferer_rate(baseline(160), 8), 159.0 / 3.0 * duty, 1e-12);
}

TEST(StrongestInterfererCdf, NoInterferersIsCertain) {
    const auto sc = baseline(1);
    for (double x : {0.0, 1e-15, 1e-9}) {
        EXPECT_EQ(lr::strongest_interferer_cdf(sc, 0, x, lr::interferer_count_model::poisson), 1.0);
        EXPECT_EQ(lr::strongest_interferer_cdf(sc, 0, x, lr::interferer_count_model::exact), 1.0);
    }
}

TEST(StrongestInterfererCdf, LargePowerLimit) {
    const auto sc = baseline(160);
    const double inf = std::numeric_limits<double>::infinity();
    EXPECT_EQ(lr::strongest_interferer_cdf(sc, 9, inf, lr::interferer_count_model::poisson), 1.0);
    EXPECT_EQ(lr::strongest_interferer_cdf(sc, 9, inf, lr::interferer_count_model::exact), 1.0);
}

TEST(StrongestInterfererCdf, PoissonAndExactAgreeAtFiftySensors) {
    const auto sc = baseline(50);
    for (int r : {0, 4, 9}) {
        const double p = lr::interferer_activity(sc, r);
        double worst = 0.0;
        double worst_x = 0.0;
        for (int i = 0; i < 100; ++i) {
            const double x = std::pow(10.0, -18.0 + 8.0 * i / 99.0);
            const double pois = lr::strongest_interferer_cdf(sc, r, x, lr::interferer_count_model::poisson);
            const double exact = lr::strongest_interferer_cdf(sc, r, x, lr::interferer_count_model::exact);
            const double fp = lr::received_power_cdf(sc.fading, sc.distances, sc.link, x);
            ASSERT_NEAR(exact, oracle::strongest_cdf_binomial(fp, 49, p), 1e-13);
            if (std::fabs(pois - exact) > worst) {
                worst = std::fabs(pois - exact);
                worst_x = x;
            }
        }
        EXPECT_LT(worst, 1e-6) << "r=" << r << " worst at x=" << worst_x;
    }
}

TEST(StrongestInterfererCdf, PoissonSeriesTailIsNegligibleFromFiftySensors) {
    // Worst case F_P = 1, q = 1, f = 0.01: v = 0.49 and the first dropped
    // summand v^n e^-v / n! is below 1e-79.
    const double v = 49 * 0.01;
    const double log_term = 50 * std::log(v) - v - std::lgamma(51.0);
    EXPECT_LT(log_term, std::log(1e-79));
    auto sc = with_duty(50, 0.01);
    sc.link.sensitivity_w = 0.0;
    const double x = 1.0;
    EXPECT_NEAR(lr::strongest_interferer_cdf(sc, 0, x, lr::interferer_count_model::poisson),
                std::exp(-v * (1.0 - lr::received_power_cdf(sc.fading, sc.distances, sc.link, x))), 1e-15);
}

TEST(InterferenceOutage, SingleSensorNeverJammed) {
    EXPECT_EQ(lr::interference_outage(baseline(1), 0, lr::interference_mode::general), 0.0);
    EXPECT_EQ(lr::interference_outage(baseline(1), 0, lr::interference_mode::equal_distance), 0.0);
}

TEST(InterferenceOutage, PointDistanceModesAgree) {
    auto sc = baseline(120);
    sc.distances = lr::DistanceModel::point(50.5);
    for (int r : {0, 5, 9}) {
        EXPECT_NEAR(lr::interference_outage(sc, r, lr::interference_mode::general),
                    lr::interference_outage(sc, r, lr::interference_mode::equal_distance), 1e-8);
    }
}

TEST(InterferenceOutage, EqualDistanceRayleighUnitRateMatchesMonteCarlo) {
    const auto sc = with_duty(101, 0.01);
    const double pi = lr::interference_outage(sc, 0, lr::interference_mode::equal_distance);
    const auto mc = oracle::interference_outage_mc(1.0, 1.0, 0.25, 10'000'000, 11);
    EXPECT_NEAR(pi, mc.mean, 3.0 * mc.stderr_);
}

TEST(InterferenceOutage, EqualDistanceMatchesMonteCarloGrid) {
    for (double m : {1.0, 1.5}) {
        for (double v : {0.1, 1.0, 3.0}) {
            auto sc = with_duty(101, v / 100.0, m);
            const double pi = lr::interference_outage(sc, 0, lr::interference_mode::equal_distance);
            const auto mc = oracle::interference_outage_mc(m, v, 0.25, 2'000'000,
                                                           static_cast<std::uint64_t>(100 * m + 10 * v));
            EXPECT_NEAR(pi, mc.mean, 3.0 * mc.stderr_) << "m=" << m << " v=" << v;
        }
    }
}

TEST(InterferenceOutage, GeneralModeMatchesNestedGaussLegendre) {
    // Three nested fixed rules, no spline, no adaptive quadrature.
    const auto sc = baseline(80);
    const int r = 4;
    const double v = lr::interferer_rate(sc, r);
    const double m = 1.0;
    auto inner = [&](double a, double w) {
        return oracle::integrate([&](double u) { return oracle::gamma_p(m, m * 0.25 * a * std::pow(u / w, 4.0)); },
                                 44.0, 57.0, 4) /
               13.0;
    };
    const double success =
        oracle::integrate(
            [&](double w) {
                return oracle::integrate(
                    [&](double a) { return std::exp(-v * (1.0 - inner(a, w))) * oracle::gamma_pdf_unit_mean(m, a); },
                    0.0, 40.0, 40);
            },
            44.0, 57.0, 4) /
        13.0;
    EXPECT_NEAR(lr::interference_outage(sc, r, lr::interference_mode::general), 1.0 - success, 1e-8);
}

TEST(InterferenceOutage, SplineMatchesDirectInnerIntegral) {
    const auto sc = baseline(100, 1.5);
    const lr::InterferenceOutage with_spline(sc, lr::interference_mode::general, true);
    const lr::InterferenceOutage direct(sc, lr::interference_mode::general, false);
    for (int r : {0, 4, 9}) {
        const double p = lr::interferer_activity(sc, r);
        EXPECT_NEAR(with_spline.outage(p, lr::interferer_count_model::poisson),
                    direct.outage(p, lr::interferer_count_model::poisson), 1e-9);
    }
}

TEST(InterferenceOutage, ExactModeMatchesMonteCarloForFiveSensors) {
    auto sc = with_duty(5, 0.2);
    const double p = lr::interferer_activity(sc, 0);
    const double pi = lr::InterferenceOutage(sc, lr::interference_mode::equal_distance)
                          .outage(p, lr::interferer_count_model::exact);
    const auto mc = oracle::interference_outage_mc(1.0, 0.0, 0.25, 10'000'000, 5, 4, p);
    EXPECT_NEAR(pi, mc.mean, 3.0 * mc.stderr_);
}

TEST(InterferenceOutage, NondecreasingInRedundancyAndSensors) {
    for (auto mode : {lr::interference_mode::general, lr::interference_mode::equal_distance}) {
        double prev_n = 0.0;
        for (int n = 40; n <= 160; n += 20) {
            const auto profile = lr::failure_profile(baseline(n), 9,
                                                     mode == lr::interference_mode::general
                                                         ? lr::AnalysisModes::general()
                                                         : lr::AnalysisModes::equal_distance(50.5));
            for (std::size_t r = 1; r < profile.size(); ++r) {
                EXPECT_GE(profile[r].p_interference, profile[r - 1].p_interference);
            }
            EXPECT_GE(profile[0].p_interference, prev_n);
            prev_n = profile[0].p_interference;
        }
    }
}

TEST(FadingOutage, ZeroSensitivity) {
    auto sc = baseline();
    sc.link.sensitivity_w = 0.0;
    EXPECT_EQ(lr::fading_outage(sc, false), 0.0);
    EXPECT_EQ(lr::fading_outage(sc, true, 50.5), 0.0);
}

TEST(FadingOutage, PointDistanceModesAgree) {
    auto sc = baseline();
    sc.distances = lr::DistanceModel::point(48.0);
    EXPECT_EQ(lr::fading_outage(sc, false), lr::fading_outage(sc, true, 48.0));
}

TEST(FadingOutage, EqualDistanceRayleighClosedForm) {
    const auto sc = baseline();
    const double lambda = 299792458.0 / 868e6;
    const double k = lambda / (4.0 * 3.14159265358979323846);
    const double g = k * k * k * k * std::pow(10.0, -1.6);
    const double s = std::pow(10.0, (-132.0 - 30.0) / 10.0);
    EXPECT_NEAR(lr::fading_outage(sc, true, 50.5), -std::expm1(-std::pow(50.5, 4.0) * s / g), 1e-10);
}

TEST(FadingOutage, IndependentOfRedundancyAndSensorCount) {
    const double base = lr::failure_probability(baseline(40), 0).p_fading;
    for (int n : {40, 100, 160}) {
        for (int r : {0, 3, 9}) {
            EXPECT_EQ(lr::failure_probability(baseline(n), r).p_fading, base);
        }
    }
}

TEST(FailureProbability, CombinationAlgebra) {
    EXPECT_EQ(lr::combine_outages(0.0, 0.0, 5).p_fail, 0.0);
    for (int r = 0; r < 6; ++r) {
        EXPECT_NEAR(lr::combine_outages(0.0, 0.2, r).p_fail, std::pow(0.2, r + 1), 1e-15);
    }
    const auto o = lr::combine_outages(0.1, 0.05, 2);
    EXPECT_NEAR(o.p_frame_loss, 1.0 - 0.9 * 0.95, 1e-15);
    EXPECT_NEAR(o.p_fail, std::pow(o.p_frame_loss, 3), 1e-15);
}

TEST(FailureProbability, FortySensorsUniformDistanceBracketsTarget) {
    const auto sc = baseline(40);
    EXPECT_LE(lr::failure_probability(sc, 4).p_fail, 1e-3);
    EXPECT_GT(lr::failure_probability(sc, 3).p_fail, 1e-3);
}

TEST(FailureProbability, ProbabilitiesStayInUnitInterval) {
    for (double m : {0.5, 1.0, 3.0}) {
        for (int n : {2, 40, 160, 1000}) {
            for (const auto& o : lr::failure_profile(baseline(n, m), 9, lr::AnalysisModes::general())) {
                for (double p : {o.p_interference, o.p_fading, o.p_frame_loss, o.p_fail}) {
                    EXPECT_GE(p, -1e-12);
                    EXPECT_LE(p, 1.0 + 1e-12);
                }
            }
        }
    }
}

TEST(FailureProbability, ProfileMatchesSingleEvaluationsAndParallelRuns) {
    const auto sc = baseline(120);
    const auto profile = lr::failure_profile(sc, 9, lr::AnalysisModes::general());
    std::vector<std::future<lr::OutageBreakdown>> jobs;
    for (int r = 0; r <= 9; ++r) {
        jobs.push_back(std::async(std::launch::async, [&sc, r] { return lr::failure_probability(sc, r); }));
    }
    for (int r = 0; r <= 9; ++r) {
        const auto o = jobs[static_cast<std::size_t>(r)].get();
        EXPECT_EQ(o.p_fail, profile[static_cast<std::size_t>(r)].p_fail);
        EXPECT_EQ(o.p_interference, profile[static_cast<std::size_t>(r)].p_interference);
    }
}

TEST(ScenarioParams, Validation) {
    auto sc = baseline();
    sc.sensor_count = 0;
    EXPECT_THROW(sc.validate(), lr::invalid_parameter);
    sc = baseline();
    sc.capture_ratio = 1.0;
    EXPECT_THROW(sc.validate(), lr::invalid_parameter);
}
