#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rwndq/errors.hpp"
#include "rwndq/metrics.hpp"
#include "rwndq/scenario.hpp"

using namespace rwndq;

TEST_CASE("jain index basics") {
    std::vector<double> equal = {1, 1, 1, 1};
    CHECK(jain_index(equal) == doctest::Approx(1.0));

    std::vector<double> one_hog = {1, 0, 0, 0};
    CHECK(jain_index(one_hog) == doctest::Approx(0.25));

    std::vector<double> mixed = {5, 3, 2};
    CHECK(jain_index(mixed) == doctest::Approx(100.0 / (3.0 * 38.0)));

    CHECK_THROWS_AS(jain_index({}), EmptyInput);
}

TEST_CASE("jain index is scale invariant and lands in (0, 1]") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        size_t n = 1 + rng() % 20;
        std::vector<double> xs(n);
        bool any = false;
        for (auto& x : xs) {
            x = static_cast<double>(rng() % 1000);
            any = any || x > 0.0;
        }
        if (!any) {
            continue;
        }
        double j = jain_index(xs);
        CHECK(j > 0.0);
        CHECK(j <= 1.0 + 1e-12);
        std::vector<double> scaled = xs;
        for (auto& x : scaled) {
            x *= 7.5;
        }
        CHECK(jain_index(scaled) == doctest::Approx(j));
    }
}

TEST_CASE("fct stats on degenerate and small inputs") {
    std::vector<double> one = {0.010};
    auto s = fct_stats(one);
    CHECK(s.mean == doctest::Approx(0.010));
    CHECK(s.max == doctest::Approx(0.010));
    CHECK(s.p99 == doctest::Approx(0.010));
    CHECK(s.variance == 0.0);
    CHECK(s.cdf.size() == 1);

    std::vector<double> three = {0.001, 0.002, 0.003};
    s = fct_stats(three);
    CHECK(s.mean == doctest::Approx(0.002));
    CHECK(s.max == doctest::Approx(0.003));

    CHECK_THROWS_AS(fct_stats({}), EmptyInput);
}

TEST_CASE("a timeout-inflated tail shows up in the max") {
    std::vector<double> fcts(99, 0.010);
    fcts.push_back(0.205);
    auto s = fct_stats(fcts);
    CHECK(s.max > 0.200);  // a completion beyond RTO_min flags a timeout
    CHECK(s.p99 <= 0.205);
    CHECK(s.cdf.back().second == doctest::Approx(1.0));
}

TEST_CASE("utilization from cumulative dequeued bytes") {
    // Fully backlogged 10 Gbps link: 12.5e6 bytes per 10 ms bin.
    std::vector<std::pair<double, uint64_t>> samples = {
        {0.00, 0}, {0.01, 12500000}, {0.02, 25000000}, {0.03, 25000000}};
    auto util = utilization(samples, 10e9, 0.01);
    REQUIRE(util.size() == 3);
    CHECK(util[0].utilization == doctest::Approx(1.0));
    CHECK(util[1].utilization == doctest::Approx(1.0));
    CHECK(util[2].utilization == doctest::Approx(0.0));  // idle bin

    // One 1500-byte packet in a 1.2 us bin at 10 Gbps fills it exactly.
    std::vector<std::pair<double, uint64_t>> tiny = {{0.0, 0}, {1.2e-6, 1500}};
    auto u = utilization(tiny, 10e9, 1.2e-6);
    REQUIRE(u.size() == 1);
    CHECK(u[0].utilization == doctest::Approx(1.0));
}

TEST_CASE("incast epoch generation is sized and seeded deterministically") {
    auto a = gen_incast_epoch(25, 10000, 0.5, 10e9, 1234);
    auto b = gen_incast_epoch(25, 10000, 0.5, 10e9, 1234);
    auto c = gen_incast_epoch(25, 10000, 0.5, 10e9, 4321);
    REQUIRE(a.size() == 25);
    CHECK(a.size() == b.size());
    bool identical = true;
    for (size_t i = 0; i < a.size(); ++i) {
        identical = identical && a[i].time == b[i].time;
        CHECK(a[i].bytes == 10000);
    }
    CHECK(identical);
    bool differs = false;
    for (size_t i = 0; i < a.size(); ++i) {
        differs = differs || a[i].time != c[i].time;
    }
    CHECK(differs);

    // Start offsets are cumulative: strictly increasing past epoch_start.
    double prev = 0.5;
    for (const auto& f : a) {
        CHECK(f.time > prev);
        prev = f.time;
    }
}

TEST_CASE("a single mouse draws one offset past the epoch start") {
    auto one = gen_incast_epoch(1, 500, 0.25, 10e9, 9);
    REQUIRE(one.size() == 1);
    CHECK(one[0].time > 0.25);
    CHECK(one[0].bytes == 500);
    CHECK(gen_incast_epoch(0, 500, 0.25, 10e9, 9).empty());
}

TEST_CASE("incast offsets average one packet transmission over n flows") {
    const int n = 50;
    const double pkt_tx = 1500.0 * 8.0 / 10e9;  // 1.2 us
    double sum = 0.0;
    const int trials = 400;
    for (int t = 0; t < trials; ++t) {
        auto starts = gen_incast_epoch(n, 1000, 0.0, 10e9, 1000 + t);
        sum += starts.back().time / n;  // mean gap of this epoch
    }
    double mean_gap = sum / trials;
    CHECK(mean_gap == doctest::Approx(pkt_tx / n).epsilon(0.1));
}

TEST_CASE("a five-epoch 25-mouse scenario plans 125 mouse flows") {
    ScenarioConfig cfg;
    cfg.mice.count = 25;
    cfg.mice.epochs = 5;
    cfg.normalize();
    auto plans = plan_flows(cfg);
    CHECK(plans.size() == 125);
    for (const auto& p : plans) {
        CHECK(p.mouse);
        CHECK(p.bytes == 10000);
    }
}

TEST_CASE("time-weighted average queue from integral samples") {
    MetricsReport r;
    // Q = 100 bytes over [0, 1], then 300 bytes over [1, 2].
    r.queue_integral = {{0.0, 0.0}, {1.0, 100.0}, {2.0, 400.0}};
    CHECK(r.avg_queue(0.0, 2.0) == doctest::Approx(200.0));
    CHECK(r.avg_queue(0.0, 1.0) == doctest::Approx(100.0));
    CHECK(r.avg_queue(1.0, 2.0) == doctest::Approx(300.0));
    CHECK(r.avg_queue(0.5, 1.5) == doctest::Approx(200.0));

    auto persistent = r.persistent_queue(1.0);
    REQUIRE(persistent.size() == 2);
    CHECK(persistent[0].second == doctest::Approx(100.0));
    CHECK(persistent[1].second == doctest::Approx(300.0));
}
