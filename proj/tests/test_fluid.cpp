#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "rwndq/errors.hpp"
#include "rwndq/fluid.hpp"

using namespace rwndq;

namespace {

// Standard configuration: 83-packet buffer, 20% target, 10 Gbps,
// 100 us RTT, 50 us tick, 10 ticks per update.
FluidConfig standard_config(bool slow_start, double horizon = 1.0) {
    FluidConfig cfg;
    cfg.slow_start = slow_start;
    cfg.horizon = horizon;
    return cfg;
}

}  // namespace

TEST_CASE("config defaults match the standard setup") {
    FluidConfig cfg;
    CHECK(cfg.buffer_bytes == 124500.0);
    CHECK(cfg.target_bytes() == doctest::Approx(24900.0));
    CHECK(cfg.delay_steps() == 1);  // rtt/2 is one tick
    cfg.validate();
}

TEST_CASE("queue stays empty until the window fills the pipe") {
    auto series = run_fluid(standard_config(false, 0.02));
    const double pipe = 1.25e9 * 100e-6;  // C * rtt
    for (const auto& s : series) {
        if (s.window < pipe) {
            CHECK(s.queue == 0.0);
        }
    }
    CHECK(series.front().queue == 0.0);
}

TEST_CASE("(w, q) = (C*rtt, alpha*B) is an exact fixed point") {
    FluidConfig cfg = standard_config(false);
    FluidState state(cfg);
    state.prime(1.25e9 * 100e-6, cfg.target_bytes());
    for (int i = 0; i < 200; ++i) {
        state.advance(cfg);
        CHECK(state.queue_at(0) == cfg.target_bytes());
        CHECK(state.window() == 1.25e9 * 100e-6);
    }
}

TEST_CASE("per-tick accumulation equals the closed-form drift average") {
    FluidConfig cfg = standard_config(true);
    FluidState state(cfg);
    const int M = cfg.ticks_per_update;
    for (int k = 0; k < 400; ++k) {
        for (int i = 0; i < M - 1; ++i) {
            state.advance(cfg);
        }
        double w_before = state.window();
        bool ss = state.slow_start_active();
        state.advance(cfg);  // the update instant
        double applied = state.window() - w_before;
        if (ss) {
            CHECK(applied == 2.0 * cfg.mss);
            continue;
        }
        // Closed form at t = kMT: MSS * (1 - mean_{j=1..M} q(t-jT) / target).
        double mean = 0.0;
        for (int j = 1; j <= M; ++j) {
            mean += state.queue_at(j);
        }
        mean /= M;
        double expect = cfg.mss * (1.0 - mean / cfg.target_bytes());
        CHECK(applied == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("mean queue trajectory converges to the target and stays in band") {
    auto ss_on = mean_queue_series(run_fluid(standard_config(true)));
    auto ss_off = mean_queue_series(run_fluid(standard_config(false)));
    const double target = 24900.0;

    auto conv_on = convergence_time(ss_on, target, 0.1);
    auto conv_off = convergence_time(ss_off, target, 0.1);
    REQUIRE(conv_on.has_value());
    REQUIRE(conv_off.has_value());
    CHECK(*conv_on > 0.0);

    auto t90_on = first_reach_time(ss_on, 0.9 * target);
    auto t90_off = first_reach_time(ss_off, 0.9 * target);
    REQUIRE(t90_on.has_value());
    REQUIRE(t90_off.has_value());
    CHECK(*t90_on < *t90_off);  // slow start converges sooner
}

TEST_CASE("raw queue stays nonnegative") {
    for (bool ss : {true, false}) {
        auto series = run_fluid(standard_config(ss, 0.2));
        for (const auto& s : series) {
            CHECK(s.queue >= 0.0);
        }
    }
}

TEST_CASE("zero horizon yields an empty series") {
    FluidConfig cfg = standard_config(true, 0.0);
    CHECK(run_fluid(cfg).empty());
}

TEST_CASE("infinite drain keeps the queue empty and grows w by MSS per epoch") {
    FluidConfig cfg = standard_config(false, 0.01);
    cfg.capacity = 1e15;
    auto series = run_fluid(cfg);
    double w0 = cfg.target_bytes();
    int epoch = 0;
    for (size_t i = 0; i < series.size(); ++i) {
        CHECK(series[i].queue == 0.0);
        if ((i + 1) % static_cast<size_t>(cfg.ticks_per_update) == 0) {
            ++epoch;
            CHECK(series[i].window == doctest::Approx(w0 + epoch * cfg.mss));
        }
    }
}

TEST_CASE("convergence_time handles the trivial shapes") {
    std::vector<FluidSample> at_target;
    for (int i = 1; i <= 10; ++i) {
        at_target.push_back({i * 0.1, 0.0, 100.0});
    }
    CHECK(convergence_time(at_target, 100.0, 0.1) == 0.0);

    std::vector<FluidSample> never;
    for (int i = 1; i <= 10; ++i) {
        never.push_back({i * 0.1, 0.0, 500.0});
    }
    CHECK_FALSE(convergence_time(never, 100.0, 0.1).has_value());

    // Settles after the third sample.
    std::vector<FluidSample> settles = {{0.1, 0, 500}, {0.2, 0, 500},
                                        {0.3, 0, 101}, {0.4, 0, 99}};
    CHECK(convergence_time(settles, 100.0, 0.1) == doctest::Approx(0.3));

    CHECK_THROWS_AS(convergence_time(settles, 100.0, 0.0), InvalidConfig);
}

TEST_CASE("identical configs give bit-identical series") {
    auto a = run_fluid(standard_config(true, 0.3));
    auto b = run_fluid(standard_config(true, 0.3));
    REQUIRE(a.size() == b.size());
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(FluidSample)) == 0);
}

TEST_CASE("invalid configs are rejected") {
    FluidConfig cfg;
    cfg.target_occupancy = 1.5;
    CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
    cfg = FluidConfig{};
    cfg.tick_interval = 0.0;
    CHECK_THROWS_AS(run_fluid(cfg), InvalidConfig);
}
