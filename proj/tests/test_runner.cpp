#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rwndq/errors.hpp"
#include "rwndq/runner.hpp"

using namespace rwndq;

TEST_CASE("a minimal fluid scenario takes the standard defaults") {
    RunSpec spec = parse_scenario("mode = fluid\n");
    CHECK(spec.mode == RunMode::Fluid);
    CHECK(spec.fluid.target_occupancy == 0.2);
    CHECK(spec.fluid.tick_interval == 50e-6);
    CHECK(spec.fluid.ticks_per_update == 10);
    CHECK(spec.fluid.buffer_bytes == 83.0 * 1500.0);
    CHECK(spec.fluid.capacity == doctest::Approx(1.25e9));  // 10 Gbps in bytes/s
    CHECK(spec.fluid.rtt == 100e-6);
    CHECK(spec.scenario.tcp.rto_min == 0.002);
}

TEST_CASE("unknown keys and malformed lines carry the line number") {
    try {
        parse_scenario("mode = sim\nbogus_key = 1\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
    CHECK_THROWS_AS(parse_scenario("mode sim\n"), ParseError);
    CHECK_THROWS_AS(parse_scenario("[nonsense]\n"), ParseError);
    CHECK_THROWS_AS(parse_scenario("[aqm]\nalpha = frog\n"), ParseError);
}

TEST_CASE("range violations name the offending field") {
    try {
        parse_scenario("mode = sim\n[aqm]\nalpha = 1.5\n");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.field == "aqm.alpha");
    }
    CHECK_THROWS_AS(parse_scenario("[tcp]\nwindow_scale = 15\n"), ValidationError);
    CHECK_THROWS_AS(parse_scenario("duration = -1\n"), ValidationError);
}

TEST_CASE("comments, aliases and units normalize") {
    const char* text =
        "mode = sim  # packet mode\n"
        "seed = 9\n"
        "[topology]\n"
        "senders = 5\n"
        "sender_gbps = 11\n"
        "bottleneck_gbps = 10\n"
        "rtt_us = 100\n"
        "buffer_pkts = 83\n"
        "[aqm]\n"
        "kind = rwndq\n"
        "interval_us = 50\n"
        "[tcp]\n"
        "rto_min_ms = 2\n"
        "[elephants]\n"
        "count = 5\n";
    RunSpec spec = parse_scenario(text);
    CHECK(spec.scenario.topology.sender_rate_bps == 11e9);
    CHECK(spec.scenario.topology.buffer_bytes == 124500);
    CHECK(spec.scenario.topology.rtt == doctest::Approx(100e-6));
    CHECK(spec.scenario.rwndq.increment_interval == doctest::Approx(50e-6));
    CHECK(spec.scenario.tcp.rto_min == doctest::Approx(0.002));
    CHECK(spec.scenario.aqm == AqmKind::Rwndq);

    // Aliased input normalizes to one canonical form.
    std::string canon = serialize_scenario(spec);
    CHECK(serialize_scenario(parse_scenario(canon)) == canon);
    CHECK(canon.find("sender_bps") != std::string::npos);
    CHECK(canon.find("gbps") == std::string::npos);
}

TEST_CASE("parse inverts serialize exactly") {
    RunSpec spec;
    spec.mode = RunMode::AbCompare;
    spec.scenario.seed = 424242;
    spec.scenario.duration = 0.731;
    spec.scenario.aqm = AqmKind::Rwndq;
    spec.scenario.topology.n_senders = 60;
    spec.scenario.topology.rtt = 137e-6;
    spec.scenario.elephants.count = 3;
    spec.scenario.elephants.starts = {0.0, 0.1, 0.27};
    spec.scenario.elephants.stops = {0.7, 0.65, -1.0};
    spec.scenario.mice.count = 10;
    spec.scenario.mice.epochs = 4;
    spec.scenario.mice.first_epoch = 0.05;
    spec.scenario.rwndq.min_window_floor = 2960;
    spec.scenario.tcp.cc_disabled = true;
    spec.fluid.horizon = 0.333;
    spec.fluid.slow_start = false;
    spec.scenario.normalize();

    RunSpec round = parse_scenario(serialize_scenario(spec));
    CHECK(round == spec);
}

TEST_CASE("A/B on a zero-traffic scenario returns empty reports and zero deltas") {
    ScenarioConfig base;
    base.duration = 0.05;
    base.normalize();
    auto r = run_ab(base);
    CHECK(r.rwndq.flows.empty());
    CHECK(r.droptail.flows.empty());
    CHECK(r.summary.drop_reduction_pct == 0.0);
    CHECK(r.summary.fct_mean_delta == 0.0);
    CHECK(r.summary.jain_delta == 0.0);
}

TEST_CASE("A/B arms with mismatched seeds are rejected") {
    ScenarioConfig rw;
    rw.aqm = AqmKind::Rwndq;
    rw.seed = 1;
    rw.normalize();
    ScenarioConfig dt = rw;
    dt.aqm = AqmKind::DropTail;
    dt.seed = 2;
    CHECK_THROWS_AS(run_ab(rw, dt), ValidationError);

    dt.seed = 1;
    dt.duration = rw.duration * 2;
    CHECK_THROWS_AS(run_ab(rw, dt), ValidationError);
}

TEST_CASE("A/B arms must pit rwndq against droptail") {
    ScenarioConfig a;
    a.normalize();
    ScenarioConfig b = a;
    CHECK_THROWS_AS(run_ab(a, b), ValidationError);  // both droptail
}
