#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rwndq/errors.hpp"
#include "rwndq/port.hpp"

using namespace rwndq;

namespace {

RwndqParams paper_params(int64_t buffer = 125000, double alpha = 0.2) {
    RwndqParams p;
    p.buffer_bytes = buffer;
    p.target_occupancy = alpha;
    return p;
}

int64_t g_queue = 0;

PortState make_port(const RwndqParams& p) {
    return PortState(p, [] { return g_queue; });
}

TcpSegment synack_segment() {
    TcpSegment seg;
    seg.flags = kFlagSyn | kFlagAck;
    seg.rwnd_field = 0xFFFF;
    seg.scale_bits = 8;
    return with_checksum(seg);
}

TcpSegment fin_segment() {
    TcpSegment seg;
    seg.flags = kFlagFin;
    return with_checksum(seg);
}

TcpSegment ack_segment(uint16_t field, uint8_t scale) {
    TcpSegment seg;
    seg.flags = kFlagAck;
    seg.rwnd_field = field;
    seg.scale_bits = scale;
    return with_checksum(seg);
}

TcpSegment data_segment(uint16_t payload) {
    TcpSegment seg;
    seg.payload_len = payload;
    return with_checksum(seg);
}

}  // namespace

TEST_CASE("fresh port starts at the target queue worth of bytes") {
    auto port = make_port(paper_params());
    CHECK(port.fair_share() == 25000);  // 0.2 * 125 KB
    CHECK(port.ongoing_flows() == 0);
    CHECK(port.in_slow_start());

    auto tiny = make_port(paper_params(1, 1.0));
    CHECK(tiny.fair_share() == 1);

    CHECK_THROWS_AS(make_port(paper_params(0)), InvalidParams);
    CHECK_THROWS_AS(make_port(paper_params(125000, 1.5)), InvalidParams);
}

TEST_CASE("first flow resets the window to alpha*B") {
    auto port = make_port(paper_params());
    port.on_packet_departure(synack_segment());
    CHECK(port.ongoing_flows() == 1);
    CHECK(port.fair_share() == 25000);
}

TEST_CASE("a join rescales the share by beta/(beta+1)") {
    auto port = PortState::restore(paper_params(),
                                   {.rwnd = 30000, .flows = 2, .gamma = 0,
                                    .increments = 0, .mss = 0, .slow_start = false},
                                   [] { return g_queue; });
    port.on_packet_departure(synack_segment());
    CHECK(port.ongoing_flows() == 3);
    CHECK(port.fair_share() == 20000);  // 30000 * 2/3
}

TEST_CASE("share progression follows alpha*B/beta exactly") {
    auto port = make_port(paper_params());
    for (int n = 1; n <= 40; ++n) {
        port.on_packet_departure(synack_segment());
        CHECK(port.fair_share() == 25000 / n);  // closed-form oracle
    }
}

TEST_CASE("join then leave restores the share exactly") {
    auto port = make_port(paper_params());
    port.on_packet_departure(synack_segment());
    port.on_packet_departure(synack_segment());
    CHECK(port.fair_share() == 12500);
    port.on_packet_departure(fin_segment());
    CHECK(port.fair_share() == 25000);
    CHECK(port.ongoing_flows() == 1);
}

TEST_CASE("any join burst undone by the same number of leaves is exact") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        auto port = make_port(paper_params(124500));
        // Reach a random prior state first.
        int prior = static_cast<int>(rng() % 5);
        for (int i = 0; i < prior; ++i) {
            port.on_packet_departure(synack_segment());
        }
        auto before = port.snapshot();
        int joins = 1 + static_cast<int>(rng() % 40);
        for (int i = 0; i < joins; ++i) {
            port.on_packet_departure(synack_segment());
        }
        for (int i = 0; i < joins; ++i) {
            port.on_packet_departure(fin_segment());
        }
        auto after = port.snapshot();
        CHECK(after.rwnd == before.rwnd);
        CHECK(after.flows == before.flows);
    }
}

TEST_CASE("aggregate window is conserved by joins and leaves") {
    auto port = make_port(paper_params(124500));
    port.on_packet_departure(synack_segment());
    for (int i = 0; i < 30; ++i) {
        int64_t before = port.fair_share() * port.ongoing_flows();
        port.on_packet_departure(synack_segment());
        int64_t after = port.fair_share() * port.ongoing_flows();
        // Rounding slack at most beta bytes.
        CHECK(std::abs(after - before) <= port.ongoing_flows());
    }
}

TEST_CASE("last leave resets to alpha*B and re-arms slow start") {
    RwndqParams p = paper_params();
    p.slow_start_enabled = false;
    auto port = make_port(p);
    CHECK_FALSE(port.in_slow_start());
    port.on_packet_departure(synack_segment());
    port.on_packet_departure(fin_segment());
    CHECK(port.ongoing_flows() == 0);
    CHECK(port.fair_share() == 25000);
    CHECK(port.in_slow_start());

    // Underflow guard: another FIN keeps the count at zero.
    port.on_packet_departure(fin_segment());
    CHECK(port.ongoing_flows() == 0);
}

TEST_CASE("ACK rewrite applies only when the share is not larger") {
    auto port = PortState::restore(paper_params(),
                                   {.rwnd = 20000, .flows = 1, .gamma = 0,
                                    .increments = 0, .mss = 0, .slow_start = false},
                                   [] { return g_queue; });

    // effective 100 << 8 = 25600 > 20000: rewritten to 20000 >> 8 = 78.
    TcpSegment out = port.on_packet_departure(ack_segment(100, 8));
    CHECK(out.rwnd_field == 78);
    CHECK(effective_rwnd(out) == 19968);
    CHECK(verify_checksum(out));
    CHECK(out.checksum == full_checksum(out));

    // effective 64 << 8 = 16384 < 20000: untouched.
    TcpSegment in = ack_segment(64, 8);
    TcpSegment kept = port.on_packet_departure(in);
    CHECK(kept.rwnd_field == in.rwnd_field);
    CHECK(kept.checksum == in.checksum);
}

TEST_CASE("rewrite never increases the effective window") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 10000; ++i) {
        g_queue = 0;
        auto port = PortState::restore(
            paper_params(124500),
            {.rwnd = static_cast<int64_t>(rng() % 200000), .flows = 1 + static_cast<int64_t>(rng() % 50),
             .gamma = 0, .increments = 0, .mss = 1480, .slow_start = false},
            [] { return g_queue; });
        TcpSegment in = ack_segment(static_cast<uint16_t>(rng()),
                                    static_cast<uint8_t>(rng() % 15));
        TcpSegment out = port.on_packet_departure(in);
        CHECK(effective_rwnd(out) <= effective_rwnd(in));
        CHECK(verify_checksum(out));
    }
}

TEST_CASE("timer drift follows 1 - Q/(alpha*B)") {
    RwndqParams p = paper_params(124500);  // target 24900
    auto setup = [&](int64_t q) {
        g_queue = q;
        return PortState::restore(p,
                                  {.rwnd = 24900, .flows = 1, .gamma = 0,
                                   .increments = 0, .mss = 1500, .slow_start = false},
                                  [] { return g_queue; });
    };

    auto empty = setup(0);
    empty.on_timer_tick();
    CHECK(empty.snapshot().gamma == doctest::Approx(150.0));  // +MSS/M

    auto on_target = setup(24900);
    on_target.on_timer_tick();
    CHECK(on_target.snapshot().gamma == doctest::Approx(0.0));

    auto overshoot = setup(2 * 24900);
    overshoot.on_timer_tick();
    CHECK(overshoot.snapshot().gamma == doctest::Approx(-150.0));
}

TEST_CASE("M empty-queue ticks grow the share by mss/beta") {
    g_queue = 0;
    auto port = PortState::restore(paper_params(124500),
                                   {.rwnd = 10000, .flows = 2, .gamma = 0,
                                    .increments = 0, .mss = 1500, .slow_start = false},
                                   [] { return g_queue; });
    // Brute-force oracle: gamma accumulates 10 * (1 * 1500/10) = 1500,
    // split over 2 flows at the update instant.
    for (int i = 0; i < 10; ++i) {
        port.on_timer_tick();
    }
    CHECK(port.fair_share() == 10750);
    CHECK(port.snapshot().gamma == 0.0);
    CHECK(port.snapshot().increments == 0);
}

TEST_CASE("the update is a fixed point at Q == alpha*B") {
    g_queue = 24900;
    auto port = PortState::restore(paper_params(124500),
                                   {.rwnd = 31000, .flows = 3, .gamma = 0,
                                    .increments = 0, .mss = 1500, .slow_start = false},
                                   [] { return g_queue; });
    for (int epoch = 0; epoch < 50; ++epoch) {
        for (int i = 0; i < 10; ++i) {
            port.on_timer_tick();
        }
        CHECK(port.fair_share() == 31000);
    }
}

TEST_CASE("slow start adds two MSS per update until the target is reached") {
    g_queue = 0;
    auto port = PortState::restore(paper_params(124500),
                                   {.rwnd = 5000, .flows = 1, .gamma = 0,
                                    .increments = 0, .mss = 1500, .slow_start = true},
                                   [] { return g_queue; });
    for (int i = 0; i < 10; ++i) {
        port.on_timer_tick();
    }
    CHECK(port.fair_share() == 8000);  // +2 * 1500
    CHECK(port.in_slow_start());       // queue still below target

    g_queue = 24900;  // at target: the crossing update still uses slow start
    for (int i = 0; i < 10; ++i) {
        port.on_timer_tick();
    }
    CHECK(port.fair_share() == 11000);
    CHECK_FALSE(port.in_slow_start());

    // Only a FIN that empties the port re-arms slow start.
    for (int i = 0; i < 10; ++i) {
        port.on_timer_tick();
    }
    CHECK_FALSE(port.in_slow_start());
}

TEST_CASE("idle port holds the target share while the timer keeps ticking") {
    g_queue = 0;
    auto port = make_port(paper_params(124500));
    port.on_packet_departure(data_segment(1480));  // learn the MSS
    for (int i = 0; i < 40; ++i) {
        port.on_timer_tick();
    }
    CHECK(port.ongoing_flows() == 0);
    CHECK(port.fair_share() == 24900);
}

TEST_CASE("MSS learning is monotone") {
    auto port = make_port(paper_params());
    port.on_packet_departure(data_segment(512));
    CHECK(port.max_segment_size() == 512);
    port.on_packet_departure(data_segment(1480));
    CHECK(port.max_segment_size() == 1480);
    port.on_packet_departure(data_segment(256));
    CHECK(port.max_segment_size() == 1480);
}

TEST_CASE("the advertised share respects the window floor") {
    g_queue = 0;
    auto port = make_port(paper_params(124500));
    port.on_packet_departure(data_segment(1480));
    for (int i = 0; i < 100; ++i) {
        port.on_packet_departure(synack_segment());
    }
    // 24900 / 100 = 249 bytes, below one MSS.
    CHECK(port.fair_share() == 1480);

    // The floor clamps reads only: undoing the joins is still exact.
    for (int i = 0; i < 99; ++i) {
        port.on_packet_departure(fin_segment());
    }
    CHECK(port.fair_share() == 24900);
}

TEST_CASE("explicit floor overrides the one-MSS default") {
    RwndqParams p = paper_params(124500);
    p.min_window_floor = 4000;
    auto port = make_port(p);
    port.on_packet_departure(data_segment(1480));
    for (int i = 0; i < 50; ++i) {
        port.on_packet_departure(synack_segment());
    }
    CHECK(port.fair_share() == 4000);
}
