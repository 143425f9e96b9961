#include "rwndq/scenario.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "rwndq/errors.hpp"

namespace rwndq {

namespace {
// Ample buffer for the uncongested legs; drops are confined to the
// bottleneck forward queue in the provided scenarios.
int64_t ample_buffer(int64_t bottleneck_buffer) {
    return std::max<int64_t>(32 * 1024 * 1024, 16 * bottleneck_buffer);
}

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
}  // namespace

Dumbbell build_dumbbell(const TopologyConfig& cfg) {
    if (cfg.n_senders < 1) {
        throw InvalidTopology("n_senders must be >= 1");
    }
    if (cfg.sender_rate_bps <= 0.0 || cfg.bottleneck_rate_bps <= 0.0) {
        throw InvalidTopology("link rates must be > 0");
    }
    if (cfg.rtt <= 0.0) {
        throw InvalidTopology("rtt must be > 0");
    }
    if (cfg.rtt_spread < 0.0 || cfg.rtt_spread >= 2.0) {
        throw InvalidTopology("rtt_spread must be in [0, 2)");
    }
    if (cfg.buffer_bytes <= 0) {
        throw InvalidTopology("buffer_bytes must be > 0");
    }

    Dumbbell d;
    d.n_senders = cfg.n_senders;
    d.receiver = cfg.n_senders;
    d.switch_node = cfg.n_senders + 1;
    const double leg = cfg.rtt / 4.0;
    const int64_t ample = ample_buffer(cfg.buffer_bytes);

    // Sender legs fan out evenly across +-rtt_spread/2.
    auto sender_leg = [&](int i) {
        double frac = cfg.n_senders > 1
                          ? static_cast<double>(i) / (cfg.n_senders - 1) - 0.5
                          : 0.0;
        return leg * (1.0 + cfg.rtt_spread * frac);
    };
    for (int i = 0; i < cfg.n_senders; ++i) {
        d.links.push_back({i, d.switch_node, cfg.sender_rate_bps, sender_leg(i), ample});
    }
    for (int i = 0; i < cfg.n_senders; ++i) {
        d.links.push_back({d.switch_node, i, cfg.sender_rate_bps, sender_leg(i), ample});
    }
    d.bottleneck_fwd = static_cast<int>(d.links.size());
    d.links.push_back({d.switch_node, d.receiver, cfg.bottleneck_rate_bps, leg,
                       cfg.buffer_bytes});
    d.bottleneck_rev = static_cast<int>(d.links.size());
    d.links.push_back({d.receiver, d.switch_node, cfg.bottleneck_rate_bps, leg, ample});
    return d;
}

void ScenarioConfig::normalize() {
    if (topology.n_senders == 0) {
        topology.n_senders = std::max(elephants.count + mice.count, 1);
    }
    rwndq.buffer_bytes = topology.buffer_bytes;
    if (elephants.count > 0 && elephants.starts.empty()) {
        elephants.starts.assign(static_cast<size_t>(elephants.count), 0.0);
    }
    if (elephants.count > 0 && elephants.stops.empty()) {
        elephants.stops.assign(static_cast<size_t>(elephants.count), -1.0);
    }
}

void ScenarioConfig::validate() const {
    build_dumbbell(topology);  // throws InvalidTopology
    if (duration <= 0.0) {
        throw ScenarioInvalid("duration must be > 0");
    }
    if (metrics_bin <= 0.0) {
        throw ScenarioInvalid("metrics_bin must be > 0");
    }
    if (elephants.count < 0 || mice.count < 0) {
        throw ScenarioInvalid("flow counts must be >= 0");
    }
    if (elephants.count + mice.count > topology.n_senders) {
        throw ScenarioInvalid("more flows than sender hosts");
    }
    if (elephants.count > 0 &&
        (elephants.starts.size() != static_cast<size_t>(elephants.count) ||
         elephants.stops.size() != static_cast<size_t>(elephants.count))) {
        throw ScenarioInvalid("elephant schedule length must match count");
    }
    if (mice.count > 0) {
        if (mice.transfer_bytes < 1) {
            throw ScenarioInvalid("mice transfer_bytes must be >= 1");
        }
        if (mice.epochs < 1) {
            throw ScenarioInvalid("mice epochs must be >= 1");
        }
        if (mice.epoch_interval <= 0.0 && mice.epochs > 1) {
            throw ScenarioInvalid("mice epoch_interval must be > 0");
        }
    }
    if (aqm == AqmKind::Rwndq) {
        rwndq.validate();
    }
    if (tcp.mss < 1 || tcp.mss > 0xFFFF - kHeaderBytes) {
        throw ScenarioInvalid("mss out of range");
    }
    if (tcp.rto_min <= 0.0) {
        throw ScenarioInvalid("rto_min must be > 0");
    }
    if (tcp.window_scale > kMaxWindowScale) {
        throw ScenarioInvalid("window_scale exceeds 14");
    }
}

std::vector<FlowStart> gen_incast_epoch(int n_mice, int64_t transfer_bytes,
                                        double epoch_start, double bottleneck_bps,
                                        uint64_t seed) {
    std::vector<FlowStart> out;
    if (n_mice < 1) {
        return out;
    }
    const double pkt_tx = 1500.0 * 8.0 / bottleneck_bps;
    const double mean_gap = pkt_tx / static_cast<double>(n_mice);
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> gap(1.0 / mean_gap);
    double t = epoch_start;
    out.reserve(static_cast<size_t>(n_mice));
    for (int i = 0; i < n_mice; ++i) {
        t += gap(rng);
        out.push_back({t, transfer_bytes});
    }
    return out;
}

std::vector<FlowPlan> plan_flows(const ScenarioConfig& cfg) {
    std::vector<FlowPlan> plans;
    const uint16_t receiver = static_cast<uint16_t>(cfg.topology.n_senders);

    for (int i = 0; i < cfg.elephants.count; ++i) {
        FlowPlan p;
        p.host = i;
        p.key = FlowKey{static_cast<uint16_t>(i), receiver,
                        static_cast<uint16_t>(10000 + i), 5001};
        p.start = cfg.elephants.starts[static_cast<size_t>(i)];
        p.stop = cfg.elephants.stops[static_cast<size_t>(i)];
        p.bytes = kUnboundedBytes;
        p.mouse = false;
        plans.push_back(p);
    }

    for (int e = 0; e < (cfg.mice.count > 0 ? cfg.mice.epochs : 0); ++e) {
        double epoch_start = cfg.mice.first_epoch + e * cfg.mice.epoch_interval;
        auto starts = gen_incast_epoch(cfg.mice.count, cfg.mice.transfer_bytes,
                                       epoch_start, cfg.topology.bottleneck_rate_bps,
                                       mix_seed(cfg.seed, static_cast<uint64_t>(e)));
        for (int m = 0; m < cfg.mice.count; ++m) {
            FlowPlan p;
            p.host = cfg.elephants.count + m;
            p.key = FlowKey{static_cast<uint16_t>(p.host), receiver,
                            static_cast<uint16_t>(20000 + e), 5001};
            p.start = starts[static_cast<size_t>(m)].time;
            p.bytes = starts[static_cast<size_t>(m)].bytes;
            p.mouse = true;
            plans.push_back(p);
        }
    }
    return plans;
}

}  // namespace rwndq
