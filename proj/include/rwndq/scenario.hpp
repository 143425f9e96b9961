#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rwndq/packet.hpp"
#include "rwndq/port.hpp"
#include "rwndq/sim/tcp.hpp"

namespace rwndq {

enum class AqmKind { DropTail, Rwndq };

// Dumbbell: n sender hosts -> one switch -> one receiver. The RTT is
// split evenly over the four propagation legs; only the forward
// switch->receiver queue gets the configured (small) buffer.
struct TopologyConfig {
    int n_senders = 0;
    double sender_rate_bps = 11e9;
    double bottleneck_rate_bps = 10e9;
    double rtt = 100e-6;
    // Per-sender spread of the base RTT (fraction, half above, half
    // below): slight propagation differences between hosts, which keep
    // loss cycles from locking into phase. Zero splits the RTT exactly
    // evenly.
    double rtt_spread = 0.0;
    int64_t buffer_bytes = 124500;  // 83 x 1500

    bool operator==(const TopologyConfig&) const = default;
};

struct LinkSpec {
    int src = 0;
    int dst = 0;
    double rate_bps = 0.0;
    double prop_delay = 0.0;
    int64_t buffer_bytes = 0;
};

struct Dumbbell {
    int n_senders = 0;
    int receiver = 0;     // node id
    int switch_node = 0;  // node id
    std::vector<LinkSpec> links;
    int bottleneck_fwd = 0;  // switch -> receiver
    int bottleneck_rev = 0;  // receiver -> switch (carries the ACKs)

    int uplink(int sender) const { return sender; }
    int downlink(int sender) const { return n_senders + sender; }
};

// Throws InvalidTopology on a degenerate spec (n = 0, nonpositive rates).
Dumbbell build_dumbbell(const TopologyConfig& cfg);

struct ElephantConfig {
    int count = 0;
    std::vector<double> starts;  // empty: all start at 0
    std::vector<double> stops;   // empty: run to the end

    bool operator==(const ElephantConfig&) const = default;
};

struct MiceConfig {
    int count = 0;
    int64_t transfer_bytes = 10000;
    int epochs = 1;
    double first_epoch = 0.1;
    double epoch_interval = 0.15;

    bool operator==(const MiceConfig&) const = default;
};

struct ScenarioConfig {
    TopologyConfig topology;
    AqmKind aqm = AqmKind::DropTail;
    RwndqParams rwndq;  // buffer_bytes mirrors topology.buffer_bytes
    ElephantConfig elephants;
    MiceConfig mice;
    sim::TcpParams tcp;
    uint64_t seed = 1;
    double duration = 1.0;
    double metrics_bin = 0.01;

    // Fills derived defaults (sender count, schedules, AQM buffer).
    void normalize();
    void validate() const;  // throws ScenarioInvalid / InvalidTopology

    bool operator==(const ScenarioConfig&) const = default;
};

struct FlowStart {
    double time = 0.0;
    int64_t bytes = 0;
};

// Start events for one incast epoch: cumulative exponential offsets from
// epoch_start with mean one bottleneck packet transmission time divided
// by the flow count. Deterministic for a given seed.
std::vector<FlowStart> gen_incast_epoch(int n_mice, int64_t transfer_bytes,
                                        double epoch_start, double bottleneck_bps,
                                        uint64_t seed);

struct FlowPlan {
    FlowKey key;
    int host = 0;
    double start = 0.0;
    int64_t bytes = 0;   // application bytes; long-running flows use a sentinel
    double stop = -1.0;  // < 0: no scheduled stop
    bool mouse = false;
};

inline constexpr int64_t kUnboundedBytes = int64_t{1} << 56;

// Expands the scenario into the full deterministic flow schedule:
// elephants on hosts [0, E), each mouse on its own host with a fresh
// connection per epoch.
std::vector<FlowPlan> plan_flows(const ScenarioConfig& cfg);

}  // namespace rwndq
