#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

namespace rwndq {

// Jain fairness index (sum x)^2 / (n sum x^2); 1 for equal shares.
// Throws EmptyInput on an empty list.
double jain_index(std::span<const double> xs);

struct FctStats {
    double mean = 0.0;
    double variance = 0.0;  // population variance
    double p99 = 0.0;       // nearest rank
    double max = 0.0;
    size_t count = 0;
    std::vector<std::pair<double, double>> cdf;  // (value, fraction)
};

// Statistics over completed-flow completion times. Throws EmptyInput.
FctStats fct_stats(std::span<const double> fct_seconds);

struct UtilSample {
    double t = 0.0;
    double utilization = 0.0;
};

// Per-bin link utilization from cumulative dequeued-wire-byte samples at
// bin boundaries (the first sample is the baseline).
std::vector<UtilSample> utilization(
    std::span<const std::pair<double, uint64_t>> dequeued_bytes,
    double capacity_bps, double bin);

struct FlowRecord {
    int flow_id = 0;
    bool mouse = false;
    double start = 0.0;
    double fct = -1.0;  // < 0: incomplete at end of run
    int64_t bytes_goal = 0;
    int64_t bytes_acked = 0;
    uint64_t retransmissions = 0;
    double goodput_bps = 0.0;        // acknowledged application bytes over lifetime
    std::vector<double> bin_bytes;   // acknowledged application bytes per bin
};

struct QueueSample {
    double t = 0.0;
    int64_t q_bytes = 0;
    uint64_t drops_cum = 0;
};

// Managed-port state snapshot alongside the sampled queue.
struct PortSample {
    double t = 0.0;
    int64_t rwnd = 0;
    int64_t flows = 0;
    double gamma = 0.0;
    bool slow_start = false;
    int64_t q_bytes = 0;
};

struct MetricsReport {
    double bin = 0.01;
    double duration = 0.0;
    double bottleneck_capacity_bps = 0.0;
    std::vector<FlowRecord> flows;
    std::vector<QueueSample> queue;  // bottleneck occupancy at bin boundaries
    std::vector<std::pair<double, uint64_t>> dequeued;  // cumulative wire bytes
    std::vector<UtilSample> util;
    std::vector<PortSample> port_series;  // managed-queue runs only
    std::vector<double> jain_series;  // per bin over active long-running flows
    uint64_t bottleneck_drops = 0;
    uint64_t total_drops = 0;
    std::vector<std::pair<int, uint64_t>> link_drops;  // per link index
    // Fine-grained (t, integral of Q dt) samples for time-weighted averages.
    std::vector<std::pair<double, double>> queue_integral;
    // Smoothing window for the persistent-queue view (10 update epochs
    // for managed runs, 10 bins otherwise).
    double persistent_window = 0.1;

    // Time-weighted mean bottleneck occupancy over [from, to].
    double avg_queue(double from, double to) const;
    // Sliding-window time-weighted occupancy (persistent queue).
    std::vector<std::pair<double, double>> persistent_queue(double window) const;

    std::vector<double> mice_fcts() const;  // completed mice only
    size_t total_mice() const;
    double elephant_jain() const;  // over whole-run goodput
};

void write_flows_csv(std::ostream& out, const MetricsReport& r);
void write_queue_csv(std::ostream& out, const MetricsReport& r);
void write_util_csv(std::ostream& out, const MetricsReport& r);
void write_port_csv(std::ostream& out, const MetricsReport& r);
void write_summary(std::ostream& out, const MetricsReport& r);

}  // namespace rwndq
