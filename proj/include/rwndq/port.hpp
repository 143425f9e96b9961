#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "rwndq/packet.hpp"

namespace rwndq {

// Parameters of the per-port window controller.
struct RwndqParams {
    double increment_interval = 50e-6;  // T: seconds between increment ticks
    int intervals_per_update = 10;      // M: ticks per window update
    int64_t buffer_bytes = 0;           // B: output queue buffer
    double target_occupancy = 0.2;      // alpha, fraction of B
    bool slow_start_enabled = true;
    // Advertised window never drops below this; unset means one MSS
    // (silly-window avoidance).
    std::optional<int64_t> min_window_floor;

    void validate() const;  // throws InvalidParams
    int64_t target_bytes() const;
    bool operator==(const RwndqParams&) const = default;
};

// Per-port fair-share window machine. Tracks the number of ongoing flows
// from SYNACK/FIN signals, rewrites the receive-window field of passing
// ACKs down to the per-flow share, and drifts the share toward the target
// queue occupancy on a fixed timer.
//
// Internally the conserved quantity is the aggregate window
// (flow count x per-flow share) in integer bytes: flow joins and leaves
// redistribute it without rounding, so any join sequence undone by the
// same number of leaves restores the share exactly.
class PortState {
  public:
    // queue_sampler returns the governed output queue's occupancy in bytes.
    PortState(const RwndqParams& params, std::function<int64_t()> queue_sampler);

    // Applies the departure-event branches in order: MSS learning,
    // SYNACK join, FIN leave, ACK window rewrite. Never increases the
    // segment's effective window.
    TcpSegment on_packet_departure(const TcpSegment& seg);

    // One increment tick; every M-th tick folds the accumulated increment
    // into the window. Call exactly every increment_interval seconds.
    void on_timer_tick();

    // Per-flow share in bytes, clamped to the window floor.
    int64_t fair_share() const;

    int64_t ongoing_flows() const { return flows_; }
    int64_t max_segment_size() const { return mss_; }
    bool in_slow_start() const { return slow_start_; }

    struct Snapshot {
        int64_t rwnd = 0;  // per-flow share (clamped)
        int64_t flows = 0;
        double gamma = 0.0;
        int increments = 0;
        int64_t mss = 0;
        bool slow_start = false;
    };
    Snapshot snapshot() const;

    // Rebuilds a state with the given per-flow share and flow count;
    // used by tests and state dumps.
    static PortState restore(const RwndqParams& params, const Snapshot& snap,
                             std::function<int64_t()> queue_sampler);

  private:
    int64_t floor_bytes() const;

    RwndqParams params_;
    std::function<int64_t()> sample_queue_;
    int64_t window_total_ = 0;  // aggregate window, conserved across join/leave
    int64_t flows_ = 0;
    double gamma_ = 0.0;        // accumulated increment for this update epoch
    int increments_ = 0;
    int64_t mss_ = 0;
    bool slow_start_ = false;
};

}  // namespace rwndq
