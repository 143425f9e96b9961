#pragma once

#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <queue>
#include <vector>

#include "rwndq/metrics.hpp"
#include "rwndq/port.hpp"
#include "rwndq/scenario.hpp"
#include "rwndq/sim/queue.hpp"
#include "rwndq/sim/tcp.hpp"

namespace rwndq::sim {

enum class EventKind : uint8_t {
    FlowStart,
    PacketArrival,
    PacketDeparture,
    Timer,
    Timeout,
};

// Deterministic single-run event loop over a dumbbell. Events are
// processed in (time, insertion order); identical scenario and seed give
// a bit-identical trace.
class Simulation {
  public:
    explicit Simulation(const ScenarioConfig& cfg);

    MetricsReport run();

    // Checks the queue law and work conservation after every event.
    void set_validate(bool on) { validate_ = on; }
    // Optional event trace: CSV of (time, kind, flow, queue_Q).
    void set_trace(std::ostream* out) { trace_ = out; }

    // Post-run introspection (tests).
    const TcpSender& sender(size_t flow) const { return *flows_[flow].sender; }
    uint64_t segments_created() const { return segments_created_; }
    uint64_t segments_delivered() const { return segments_delivered_; }
    uint64_t segments_dropped() const;
    uint64_t segments_queued_or_in_flight() const;

  private:
    struct Event {
        Seconds t = 0.0;
        uint64_t seq = 0;
        EventKind kind = EventKind::Timer;
        int32_t a = -1;  // link, node, flow, or timer id
        TcpSegment pkt;
    };
    struct EventAfter {
        bool operator()(const Event& x, const Event& y) const {
            return x.t > y.t || (x.t == y.t && x.seq > y.seq);
        }
    };

    struct Link {
        LinkSpec spec;
        OutQueue queue;
        bool busy = false;
        bool rwndq_hook = false;
        explicit Link(const LinkSpec& s) : spec(s), queue(s.buffer_bytes) {}
    };

    struct Flow {
        FlowPlan plan;
        std::unique_ptr<TcpSender> sender;
        std::unique_ptr<TcpReceiver> receiver;
        bool timeout_scheduled = false;
        double fct = -1.0;
        int64_t last_acked = 0;
        bool open = true;
    };

    // Timer ids.
    static constexpr int32_t kTimerRwndq = 0;
    static constexpr int32_t kTimerMetrics = 1;
    static constexpr int32_t kTimerFine = 2;
    static constexpr int32_t kTimerFlowStopBase = 1000;

    void push(Seconds t, EventKind kind, int32_t a, TcpSegment pkt = {});
    void dispatch(const Event& ev);
    void handle_arrival(int node, const TcpSegment& seg);
    void handle_departure(int link_idx, const TcpSegment& seg);
    void handle_timer(int32_t id);
    void send_on_link(int link_idx, const TcpSegment& seg);
    void try_start_tx(int link_idx);
    void apply_actions(int flow_idx, SendActions&& actions);
    void schedule_timeout(int flow_idx);
    void sample_metrics();
    void sample_fine();
    void finalize_report();
    void check_invariants() const;
    int flow_index(const FlowKey& key) const;

    ScenarioConfig cfg_;
    Dumbbell net_;
    std::vector<Link> links_;
    std::optional<PortState> port_;
    std::vector<Flow> flows_;
    std::map<FlowKey, int> flow_by_key_;

    std::priority_queue<Event, std::vector<Event>, EventAfter> events_;
    Seconds now_ = 0.0;
    uint64_t event_seq_ = 0;
    int open_flows_ = 0;
    bool validate_ = false;
    std::ostream* trace_ = nullptr;

    uint64_t segments_created_ = 0;
    uint64_t segments_delivered_ = 0;
    uint64_t in_flight_events_ = 0;
    long rwndq_ticks_ = 0;   // fired so far; next fires at (n+1) * interval
    long metric_ticks_ = 0;
    long fine_ticks_ = 0;

    MetricsReport report_;
    double fine_period_ = 0.001;
};

// Runs the scenario to completion (spec entry point).
MetricsReport run_scenario(const ScenarioConfig& cfg);

}  // namespace rwndq::sim
