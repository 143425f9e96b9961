#include "rwndq/sim/engine.hpp"

#include <algorithm>
#include <cmath>

#include "rwndq/errors.hpp"

namespace rwndq::sim {

Simulation::Simulation(const ScenarioConfig& cfg) : cfg_(cfg) {
    cfg_.normalize();
    cfg_.validate();
    net_ = build_dumbbell(cfg_.topology);

    links_.reserve(net_.links.size());
    for (const auto& spec : net_.links) {
        links_.emplace_back(spec);
    }

    if (cfg_.aqm == AqmKind::Rwndq) {
        // The bottleneck port: the forward queue is sampled and feeds MSS
        // learning and FIN accounting; the reverse queue carries the ACKs
        // that get counted and rewritten.
        links_[static_cast<size_t>(net_.bottleneck_fwd)].rwndq_hook = true;
        links_[static_cast<size_t>(net_.bottleneck_rev)].rwndq_hook = true;
        OutQueue* fwd = &links_[static_cast<size_t>(net_.bottleneck_fwd)].queue;
        port_.emplace(cfg_.rwndq, [fwd] { return fwd->occupancy(); });
    }

    auto plans = plan_flows(cfg_);
    flows_.reserve(plans.size());
    for (size_t i = 0; i < plans.size(); ++i) {
        Flow f;
        f.plan = plans[i];
        f.sender = std::make_unique<TcpSender>(plans[i].key, cfg_.tcp, plans[i].bytes);
        f.receiver = std::make_unique<TcpReceiver>(plans[i].key, cfg_.tcp.window_scale);
        flow_by_key_[plans[i].key] = static_cast<int>(i);
        flows_.push_back(std::move(f));
    }
    open_flows_ = static_cast<int>(flows_.size());

    report_.flows.resize(flows_.size());
    report_.bin = cfg_.metrics_bin;
    report_.persistent_window =
        cfg_.aqm == AqmKind::Rwndq
            ? 10.0 * cfg_.rwndq.intervals_per_update * cfg_.rwndq.increment_interval
            : 10.0 * cfg_.metrics_bin;
    report_.bottleneck_capacity_bps = cfg_.topology.bottleneck_rate_bps;
    fine_period_ = cfg_.metrics_bin / 10.0;
}

int Simulation::flow_index(const FlowKey& key) const {
    auto it = flow_by_key_.find(key);
    return it == flow_by_key_.end() ? -1 : it->second;
}

void Simulation::push(Seconds t, EventKind kind, int32_t a, TcpSegment pkt) {
    events_.push(Event{t, event_seq_++, kind, a, pkt});
}

uint64_t Simulation::segments_dropped() const {
    uint64_t n = 0;
    for (const auto& l : links_) {
        n += l.queue.drop_count();
    }
    return n;
}

uint64_t Simulation::segments_queued_or_in_flight() const {
    uint64_t n = in_flight_events_;
    for (const auto& l : links_) {
        n += l.queue.backlog_len();
        n += l.busy ? 1 : 0;  // the packet being serialized
    }
    return n;
}

MetricsReport Simulation::run() {
    for (size_t i = 0; i < flows_.size(); ++i) {
        push(flows_[i].plan.start, EventKind::FlowStart, static_cast<int32_t>(i));
        if (flows_[i].plan.stop >= 0.0) {
            push(flows_[i].plan.stop, EventKind::Timer,
                 kTimerFlowStopBase + static_cast<int32_t>(i));
        }
    }
    if (!flows_.empty()) {
        if (port_) {
            push(cfg_.rwndq.increment_interval, EventKind::Timer, kTimerRwndq);
        }
        push(cfg_.metrics_bin, EventKind::Timer, kTimerMetrics);
        push(fine_period_, EventKind::Timer, kTimerFine);
        // Baselines for the per-bin counters.
        report_.dequeued.emplace_back(0.0, 0ull);
        report_.queue_integral.emplace_back(0.0, 0.0);
    }

    while (!events_.empty() && open_flows_ > 0) {
        Event ev = events_.top();
        if (ev.t > cfg_.duration) {
            break;
        }
        events_.pop();
        now_ = ev.t;
        dispatch(ev);
        if (validate_) {
            check_invariants();
        }
    }
    now_ = std::min(now_, cfg_.duration);
    finalize_report();
    return report_;
}

void Simulation::dispatch(const Event& ev) {
    if (trace_) {
        static const char* names[] = {"flow_start", "packet_arrival",
                                      "packet_departure", "timer", "timeout"};
        int flow = -1;
        if (ev.kind == EventKind::PacketArrival || ev.kind == EventKind::PacketDeparture) {
            flow = flow_index(ev.pkt.flow);
        } else if (ev.kind != EventKind::Timer) {
            flow = ev.a;
        }
        *trace_ << ev.t << ',' << names[static_cast<int>(ev.kind)] << ',' << flow
                << ',' << links_[static_cast<size_t>(net_.bottleneck_fwd)].queue.occupancy()
                << '\n';
    }
    switch (ev.kind) {
        case EventKind::FlowStart: {
            Flow& f = flows_[static_cast<size_t>(ev.a)];
            apply_actions(ev.a, f.sender->on_start(now_));
            break;
        }
        case EventKind::PacketArrival:
            --in_flight_events_;
            handle_arrival(ev.a, ev.pkt);
            break;
        case EventKind::PacketDeparture:
            handle_departure(ev.a, ev.pkt);
            break;
        case EventKind::Timer:
            handle_timer(ev.a);
            break;
        case EventKind::Timeout: {
            Flow& f = flows_[static_cast<size_t>(ev.a)];
            f.timeout_scheduled = false;
            auto deadline = f.sender->rto_deadline();
            if (!deadline) {
                break;
            }
            if (*deadline > now_ + 1e-12) {
                schedule_timeout(ev.a);  // pushed later; re-check then
                break;
            }
            apply_actions(ev.a, f.sender->on_timeout(now_));
            break;
        }
    }
}

void Simulation::handle_timer(int32_t id) {
    if (id == kTimerRwndq) {
        port_->on_timer_tick();
        ++rwndq_ticks_;
        push((rwndq_ticks_ + 1) * cfg_.rwndq.increment_interval, EventKind::Timer,
             kTimerRwndq);
    } else if (id == kTimerMetrics) {
        sample_metrics();
        ++metric_ticks_;
        push((metric_ticks_ + 1) * cfg_.metrics_bin, EventKind::Timer, kTimerMetrics);
    } else if (id == kTimerFine) {
        sample_fine();
        ++fine_ticks_;
        push((fine_ticks_ + 1) * fine_period_, EventKind::Timer, kTimerFine);
    } else if (id >= kTimerFlowStopBase) {
        int flow = id - kTimerFlowStopBase;
        apply_actions(flow, flows_[static_cast<size_t>(flow)].sender->on_stop(now_));
    }
}

void Simulation::send_on_link(int link_idx, const TcpSegment& seg) {
    Link& link = links_[static_cast<size_t>(link_idx)];
    if (link.queue.enqueue(seg, now_) == EnqueueResult::Accepted) {
        try_start_tx(link_idx);
    }
}

void Simulation::try_start_tx(int link_idx) {
    Link& link = links_[static_cast<size_t>(link_idx)];
    if (link.busy || link.queue.empty()) {
        return;
    }
    auto seg = link.queue.dequeue(now_);
    if (link.rwndq_hook && port_) {
        seg = port_->on_packet_departure(*seg);
    }
    link.busy = true;
    double serialization = static_cast<double>(seg->wire_size()) * 8.0 / link.spec.rate_bps;
    push(now_ + serialization, EventKind::PacketDeparture, link_idx, *seg);
}

void Simulation::handle_departure(int link_idx, const TcpSegment& seg) {
    Link& link = links_[static_cast<size_t>(link_idx)];
    link.busy = false;
    ++in_flight_events_;
    push(now_ + link.spec.prop_delay, EventKind::PacketArrival, link.spec.dst, seg);
    try_start_tx(link_idx);
}

void Simulation::handle_arrival(int node, const TcpSegment& seg) {
    if (node == net_.switch_node) {
        // ACK-direction segments head back to the flow source.
        int out = seg.ack() ? net_.downlink(seg.flow.src) : net_.bottleneck_fwd;
        send_on_link(out, seg);
        return;
    }
    if (node == net_.receiver) {
        ++segments_delivered_;
        int idx = flow_index(seg.flow);
        if (idx < 0) {
            return;
        }
        auto replies = flows_[static_cast<size_t>(idx)].receiver->on_segment(seg, now_);
        for (auto& ack : replies) {
            ++segments_created_;
            send_on_link(net_.bottleneck_rev, ack);
        }
        return;
    }
    // Sender host.
    ++segments_delivered_;
    int idx = flow_index(seg.flow);
    if (idx < 0) {
        return;
    }
    apply_actions(idx, flows_[static_cast<size_t>(idx)].sender->on_ack(seg, now_));
}

void Simulation::apply_actions(int flow_idx, SendActions&& actions) {
    Flow& f = flows_[static_cast<size_t>(flow_idx)];
    for (auto& seg : actions.transmit) {
        ++segments_created_;
        send_on_link(net_.uplink(f.plan.host), seg);
    }
    if (actions.completed && f.fct < 0.0) {
        f.fct = now_ - f.plan.start;
    }
    if (actions.closed && f.open) {
        f.open = false;
        --open_flows_;
    }
    schedule_timeout(flow_idx);
}

void Simulation::schedule_timeout(int flow_idx) {
    Flow& f = flows_[static_cast<size_t>(flow_idx)];
    auto deadline = f.sender->rto_deadline();
    if (deadline && !f.timeout_scheduled) {
        f.timeout_scheduled = true;
        push(*deadline, EventKind::Timeout, flow_idx);
    }
}

void Simulation::sample_metrics() {
    const auto& bq = links_[static_cast<size_t>(net_.bottleneck_fwd)].queue;
    report_.queue.push_back({now_, bq.occupancy(), bq.drop_count()});
    report_.dequeued.emplace_back(now_, bq.dequeued_bytes());
    if (port_) {
        auto snap = port_->snapshot();
        report_.port_series.push_back({now_, snap.rwnd, snap.flows, snap.gamma,
                                       snap.slow_start, bq.occupancy()});
    }

    const double bin_start = now_ - cfg_.metrics_bin;
    std::vector<double> active_bytes;
    for (size_t i = 0; i < flows_.size(); ++i) {
        Flow& f = flows_[i];
        int64_t acked = f.sender->acked_app_bytes();
        double delta = static_cast<double>(acked - f.last_acked);
        f.last_acked = acked;
        report_.flows[i].bin_bytes.push_back(delta);
        // Fairness samples come from long-running flows active for the
        // whole bin.
        if (!f.plan.mouse && f.plan.start <= bin_start &&
            (f.plan.stop < 0.0 || f.plan.stop >= now_)) {
            active_bytes.push_back(delta);
        }
    }
    if (!active_bytes.empty()) {
        double sum = 0.0;
        for (double b : active_bytes) {
            sum += b;
        }
        report_.jain_series.push_back(sum > 0.0 ? jain_index(active_bytes) : 0.0);
    }
}

void Simulation::sample_fine() {
    const auto& bq = links_[static_cast<size_t>(net_.bottleneck_fwd)].queue;
    report_.queue_integral.emplace_back(now_, bq.occupancy_integral(now_));
}

void Simulation::finalize_report() {
    report_.duration = now_;
    if (!flows_.empty()) {
        const auto& bq = links_[static_cast<size_t>(net_.bottleneck_fwd)].queue;
        report_.queue.push_back({now_, bq.occupancy(), bq.drop_count()});
        report_.queue_integral.emplace_back(now_, bq.occupancy_integral(now_));
        report_.bottleneck_drops = bq.drop_count();
    }
    report_.total_drops = segments_dropped();
    for (size_t i = 0; i < links_.size(); ++i) {
        if (links_[i].queue.drop_count() > 0) {
            report_.link_drops.emplace_back(static_cast<int>(i),
                                            links_[i].queue.drop_count());
        }
    }
    report_.flows.resize(flows_.size());
    for (size_t i = 0; i < flows_.size(); ++i) {
        const Flow& f = flows_[i];
        FlowRecord& rec = report_.flows[i];
        rec.flow_id = static_cast<int>(i);
        rec.mouse = f.plan.mouse;
        rec.start = f.plan.start;
        rec.fct = f.fct;
        rec.bytes_goal = f.plan.mouse ? f.plan.bytes : f.sender->app_total();
        rec.bytes_acked = f.sender->acked_app_bytes();
        rec.retransmissions = f.sender->retransmissions();
        double end = f.fct >= 0.0 ? f.plan.start + f.fct
                                  : (f.plan.stop >= 0.0 ? std::min(f.plan.stop, now_) : now_);
        double lifetime = end - f.plan.start;
        rec.goodput_bps = lifetime > 0.0
                              ? 8.0 * static_cast<double>(rec.bytes_acked) / lifetime
                              : 0.0;
    }
    report_.util = utilization(report_.dequeued, cfg_.topology.bottleneck_rate_bps,
                               cfg_.metrics_bin);
}

void Simulation::check_invariants() const {
    for (const auto& l : links_) {
        if (!l.queue.occupancy_consistent()) {
            throw Error("queue law violated: occupancy != backlog byte sum");
        }
        // Work conservation: an idle link has an empty queue.
        if (!l.busy && !l.queue.empty()) {
            throw Error("work conservation violated: idle link with backlog");
        }
    }
}

MetricsReport run_scenario(const ScenarioConfig& cfg) {
    Simulation sim(cfg);
    return sim.run();
}

}  // namespace rwndq::sim
