#include "rwndq/port.hpp"

#include <algorithm>
#include <cmath>

#include "rwndq/errors.hpp"

namespace rwndq {

void RwndqParams::validate() const {
    if (increment_interval <= 0.0) {
        throw InvalidParams("increment_interval must be > 0");
    }
    if (intervals_per_update < 1) {
        throw InvalidParams("intervals_per_update must be >= 1");
    }
    if (buffer_bytes <= 0) {
        throw InvalidParams("buffer_bytes must be > 0");
    }
    if (target_occupancy <= 0.0 || target_occupancy > 1.0) {
        throw InvalidParams("target_occupancy must be in (0, 1]");
    }
    if (min_window_floor && *min_window_floor < 0) {
        throw InvalidParams("min_window_floor must be >= 0");
    }
}

int64_t RwndqParams::target_bytes() const {
    return std::llround(target_occupancy * static_cast<double>(buffer_bytes));
}

PortState::PortState(const RwndqParams& params, std::function<int64_t()> queue_sampler)
    : params_(params), sample_queue_(std::move(queue_sampler)) {
    params_.validate();
    window_total_ = params_.target_bytes();
    slow_start_ = params_.slow_start_enabled;
}

int64_t PortState::floor_bytes() const {
    return params_.min_window_floor.value_or(mss_);
}

int64_t PortState::fair_share() const {
    int64_t share = flows_ > 0 ? window_total_ / flows_ : window_total_;
    return std::max(share, floor_bytes());
}

TcpSegment PortState::on_packet_departure(const TcpSegment& in) {
    TcpSegment seg = in;

    if (static_cast<int64_t>(seg.payload_len) > mss_) {
        mss_ = seg.payload_len;
    }

    if (seg.synack()) {
        if (flows_ <= 0) {
            flows_ = 0;
            window_total_ = params_.target_bytes();
        }
        // Aggregate unchanged: the share rescales by beta/(beta+1).
        ++flows_;
    }

    if (seg.fin()) {
        flows_ = std::max<int64_t>(flows_ - 1, 0);
        if (flows_ == 0) {
            window_total_ = params_.target_bytes();
            slow_start_ = true;
        }
        // flows_ > 0: share rescales by (beta+1)/beta, aggregate unchanged.
    }

    if (seg.ack()) {
        int64_t share = fair_share();
        if (share <= effective_rwnd(seg)) {
            seg = rewrite_rwnd_field(seg, static_cast<uint16_t>(share >> seg.scale_bits));
        }
    }

    return seg;
}

void PortState::on_timer_tick() {
    const int64_t queue = sample_queue_();
    const double target = static_cast<double>(params_.target_bytes());
    const double drift = 1.0 - static_cast<double>(queue) / target;
    gamma_ += drift * static_cast<double>(mss_) / params_.intervals_per_update;

    if (++increments_ < params_.intervals_per_update) {
        return;
    }

    if (flows_ <= 0) {
        // Idle port: hold at the target share, no drift.
        window_total_ = params_.target_bytes();
    } else if (slow_start_) {
        window_total_ += 2 * mss_ * flows_;  // +2 MSS per flow
    } else {
        window_total_ += std::llround(gamma_);  // +gamma/beta per flow
    }
    if (static_cast<double>(queue) >= target) {
        slow_start_ = false;
    }
    gamma_ = 0.0;
    increments_ = 0;
}

PortState::Snapshot PortState::snapshot() const {
    return Snapshot{fair_share(), flows_, gamma_, increments_, mss_, slow_start_};
}

PortState PortState::restore(const RwndqParams& params, const Snapshot& snap,
                             std::function<int64_t()> queue_sampler) {
    PortState st(params, std::move(queue_sampler));
    st.flows_ = std::max<int64_t>(snap.flows, 0);
    st.window_total_ = snap.rwnd * std::max<int64_t>(st.flows_, 1);
    st.gamma_ = snap.gamma;
    st.increments_ = snap.increments;
    st.mss_ = snap.mss;
    st.slow_start_ = snap.slow_start;
    return st;
}

}  // namespace rwndq
