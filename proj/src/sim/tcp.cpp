#include "rwndq/sim/tcp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rwndq::sim {

namespace {
constexpr double kRtoCap = 64.0;
constexpr double kCwndInf = std::numeric_limits<double>::infinity();
}  // namespace

TcpSender::TcpSender(FlowKey key, const TcpParams& params, Bytes total_bytes)
    : key_(key), params_(params), total_(total_bytes), rto_(params.rto_min) {
    ssthresh_ = std::numeric_limits<Bytes>::max() / 4;
}

Bytes TcpSender::send_window() const {
    if (params_.cc_disabled) {
        return rwnd_seen_;
    }
    Bytes c = cwnd_ >= static_cast<double>(std::numeric_limits<Bytes>::max() / 2)
                  ? std::numeric_limits<Bytes>::max() / 2
                  : static_cast<Bytes>(cwnd_);
    return std::min(c, rwnd_seen_);
}

TcpSegment TcpSender::make_syn(Seconds now) const {
    TcpSegment seg;
    seg.flow = key_;
    seg.flags = kFlagSyn;
    seg.seq = 0;
    seg.scale_bits = params_.window_scale;
    seg.send_time = now;
    return with_checksum(seg);
}

TcpSegment TcpSender::make_fin(Seconds now) const {
    TcpSegment seg;
    seg.flow = key_;
    seg.flags = kFlagFin;
    seg.seq = static_cast<uint64_t>(total_);
    seg.scale_bits = params_.window_scale;
    seg.send_time = now;
    return with_checksum(seg);
}

SendActions TcpSender::on_start(Seconds now) {
    SendActions actions;
    if (conn_ != Conn::Idle) {
        return actions;
    }
    conn_ = Conn::SynSent;
    actions.transmit.push_back(make_syn(now));
    arm_rto(now);
    return actions;
}

void TcpSender::rtt_sample(double r) {
    if (srtt_ < 0.0) {
        srtt_ = r;
        rttvar_ = r / 2.0;
    } else {
        rttvar_ = 0.75 * rttvar_ + 0.25 * std::abs(srtt_ - r);
        srtt_ = 0.875 * srtt_ + 0.125 * r;
    }
    rto_ = std::max(params_.rto_min, srtt_ + 4.0 * rttvar_);
}

void TcpSender::arm_rto(Seconds now) {
    rto_deadline_ = now + rto_;
}

void TcpSender::maybe_rearm(Seconds now) {
    bool outstanding = in_flight() > 0 || conn_ == Conn::SynSent ||
                       (conn_ == Conn::FinSent && !closed());
    if (outstanding) {
        arm_rto(now);
    } else {
        rto_deadline_.reset();
    }
}

void TcpSender::emit_segment(Seconds now, Bytes seq, Bytes len, SendActions& actions) {
    TcpSegment seg;
    seg.flow = key_;
    seg.seq = static_cast<uint64_t>(seq);
    seg.payload_len = static_cast<uint16_t>(len);
    seg.scale_bits = params_.window_scale;
    seg.send_time = now;
    actions.transmit.push_back(with_checksum(seg));
    if (seq + len > max_sent_) {
        // Only data beyond the high-water mark can carry the round-trip
        // sample (Karn's rule).
        if (!timing_) {
            timing_ = true;
            timed_end_ = seq + len;
            timed_at_ = now;
        }
        max_sent_ = seq + len;
    } else {
        ++retransmissions_;
    }
}

void TcpSender::retransmit_front(Seconds now, SendActions& actions) {
    timing_ = false;  // Karn: no sample across a retransmission
    if (conn_ == Conn::SynSent) {
        ++retransmissions_;
        actions.transmit.push_back(make_syn(now));
    } else if (snd_una_ < total_) {
        emit_segment(now, snd_una_, std::min(params_.mss, total_ - snd_una_), actions);
    } else {
        ++retransmissions_;
        actions.transmit.push_back(make_fin(now));
    }
}

void TcpSender::pump(Seconds now, SendActions& actions) {
    if (conn_ != Conn::Established) {
        return;
    }
    while (snd_nxt_ < total_) {
        Bytes room = send_window() - in_flight();
        Bytes len = std::min({params_.mss, total_ - snd_nxt_, room});
        if (len <= 0) {
            break;
        }
        emit_segment(now, snd_nxt_, len, actions);
        snd_nxt_ += len;
    }
    // All data out and acknowledged: close with a FIN occupying one unit.
    if (snd_una_ >= total_ && snd_nxt_ == total_ && !fin_sent_) {
        fin_sent_ = true;
        conn_ = Conn::FinSent;
        snd_nxt_ = total_ + 1;
        actions.transmit.push_back(make_fin(now));
    }
    maybe_rearm(now);
}

void TcpSender::on_new_ack(Bytes ackno, Seconds now, SendActions& actions) {
    Bytes newly = ackno - snd_una_;
    snd_una_ = ackno;

    if (timing_ && ackno >= timed_end_) {
        rtt_sample(now - timed_at_);
        timing_ = false;
    }

    if (cc_ == Cc::Recovery) {
        if (ackno >= recover_) {
            if (cc_on()) {
                cwnd_ = static_cast<double>(ssthresh_);
            }
            cc_ = Cc::Avoidance;
            dup_acks_ = 0;
        } else {
            // Partial ACK: the next hole is lost too (NewReno).
            retransmit_front(now, actions);
            if (cc_on()) {
                cwnd_ = std::max(cwnd_ - static_cast<double>(newly) +
                                     static_cast<double>(params_.mss),
                                 static_cast<double>(params_.mss));
            }
        }
    } else {
        dup_acks_ = 0;
        if (cc_on()) {
            if (cwnd_ < static_cast<double>(ssthresh_)) {
                cwnd_ += static_cast<double>(params_.mss);
            } else {
                cwnd_ += static_cast<double>(params_.mss) *
                         static_cast<double>(params_.mss) / cwnd_;
                cc_ = Cc::Avoidance;
            }
        }
    }

    if (snd_una_ >= total_ && !completed_reported_) {
        completed_reported_ = true;
        actions.completed = true;
    }
    if (fin_sent_ && snd_una_ >= total_ + 1) {
        conn_ = Conn::Closed;
        actions.closed = true;
        rto_deadline_.reset();
        return;
    }
    maybe_rearm(now);
    pump(now, actions);
}

void TcpSender::on_dup_ack(Seconds now, SendActions& actions) {
    ++dup_acks_;
    if (cc_ == Cc::Recovery) {
        if (cc_on()) {
            cwnd_ += static_cast<double>(params_.mss);
        }
        pump(now, actions);
        return;
    }
    if (dup_acks_ == 3) {
        Bytes flight = in_flight();
        ssthresh_ = std::max(flight / 2, 2 * params_.mss);
        retransmit_front(now, actions);
        if (cc_on()) {
            cwnd_ = static_cast<double>(ssthresh_ + 3 * params_.mss);
        }
        cc_ = Cc::Recovery;
        recover_ = snd_nxt_;
        arm_rto(now);
    }
}

SendActions TcpSender::on_ack(const TcpSegment& seg, Seconds now) {
    SendActions actions;
    if (conn_ == Conn::Closed || conn_ == Conn::Idle) {
        return actions;
    }

    if (conn_ == Conn::SynSent) {
        if (seg.synack()) {
            conn_ = Conn::Established;
            rwnd_seen_ = effective_rwnd(seg);
            cwnd_ = params_.cc_disabled
                        ? kCwndInf
                        : static_cast<double>(params_.initial_cwnd_segments * params_.mss);
            // Slow start probes up to the largest advertised window.
            ssthresh_ = std::max(rwnd_seen_, 2 * params_.mss);
            rto_deadline_.reset();
            pump(now, actions);
        }
        return actions;
    }
    if (seg.synack()) {
        return actions;  // stale duplicate
    }

    rwnd_seen_ = effective_rwnd(seg);
    Bytes ackno = static_cast<Bytes>(seg.seq);
    if (ackno > snd_una_) {
        on_new_ack(ackno, now, actions);
    } else if (ackno == snd_una_ && in_flight() > 0) {
        on_dup_ack(now, actions);
    } else {
        pump(now, actions);  // window update may open room
    }
    return actions;
}

SendActions TcpSender::on_timeout(Seconds now) {
    SendActions actions;
    if (conn_ == Conn::Closed || conn_ == Conn::Idle || !rto_deadline_) {
        return actions;
    }
    if (cc_on() && conn_ != Conn::SynSent) {
        ssthresh_ = std::max(in_flight() / 2, 2 * params_.mss);
        cwnd_ = static_cast<double>(params_.mss);
    }
    cc_ = Cc::SlowStart;
    dup_acks_ = 0;
    rto_ = std::min(rto_ * 2.0, kRtoCap);  // exponential backoff
    timing_ = false;
    if (conn_ == Conn::SynSent) {
        ++retransmissions_;
        actions.transmit.push_back(make_syn(now));
        arm_rto(now);
        return actions;
    }
    // Go back to the highest acknowledged byte and slow-start through the
    // outstanding window again; the receiver discards duplicates.
    snd_nxt_ = snd_una_;
    if (fin_sent_ && snd_nxt_ <= total_) {
        fin_sent_ = false;
        conn_ = Conn::Established;
    }
    pump(now, actions);
    arm_rto(now);
    return actions;
}

SendActions TcpSender::on_stop(Seconds now) {
    SendActions actions;
    if (conn_ == Conn::Closed || fin_sent_) {
        return actions;
    }
    total_ = std::min(total_, std::max(max_sent_, snd_nxt_));
    if (conn_ == Conn::Established) {
        pump(now, actions);  // emits the FIN when everything is acked
    }
    return actions;
}

TcpReceiver::TcpReceiver(FlowKey key, uint8_t window_scale)
    : key_(key), wscale_(window_scale) {}

TcpSegment TcpReceiver::make_ack(Seconds now, uint8_t extra_flags) const {
    TcpSegment seg;
    seg.flow = key_;
    seg.flags = static_cast<uint8_t>(kFlagAck | extra_flags);
    seg.seq = static_cast<uint64_t>(rcv_nxt_);
    seg.rwnd_field = 0xFFFF;
    seg.scale_bits = wscale_;
    seg.send_time = now;
    return with_checksum(seg);
}

void TcpReceiver::absorb(Bytes lo, Bytes hi) {
    if (hi <= rcv_nxt_) {
        return;
    }
    if (lo <= rcv_nxt_) {
        rcv_nxt_ = hi;
        // Fold any buffered intervals that became contiguous.
        auto it = out_of_order_.begin();
        while (it != out_of_order_.end() && it->first <= rcv_nxt_) {
            rcv_nxt_ = std::max(rcv_nxt_, it->second);
            it = out_of_order_.erase(it);
        }
        return;
    }
    auto [it, inserted] = out_of_order_.try_emplace(lo, hi);
    if (!inserted) {
        it->second = std::max(it->second, hi);
    }
}

std::vector<TcpSegment> TcpReceiver::on_segment(const TcpSegment& seg, Seconds now) {
    std::vector<TcpSegment> out;

    if (seg.syn() && !seg.ack()) {
        // SYNACK also answers a duplicate SYN; harmless for the counter
        // since duplicate SYNs only follow a drop of the original.
        out.push_back(make_ack(now, kFlagSyn));
        return out;
    }

    if (seg.payload_len > 0) {
        absorb(static_cast<Bytes>(seg.seq),
               static_cast<Bytes>(seg.seq) + seg.payload_len);
    }
    if (seg.fin()) {
        fin_at_ = static_cast<Bytes>(seg.seq);
    }
    if (fin_at_ && rcv_nxt_ >= *fin_at_) {
        rcv_nxt_ = *fin_at_ + 1;  // the FIN consumes one sequence unit
    }
    out.push_back(make_ack(now));
    return out;
}

}  // namespace rwndq::sim
