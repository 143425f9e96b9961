#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "rwndq/packet.hpp"
#include "rwndq/sim/queue.hpp"

namespace rwndq::sim {

struct TcpParams {
    Bytes mss = 1480;               // payload bytes per full segment
    double rto_min = 0.002;         // floor on the retransmission timeout
    bool cc_disabled = false;       // pin cwnd = inf so the receive window binds
    // Exponent the receiver advertises; 65535 << 2 approximates a receive
    // buffer just above the path pipe plus bottleneck buffer.
    uint8_t window_scale = 2;
    int initial_cwnd_segments = 2;

    bool operator==(const TcpParams&) const = default;
};

// What a sender wants done after handling an input: segments to put on
// its uplink, plus completion edges the engine turns into metrics.
struct SendActions {
    std::vector<TcpSegment> transmit;
    bool completed = false;  // all application bytes acknowledged
    bool closed = false;     // FIN acknowledged
};

// Reno/NewReno sender over simulator segments. The send window is
// min(cwnd, rwnd) at every send decision, rwnd taken from the effective
// receive window of the last ACK. Connection setup is SYN/SYNACK; close
// is a single FIN (one sequence unit past the data) sent once all data
// is acknowledged.
class TcpSender {
  public:
    TcpSender(FlowKey key, const TcpParams& params, Bytes total_bytes);

    SendActions on_start(Seconds now);
    SendActions on_ack(const TcpSegment& ack, Seconds now);
    SendActions on_timeout(Seconds now);
    // Truncates the transfer at what has been sent so far (long-running
    // flows that stop on a schedule); triggers the FIN exchange.
    SendActions on_stop(Seconds now);

    // Retransmission timer: absolute deadline while armed.
    std::optional<Seconds> rto_deadline() const { return rto_deadline_; }

    bool established() const { return conn_ >= Conn::Established; }
    bool closed() const { return conn_ == Conn::Closed; }
    Bytes snd_una() const { return snd_una_; }
    Bytes snd_nxt() const { return snd_nxt_; }
    Bytes in_flight() const { return snd_nxt_ - snd_una_; }
    Bytes app_total() const { return total_; }
    // Application bytes acknowledged so far (FIN unit excluded).
    Bytes acked_app_bytes() const { return snd_una_ < total_ ? snd_una_ : total_; }
    Bytes rwnd_seen() const { return rwnd_seen_; }
    double cwnd() const { return cwnd_; }
    Bytes ssthresh() const { return ssthresh_; }
    Bytes send_window() const;
    double rto() const { return rto_; }
    double srtt() const { return srtt_; }
    uint64_t retransmissions() const { return retransmissions_; }

  private:
    enum class Conn { Idle, SynSent, Established, FinSent, Closed };
    enum class Cc { SlowStart, Avoidance, Recovery };

    void pump(Seconds now, SendActions& actions);
    void emit_segment(Seconds now, Bytes seq, Bytes len, SendActions& actions);
    void retransmit_front(Seconds now, SendActions& actions);
    TcpSegment make_syn(Seconds now) const;
    TcpSegment make_fin(Seconds now) const;
    void rtt_sample(double r);
    void arm_rto(Seconds now);
    void maybe_rearm(Seconds now);
    void on_new_ack(Bytes ackno, Seconds now, SendActions& actions);
    void on_dup_ack(Seconds now, SendActions& actions);
    bool cc_on() const { return !params_.cc_disabled; }

    FlowKey key_;
    TcpParams params_;
    Bytes total_;  // application bytes; FIN occupies [total_, total_+1)

    Conn conn_ = Conn::Idle;
    Cc cc_ = Cc::SlowStart;
    Bytes snd_una_ = 0;
    Bytes snd_nxt_ = 0;
    Bytes max_sent_ = 0;  // high-water mark of transmitted data
    double cwnd_ = 0.0;
    Bytes ssthresh_ = 0;
    Bytes rwnd_seen_ = 0;
    Bytes recover_ = 0;  // NewReno recovery point
    int dup_acks_ = 0;
    bool fin_sent_ = false;
    bool completed_reported_ = false;

    double srtt_ = -1.0;
    double rttvar_ = 0.0;
    double rto_;
    bool timing_ = false;
    Bytes timed_end_ = 0;
    Seconds timed_at_ = 0.0;

    std::optional<Seconds> rto_deadline_;
    uint64_t retransmissions_ = 0;
};

// Receiving endpoint: cumulative acknowledgment with out-of-order
// buffering, an immediate ACK per data segment (no delayed ACKs), and a
// constant advertised window of 65535 << window_scale.
class TcpReceiver {
  public:
    TcpReceiver(FlowKey key, uint8_t window_scale);

    std::vector<TcpSegment> on_segment(const TcpSegment& seg, Seconds now);

    Bytes rcv_nxt() const { return rcv_nxt_; }

  private:
    TcpSegment make_ack(Seconds now, uint8_t extra_flags = 0) const;
    void absorb(Bytes lo, Bytes hi);

    FlowKey key_;
    uint8_t wscale_;
    Bytes rcv_nxt_ = 0;
    std::map<Bytes, Bytes> out_of_order_;  // start -> end, above rcv_nxt_
    std::optional<Bytes> fin_at_;
};

}  // namespace rwndq::sim
