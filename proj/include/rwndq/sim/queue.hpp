#pragma once

#include <cstdint>
#include <deque>
#include <optional>

#include "rwndq/packet.hpp"

namespace rwndq::sim {

using Seconds = double;
using Bytes = int64_t;

enum class EnqueueResult { Accepted, Dropped };

// FIFO tail-drop queue with byte accounting and a time-weighted occupancy
// integral for persistent-queue statistics. Packets are counted at wire
// size; a packet leaves the backlog when its transmission starts.
class OutQueue {
  public:
    explicit OutQueue(Bytes limit);

    // Tail drop: rejects the packet when it would push occupancy past the
    // buffer limit. A drop is a result, not an error.
    EnqueueResult enqueue(const TcpSegment& seg, Seconds now);

    std::optional<TcpSegment> dequeue(Seconds now);

    Bytes occupancy() const { return occupancy_; }
    Bytes limit() const { return limit_; }
    bool empty() const { return backlog_.empty(); }
    size_t backlog_len() const { return backlog_.size(); }

    uint64_t drop_count() const { return drop_count_; }
    uint64_t dropped_bytes() const { return dropped_bytes_; }
    uint64_t dequeued_bytes() const { return dequeued_bytes_; }

    // Integral of occupancy over time, up to `now`.
    double occupancy_integral(Seconds now) const;

    // Occupancy equals the wire-byte sum of the backlog.
    bool occupancy_consistent() const;

  private:
    void advance(Seconds now);

    Bytes limit_;
    Bytes occupancy_ = 0;
    std::deque<TcpSegment> backlog_;
    uint64_t drop_count_ = 0;
    uint64_t dropped_bytes_ = 0;
    uint64_t dequeued_bytes_ = 0;
    double integral_ = 0.0;
    Seconds last_change_ = 0.0;
};

}  // namespace rwndq::sim
