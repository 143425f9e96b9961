#include "rwndq/sim/queue.hpp"

namespace rwndq::sim {

OutQueue::OutQueue(Bytes limit) : limit_(limit) {}

void OutQueue::advance(Seconds now) {
    integral_ += static_cast<double>(occupancy_) * (now - last_change_);
    last_change_ = now;
}

EnqueueResult OutQueue::enqueue(const TcpSegment& seg, Seconds now) {
    const Bytes size = seg.wire_size();
    if (occupancy_ + size > limit_) {
        ++drop_count_;
        dropped_bytes_ += static_cast<uint64_t>(size);
        return EnqueueResult::Dropped;
    }
    advance(now);
    backlog_.push_back(seg);
    occupancy_ += size;
    return EnqueueResult::Accepted;
}

std::optional<TcpSegment> OutQueue::dequeue(Seconds now) {
    if (backlog_.empty()) {
        return std::nullopt;
    }
    advance(now);
    TcpSegment seg = backlog_.front();
    backlog_.pop_front();
    occupancy_ -= seg.wire_size();
    dequeued_bytes_ += static_cast<uint64_t>(seg.wire_size());
    return seg;
}

double OutQueue::occupancy_integral(Seconds now) const {
    return integral_ + static_cast<double>(occupancy_) * (now - last_change_);
}

bool OutQueue::occupancy_consistent() const {
    Bytes sum = 0;
    for (const auto& seg : backlog_) {
        sum += seg.wire_size();
    }
    return sum == occupancy_ && occupancy_ <= limit_;
}

}  // namespace rwndq::sim
