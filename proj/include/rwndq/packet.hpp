#pragma once

#include <array>
#include <compare>
#include <cstdint>

#include "rwndq/checksum.hpp"

namespace rwndq {

inline constexpr int kHeaderBytes = 20;
inline constexpr int kMinWireBytes = 64;  // pure ACK / control segment wire size
inline constexpr uint8_t kMaxWindowScale = 14;

// Connection identifier. Host ids are flat simulator addresses,
// ordered so flow tables iterate deterministically.
struct FlowKey {
    uint16_t src = 0;
    uint16_t dst = 0;
    uint16_t sport = 0;
    uint16_t dport = 0;
    auto operator<=>(const FlowKey&) const = default;
};

enum TcpFlag : uint8_t {
    kFlagSyn = 0x1,
    kFlagAck = 0x2,
    kFlagFin = 0x4,
};

// Modeled TCP segment. `seq` is the data byte offset of the payload;
// ACK-flagged segments carry the cumulative acknowledgment offset in the
// same field. The receive window is the 16-bit wire value `rwnd_field`
// scaled by 2^scale_bits, the scale exponent riding in the reserved bits
// of the header (see docs/wire-format.md for the canonical byte layout).
struct TcpSegment {
    FlowKey flow;
    uint64_t seq = 0;
    uint16_t payload_len = 0;
    uint8_t flags = 0;
    uint16_t rwnd_field = 0;
    uint8_t scale_bits = 0;
    uint16_t checksum = 0;
    uint8_t header_len = kHeaderBytes;
    double send_time = 0.0;

    bool syn() const { return flags & kFlagSyn; }
    bool ack() const { return flags & kFlagAck; }
    bool fin() const { return flags & kFlagFin; }
    // SYNACK segments also carry ACK semantics; dispatch SYNACK first.
    bool synack() const { return syn() && ack(); }

    int64_t wire_size() const {
        int64_t n = static_cast<int64_t>(header_len) + payload_len;
        return n < kMinWireBytes ? kMinWireBytes : n;
    }
};

// Canonical 20-byte header image used for checksum arithmetic.
std::array<uint8_t, kHeaderBytes> serialize_header(const TcpSegment& seg);

// Internet checksum over the header image with the checksum field zeroed.
uint16_t full_checksum(const TcpSegment& seg);

// True when the embedded checksum verifies: the one's-complement sum over
// the full image (checksum included) lands in the zero class
// (0xFFFF, or 0x0000 for the all-zero image).
bool verify_checksum(const TcpSegment& seg);

// Segment with its checksum field recomputed from scratch.
TcpSegment with_checksum(TcpSegment seg);

// Window in bytes: rwnd_field * 2^scale_bits.
int64_t effective_rwnd(const TcpSegment& seg);

// Stamps the scale exponent into the reserved bits and repairs the
// checksum. Throws ScaleOutOfRange for scale > 14.
TcpSegment encode_scale(TcpSegment seg, uint8_t scale);

// Replaces the wire window value and patches the checksum incrementally.
TcpSegment rewrite_rwnd_field(TcpSegment seg, uint16_t new_field);

}  // namespace rwndq
