#include "rwndq/packet.hpp"

#include <string>

#include "rwndq/errors.hpp"

namespace rwndq {

namespace {

void put16(std::array<uint8_t, kHeaderBytes>& buf, int off, uint16_t v) {
    buf[off] = static_cast<uint8_t>(v >> 8);
    buf[off + 1] = static_cast<uint8_t>(v & 0xFF);
}

void put32(std::array<uint8_t, kHeaderBytes>& buf, int off, uint32_t v) {
    put16(buf, off, static_cast<uint16_t>(v >> 16));
    put16(buf, off + 2, static_cast<uint16_t>(v & 0xFFFF));
}

}  // namespace

std::array<uint8_t, kHeaderBytes> serialize_header(const TcpSegment& seg) {
    std::array<uint8_t, kHeaderBytes> buf{};
    put16(buf, 0, seg.flow.src);
    put16(buf, 2, seg.flow.dst);
    put16(buf, 4, seg.flow.sport);
    put16(buf, 6, seg.flow.dport);
    put32(buf, 8, static_cast<uint32_t>(seg.seq & 0xFFFFFFFFu));
    put16(buf, 12, seg.payload_len);
    buf[14] = seg.header_len;
    buf[15] = static_cast<uint8_t>((seg.flags & 0xF) << 4 | (seg.scale_bits & 0xF));
    put16(buf, 16, seg.rwnd_field);
    put16(buf, 18, seg.checksum);
    return buf;
}

uint16_t full_checksum(const TcpSegment& seg) {
    TcpSegment zeroed = seg;
    zeroed.checksum = 0;
    auto image = serialize_header(zeroed);
    return static_cast<uint16_t>(~ones_complement_sum(image));
}

bool verify_checksum(const TcpSegment& seg) {
    auto image = serialize_header(seg);
    uint16_t total = ones_complement_sum(image);
    return total == 0xFFFF || total == 0x0000;
}

TcpSegment with_checksum(TcpSegment seg) {
    seg.checksum = full_checksum(seg);
    return seg;
}

int64_t effective_rwnd(const TcpSegment& seg) {
    return static_cast<int64_t>(seg.rwnd_field) << seg.scale_bits;
}

TcpSegment encode_scale(TcpSegment seg, uint8_t scale) {
    if (scale > kMaxWindowScale) {
        throw ScaleOutOfRange("window scale " + std::to_string(scale) + " exceeds 14");
    }
    uint16_t old_word = static_cast<uint16_t>(
        static_cast<uint16_t>(seg.header_len) << 8 |
        (seg.flags & 0xF) << 4 | (seg.scale_bits & 0xF));
    seg.scale_bits = scale;
    uint16_t new_word = static_cast<uint16_t>(
        static_cast<uint16_t>(seg.header_len) << 8 |
        (seg.flags & 0xF) << 4 | (seg.scale_bits & 0xF));
    seg.checksum = incremental_checksum_update(seg.checksum, old_word, new_word);
    return seg;
}

TcpSegment rewrite_rwnd_field(TcpSegment seg, uint16_t new_field) {
    seg.checksum = incremental_checksum_update(seg.checksum, seg.rwnd_field, new_field);
    seg.rwnd_field = new_field;
    return seg;
}

}  // namespace rwndq
