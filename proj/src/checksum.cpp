#include "rwndq/checksum.hpp"

namespace rwndq {

uint16_t ones_complement_sum(std::span<const uint8_t> data) {
    uint64_t sum = 0;
    size_t i = 0;
    for (; i + 1 < data.size(); i += 2) {
        sum += static_cast<uint32_t>(data[i]) << 8 | data[i + 1];
    }
    if (i < data.size()) {
        sum += static_cast<uint32_t>(data[i]) << 8;
    }
    while (sum >> 16) {
        sum = (sum & 0xFFFF) + (sum >> 16);
    }
    return static_cast<uint16_t>(sum);
}

uint16_t incremental_checksum_update(uint16_t csum, uint16_t old_word, uint16_t new_word) {
    if (old_word == new_word) {
        return csum;
    }
    uint32_t sum = static_cast<uint16_t>(~csum);
    sum += static_cast<uint16_t>(~old_word);
    sum += new_word;
    sum = (sum & 0xFFFF) + (sum >> 16);
    sum = (sum & 0xFFFF) + (sum >> 16);
    return static_cast<uint16_t>(~sum);
}

}  // namespace rwndq
