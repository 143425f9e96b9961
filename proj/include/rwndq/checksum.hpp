#pragma once

#include <cstdint>
#include <span>

namespace rwndq {

// One's-complement arithmetic over 16-bit words, RFC 1071 style.
// Words are read big-endian; an odd trailing byte is padded with zero.

// Folded one's-complement sum of a byte image. Zero only for an all-zero
// image; otherwise the unique representative in [1, 0xFFFF].
uint16_t ones_complement_sum(std::span<const uint8_t> data);

// Checksum of an image after swapping one 16-bit word: one's-complement
// add of the new word and subtract (add of complement) of the old one,
// with end-around carry. The unchanged-word case returns the input
// checksum untouched, which keeps the degenerate all-zero image on its
// canonical 0xFFFF form.
uint16_t incremental_checksum_update(uint16_t csum, uint16_t old_word, uint16_t new_word);

}  // namespace rwndq
