#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hsprobe/hidden_seq.hpp"

namespace hsprobe::io {

// Hidden-state container, little-endian:
//   "RXHS" | version u32 | d u32 | layer u32 | count u32
//   per finding: id_len u32 | id bytes | T u32 | has_entropy u8 |
//                T*d f32 row-major | (T f32 entropy if has_entropy)
inline constexpr std::uint32_t kRxhsVersion = 1;

struct HiddenStateFile {
    std::uint32_t dim = 0;
    std::uint32_t layer_index = 16;
    std::vector<HiddenSeq> sequences;

    friend bool operator==(const HiddenStateFile&, const HiddenStateFile&) = default;
};

std::vector<std::uint8_t> encode_rxhs(const HiddenStateFile& file);

// Throws kTruncated, kBadMagic, kBadVersion, kCorrupt, kDimensionMismatch or
// kNonFinite; never reads out of bounds.
HiddenStateFile decode_rxhs(std::span<const std::uint8_t> bytes);

void write_rxhs(const std::filesystem::path& path, const HiddenStateFile& file);
HiddenStateFile read_rxhs(const std::filesystem::path& path);

}  // namespace hsprobe::io
