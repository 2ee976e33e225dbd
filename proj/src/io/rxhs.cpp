#include "hsprobe/io/rxhs.hpp"

#include <cmath>
#include <limits>

#include "hsprobe/error.hpp"
#include "hsprobe/io/binary.hpp"

namespace hsprobe::io {

namespace {

constexpr std::string_view kMagic = "RXHS";

std::uint32_t checked_u32(std::size_t v, const char* what) {
    require(v <= std::numeric_limits<std::uint32_t>::max(), ErrorCode::kInvalidArgument,
            std::string(what) + " does not fit in 32 bits");
    return static_cast<std::uint32_t>(v);
}

}  // namespace

std::vector<std::uint8_t> encode_rxhs(const HiddenStateFile& file) {
    require(file.dim > 0, ErrorCode::kDimensionMismatch, "RXHS: dim must be positive");
    ByteWriter w;
    w.raw(kMagic);
    w.u32(kRxhsVersion);
    w.u32(file.dim);
    w.u32(file.layer_index);
    w.u32(checked_u32(file.sequences.size(), "finding count"));
    for (const HiddenSeq& hs : file.sequences) {
        require(hs.dim == file.dim, ErrorCode::kDimensionMismatch,
                "RXHS: finding '" + hs.finding_id + "' has width " + std::to_string(hs.dim) +
                    ", file width is " + std::to_string(file.dim));
        hs.validate();
        w.u32(checked_u32(hs.finding_id.size(), "finding id length"));
        w.raw(hs.finding_id);
        w.u32(checked_u32(hs.length(), "token count"));
        w.u8(hs.entropy ? 1 : 0);
        for (float v : hs.values) {
            w.f32(v);
        }
        if (hs.entropy) {
            for (float v : *hs.entropy) {
                w.f32(v);
            }
        }
    }
    return w.bytes();
}

HiddenStateFile decode_rxhs(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    const std::string magic = r.raw(kMagic.size());
    require(magic == kMagic, ErrorCode::kBadMagic, "RXHS: bad magic bytes");
    const std::uint32_t version = r.u32();
    require(version == kRxhsVersion, ErrorCode::kBadVersion,
            "RXHS: unsupported format version " + std::to_string(version));

    HiddenStateFile file;
    file.dim = r.u32();
    file.layer_index = r.u32();
    const std::uint32_t count = r.u32();
    require(file.dim > 0, ErrorCode::kCorrupt, "RXHS: dim is zero");

    for (std::uint32_t i = 0; i < count; ++i) {
        HiddenSeq hs;
        hs.dim = file.dim;
        const std::uint32_t id_len = r.u32();
        hs.finding_id = r.raw(id_len);
        const std::uint32_t length = r.u32();
        require(length > 0, ErrorCode::kCorrupt,
                "RXHS: finding '" + hs.finding_id + "' has zero tokens");
        const std::uint8_t flag = r.u8();
        require(flag <= 1, ErrorCode::kCorrupt, "RXHS: invalid entropy flag");

        // Size check before allocating so a corrupt count cannot balloon memory.
        const std::uint64_t n = static_cast<std::uint64_t>(length) * file.dim;
        require(n * 4 <= r.remaining(), ErrorCode::kTruncated,
                "RXHS: finding '" + hs.finding_id + "' runs past end of data");
        hs.values.resize(static_cast<std::size_t>(n));
        for (float& v : hs.values) {
            v = r.f32();
        }
        if (flag == 1) {
            std::vector<float> ent(length);
            for (float& v : ent) {
                v = r.f32();
            }
            hs.entropy = std::move(ent);
        }
        hs.validate();
        file.sequences.push_back(std::move(hs));
    }
    require(r.remaining() == 0, ErrorCode::kCorrupt,
            "RXHS: " + std::to_string(r.remaining()) + " trailing bytes");
    return file;
}

void write_rxhs(const std::filesystem::path& path, const HiddenStateFile& file) {
    write_file_bytes(path, encode_rxhs(file));
}

HiddenStateFile read_rxhs(const std::filesystem::path& path) {
    return decode_rxhs(read_file_bytes(path));
}

}  // namespace hsprobe::io
