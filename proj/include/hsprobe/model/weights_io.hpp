#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hsprobe/model/scorer.hpp"

namespace hsprobe {

// Weights persist as a text manifest (config, seed, creation metadata and a
// byte offset + shape per parameter) next to a flat blob of binary32
// little-endian values in manifest order. The blob path is stored relative
// to the manifest.
struct WeightMetadata {
    std::uint64_t seed = 0;
    std::map<std::string, std::string> extra;  // written as meta.<key>

    friend bool operator==(const WeightMetadata&, const WeightMetadata&) = default;
};

struct LoadedWeights {
    ScorerWeights weights;
    WeightMetadata metadata;
};

inline constexpr int kWeightFormatVersion = 1;

std::string encode_manifest(const ScorerWeights& w, const WeightMetadata& meta,
                            const std::string& blob_name);
std::vector<std::uint8_t> encode_blob(const ScorerWeights& w);

// Writes <manifest> and <manifest stem>.bin beside it.
void save_weights(const std::filesystem::path& manifest, const ScorerWeights& w,
                  const WeightMetadata& meta);

// Throws kIo, kBadMagic, kBadVersion, kCorrupt, kTruncated, kConfig or
// kNonFinite.
LoadedWeights load_weights(const std::filesystem::path& manifest);

}  // namespace hsprobe
