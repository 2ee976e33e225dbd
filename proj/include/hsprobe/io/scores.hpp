#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hsprobe::io {

struct ScoreRow {
    std::string finding_id;
    double score = 0.0;

    friend bool operator==(const ScoreRow&, const ScoreRow&) = default;
};

// One "finding_id,score" line per finding, score with 9 significant digits.
// Ids may not contain commas or line breaks.
std::string encode_scores(const std::vector<ScoreRow>& rows);
// Blank lines are skipped. Throws kCorrupt on a malformed line, a
// non-finite score or a repeated id.
std::vector<ScoreRow> decode_scores(const std::string& text);

void write_scores(const std::filesystem::path& path, const std::vector<ScoreRow>& rows);
std::vector<ScoreRow> read_scores(const std::filesystem::path& path);

}  // namespace hsprobe::io
