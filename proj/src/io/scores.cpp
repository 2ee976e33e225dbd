#include "hsprobe/io/scores.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>

#include "hsprobe/error.hpp"
#include "hsprobe/io/binary.hpp"

namespace hsprobe::io {

std::string encode_scores(const std::vector<ScoreRow>& rows) {
    std::string out;
    for (const ScoreRow& r : rows) {
        require(!r.finding_id.empty() && r.finding_id.find_first_of(",\r\n") == std::string::npos,
                ErrorCode::kInvalidArgument, "finding id '" + r.finding_id + "' cannot go in a scores file");
        require(std::isfinite(r.score), ErrorCode::kNonFinite, "score for '" + r.finding_id + "' is not finite");
        out += fmt::format("{},{:.9g}\n", r.finding_id, r.score);
    }
    return out;
}

std::vector<ScoreRow> decode_scores(const std::string& text) {
    std::vector<ScoreRow> rows;
    std::unordered_set<std::string> ids;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::string where = "scores line " + std::to_string(line_no);
        const auto comma = line.rfind(',');
        require(comma != std::string::npos && comma > 0, ErrorCode::kCorrupt, where + " lacks 'id,score'");
        ScoreRow row;
        row.finding_id = line.substr(0, comma);
        const std::string value = line.substr(comma + 1);
        char* end = nullptr;
        errno = 0;
        row.score = std::strtod(value.c_str(), &end);
        require(!value.empty() && end == value.c_str() + value.size() && errno == 0, ErrorCode::kCorrupt,
                where + " has a malformed score '" + value + "'");
        require(std::isfinite(row.score), ErrorCode::kCorrupt, where + " has a non-finite score");
        require(ids.insert(row.finding_id).second, ErrorCode::kCorrupt,
                where + " repeats finding id '" + row.finding_id + "'");
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_scores(const std::filesystem::path& path, const std::vector<ScoreRow>& rows) {
    write_text_file(path, encode_scores(rows));
}

std::vector<ScoreRow> read_scores(const std::filesystem::path& path) { return decode_scores(read_text_file(path)); }

}  // namespace hsprobe::io
