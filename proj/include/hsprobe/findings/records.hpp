#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hsprobe/findings/finding.hpp"

namespace hsprobe {

// Findings file: one JSON object per line with keys finding_id, study_id,
// subject_id, text, token_count, entailment, hallucinated, category and
// severity_tier. Absent values are written as null.
std::string encode_finding_line(const Finding& f);
Finding decode_finding_line(const std::string& line);

std::string encode_findings(const std::vector<Finding>& findings);
std::vector<Finding> decode_findings(const std::string& text);

void write_findings(const std::filesystem::path& path, const std::vector<Finding>& findings);
std::vector<Finding> read_findings(const std::filesystem::path& path);

// Throws kInvalidArgument if a study id maps to more than one subject or a
// finding id repeats.
void check_findings_consistent(const std::vector<Finding>& findings);

}  // namespace hsprobe
