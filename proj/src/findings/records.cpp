#include "hsprobe/findings/records.hpp"

#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hsprobe/error.hpp"
#include "hsprobe/io/binary.hpp"

namespace hsprobe {

using nlohmann::json;

std::string encode_finding_line(const Finding& f) {
    f.validate();
    json j = json::object();
    j["finding_id"] = f.finding_id;
    j["study_id"] = f.study_id;
    j["subject_id"] = f.subject_id;
    j["text"] = f.text;
    j["token_count"] = f.token_count;
    if (f.label) {
        j["entailment"] = std::string(entailment_name(f.label->entailment));
        j["hallucinated"] = f.label->hallucinated;
    } else {
        j["entailment"] = nullptr;
        j["hallucinated"] = nullptr;
    }
    j["category"] = std::string(category_name(f.category));
    if (f.severity_tier) {
        j["severity_tier"] = *f.severity_tier;
    } else {
        j["severity_tier"] = nullptr;
    }
    return j.dump();
}

namespace {

std::string get_string(const json& j, const char* key, bool required) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        require(!required, ErrorCode::kCorrupt, std::string("findings record lacks '") + key + "'");
        return {};
    }
    require(it->is_string(), ErrorCode::kCorrupt, std::string("'") + key + "' is not a string");
    return it->get<std::string>();
}

}  // namespace

Finding decode_finding_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::kCorrupt, std::string("findings record is not valid JSON: ") + e.what());
    }
    require(j.is_object(), ErrorCode::kCorrupt, "findings record is not an object");
    static const std::set<std::string> known = {"finding_id", "study_id",    "subject_id",
                                                "text",       "token_count", "entailment",
                                                "hallucinated", "category",  "severity_tier"};
    for (const auto& item : j.items()) {
        require(known.count(item.key()) == 1, ErrorCode::kCorrupt,
                "unknown findings field '" + item.key() + "'");
    }

    Finding f;
    f.finding_id = get_string(j, "finding_id", true);
    f.study_id = get_string(j, "study_id", false);
    f.subject_id = get_string(j, "subject_id", false);
    f.text = get_string(j, "text", true);

    if (auto it = j.find("token_count"); it != j.end() && !it->is_null()) {
        require(it->is_number_unsigned(), ErrorCode::kCorrupt, "token_count is not a positive integer");
        f.token_count = it->get<std::size_t>();
    }
    const std::string category = get_string(j, "category", false);
    f.category = category.empty() ? Category::kOther : parse_category(category);

    if (auto it = j.find("severity_tier"); it != j.end() && !it->is_null()) {
        require(it->is_number_integer(), ErrorCode::kCorrupt, "severity_tier is not an integer");
        f.severity_tier = it->get<int>();
    }

    const std::string entailment = get_string(j, "entailment", false);
    const auto hall = j.find("hallucinated");
    const bool has_flag = hall != j.end() && !hall->is_null();
    if (!entailment.empty()) {
        f.label = HallucinationLabel::from(parse_entailment(entailment));
        if (has_flag) {
            require(hall->is_boolean(), ErrorCode::kCorrupt, "hallucinated is not a boolean");
            require(hall->get<bool>() == f.label->hallucinated, ErrorCode::kCorrupt,
                    "finding '" + f.finding_id + "': hallucinated disagrees with entailment");
        }
    } else {
        require(!has_flag, ErrorCode::kCorrupt,
                "finding '" + f.finding_id + "' has a hallucinated flag but no entailment");
    }
    f.validate();
    return f;
}

std::string encode_findings(const std::vector<Finding>& findings) {
    std::string out;
    for (const Finding& f : findings) {
        out += encode_finding_line(f);
        out += '\n';
    }
    return out;
}

std::vector<Finding> decode_findings(const std::string& text) {
    std::vector<Finding> out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            out.push_back(decode_finding_line(line));
        } catch (const Error& e) {
            fail(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_findings(const std::filesystem::path& path, const std::vector<Finding>& findings) {
    io::write_text_file(path, encode_findings(findings));
}

std::vector<Finding> read_findings(const std::filesystem::path& path) {
    return decode_findings(io::read_text_file(path));
}

void check_findings_consistent(const std::vector<Finding>& findings) {
    std::map<std::string, std::string> study_subject;
    std::set<std::string> ids;
    for (const Finding& f : findings) {
        require(ids.insert(f.finding_id).second, ErrorCode::kInvalidArgument,
                "duplicate finding id '" + f.finding_id + "'");
        if (f.study_id.empty()) {
            continue;
        }
        const auto [it, inserted] = study_subject.emplace(f.study_id, f.subject_id);
        require(inserted || it->second == f.subject_id, ErrorCode::kInvalidArgument,
                "study '" + f.study_id + "' belongs to more than one subject");
    }
}

}  // namespace hsprobe
