#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hsprobe {

// Splits a report into atomic claims. Sentences end at '.', '!' or '?'
// followed by whitespace or end of text. A sentence that opens with a
// negation head ("no", "no evidence of", "there is no", ...) followed by a
// comma/conjunction list expands into one claim per listed entity, each with
// the head copied in front and any shared trailing predicate ("is seen",
// "are present", ...) copied behind. Other sentences are kept whole. Terminal
// punctuation is dropped; blank input yields an empty list.
std::vector<std::string> segment_report(std::string_view report_text);

// The entity list a negated sentence is split into, without head or
// predicate. Empty when the sentence has no negation head.
std::vector<std::string> negated_entities(std::string_view sentence);

// Sentence splitting only.
std::vector<std::string> split_sentences(std::string_view text);

}  // namespace hsprobe
