#pragma once

#include "physid/softbody.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace physid {

// A canonical label and the case-insensitive ECMAScript patterns that select it.
struct GrammarLabel {
  std::string canonical;
  std::vector<std::string> patterns;
};

struct AnswerGrammar {
  std::vector<GrammarLabel> labels;
};

// Shipped grammars. T1: yes/no. T2: soft/rigid, matching only the full
// phrases "soft body" / "rigid body". T3: non_static/static.
const AnswerGrammar& interactable_grammar();
const AnswerGrammar& dynamics_grammar();
const AnswerGrammar& region_grammar();

// Canonical label of the earliest pattern hit in raw; on equal start
// positions the longer hit wins, then the earlier-listed label. Throws
// ResponseParseFailure (detail names task and quotes raw) when nothing matches.
std::string parse_classification(std::string_view raw, const AnswerGrammar& grammar, std::string_view task = "");

struct ParsedProperties {
  MaterialProperties properties;
  bool clamped = false;
};

// Five values by property name (case, space and underscore insensitive),
// else the first five numbers in the text. Values are clamped to [0,1].
ParsedProperties parse_properties(std::string_view raw, std::string_view task = "t4");

} // namespace physid
