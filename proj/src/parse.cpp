#include "physid/parse.hpp"

#include "physid/errors.hpp"

#include <algorithm>
#include <cstdlib>
#include <cmath>
#include <optional>
#include <regex>

namespace physid {
namespace {

constexpr const char* kNumber = R"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)";

[[noreturn]] void parse_failure(std::string_view task, std::string_view what, std::string_view raw) {
  std::string detail(task.empty() ? "response" : task);
  detail += ": ";
  detail += what;
  detail += "; raw response: \"";
  detail += raw;
  detail += '"';
  throw Error(Errc::ResponseParseFailure, detail);
}

// "linear_stiffness" -> linear[\s_]*stiffness
std::string key_pattern(std::string_view key) {
  std::string out;
  for (char c : key) out += c == '_' ? std::string(R"([\s_]*)") : std::string(1, c);
  return out;
}

} // namespace

const AnswerGrammar& interactable_grammar() {
  static const AnswerGrammar g{{{"yes", {R"(\byes\b)"}}, {"no", {R"(\bno\b)"}}}};
  return g;
}

const AnswerGrammar& dynamics_grammar() {
  static const AnswerGrammar g{{{"soft", {R"(\bsoft[\s-]+body\b)"}}, {"rigid", {R"(\brigid[\s-]+body\b)"}}}};
  return g;
}

const AnswerGrammar& region_grammar() {
  static const AnswerGrammar g{{{"non_static", {R"(\bnon[\s_-]?static\b)"}}, {"static", {R"(\bstatic\b)"}}}};
  return g;
}

std::string parse_classification(std::string_view raw, const AnswerGrammar& grammar, std::string_view task) {
  const std::string text(raw);
  struct Hit {
    std::ptrdiff_t pos;
    std::ptrdiff_t len;
    std::size_t label;
  };
  std::optional<Hit> best;
  for (std::size_t li = 0; li < grammar.labels.size(); ++li) {
    for (const auto& pattern : grammar.labels[li].patterns) {
      const std::regex re(pattern, std::regex::ECMAScript | std::regex::icase);
      std::smatch m;
      if (!std::regex_search(text, m, re)) continue;
      const Hit hit{m.position(0), m.length(0), li};
      if (!best || hit.pos < best->pos || (hit.pos == best->pos && hit.len > best->len)) best = hit;
    }
  }
  if (!best) parse_failure(task, "no label of the answer grammar found", raw);
  return grammar.labels[best->label].canonical;
}

ParsedProperties parse_properties(std::string_view raw, std::string_view task) {
  const std::string text(raw);
  std::array<double, 5> values{};
  bool by_key = true;
  for (std::size_t k = 0; k < 5 && by_key; ++k) {
    const std::regex re(key_pattern(MaterialProperties::kKeys[k]) + R"([\s"':=]*()" + kNumber + ")",
                        std::regex::ECMAScript | std::regex::icase);
    std::smatch m;
    if (std::regex_search(text, m, re)) {
      values[k] = std::strtod(m[1].str().c_str(), nullptr);
    } else {
      by_key = false;
    }
  }
  if (!by_key) {
    const std::regex number(kNumber);
    std::size_t n = 0;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), number); it != std::sregex_iterator() && n < 5;
         ++it) {
      values[n++] = std::strtod(it->str().c_str(), nullptr);
    }
    if (n < 5) parse_failure(task, "expected five numbers, found " + std::to_string(n), raw);
  }

  ParsedProperties out;
  for (double& v : values) {
    if (!std::isfinite(v)) parse_failure(task, "non-finite property value", raw);
    const double c = std::clamp(v, 0.0, 1.0);
    out.clamped = out.clamped || c != v;
    v = c;
  }
  out.properties = MaterialProperties::from_array(values);
  return out;
}

} // namespace physid
