#include "physid/prompts.hpp"

#include "physid/codec.hpp"
#include "physid/errors.hpp"

#include <cstdlib>

namespace physid {
namespace {

void replace_all(std::string& text, std::string_view slot, std::string_view value) {
  for (std::size_t pos = text.find(slot); pos != std::string::npos; pos = text.find(slot, pos + value.size())) {
    text.replace(pos, slot.size(), value);
  }
}

void merge_slots(PromptSlots& slots, const nlohmann::json& j) {
  if (!j.is_object()) return;
  if (j.contains("caption")) slots.caption = j.at("caption").get<std::string>();
  if (j.contains("examples")) slots.examples = j.at("examples").get<std::string>();
  if (j.contains("rationales")) slots.rationales = j.at("rationales").get<std::string>();
}

} // namespace

std::string_view to_string(PromptStrategy s) {
  switch (s) {
  case PromptStrategy::ZeroShot: return "zero_shot";
  case PromptStrategy::FewShot: return "few_shot";
  case PromptStrategy::CoT: return "cot";
  case PromptStrategy::FewShotCoT: return "few_shot_cot";
  }
  return "zero_shot";
}

PromptStrategy prompt_strategy_from_string(std::string_view name) {
  for (auto s : {PromptStrategy::ZeroShot, PromptStrategy::FewShot, PromptStrategy::CoT, PromptStrategy::FewShotCoT}) {
    if (to_string(s) == name) return s;
  }
  throw Error(Errc::InvalidParameter, "unknown prompt strategy '" + std::string(name) + "'");
}

std::string_view to_string(Task t) {
  switch (t) {
  case Task::T1: return "t1";
  case Task::T2: return "t2";
  case Task::T3: return "t3";
  case Task::T4: return "t4";
  }
  return "t1";
}

PromptSlots load_prompt_slots(const std::filesystem::path& context_file, std::string_view image_id) {
  PromptSlots slots;
  if (context_file.empty() || !std::filesystem::exists(context_file)) return slots;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(context_file));
    if (j.contains("default")) merge_slots(slots, j.at("default"));
    if (const auto it = j.find(std::string(image_id)); it != j.end()) merge_slots(slots, *it);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidParameter, context_file.string() + ": " + e.what());
  }
  return slots;
}

std::string PromptTemplate::render(const PromptSlots& slots) const {
  std::string out = text;
  replace_all(out, "{{caption}}", slots.caption);
  replace_all(out, "{{examples}}", slots.examples);
  replace_all(out, "{{rationales}}", slots.rationales);
  return out;
}

std::filesystem::path default_prompt_dir() {
  if (const char* env = std::getenv("PHYSID_PROMPT_DIR"); env && *env) return env;
  return PHYSID_PROMPT_DIR;
}

PromptTemplate load_prompt_template(const std::filesystem::path& dir, PromptStrategy strategy, Task task) {
  PromptTemplate t;
  t.strategy = strategy;
  t.task = task;
  t.text = read_file(dir / std::string(to_string(strategy)) / (std::string(to_string(task)) + ".txt"));
  switch (task) {
  case Task::T1: t.grammar = interactable_grammar(); break;
  case Task::T2: t.grammar = dynamics_grammar(); break;
  case Task::T3: t.grammar = region_grammar(); break;
  case Task::T4: break;
  }
  return t;
}

} // namespace physid
