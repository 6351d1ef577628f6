#pragma once

#include "physid/parse.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace physid {

enum class PromptStrategy { ZeroShot, FewShot, CoT, FewShotCoT };

std::string_view to_string(PromptStrategy s); // zero_shot, few_shot, cot, few_shot_cot
PromptStrategy prompt_strategy_from_string(std::string_view name);

// Classifier tasks of the pipeline.
enum class Task { T1, T2, T3, T4 };
std::string_view to_string(Task t); // t1..t4

// Text filling the template slots. Captions stand in for images that a
// single-image model cannot receive.
struct PromptSlots {
  std::string caption;
  std::string examples;
  std::string rationales;
};

// Reads {"default": {...slots}, "<image id>": {...slots}}; per-image
// entries override the defaults field by field. Missing file → empty slots.
PromptSlots load_prompt_slots(const std::filesystem::path& context_file, std::string_view image_id);

struct PromptTemplate {
  PromptStrategy strategy = PromptStrategy::ZeroShot;
  Task task = Task::T1;
  std::string text; // with {{caption}}, {{examples}}, {{rationales}}
  // Classification grammar for T1–T3; T4 answers go through parse_properties.
  std::optional<AnswerGrammar> grammar;

  [[nodiscard]] std::string render(const PromptSlots& slots) const;
};

std::filesystem::path default_prompt_dir();

// Loads <dir>/<strategy>/<task>.txt. Throws FileNotFound.
PromptTemplate load_prompt_template(const std::filesystem::path& dir, PromptStrategy strategy, Task task);

} // namespace physid
