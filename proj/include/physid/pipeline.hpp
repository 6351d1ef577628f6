#pragma once

#include "physid/clients.hpp"
#include "physid/prompts.hpp"
#include "physid/session.hpp"

#include <array>
#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace physid {

enum class Dynamics { None, Soft, Rigid };
std::string_view to_string(Dynamics d); // none, soft, rigid

struct RegionLabel {
  std::string id;
  std::array<int, 4> bbox{}; // x, y, width, height in image pixels
  bool is_static = false;
};

struct PipelineResult {
  std::string image_id;
  int image_width = 0;
  int image_height = 0;
  bool interactable = false;
  std::optional<double> interactable_confidence;
  Dynamics dynamics = Dynamics::None;
  std::optional<MaterialProperties> properties; // soft only
  bool properties_clamped = false;
  std::vector<RegionLabel> static_flags; // soft only
  std::string mesh_path;
  std::optional<TriMesh> mesh; // not serialized
  std::map<std::string, double> timings_ms;
  PromptStrategy strategy = PromptStrategy::ZeroShot;

  // Key-sorted JSON; timings are left out of the comparison form.
  [[nodiscard]] nlohmann::json to_json(bool include_timings = true) const;
};

struct PipelineOptions {
  PromptStrategy strategy = PromptStrategy::ZeroShot;
  std::filesystem::path prompt_dir = default_prompt_dir();
  // Slot text for the templates; see load_prompt_slots.
  std::filesystem::path context_file;
  // The generated mesh is written to <mesh_dir>/<image id>.obj; empty keeps it in memory only.
  std::filesystem::path mesh_dir;
  std::chrono::milliseconds stage_timeout{std::chrono::seconds(120)};
  // Per-stage overrides keyed t1, t2, t3, t4, segment, mesh.
  std::map<std::string, std::chrono::milliseconds> stage_timeouts;
};

// T1 → T2 → {T4, segment → T3}, with mesh generation alongside everything
// after T1. A "no" from T1 ends the run before any other client call.
PipelineResult run_pipeline(const std::filesystem::path& image, const std::shared_ptr<ExternalClient>& client,
                            const PipelineOptions& options = {});
PipelineResult run_pipeline(const std::string& image_bytes, const std::string& image_id,
                            const std::shared_ptr<ExternalClient>& client, const PipelineOptions& options = {});

// Soft: material from the result, regions labeled static become a mask in
// image space seen through default_camera(mesh, image size). Rigid: hinge
// at the lowest band with the default constraint. Throws InconsistentResult
// for a non-interactable result.
SimulationSession configure_simulation(const PipelineResult& result, const TriMesh& mesh,
                                       const SoftBodyConfig& soft = {});

} // namespace physid
