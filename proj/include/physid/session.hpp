#pragma once

#include "physid/body.hpp"
#include "physid/camera.hpp"

#include <json.hpp>

#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace physid {

// Mask image plus an optional camera; the session camera is used when absent.
struct MaskUpdate {
  Image image;
  std::optional<Camera> camera;
};

using SessionEvent = std::variant<ImpulseEvent, MaterialProperties, MaskUpdate>;

struct ScriptedEvent {
  std::uint64_t frame = 0;
  SessionEvent event;
};

// Ordered (frame, event) list with non-decreasing frames.
using EventScript = std::vector<ScriptedEvent>;

// {"events":[...]} or a bare array. Entries:
//   {"frame":f,"type":"impulse","node":i | "point":[x,y,z],"impulse":[x,y,z],"radius":r}
//   {"frame":f,"type":"set_material","material":{five keys}}
//   {"frame":f,"type":"set_mask","png":"file","camera":"file"}
// Relative file names resolve against base_dir.
EventScript parse_event_script(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
EventScript load_event_script(const std::filesystem::path& path);

// One body stepped in whole frames. Events queue until the next frame
// boundary and are applied in arrival order before that frame's step.
class SimulationSession {
public:
  SimulationSession(std::unique_ptr<Body> body, const Camera& camera, std::uint64_t id = 0);

  [[nodiscard]] std::uint64_t id() const { return id_; }
  [[nodiscard]] BodyKind kind() const { return body_->kind(); }
  [[nodiscard]] const Body& body() const { return *body_; }
  [[nodiscard]] const Camera& camera() const { return camera_; }
  // Number of completed steps; frame 0 is the initial state.
  [[nodiscard]] std::uint64_t frame() const { return frame_; }
  [[nodiscard]] std::size_t pending_events() const { return queue_.size(); }

  void enqueue(SessionEvent event);
  // Applies queued events without stepping.
  void apply_pending();
  void step_frame(double frame_dt = kFrameDt, int substeps = kSubsteps);

  // While recording, applied events are kept with the frame they landed in.
  void set_recording(bool on) { recording_ = on; }
  [[nodiscard]] const EventScript& recorded() const { return recorded_; }

private:
  void apply(const SessionEvent& event);

  std::uint64_t id_;
  std::unique_ptr<Body> body_;
  Camera camera_;
  std::uint64_t frame_ = 0;
  std::deque<SessionEvent> queue_;
  bool recording_ = false;
  EventScript recorded_;
};

// A primitive name (cloth, flag, cube, sphere, cylinder, plant), an OBJ
// path, or inline OBJ text (anything containing a newline).
TriMesh load_mesh_source(std::string_view source);

std::unique_ptr<Body> make_body(BodyKind kind, TriMesh mesh, const MaterialProperties& material,
                                const SoftBodyConfig& soft = {}, const ConstraintConfig& rigid = {});

struct BatchOptions {
  std::string mesh; // see load_mesh_source
  BodyKind body = BodyKind::Soft;
  MaterialProperties material;
  std::optional<MaskUpdate> mask;
  std::optional<Camera> camera;
  EventScript script;
  std::uint64_t steps = 0;
  double frame_dt = kFrameDt;
  int substeps = kSubsteps;
  SoftBodyConfig soft;
  ConstraintConfig rigid;
};

// Writes frames 0..steps as CSV (see write_trajectory_rows). Script events
// for frame f are applied before the step that produces frame f; events at
// frame 0 go in before the first step.
void run_batch(const BatchOptions& options, std::ostream& out);
void run_batch(const BatchOptions& options, const std::filesystem::path& out);

} // namespace physid
