#include "physid/session.hpp"

#include "physid/codec.hpp"
#include "physid/errors.hpp"
#include "physid/primitives.hpp"

#include <fstream>

namespace physid {
namespace {

Vec3 vec3_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw Error(Errc::InvalidParameter, std::string(what) + " must be [x,y,z]");
  Vec3 v(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  if (!v.allFinite()) throw Error(Errc::NonFiniteInput, std::string(what) + " must be finite");
  return v;
}

ScriptedEvent event_from_json(const nlohmann::json& e, const std::filesystem::path& base_dir) {
  const auto resolve = [&](const std::string& name) {
    const std::filesystem::path p(name);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };
  ScriptedEvent out;
  const auto frame = e.at("frame").get<std::int64_t>();
  if (frame < 0) throw Error(Errc::InvalidParameter, "event frame must be non-negative");
  out.frame = static_cast<std::uint64_t>(frame);
  const auto type = e.at("type").get<std::string>();
  if (type == "impulse") {
    ImpulseEvent ev;
    if (e.contains("node")) {
      ev.target = e.at("node").get<std::size_t>();
    } else {
      ev.target = vec3_from_json(e.at("point"), "point");
    }
    ev.impulse = vec3_from_json(e.at("impulse"), "impulse");
    ev.radius = e.value("radius", 0.0);
    if (!(ev.radius >= 0.0)) throw Error(Errc::InvalidParameter, "impulse radius must be >= 0");
    out.event = ev;
  } else if (type == "set_material") {
    out.event = material_from_json(e.at("material"));
  } else if (type == "set_mask") {
    MaskUpdate mask{load_image(resolve(e.at("png").get<std::string>())), std::nullopt};
    if (e.contains("camera")) {
      mask.camera = camera_from_json(nlohmann::json::parse(read_file(resolve(e.at("camera").get<std::string>()))));
    }
    out.event = std::move(mask);
  } else {
    throw Error(Errc::InvalidParameter, "unknown event type '" + type + "'");
  }
  return out;
}

} // namespace

EventScript parse_event_script(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  const nlohmann::json& list = j.is_object() ? j.at("events") : j;
  if (!list.is_array()) throw Error(Errc::InvalidParameter, "event script must be an array of events");
  EventScript script;
  try {
    for (const auto& e : list) script.push_back(event_from_json(e, base_dir));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidParameter, std::string("event script: ") + e.what());
  }
  for (std::size_t i = 1; i < script.size(); ++i) {
    if (script[i].frame < script[i - 1].frame) throw Error(Errc::InvalidParameter, "event frames must be non-decreasing");
  }
  return script;
}

EventScript load_event_script(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::InvalidParameter, path.string() + ": " + e.what());
  }
  return parse_event_script(j, path.parent_path());
}

SimulationSession::SimulationSession(std::unique_ptr<Body> body, const Camera& camera, std::uint64_t id)
    : id_(id), body_(std::move(body)), camera_(camera) {
  if (!body_) throw Error(Errc::InvalidParameter, "session needs a body");
}

void SimulationSession::enqueue(SessionEvent event) { queue_.push_back(std::move(event)); }

void SimulationSession::apply(const SessionEvent& event) {
  if (const auto* impulse = std::get_if<ImpulseEvent>(&event)) {
    body_->queue_impulse(*impulse);
  } else if (const auto* material = std::get_if<MaterialProperties>(&event)) {
    body_->set_material(*material);
  } else {
    const auto& update = std::get<MaskUpdate>(event);
    auto* soft = dynamic_cast<SoftBody*>(body_.get());
    if (!soft) throw Error(Errc::InvalidParameter, "static masks apply to soft bodies only");
    soft->apply_mask(make_static_mask(update.image, update.camera.value_or(camera_)));
  }
}

void SimulationSession::apply_pending() {
  while (!queue_.empty()) {
    SessionEvent event = std::move(queue_.front());
    queue_.pop_front();
    apply(event);
    if (recording_) recorded_.push_back({frame_ + 1, std::move(event)});
  }
}

void SimulationSession::step_frame(double frame_dt, int substeps) {
  apply_pending();
  body_->advance_frame(frame_dt, substeps);
  ++frame_;
}

TriMesh load_mesh_source(std::string_view source) {
  if (source.find('\n') != std::string_view::npos) return parse_obj(source);
  if (auto mesh = primitives::by_name(source)) return std::move(*mesh);
  return load_obj(std::filesystem::path(std::string(source)));
}

std::unique_ptr<Body> make_body(BodyKind kind, TriMesh mesh, const MaterialProperties& material,
                                const SoftBodyConfig& soft, const ConstraintConfig& rigid) {
  if (kind == BodyKind::Soft) return std::make_unique<SoftBody>(std::move(mesh), material, soft);
  return std::make_unique<RigidBody>(std::move(mesh), rigid);
}

void run_batch(const BatchOptions& options, std::ostream& out) {
  if (!(options.frame_dt > 0.0) || options.substeps < 1) {
    throw Error(Errc::InvalidParameter, "dt must be positive and substeps >= 1");
  }
  TriMesh mesh = load_mesh_source(options.mesh);
  const Camera camera = options.camera.value_or(default_camera(mesh, 640, 480));
  SimulationSession session(make_body(options.body, std::move(mesh), options.material, options.soft, options.rigid),
                            camera);
  if (options.mask) {
    session.enqueue(*options.mask);
  }
  auto next = options.script.begin();
  while (next != options.script.end() && next->frame == 0) session.enqueue((next++)->event);
  session.apply_pending();

  write_trajectory_header(out);
  write_trajectory_rows(out, 0, session.body().node_states());
  for (std::uint64_t f = 1; f <= options.steps; ++f) {
    while (next != options.script.end() && next->frame <= f) session.enqueue((next++)->event);
    session.step_frame(options.frame_dt, options.substeps);
    write_trajectory_rows(out, f, session.body().node_states());
  }
}

void run_batch(const BatchOptions& options, const std::filesystem::path& out) {
  std::ofstream file(out, std::ios::binary);
  if (!file) throw Error(Errc::FileNotFound, "cannot write " + out.string());
  run_batch(options, file);
  file.flush();
  if (!file) throw Error(Errc::FileNotFound, "write failed for " + out.string());
}

} // namespace physid
