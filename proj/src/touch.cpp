#include "physid/touch.hpp"

#include "physid/errors.hpp"

#include <algorithm>

namespace physid {

PointerPhase pointer_phase_from_string(std::string_view name) {
  if (name == "down") return PointerPhase::Down;
  if (name == "move") return PointerPhase::Move;
  if (name == "up") return PointerPhase::Up;
  throw Error(Errc::MalformedMessage, "unknown pointer phase '" + std::string(name) + "'");
}

std::optional<Vec3> pick_surface(double px, double py, const Camera& camera, const TriMesh& mesh,
                                 std::span<const NodeState> states) {
  const Ray ray = camera.pixel_ray(px, py);
  std::optional<double> best;
  for (const Face& f : mesh.faces()) {
    const auto t = intersect_triangle(ray, states[f[0]].position, states[f[1]].position, states[f[2]].position);
    if (t && (!best || *t < *best)) best = t;
  }
  if (!best) return std::nullopt;
  return Vec3(ray.origin + *best * ray.direction);
}

std::optional<ImpulseEvent> touch_to_impulse(const PointerInput& pointer, std::optional<Eigen::Vector2d> previous,
                                             const Camera& camera, const TriMesh& mesh,
                                             std::span<const NodeState> states, const TouchConfig& config) {
  if (pointer.phase == PointerPhase::Up) return std::nullopt;
  const double strength = std::clamp(pointer.strength, 0.0, 1.0);
  if (!(strength > 0.0)) return std::nullopt;

  // Integer pixels address pixel centers.
  const double px = pointer.x + 0.5;
  const double py = pointer.y + 0.5;
  const auto contact = pick_surface(px, py, camera, mesh, states);
  if (!contact) return std::nullopt;

  Vec3 direction = camera.pixel_ray(px, py).direction;
  if (previous) {
    const Eigen::Vector2d motion = Eigen::Vector2d(pointer.x, pointer.y) - *previous;
    if (motion.squaredNorm() > 0.0) direction = camera.screen_direction(motion.x(), motion.y());
  }
  ImpulseEvent event;
  event.target = *contact;
  event.impulse = strength * config.max_impulse * direction;
  event.radius = config.radius;
  return event;
}

std::optional<ImpulseEvent> PointerTracker::handle(const PointerInput& pointer, const Camera& camera,
                                                   const TriMesh& mesh, std::span<const NodeState> states,
                                                   const TouchConfig& config) {
  if (pointer.phase == PointerPhase::Down) last_.reset();
  auto event = touch_to_impulse(pointer, last_, camera, mesh, states, config);
  if (pointer.phase == PointerPhase::Up) {
    last_.reset();
  } else {
    last_ = Eigen::Vector2d(pointer.x, pointer.y);
  }
  return event;
}

} // namespace physid
