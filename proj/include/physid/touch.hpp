#pragma once

#include "physid/camera.hpp"
#include "physid/dynamics.hpp"

#include <optional>
#include <span>
#include <string_view>

namespace physid {

enum class PointerPhase { Down, Move, Up };
PointerPhase pointer_phase_from_string(std::string_view name); // down, move, up

struct PointerInput {
  PointerPhase phase = PointerPhase::Down;
  double x = 0.0; // viewport pixels, top-left origin
  double y = 0.0;
  double strength = 1.0; // [0,1]
};

struct TouchConfig {
  double max_impulse = 0.5; // N·s at strength 1
  double radius = 0.1;      // m
};

// Nearest intersection of the pixel's ray with the current surface, as a
// world point, or nullopt on a miss.
std::optional<Vec3> pick_surface(double px, double py, const Camera& camera, const TriMesh& mesh,
                                 std::span<const NodeState> states);

// Impulse of strength * max_impulse at the picked point. The direction is
// the screen motion since `previous` carried into world space, or the view
// ray when there is no motion. Up phases, misses and zero strength yield
// nothing.
std::optional<ImpulseEvent> touch_to_impulse(const PointerInput& pointer, std::optional<Eigen::Vector2d> previous,
                                             const Camera& camera, const TriMesh& mesh,
                                             std::span<const NodeState> states, const TouchConfig& config = {});

// Remembers the last pointer position of the current gesture.
class PointerTracker {
public:
  std::optional<ImpulseEvent> handle(const PointerInput& pointer, const Camera& camera, const TriMesh& mesh,
                                     std::span<const NodeState> states, const TouchConfig& config = {});

private:
  std::optional<Eigen::Vector2d> last_;
};

} // namespace physid
